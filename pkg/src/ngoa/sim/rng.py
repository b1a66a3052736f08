"""Hierarchical named random-number streams.

A stream is identified by ``(root_seed, path)``. The path is hashed with
SHA-256 together with the root seed; the first 128 bits of the digest seed a
numpy PCG64 bit generator. Only raw uniform doubles are taken from numpy
(their bit pattern is stable across numpy releases and platforms); every
other variate is produced here by inversion so the whole sequence is fixed by
this module alone.
"""
from __future__ import annotations

import hashlib
import math
from statistics import NormalDist
from typing import Iterable, Union

import numpy as np

_STD_NORMAL = NormalDist()
_BLOCK = 256

Path = Union[str, Iterable[str]]


def _norm_path(path: Path) -> str:
    if isinstance(path, str):
        parts = [p for p in path.split("/") if p]
    else:
        parts = [str(p) for p in path]
    return "/".join(parts)


def stream_seed(root_seed: int, path: Path) -> int:
    digest = hashlib.sha256(f"{int(root_seed)}\x1f{_norm_path(path)}".encode()).digest()
    return int.from_bytes(digest[:16], "little")


class RngStream:
    """Reproducible variate source for one named sub-stream."""

    def __init__(self, root_seed: int, path: Path):
        self.root_seed = int(root_seed)
        self.path = _norm_path(path)
        self._gen = np.random.Generator(np.random.PCG64(stream_seed(self.root_seed, self.path)))
        self._buf: list[float] = []
        self._pos = 0

    def __repr__(self):
        return f"RngStream({self.root_seed}, {self.path!r})"

    def child(self, label: str) -> "RngStream":
        return RngStream(self.root_seed, f"{self.path}/{label}")

    def uniform(self) -> float:
        """Uniform on [0, 1)."""
        if self._pos >= len(self._buf):
            self._buf = self._gen.random(_BLOCK).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u

    def uniforms(self, n: int) -> list[float]:
        return [self.uniform() for _ in range(n)]

    def exponential(self, mean: float) -> float:
        return -mean * math.log1p(-self.uniform())

    def normal(self) -> float:
        u = self.uniform()
        # inv_cdf is undefined at 0
        while u == 0.0:
            u = self.uniform()
        return _STD_NORMAL.inv_cdf(u)

    def lognormal(self, mean: float, sigma: float, upper: float = math.inf) -> float:
        """Lognormal with the given arithmetic mean and log-sd, truncated above.

        Truncation is exact (inversion restricted to the CDF mass below
        `upper`), not clipping.
        """
        if sigma == 0.0:
            return min(mean, upper)
        mu = math.log(mean) - 0.5 * sigma * sigma
        u = self.uniform()
        if math.isfinite(upper):
            u *= _STD_NORMAL.cdf((math.log(upper) - mu) / sigma)
        while u == 0.0:
            u = self.uniform()
        return math.exp(mu + sigma * _STD_NORMAL.inv_cdf(u))

    def geometric(self, p: float, start: int = 0) -> int:
        """Number of failures before the first success, plus `start`."""
        if p >= 1.0:
            return start
        return start + int(math.floor(math.log1p(-self.uniform()) / math.log1p(-p)))


def derive_stream(root_seed: int, path: Path) -> RngStream:
    return RngStream(root_seed, path)
