from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from ..sim.rng import RngStream

KINDS = ("fixed", "exponential", "lognormal", "geometric", "geometric1")


@dataclass(frozen=True)
class Dist:
    """Parametric distribution used by the application models.

    ``geometric`` counts from 0, ``geometric1`` from 1; both are set by their
    mean. ``lognormal`` takes the arithmetic mean and the log-scale sigma and
    is truncated at ``upper``.
    """

    kind: str
    mean: float
    sigma: float = 0.0
    upper: float = math.inf

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distribution {self.kind!r}; expected one of {KINDS}")
        if self.mean < 0 or (self.kind == "geometric1" and self.mean < 1):
            raise ValueError(f"bad mean {self.mean} for {self.kind}")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")

    def sample(self, stream: RngStream) -> float:
        k = self.kind
        if k == "fixed":
            return self.mean
        if k == "exponential":
            return stream.exponential(self.mean)
        if k == "lognormal":
            return stream.lognormal(self.mean, self.sigma, self.upper)
        if k == "geometric":
            return stream.geometric(1.0 / (1.0 + self.mean))
        return stream.geometric(1.0 / self.mean, start=1)

    def to_dict(self) -> dict:
        d = asdict(self)
        if math.isinf(self.upper):
            d["upper"] = None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Dist":
        d = dict(d)
        if d.get("upper") is None:
            d["upper"] = math.inf
        return cls(**d)
