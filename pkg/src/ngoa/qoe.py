"""User-perceived QoE measures: mean web page delay and decodable frame rate."""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence


PAGE_DELAY = "page_delay"
DFR = "dfr"


class InsufficientDataError(ValueError):
    def __init__(self, message: str, **counts):
        super().__init__(f"{message} ({', '.join(f'{k}={v}' for k, v in counts.items())})")
        self.counts = counts


class PageTrace(NamedTuple):
    request: float  # s
    completion: Optional[float] = None  # s; None when censored at run end


class FrameReceipt(NamedTuple):
    index: int  # display index within its stream
    ftype: str  # "I" | "P" | "B"
    gop: int
    received: bool  # every segment arrived before the playout deadline
    stream: int = 0


@dataclass(frozen=True)
class PageDelayStats:
    mean: float
    count: int
    censored: int


def page_delay_stats(traces: Iterable[PageTrace], warmup: float = 0.0) -> PageDelayStats:
    total = 0.0
    n = censored = 0
    for tr in traces:
        if tr.request < warmup:
            continue
        if tr.completion is None:
            censored += 1
            continue
        if tr.completion < tr.request:
            raise ValueError(f"page completes before its request: {tr}")
        total += tr.completion - tr.request
        n += 1
    if n == 0:
        raise InsufficientDataError("no uncensored page after warm-up", eligible=n, censored=censored)
    return PageDelayStats(total / n, n, censored)


def decodable_flags(receipts: Sequence[FrameReceipt]) -> list[bool]:
    """Decodability of each receipt under closed-GOP reference rules.

    I needs itself; P needs itself and the previous reference; B needs
    itself, the previous reference and, when the GOP has one, the next
    reference. References never cross GOP boundaries.
    """
    groups: dict[tuple[int, int], list[int]] = defaultdict(list)
    for k, r in enumerate(receipts):
        groups[(r.stream, r.gop)].append(k)
    out = [False] * len(receipts)
    for members in groups.values():
        members.sort(key=lambda k: receipts[k].index)
        ref_ok: list[bool] = []  # decodability of references in display order
        ref_pos: list[int] = []  # position within `members` of each reference
        prev = None
        for pos, k in enumerate(members):
            r = receipts[k]
            if r.ftype == "I":
                ok = r.received
            elif r.ftype == "P":
                ok = r.received and prev is True
            else:
                continue
            prev = ok
            ref_ok.append(ok)
            ref_pos.append(pos)
            out[k] = ok
        j = 0  # index of the next reference after the current B frame
        for pos, k in enumerate(members):
            r = receipts[k]
            while j < len(ref_pos) and ref_pos[j] < pos:
                j += 1
            if r.ftype != "B":
                continue
            before = ref_ok[j - 1] if j > 0 else False
            after = ref_ok[j] if j < len(ref_pos) else True
            out[k] = r.received and before and after
    return out


def decodable_frame_rate(receipts: Sequence[FrameReceipt], gop: tuple[int, int]) -> float:
    """Fraction of sent frames that are decodable."""
    if not receipts:
        raise InsufficientDataError("no frames", frames=0)
    from .traffic.video import gop_pattern  # traffic imports this module
    n, m = gop
    pattern = gop_pattern(n, m)
    for r in receipts:
        if pattern[r.index % n] != r.ftype:
            raise ValueError(f"frame {r.index} typed {r.ftype}, GOP pattern says {pattern[r.index % n]}")
    flags = decodable_flags(receipts)
    return sum(flags) / len(flags)


@dataclass
class QoeSampleSet:
    """Per-replication scalar QoE samples of one arm."""

    replications: list[int] = field(default_factory=list)
    values: dict[str, list[float]] = field(default_factory=dict)
    warmup_applied: bool = True

    def add(self, replication: int, metrics: dict[str, float]) -> None:
        self.replications.append(replication)
        for name, value in metrics.items():
            self.values.setdefault(name, []).append(value)

    def validate(self) -> None:
        n = len(self.replications)
        for name, vals in self.values.items():
            if len(vals) != n:
                raise ValueError(f"metric {name} has {len(vals)} samples for {n} replications")
            if name == PAGE_DELAY and any(not v > 0 for v in vals):
                raise ValueError("page delay samples must be > 0")
            if name == DFR and any(not 0.0 <= v <= 1.0 for v in vals):
                raise ValueError("DFR samples must lie in [0, 1]")

    def rows(self) -> list[tuple[int, str, float]]:
        out = []
        for name in sorted(self.values):
            for rep, v in zip(self.replications, self.values[name]):
                out.append((rep, name, v))
        out.sort(key=lambda r: (r[0], r[1]))
        return out

    def to_csv(self) -> str:
        lines = ["replication,metric,value"]
        lines += [f"{rep},{name},{value!r}" for rep, name, value in self.rows()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "QoeSampleSet":
        s = cls()
        rows: dict[int, dict[str, float]] = {}
        for line in text.strip().splitlines()[1:]:
            rep, name, value = line.split(",")
            rows.setdefault(int(rep), {})[name] = float(value)
        for rep in sorted(rows):
            s.add(rep, rows[rep])
        return s
