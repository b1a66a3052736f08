"""Power-state accounting and energy reports."""
from __future__ import annotations

import bisect
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Iterable, Mapping, Optional, Sequence

import yaml

from .architectures.config import ArchitectureConfig, Kind
from .sim.engine import PS_PER_S, to_ps

CLASSES = ("core", "l2_switch", "olt_transceiver", "onu")
STATES = ("active", "idle", "sleep", "off")


class EnergyError(ValueError):
    pass


@dataclass(frozen=True)
class ClassPower:
    active: float
    idle: float
    sleep: float
    sleep_threshold: Optional[float] = None  # s of inactivity; None = never sleeps
    wake_time: float = 0.0

    def __post_init__(self):
        if not 0 <= self.sleep <= self.idle <= self.active:
            raise EnergyError(
                f"need 0 <= sleep <= idle <= active, got {self.sleep}/{self.idle}/{self.active}")
        if self.sleep_threshold is not None and self.sleep_threshold < 0:
            raise EnergyError("sleep_threshold must be >= 0")
        if self.wake_time < 0:
            raise EnergyError("wake_time must be >= 0")

    def watts(self, state: str) -> float:
        if state == "off":
            return 0.0
        if state not in STATES:
            raise EnergyError(f"unknown power state {state!r}")
        return getattr(self, state)


@dataclass(frozen=True)
class PowerProfile:
    classes: Mapping[str, ClassPower]

    @classmethod
    def from_dict(cls, d: Mapping) -> "PowerProfile":
        return cls({name: ClassPower(**params) for name, params in d.items()})

    @classmethod
    def default(cls) -> "PowerProfile":
        text = resources.files("ngoa.data").joinpath("power_1g.yaml").read_text()
        return cls.from_dict(yaml.safe_load(text))

    def to_dict(self) -> dict:
        return {name: asdict(p) for name, p in self.classes.items()}


@dataclass(frozen=True)
class PowerDraw:
    by_class: dict
    total: float


def component_inventory(cfg: ArchitectureConfig) -> dict[str, str]:
    """Component id -> power class for one architecture instance."""
    if cfg.kind is Kind.POINT_TO_POINT:
        olt = cfg.onu_count
    elif cfg.kind is Kind.TDM_PON:
        olt = 1
    else:
        olt = cfg.transceiver_pool
    inv = {"core": "core", "l2_switch": "l2_switch"}
    inv.update({f"olt/{i}": "olt_transceiver" for i in range(olt)})
    inv.update({f"onu/{i}": "onu" for i in range(cfg.onu_count)})
    return inv


def power_draw(network_state: Mapping[str, tuple[str, str]], profile: PowerProfile) -> PowerDraw:
    """Instantaneous draw; `network_state` maps component id -> (class, state)."""
    by_class = {c: 0.0 for c in profile.classes}
    for comp, mapping in network_state.items():
        if mapping is None:
            raise EnergyError(f"unmapped component {comp!r}")
        cls, state = mapping
        if cls not in profile.classes:
            raise EnergyError(f"component {comp!r} maps to unknown class {cls!r}")
        by_class[cls] += profile.classes[cls].watts(state)
    return PowerDraw(by_class, math.fsum(by_class.values()))


def shares(by_class: Mapping[str, float]) -> dict[str, float]:
    total = math.fsum(by_class.values())
    if total <= 0:
        return {c: 0.0 for c in by_class}
    return {c: 100.0 * v / total for c, v in by_class.items()}


def component_states(busy: Sequence[tuple[int, int]], t_end: int, params: ClassPower,
                     can_sleep: bool = True) -> list[tuple[int, int, str]]:
    """Piecewise power states of one component over [0, t_end].

    Busy intervals are active. A gap is idle up to the sleep threshold, then
    asleep; before the next busy interval the component wakes early enough to
    be active when it starts, paying the wake time at active power.
    """
    out: list[tuple[int, int, str]] = []
    thr = params.sleep_threshold if can_sleep else None
    thr_ps = None if thr is None else to_ps(thr)
    wake_ps = to_ps(params.wake_time)

    def gap(a: int, b: int, trailing: bool) -> None:
        if b <= a:
            return
        if thr_ps is None or b - a <= thr_ps:
            out.append((a, b, "idle"))
            return
        if thr_ps:
            out.append((a, a + thr_ps, "idle"))
        rest_start = a + thr_ps
        w = 0 if trailing else min(wake_ps, b - rest_start)
        if b - w > rest_start:
            out.append((rest_start, b - w, "sleep"))
        if w:
            out.append((b - w, b, "active"))

    t = 0
    for s, e in busy:
        s, e = max(s, 0), min(e, t_end)
        if e <= s:
            continue
        gap(t, s, False)
        out.append((s, e, "active"))
        t = e
    gap(t, t_end, True)
    return out


@dataclass
class PowerTimeline:
    """Piecewise-constant watts by class: segment k spans times[k]..times[k+1]."""

    times: list[int]
    watts: dict[str, list[float]]

    @classmethod
    def constant(cls, by_class: Mapping[str, float], t0: int, t1: int) -> "PowerTimeline":
        return cls([t0, t1], {c: [w] for c, w in by_class.items()})

    @classmethod
    def from_segments(cls, segments: Mapping[str, Iterable[tuple[int, int, float]]],
                      t0: int, t1: int) -> "PowerTimeline":
        """Sum per-component (start, end, watts) segments into class totals."""
        deltas: dict[int, dict[str, float]] = {t0: {}, t1: {}}
        for c, segs in segments.items():
            for a, b, w in segs:
                if w == 0 or b <= a:
                    continue
                deltas.setdefault(a, {}).setdefault(c, 0.0)
                deltas[a][c] += w
                deltas.setdefault(b, {}).setdefault(c, 0.0)
                deltas[b][c] -= w
        times = sorted(deltas)
        level = {c: 0.0 for c in segments}
        watts = {c: [] for c in segments}
        for t in times[:-1]:
            for c, d in deltas[t].items():
                level[c] += d
            for c in watts:
                watts[c].append(max(level[c], 0.0))
        return cls(times, watts)

    def energy(self) -> dict[str, float]:
        out = {}
        for c, ws in self.watts.items():
            out[c] = math.fsum(w * (b - a) for w, a, b in zip(ws, self.times, self.times[1:])) / PS_PER_S
        return out

    def clip(self, a: int, b: int) -> "PowerTimeline":
        times = [a] + [t for t in self.times if a < t < b] + [b]
        watts = {c: [self.at(c, (x + y) // 2 if y > x else x) for x, y in zip(times, times[1:])]
                 for c in self.watts}
        return PowerTimeline(times, watts)

    def at(self, c: str, t: int) -> float:
        k = bisect.bisect_right(self.times, t) - 1
        k = min(max(k, 0), len(self.times) - 2)
        return self.watts[c][k]

    def binned(self, step: int) -> list[tuple[float, dict[str, float]]]:
        """Mean power per class in consecutive bins of `step` ps."""
        t0, end = self.times[0], self.times[-1]
        nbins = max(1, -(-(end - t0) // step))
        acc = {c: [0.0] * nbins for c in self.watts}
        for k, (a, b) in enumerate(zip(self.times, self.times[1:])):
            while a < b:
                i = (a - t0) // step
                edge = min(b, t0 + (i + 1) * step)
                for c, ws in self.watts.items():
                    acc[c][i] += ws[k] * (edge - a)
                a = edge
        out = []
        for i in range(nbins):
            lo = t0 + i * step
            width = min(step, end - lo)
            out.append((lo / PS_PER_S, {c: acc[c][i] / width for c in self.watts}))
        return out


@dataclass(frozen=True)
class EnergyReport:
    energy_by_class: dict
    total_energy: float
    delivered_bits: int
    energy_per_bit: Optional[float]
    energy_per_bit_defined: bool
    share_by_class: dict
    duration: float

    def to_dict(self) -> dict:
        return asdict(self)


def energy_report(timeline: PowerTimeline, delivered_bits: int) -> EnergyReport:
    e = timeline.energy()
    total = math.fsum(e.values())
    defined = delivered_bits > 0
    return EnergyReport(
        energy_by_class=e,
        total_energy=total,
        delivered_bits=int(delivered_bits),
        energy_per_bit=total / delivered_bits if defined else None,
        energy_per_bit_defined=defined,
        share_by_class=shares(e),
        duration=(timeline.times[-1] - timeline.times[0]) / PS_PER_S,
    )


def all_active_report(cfg: ArchitectureConfig, profile: PowerProfile,
                      duration: float = 1.0) -> EnergyReport:
    state = {comp: (cls, "active") for comp, cls in component_inventory(cfg).items()}
    draw = power_draw(state, profile)
    return energy_report(PowerTimeline.constant(draw.by_class, 0, to_ps(duration)), 0)
