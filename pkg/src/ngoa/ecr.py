"""Equivalent circuit rate: the fastest point-to-point circuit a candidate matches.

For each reference rate R the candidate and a point-to-point reference at R
are replicated n times each; every QoE metric gets a one-sided
non-inferiority test and the intersection-union rule combines them. Rates
are scanned upwards from the bottom of the grid until the first failure.
"""
from __future__ import annotations

import enum
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

from .architectures.config import ArchitectureConfig, Kind, point_to_point_reference
from .energy import PowerProfile
from .experiment import RunResult, RunSpec, run_once
from .qoe import DFR, PAGE_DELAY
from .stats import (Direction, InsufficientSamplesError, IutResult, MetricSpec, TestKind,
                    iut_decision, noninferiority_test)
from .traffic.workload import TrafficConfig

log = logging.getLogger(__name__)

MBPS = 1e6
DEFAULT_GRID = tuple(r * MBPS for r in (10, 25, 50, 100, 155, 300, 622, 1000))
CANDIDATE = "candidate"
REFERENCE = "reference"
BELOW_GRID = "below_grid"
ABOVE_GRID = "above_grid"
VALUE = "value"


class Pairing(str, enum.Enum):
    COMMON_RANDOM_NUMBERS = "common_random_numbers"
    INDEPENDENT = "independent"


class Search(str, enum.Enum):
    SCAN = "scan"
    BINARY = "binary"


class EcrError(RuntimeError):
    """A replication failed; carries arm, replication and rate."""

    def __init__(self, arm: str, replication: int, rate: Optional[float], cause: str):
        self.arm = arm
        self.replication = replication
        self.rate = rate
        where = f"{arm} replication {replication}"
        if rate is not None:
            where += f" at {rate / MBPS:g} Mb/s"
        super().__init__(f"{where}: {cause}")


def default_metrics(test: TestKind = TestKind.WELCH) -> tuple[MetricSpec, ...]:
    return (
        MetricSpec(PAGE_DELAY, Direction.SMALLER_BETTER, 0.10, test, relative=True),
        MetricSpec(DFR, Direction.LARGER_BETTER, 0.02, test),
    )


@dataclass(frozen=True)
class EcrRequest:
    candidate: ArchitectureConfig
    traffic: TrafficConfig
    duration: float
    warmup: float
    rate_grid: tuple = DEFAULT_GRID
    metrics: tuple = field(default_factory=default_metrics)
    alpha: float = 0.05
    replications: int = 10
    root_seed: int = 1
    pairing: Pairing = Pairing.COMMON_RANDOM_NUMBERS
    search: Search = Search.SCAN
    power: Optional[PowerProfile] = None  # energy accounting on every run when set

    def __post_init__(self):
        object.__setattr__(self, "pairing", Pairing(self.pairing))
        object.__setattr__(self, "search", Search(self.search))
        object.__setattr__(self, "rate_grid", tuple(float(r) for r in self.rate_grid))
        object.__setattr__(self, "metrics", tuple(self.metrics))
        if not self.rate_grid:
            raise ValueError("rate grid is empty")
        if any(r <= 0 for r in self.rate_grid):
            raise ValueError("grid rates must be > 0")
        if any(b <= a for a, b in zip(self.rate_grid, self.rate_grid[1:])):
            raise ValueError("rate grid must be strictly increasing")
        if self.replications < 3:
            raise ValueError(f"need >= 3 replications per arm, got {self.replications}")
        if not self.metrics:
            raise ValueError("at least one metric is required")


@dataclass
class RateDecision:
    rate: float
    iut: IutResult
    samples: dict  # arm -> metric -> list of per-replication values

    @property
    def non_inferior(self) -> bool:
        return self.iut.non_inferior

    def to_dict(self) -> dict:
        return {"rate": self.rate, "decision": self.iut.decision, "iut": self.iut.to_dict()}


@dataclass
class EcrResult:
    ecr: Optional[float]
    status: str  # value | below_grid | above_grid
    upper_bound: float
    grid: tuple
    clipped_grid: tuple
    decisions: list
    largest_passing: Optional[float] = None
    settings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "ecr": self.ecr,
            "status": self.status,
            "largest_passing": self.largest_passing,
            "upper_bound": self.upper_bound,
            "grid": list(self.grid),
            "clipped_grid": list(self.clipped_grid),
            "decisions": [d.to_dict() for d in self.decisions],
            "settings": self.settings,
        }

    def sample_rows(self) -> list[dict]:
        rows = []
        for d in self.decisions:
            for arm in (CANDIDATE, REFERENCE):
                for metric, values in d.samples[arm].items():
                    for k, v in enumerate(values):
                        rows.append({"rate": d.rate, "arm": arm, "metric": metric,
                                     "replication": k, "value": v})
        return rows


def traffic_path(arm: str, replication: int, pairing: Pairing) -> str:
    """Stream prefix; common random numbers drop the arm so both arms match."""
    if Pairing(pairing) is Pairing.COMMON_RANDOM_NUMBERS:
        return f"rep/{replication}"
    return f"{arm}/rep/{replication}"


_P2P_IRRELEVANT = dict(feeder_rate=1e9, wavelength_count=1, transceiver_pool=1, tuning_time=1e-3,
                       guard_time=1e-6, max_grant_bytes=15500)


def _run_key(spec: RunSpec) -> str:
    arch = spec.arch
    if arch.kind is Kind.POINT_TO_POINT:
        # point-to-point ignores the PON knobs; equal circuits share runs
        arch = replace(arch, **_P2P_IRRELEVANT, pool_policy="oldest_first")
    return repr(replace(spec, arch=arch))


def _run_job(spec: RunSpec) -> RunResult:
    return run_once(spec)


class RunCache:
    """Memoises runs by their full specification; optionally fans out to processes.

    Results depend only on the spec, so the merge order is irrelevant to the
    outcome; callers still read them back in (arm, replication) order.
    """

    def __init__(self, workers: int = 1):
        self.workers = max(1, int(workers))
        self._results: dict[str, RunResult] = {}
        self.executed = 0

    def run_many(self, specs: Sequence[RunSpec]) -> list[RunResult]:
        keys = [_run_key(s) for s in specs]
        todo: dict[str, RunSpec] = {}
        for k, s in zip(keys, specs):
            if k not in self._results and k not in todo:
                todo[k] = s
        if todo:
            items = list(todo.items())
            if self.workers > 1 and len(items) > 1:
                with ProcessPoolExecutor(max_workers=min(self.workers, len(items))) as ex:
                    outs = list(ex.map(_run_job, [s for _, s in items]))
            else:
                outs = [run_once(s) for _, s in items]
            for (k, _), out in zip(items, outs):
                self._results[k] = out
            self.executed += len(items)
        return [self._results[k] for k in keys]


def arm_specs(arch: ArchitectureConfig, arm: str, traffic: TrafficConfig, duration: float,
              warmup: float, n: int, root_seed: int, pairing: Pairing,
              metrics: Sequence[MetricSpec], power: Optional[PowerProfile] = None) -> list[RunSpec]:
    names = tuple(m.name for m in metrics)
    return [RunSpec(arch=arch, traffic=traffic, duration=duration, warmup=warmup,
                    root_seed=root_seed, traffic_path=traffic_path(arm, k, pairing),
                    metrics=names, power=power)
            for k in range(n)]


def _samples(results: Sequence[RunResult], arm: str, rate: Optional[float],
             metrics: Sequence[MetricSpec]) -> dict[str, list[float]]:
    out: dict[str, list[float]] = {m.name: [] for m in metrics}
    for k, r in enumerate(results):
        if r.qoe_error:
            raise EcrError(arm, k, rate, r.qoe_error)
        for m in metrics:
            out[m.name].append(r.qoe[m.name])
    return out


def evaluate_rate(candidate: ArchitectureConfig, rate: float, metrics: Sequence[MetricSpec],
                  alpha: float, n: int, root_seed: int,
                  pairing: Pairing = Pairing.COMMON_RANDOM_NUMBERS, *,
                  traffic: TrafficConfig, duration: float, warmup: float,
                  cache: Optional[RunCache] = None,
                  power: Optional[PowerProfile] = None) -> RateDecision:
    if not rate > 0:
        raise ValueError(f"reference rate must be > 0, got {rate}")
    if n < 3:
        raise InsufficientSamplesError(f"need >= 3 replications per arm, got {n}")
    cache = cache or RunCache()
    pairing = Pairing(pairing)
    reference = point_to_point_reference(candidate, rate)
    c_specs = arm_specs(candidate, CANDIDATE, traffic, duration, warmup, n, root_seed,
                        pairing, metrics, power)
    r_specs = arm_specs(reference, REFERENCE, traffic, duration, warmup, n, root_seed,
                        pairing, metrics, power)
    results = _tagged_runs(cache, c_specs + r_specs, rate, n)
    cand = _samples(results[:n], CANDIDATE, rate, metrics)
    ref = _samples(results[n:], REFERENCE, rate, metrics)
    tests = [noninferiority_test(cand[m.name], ref[m.name], m, alpha) for m in metrics]
    return RateDecision(rate, iut_decision(tests), {CANDIDATE: cand, REFERENCE: ref})


def _tagged_runs(cache: RunCache, specs: list[RunSpec], rate: float, n: int) -> list[RunResult]:
    try:
        return cache.run_many(specs)
    except EcrError:
        raise
    except Exception as exc:
        # find the failing run serially so the error names it
        for i, s in enumerate(specs):
            try:
                cache.run_many([s])
            except Exception as inner:
                arm = CANDIDATE if i < n else REFERENCE
                raise EcrError(arm, i % n, rate, f"{type(inner).__name__}: {inner}") from inner
        raise


def candidate_runs(request: EcrRequest, cache: RunCache) -> list[RunResult]:
    """The candidate arm's replications (served from the cache after compute_ecr)."""
    specs = arm_specs(request.candidate, CANDIDATE, request.traffic, request.duration,
                      request.warmup, request.replications, request.root_seed,
                      request.pairing, request.metrics, request.power)
    return cache.run_many(specs)


def clip_grid(grid: Sequence[float], bound: float) -> tuple:
    return tuple(r for r in grid if r <= bound)


def compute_ecr(request: EcrRequest, cache: Optional[RunCache] = None,
                progress: Optional[Callable[[RateDecision], None]] = None) -> EcrResult:
    bound = float(request.candidate.ecr_bound)
    grid = clip_grid(request.rate_grid, bound)
    if not grid:
        raise ValueError(
            f"no grid rate is at or below the candidate bound {bound / MBPS:g} Mb/s")
    cache = cache or RunCache()

    def evaluate(rate: float) -> RateDecision:
        d = evaluate_rate(request.candidate, rate, request.metrics, request.alpha,
                          request.replications, request.root_seed, request.pairing,
                          traffic=request.traffic, duration=request.duration,
                          warmup=request.warmup, cache=cache, power=request.power)
        log.info("rate %g Mb/s: %s", rate / MBPS, d.iut.decision)
        if progress:
            progress(d)
        return d

    decisions: list[RateDecision] = []
    if request.search is Search.SCAN:
        for rate in grid:
            d = evaluate(rate)
            decisions.append(d)
            if not d.non_inferior:
                break
    else:
        lo, hi = 0, len(grid) - 1
        while lo <= hi:
            mid = (lo + hi) // 2
            d = evaluate(grid[mid])
            decisions.append(d)
            if d.non_inferior:
                lo = mid + 1
            else:
                hi = mid - 1
        decisions.sort(key=lambda d: d.rate)

    passing = [d.rate for d in decisions if d.non_inferior]
    failing = [d.rate for d in decisions if not d.non_inferior]
    if request.search is Search.SCAN:
        best = passing[-1] if passing and (not failing or passing[-1] < failing[0]) else None
    else:
        best = max((r for r in passing if not any(f < r for f in failing)), default=None)
    if best is None:
        ecr, status = None, BELOW_GRID
    elif best == grid[-1] and grid[-1] < bound and len(grid) < len(request.rate_grid):
        # the unclipped grid had a faster rate we were not allowed to test
        ecr, status = best, VALUE
    elif best == grid[-1] and grid[-1] < bound:
        ecr, status = None, ABOVE_GRID
    else:
        ecr, status = best, VALUE
    assert ecr is None or ecr <= bound
    settings = {
        "candidate": request.candidate.to_dict(),
        "alpha": request.alpha,
        "replications": request.replications,
        "root_seed": request.root_seed,
        "pairing": request.pairing.value,
        "search": request.search.value,
        "metrics": [m.to_dict() for m in request.metrics],
        "duration": request.duration,
        "warmup": request.warmup,
    }
    return EcrResult(ecr=ecr, status=status, upper_bound=bound, grid=request.rate_grid,
                     clipped_grid=grid, decisions=decisions, largest_passing=best,
                     settings=settings)
