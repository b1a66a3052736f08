"""One-sided non-inferiority tests against a margin.

Differences are always candidate minus reference. For a smaller-is-better
metric non-inferiority means the upper confidence bound of the difference
stays below +margin; for larger-is-better the lower bound stays above
-margin.
"""
from __future__ import annotations

import enum
import math
import statistics
from dataclasses import asdict, dataclass, replace
from typing import Optional, Sequence

from .tdist import t_cdf, t_ppf


class Direction(str, enum.Enum):
    SMALLER_BETTER = "smaller_better"
    LARGER_BETTER = "larger_better"


class TestKind(str, enum.Enum):
    WELCH = "welch"
    NONPARAMETRIC = "nonparametric"


NON_INFERIOR = "non_inferior"
NOT_DEMONSTRATED = "not_demonstrated"


class InsufficientSamplesError(ValueError):
    pass


@dataclass(frozen=True)
class MetricSpec:
    name: str
    direction: Direction
    margin: float
    test: TestKind = TestKind.WELCH
    relative: bool = False  # margin is a fraction of the reference mean

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        object.__setattr__(self, "test", TestKind(self.test))
        if not self.margin > 0:
            raise ValueError(f"margin must be > 0, got {self.margin}")

    def materialize(self, reference: Sequence[float]) -> "MetricSpec":
        """Absolute-margin copy; relative margins scale with the reference mean."""
        if not self.relative:
            return self
        margin = self.margin * abs(statistics.fmean(reference))
        if not margin > 0:
            raise ValueError(f"relative margin for {self.name} collapses to {margin}")
        return replace(self, margin=margin, relative=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["direction"] = self.direction.value
        d["test"] = self.test.value
        return d


@dataclass(frozen=True)
class TestResult:
    metric: str
    test: str
    direction: str
    estimate: float
    bound: float
    alpha: float
    margin: float
    p_value: Optional[float]
    decision: str
    n_candidate: int
    n_reference: int
    statistic: Optional[float] = None
    df: Optional[float] = None
    candidate_mean: Optional[float] = None
    reference_mean: Optional[float] = None
    candidate_sd: Optional[float] = None
    reference_sd: Optional[float] = None

    @property
    def non_inferior(self) -> bool:
        return self.decision == NON_INFERIOR

    def to_dict(self) -> dict:
        return asdict(self)


def decide(direction: Direction, bound: float, margin: float) -> str:
    """Decision implied by the adverse one-sided bound."""
    if Direction(direction) is Direction.SMALLER_BETTER:
        ok = bound < margin
    else:
        ok = bound > -margin
    return NON_INFERIOR if ok else NOT_DEMONSTRATED


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 0.5), got {alpha}")


def welch_statistics(candidate: Sequence[float], reference: Sequence[float]):
    """Mean difference, its standard error and the Welch-Satterthwaite df."""
    nc, nr = len(candidate), len(reference)
    vc = statistics.variance(candidate)
    vr = statistics.variance(reference)
    diff = statistics.fmean(candidate) - statistics.fmean(reference)
    a, b = vc / nc, vr / nr
    se2 = a + b
    if se2 == 0:
        return diff, 0.0, math.nan
    # scale before squaring so tiny variances do not underflow to 0/0
    s = max(a, b)
    a, b = a / s, b / s
    df = (a + b) ** 2 / (a * a / (nc - 1) + b * b / (nr - 1))
    return diff, math.sqrt(se2), df


def welch_noninferiority(candidate: Sequence[float], reference: Sequence[float],
                         spec: MetricSpec, alpha: float = 0.05) -> TestResult:
    _check_alpha(alpha)
    if len(candidate) < 2 or len(reference) < 2:
        raise InsufficientSamplesError(
            f"{spec.name}: Welch test needs >= 2 samples per arm "
            f"(candidate {len(candidate)}, reference {len(reference)})")
    spec = spec.materialize(reference)
    diff, se, df = welch_statistics(candidate, reference)
    smaller = spec.direction is Direction.SMALLER_BETTER
    delta = spec.margin
    if se == 0.0:
        bound, t, p = diff, None, None
    else:
        crit = t_ppf(1.0 - alpha, df)
        if smaller:
            bound = diff + crit * se
            t = (diff - delta) / se
            p = t_cdf(t, df)
        else:
            bound = diff - crit * se
            t = (diff + delta) / se
            p = 1.0 - t_cdf(t, df)
    return TestResult(
        metric=spec.name, test=TestKind.WELCH.value, direction=spec.direction.value,
        estimate=diff, bound=bound, alpha=alpha, margin=delta, p_value=p,
        decision=decide(spec.direction, bound, delta),
        n_candidate=len(candidate), n_reference=len(reference),
        statistic=t, df=None if se == 0.0 else df,
        candidate_mean=statistics.fmean(candidate), reference_mean=statistics.fmean(reference),
        candidate_sd=statistics.stdev(candidate), reference_sd=statistics.stdev(reference),
    )
