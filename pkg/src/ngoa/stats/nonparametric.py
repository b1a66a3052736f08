"""Distribution-free non-inferiority via Hodges-Lehmann and Mann-Whitney.

The one-sided confidence bound for the median shift is an order statistic
of the n*m pairwise differences (Moses' construction). The order index
comes from the exact null distribution of the Mann-Whitney U statistic for
n*m <= 400 and from the normal approximation with continuity correction
above that.
"""
from __future__ import annotations

import math
import statistics
from functools import lru_cache
from statistics import NormalDist
from typing import Sequence

from .noninferiority import (Direction, InsufficientSamplesError, MetricSpec, TestKind,
                             TestResult, _check_alpha, decide)

EXACT_LIMIT = 400


def pairwise_differences(candidate: Sequence[float], reference: Sequence[float]) -> list[float]:
    return sorted(c - r for c in candidate for r in reference)


def hodges_lehmann(candidate: Sequence[float], reference: Sequence[float]) -> float:
    """Median of all pairwise differences candidate - reference."""
    if not candidate or not reference:
        raise ValueError("hodges_lehmann needs non-empty samples")
    return statistics.median(pairwise_differences(candidate, reference))


@lru_cache(maxsize=128)
def mw_null_counts(n: int, m: int) -> tuple[int, ...]:
    """Number of rank arrangements giving U = 0..n*m under the null.

    These are the coefficients of the Gaussian binomial coefficient
    C(n+m, n) in q.
    """
    if n < 0 or m < 0:
        raise ValueError("sample sizes must be non-negative")
    # C(n+m, n)_q = prod_{i=1..n} (1 - q^{m+i}) / (1 - q^i), as a power
    # series truncated at degree n*m (the product's exact degree)
    counts = [1] + [0] * (n * m)
    for i in range(1, n + 1):
        # multiply by (1 - q^{m+i})
        step = m + i
        for u in range(len(counts) - 1, step - 1, -1):
            counts[u] -= counts[u - step]
        # divide by (1 - q^i): running sum with stride i
        for u in range(i, len(counts)):
            counts[u] += counts[u - i]
    return tuple(counts)


def _order_index(n: int, m: int, alpha: float) -> int:
    """Largest k with P(U <= k - 1) <= alpha; 0 if none exists."""
    nm = n * m
    if nm <= EXACT_LIMIT:
        counts = mw_null_counts(n, m)
        total = math.comb(n + m, n)
        cum = 0
        k = 0
        for u in range(nm + 1):
            cum += counts[u]
            if cum / total <= alpha:
                k = u + 1
            else:
                break
        return k
    z = NormalDist().inv_cdf(1.0 - alpha)
    sigma = math.sqrt(nm * (n + m + 1) / 12.0)
    return max(0, math.floor(nm / 2.0 + 0.5 - z * sigma))


def _p_value(diffs: Sequence[float], n: int, m: int, threshold: float, below: bool) -> float:
    """P-value of H0 'shift at the margin boundary' against the favourable side."""
    nm = n * m
    if below:
        s = sum(1.0 for d in diffs if d < threshold) + 0.5 * sum(1 for d in diffs if d == threshold)
    else:
        s = sum(1.0 for d in diffs if d > threshold) + 0.5 * sum(1 for d in diffs if d == threshold)
    if nm <= EXACT_LIMIT:
        counts = mw_null_counts(n, m)
        lo = math.ceil(s)
        return sum(counts[lo:]) / math.comb(n + m, n)
    sigma = math.sqrt(nm * (n + m + 1) / 12.0)
    return 1.0 - NormalDist().cdf((s - nm / 2.0 - 0.5) / sigma)


def nonparametric_noninferiority(candidate: Sequence[float], reference: Sequence[float],
                                 spec: MetricSpec, alpha: float = 0.05) -> TestResult:
    _check_alpha(alpha)
    n, m = len(candidate), len(reference)
    if n < 3 or m < 3:
        raise InsufficientSamplesError(
            f"{spec.name}: nonparametric test needs >= 3 samples per arm "
            f"(candidate {n}, reference {m})")
    spec = spec.materialize(reference)
    diffs = pairwise_differences(candidate, reference)
    estimate = statistics.median(diffs)
    k = _order_index(n, m, alpha)
    smaller = spec.direction is Direction.SMALLER_BETTER
    if smaller:
        bound = diffs[n * m - k] if k > 0 else math.inf
        p = _p_value(diffs, n, m, spec.margin, below=True)
    else:
        bound = diffs[k - 1] if k > 0 else -math.inf
        p = _p_value(diffs, n, m, -spec.margin, below=False)
    return TestResult(
        metric=spec.name, test=TestKind.NONPARAMETRIC.value, direction=spec.direction.value,
        estimate=estimate, bound=bound, alpha=alpha, margin=spec.margin, p_value=p,
        decision=decide(spec.direction, bound, spec.margin),
        n_candidate=n, n_reference=m,
        statistic=float(k),
        candidate_mean=statistics.fmean(candidate), reference_mean=statistics.fmean(reference),
        candidate_sd=statistics.stdev(candidate), reference_sd=statistics.stdev(reference),
    )
