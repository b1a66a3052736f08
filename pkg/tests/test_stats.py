import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from ngoa.stats import (
    NON_INFERIOR, NOT_DEMONSTRATED, Direction, InsufficientSamplesError, MetricSpec,
    decide, hodges_lehmann, iut_decision, mw_null_counts, noninferiority_test,
    nonparametric_noninferiority, t_cdf, t_ppf, welch_noninferiority, welch_statistics,
)
from ngoa.stats import TestKind as Kind
from ngoa.stats.nonparametric import _order_index

from oracles import hodges_lehmann_enumeration, mann_whitney_enumeration, welch_oracle

SMALL = Direction.SMALLER_BETTER
LARGE = Direction.LARGER_BETTER


def spec(direction=SMALL, margin=0.1, test=Kind.WELCH, relative=False):
    return MetricSpec("m", direction, margin, test, relative)


# -- t distribution ---------------------------------------------------------

def test_t_quantiles_match_oracle():
    for df in (1, 2, 3, 4.5, 7, 12.3, 30, 100, 1000):
        for p in (0.5, 0.8, 0.9, 0.95, 0.975, 0.99, 0.999, 0.01, 0.05):
            assert t_ppf(p, df) == pytest.approx(sps.t.ppf(p, df), rel=1e-9, abs=1e-12)


def test_t_cdf_matches_oracle():
    for df in (1, 2.5, 9, 40, 300):
        for t in (-8.0, -2.1, -0.3, 0.0, 0.7, 1.9, 5.0):
            assert t_cdf(t, df) == pytest.approx(sps.t.cdf(t, df), rel=1e-9, abs=1e-14)


# -- Welch ------------------------------------------------------------------

def test_welch_statistic_and_df_match_oracle():
    rng = random.Random(1)
    for _ in range(100):
        nc, nr = rng.randint(2, 40), rng.randint(2, 40)
        c = [rng.gauss(rng.uniform(-5, 5), rng.uniform(0.1, 3)) for _ in range(nc)]
        r = [rng.gauss(rng.uniform(-5, 5), rng.uniform(0.1, 3)) for _ in range(nr)]
        diff, se, df = welch_statistics(c, r)
        t_ref, df_ref = welch_oracle(c, r)
        assert diff / se == pytest.approx(t_ref, rel=1e-9)
        assert df == pytest.approx(df_ref, rel=1e-9)


def test_degenerate_equal_constants_non_inferior():
    res = welch_noninferiority([5, 5, 5], [5, 5, 5], spec(margin=0.1))
    assert res.decision == NON_INFERIOR
    assert res.bound == 0.0 and res.p_value is None


def test_degenerate_branch_compares_means_directly():
    assert welch_noninferiority([5.2] * 3, [5] * 3, spec(margin=0.1)).decision == NOT_DEMONSTRATED
    assert welch_noninferiority([4.95] * 3, [5] * 3, spec(LARGE, margin=0.1)).non_inferior


def test_two_margin_shift_not_demonstrated():
    rng = random.Random(2)
    delta = 0.1
    r = [1.0 + rng.gauss(0, 0.01) for _ in range(30)]
    c = [x + 2 * delta for x in r]
    res = welch_noninferiority(c, r, spec(margin=delta))
    assert res.decision == NOT_DEMONSTRATED
    oracle = sps.ttest_ind([x - delta for x in c], r, equal_var=False, alternative="less")
    assert res.statistic == pytest.approx(oracle.statistic, rel=1e-9)
    assert res.p_value == pytest.approx(oracle.pvalue, rel=1e-8)
    assert oracle.pvalue > 0.05


def test_small_shift_is_non_inferior_with_matching_p():
    rng = random.Random(3)
    r = [rng.gauss(1.0, 0.05) for _ in range(30)]
    c = [rng.gauss(1.0, 0.05) for _ in range(30)]
    res = welch_noninferiority(c, r, spec(LARGE, margin=0.1))
    oracle = sps.ttest_ind([x + 0.1 for x in c], r, equal_var=False, alternative="greater")
    assert res.non_inferior
    assert res.p_value == pytest.approx(oracle.pvalue, rel=1e-8)


def test_welch_needs_two_samples():
    with pytest.raises(InsufficientSamplesError):
        welch_noninferiority([1.0], [1.0, 2.0], spec())


@pytest.mark.parametrize("alpha", [0.0, 0.5, 0.7, -0.1])
def test_alpha_range(alpha):
    with pytest.raises(ValueError, match="alpha"):
        welch_noninferiority([1, 2], [1, 2], spec(), alpha)


def test_relative_margin_materialised():
    res = welch_noninferiority([2.0, 2.1], [2.0, 2.2], spec(margin=0.1, relative=True))
    assert res.margin == pytest.approx(0.21)


def test_margin_must_be_positive():
    with pytest.raises(ValueError):
        MetricSpec("m", SMALL, 0.0)


# -- Hodges-Lehmann ---------------------------------------------------------

@pytest.mark.parametrize("c,r,expected", [
    ([2, 3, 4], [1, 2, 3], 1.0), ([7], [7], 0.0), ([10], [1, 2], 8.5)])
def test_hodges_lehmann_examples(c, r, expected):
    assert hodges_lehmann(c, r) == expected


@given(st.lists(st.integers(-50, 50), min_size=1, max_size=8),
       st.lists(st.integers(-50, 50), min_size=1, max_size=8))
def test_hodges_lehmann_matches_enumeration(c, r):
    assert hodges_lehmann(c, r) == hodges_lehmann_enumeration(c, r)


def test_hodges_lehmann_empty():
    with pytest.raises(ValueError):
        hodges_lehmann([], [1])


# -- Mann-Whitney null and order statistics ---------------------------------

@pytest.mark.parametrize("n,m", [(4, 4), (3, 5), (1, 6), (5, 5)])
def test_null_distribution_matches_enumeration(n, m):
    assert list(mw_null_counts(n, m)) == mann_whitney_enumeration(n, m)


def test_four_by_four_has_seventy_assignments():
    assert sum(mw_null_counts(4, 4)) == 70


def _oracle_index(n, m, alpha):
    counts = mann_whitney_enumeration(n, m)
    total = sum(counts)
    k, cum = 0, 0
    for u, c in enumerate(counts):
        cum += c
        if cum / total > alpha:
            break
        k = u + 1
    return k


@pytest.mark.parametrize("n,m", [(3, 3), (4, 4), (5, 4), (6, 6), (7, 5)])
def test_order_index_from_enumeration(n, m):
    for alpha in (0.01, 0.05, 0.1, 0.25):
        assert _order_index(n, m, alpha) == _oracle_index(n, m, alpha)


def test_identical_samples_non_inferior():
    rng = random.Random(4)
    x = [rng.gauss(10, 1) for _ in range(30)]
    res = nonparametric_noninferiority(x, list(x), spec(margin=1.0, test=Kind.NONPARAMETRIC))
    assert res.estimate == 0.0
    assert res.bound < 1.0
    assert res.non_inferior


def test_identical_small_samples_bound_from_oracle():
    x = [1.0, 2.5, 3.1, 4.7, 6.0, 7.2]
    res = nonparametric_noninferiority(x, x, spec(margin=1.0, test=Kind.NONPARAMETRIC))
    diffs = sorted(a - b for a in x for b in x)
    k = _oracle_index(6, 6, 0.05)
    assert res.bound == diffs[len(diffs) - k]
    assert res.non_inferior == (diffs[len(diffs) - k] < 1.0)


def test_large_shift_not_demonstrated():
    rng = random.Random(5)
    r = [rng.gauss(10, 1) for _ in range(20)]
    c = [x + 10.0 for x in r]
    res = nonparametric_noninferiority(c, r, spec(margin=1.0, test=Kind.NONPARAMETRIC))
    assert res.decision == NOT_DEMONSTRATED


def test_nonparametric_needs_three():
    with pytest.raises(InsufficientSamplesError):
        nonparametric_noninferiority([1, 2], [1, 2, 3], spec(test=Kind.NONPARAMETRIC))


def test_nonparametric_bound_coverage():
    # an upper bound at level 0.95 must cover the true shift at least 95% of the time
    rng = random.Random(6)
    for n, m in ((6, 7), (25, 25)):
        misses = 0
        trials = 1500
        for _ in range(trials):
            c = [rng.expovariate(1.0) + 0.3 for _ in range(n)]
            r = [rng.expovariate(1.0) for _ in range(m)]
            res = nonparametric_noninferiority(c, r, spec(margin=1.0, test=Kind.NONPARAMETRIC))
            misses += res.bound < 0.3
        assert misses / trials <= 0.05 + 3 * math.sqrt(0.05 * 0.95 / trials)


def test_dispatch_by_test_kind():
    x, y = [1.0, 2.0, 3.0, 4.0], [1.5, 2.5, 3.5, 4.5]
    assert noninferiority_test(x, y, spec(test=Kind.NONPARAMETRIC)).test == "nonparametric"
    assert noninferiority_test(x, y, spec()).test == "welch"


# -- properties shared by both tests ----------------------------------------

samples = st.lists(st.floats(-100, 100, allow_nan=False), min_size=3, max_size=12)


@settings(max_examples=200, deadline=None)
@given(samples, samples, st.sampled_from(list(Kind)), st.sampled_from(list(Direction)),
       st.floats(0.01, 50))
def test_decision_consistent_with_bound(c, r, kind, direction, margin):
    res = noninferiority_test(c, r, MetricSpec("m", direction, margin, kind))
    assert res.decision == decide(direction, res.bound, res.margin)


@settings(max_examples=200, deadline=None)
@given(samples, samples, st.sampled_from(list(Kind)), st.floats(0.01, 50))
def test_swap_and_flip_symmetry(c, r, kind, margin):
    a = noninferiority_test(c, r, MetricSpec("m", SMALL, margin, kind))
    b = noninferiority_test(r, c, MetricSpec("m", LARGE, margin, kind))
    assert b.estimate == pytest.approx(-a.estimate, abs=1e-9)
    assert b.bound == pytest.approx(-a.bound, abs=1e-9)
    # away from an exact tie at the margin the decisions agree
    if abs(abs(a.bound) - margin) > 1e-9:
        assert a.decision == b.decision


# -- intersection-union -----------------------------------------------------

def _result(decision):
    candidate = [1, 1] if decision == NON_INFERIOR else [2, 2]
    return welch_noninferiority(candidate, [1, 1], spec())


def test_iut_examples():
    ok, bad = _result(NON_INFERIOR), _result(NOT_DEMONSTRATED)
    assert iut_decision([ok, ok]).decision == NON_INFERIOR
    assert iut_decision([ok, bad]).decision == NOT_DEMONSTRATED
    with pytest.raises(ValueError):
        iut_decision([])


@given(st.lists(st.booleans(), min_size=1, max_size=6))
def test_iut_is_conjunction(flags):
    comps = [_result(NON_INFERIOR if f else NOT_DEMONSTRATED) for f in flags]
    res = iut_decision(comps)
    assert res.non_inferior == all(flags)
    assert res.to_dict()["decision"] == res.decision
    assert len(res.components) == len(flags)
