import dataclasses

import pytest
from scipy import stats as sps

from ngoa.architectures import ArchitectureConfig
from ngoa.ecr import (
    ABOVE_GRID, BELOW_GRID, CANDIDATE, MBPS, REFERENCE, VALUE, EcrError, EcrRequest, Pairing,
    RunCache, Search, arm_specs, clip_grid, compute_ecr, default_metrics, evaluate_rate,
    traffic_path,
)
from ngoa.qoe import PAGE_DELAY
from ngoa.stats import Direction, InsufficientSamplesError, MetricSpec

PAGE_ONLY = (MetricSpec(PAGE_DELAY, Direction.SMALLER_BETTER, 0.10, relative=True),)


@pytest.fixture(scope="module")
def busy(traffic):
    # web only, frequent sessions: every replication has pages within seconds
    return dataclasses.replace(traffic, session_rate=600.0, web_fraction=1.0)


def p2p(rate, n=4):
    return ArchitectureConfig(kind="point_to_point", onu_count=n, line_rate=rate)


def request(candidate, traffic, grid, **kw):
    base = dict(candidate=candidate, traffic=traffic, duration=30.0, warmup=3.0,
                rate_grid=tuple(r * MBPS for r in grid), metrics=PAGE_ONLY, replications=4)
    base.update(kw)
    return EcrRequest(**base)


def test_request_validation(busy):
    with pytest.raises(ValueError, match="replications"):
        request(p2p(100e6), busy, (10,), replications=2)
    with pytest.raises(ValueError, match="increasing"):
        request(p2p(100e6), busy, (50, 10))
    with pytest.raises(ValueError, match="empty"):
        request(p2p(100e6), busy, ())


def test_evaluate_rate_needs_three_replications(busy):
    with pytest.raises(InsufficientSamplesError):
        evaluate_rate(p2p(100e6), 100e6, PAGE_ONLY, 0.05, 2, 1,
                      traffic=busy, duration=10.0, warmup=1.0)


def test_default_metrics_and_grid_values():
    pd, dfr = default_metrics()
    assert (pd.name, pd.margin, pd.relative) == ("page_delay", 0.10, True)
    assert (dfr.name, dfr.margin, dfr.relative) == ("dfr", 0.02, False)
    assert EcrRequest.__dataclass_fields__["rate_grid"].default == tuple(
        r * MBPS for r in (10, 25, 50, 100, 155, 300, 622, 1000))


def test_traffic_paths_pair_arms_under_crn():
    crn = Pairing.COMMON_RANDOM_NUMBERS
    assert traffic_path(CANDIDATE, 3, crn) == traffic_path(REFERENCE, 3, crn) == "rep/3"
    assert traffic_path(CANDIDATE, 3, Pairing.INDEPENDENT) != traffic_path(REFERENCE, 3, "independent")


def test_clip_grid():
    tdm = ArchitectureConfig(kind="tdm_pon", onu_count=8, feeder_rate=1e9, distribution_rate=100e6)
    assert tdm.ecr_bound == 100e6
    clipped = clip_grid(EcrRequest.__dataclass_fields__["rate_grid"].default, tdm.ecr_bound)
    assert max(clipped) == 100e6 and len(clipped) == 4


def test_empty_clipped_grid_rejected(busy):
    with pytest.raises(ValueError, match="bound"):
        compute_ecr(request(p2p(5e6), busy, (10, 20)))


def test_matched_point_to_point_is_non_inferior(busy):
    d = evaluate_rate(p2p(100e6), 100e6, PAGE_ONLY, 0.05, 4, 1,
                      traffic=busy, duration=30.0, warmup=3.0)
    assert d.non_inferior
    assert d.samples[CANDIDATE] == d.samples[REFERENCE]


def test_much_faster_reference_not_demonstrated(busy):
    # a loaded 2 Mb/s circuit queues far longer than a 1 Gb/s one
    d = evaluate_rate(p2p(2e6), 1e9, PAGE_ONLY, 0.05, 4, 1,
                      traffic=busy, duration=30.0, warmup=3.0)
    assert not d.non_inferior
    c, r = d.samples[CANDIDATE][PAGE_DELAY], d.samples[REFERENCE][PAGE_DELAY]
    assert min(c) > 1.2 * max(r)


def test_overload_is_below_grid(busy):
    tdm = ArchitectureConfig(kind="tdm_pon", onu_count=8, feeder_rate=10e6, distribution_rate=100e6)
    res = compute_ecr(request(tdm, busy, (10,)))
    assert res.status == BELOW_GRID and res.ecr is None
    assert len(res.decisions) == 1


def test_tdm_ecr_respects_bound_and_scan(busy):
    tdm = ArchitectureConfig(kind="tdm_pon", onu_count=4, feeder_rate=1e9, distribution_rate=20e6)
    res = compute_ecr(request(tdm, busy, (2, 5, 10, 20, 50, 100)))
    assert res.clipped_grid == tuple(r * MBPS for r in (2, 5, 10, 20))
    assert res.ecr is None or res.ecr <= min(tdm.feeder_rate, tdm.distribution_rate)
    evaluated = [d.rate for d in res.decisions]
    assert evaluated == sorted(evaluated)
    assert all(d.non_inferior for d in res.decisions[:-1])
    if res.status == VALUE:
        assert all(d.non_inferior for d in res.decisions if d.rate <= res.ecr)


def test_deterministic(busy):
    tdm = ArchitectureConfig(kind="tdm_pon", onu_count=4, feeder_rate=20e6, distribution_rate=20e6)
    req = request(tdm, busy, (2, 5, 10, 20))
    assert compute_ecr(req).to_dict() == compute_ecr(req).to_dict()


def test_parallel_cache_matches_serial(busy):
    tdm = ArchitectureConfig(kind="tdm_pon", onu_count=4, feeder_rate=20e6, distribution_rate=20e6)
    req = request(tdm, busy, (5, 20), duration=15.0)
    assert compute_ecr(req, RunCache(2)).to_dict() == compute_ecr(req, RunCache(1)).to_dict()


def test_cache_shares_equal_circuits(busy):
    cache = RunCache()
    cand = p2p(100e6)
    compute_ecr(request(cand, busy, (50, 100)), cache)
    # candidate runs plus one reference rate; the 100 Mb/s reference is the candidate itself
    assert cache.executed == 2 * 4


def test_binary_search_agrees_on_monotone_case(busy):
    cand = p2p(100e6)
    grid = (10, 25, 50, 75, 100)
    scan = compute_ecr(request(cand, busy, grid))
    binary = compute_ecr(request(cand, busy, grid, search=Search.BINARY))
    assert scan.ecr == binary.ecr == 100e6
    assert len(binary.decisions) < len(scan.decisions)


def test_above_grid_when_grid_tops_out_below_bound(busy):
    res = compute_ecr(request(p2p(100e6), busy, (10, 25)))
    assert res.status == ABOVE_GRID and res.ecr is None
    assert res.largest_passing == 25e6


def test_missing_metric_names_arm_and_replication(busy):
    metrics = default_metrics()  # DFR has no video sessions to measure
    with pytest.raises(EcrError) as err:
        evaluate_rate(p2p(100e6), 100e6, metrics, 0.05, 3, 1,
                      traffic=busy, duration=10.0, warmup=1.0)
    assert err.value.arm == CANDIDATE and err.value.replication == 0
    assert "100 Mb/s" in str(err.value) and "dfr" in str(err.value)


def test_reference_page_delay_decreases_with_rate(busy):
    cache = RunCache()
    rates = (2e6, 5e6, 20e6)
    delays = []
    for r in rates:
        specs = arm_specs(p2p(r), REFERENCE, busy, 30.0, 3.0, 8, 1,
                          Pairing.COMMON_RANDOM_NUMBERS, PAGE_ONLY)
        delays.append([x.qoe[PAGE_DELAY] for x in cache.run_many(specs)])
    for slow, fast in zip(delays, delays[1:]):
        res = sps.ttest_rel(slow, fast, alternative="greater")
        assert res.pvalue < 0.01


def test_sample_rows_cover_both_arms(busy):
    res = compute_ecr(request(p2p(100e6), busy, (50, 100)))
    rows = res.sample_rows()
    assert {r["arm"] for r in rows} == {CANDIDATE, REFERENCE}
    assert len(rows) == 2 * 2 * 4
