import itertools
import random

import pytest

from ngoa.qoe import (
    DFR, PAGE_DELAY, FrameReceipt, InsufficientDataError, PageTrace, QoeSampleSet,
    decodable_flags, decodable_frame_rate, page_delay_stats,
)
from ngoa.traffic import gop_pattern

from oracles import brute_force_decodable


def receipts(received, n, m, gop=0, stream=0):
    pattern = gop_pattern(n, m)
    return [FrameReceipt(gop * n + p, pattern[p], gop, ok, stream)
            for p, ok in enumerate(received)]


# -- page delay -------------------------------------------------------------

def test_single_page():
    assert page_delay_stats([PageTrace(0.0, 1.2)]).mean == pytest.approx(1.2)


def test_mean_of_pages():
    st = page_delay_stats([PageTrace(0.0, 1.0), PageTrace(5.0, 7.0)])
    assert st.mean == pytest.approx(1.5)
    assert st.count == 2


def test_all_censored_is_an_error():
    with pytest.raises(InsufficientDataError) as err:
        page_delay_stats([PageTrace(1.0), PageTrace(2.0)])
    assert err.value.counts["censored"] == 2


def test_warmup_and_censoring():
    st = page_delay_stats([PageTrace(1.0, 100.0), PageTrace(12.0, 13.0), PageTrace(20.0)],
                          warmup=10.0)
    assert (st.mean, st.count, st.censored) == (1.0, 1, 1)


def test_completion_before_request_rejected():
    with pytest.raises(ValueError):
        page_delay_stats([PageTrace(2.0, 1.0)])


# -- decodable frame rate ---------------------------------------------------

def test_no_loss_is_one():
    assert decodable_frame_rate(receipts([True] * 12, 12, 3), (12, 3)) == 1.0


def test_every_i_frame_lost_is_zero():
    rs = []
    for g in range(3):
        rs += receipts([False] + [True] * 11, 12, 3, gop=g)
    assert decodable_frame_rate(rs, (12, 3)) == 0.0


def test_second_p_lost():
    assert decodable_frame_rate(receipts([True, True, False, True], 4, 1), (4, 1)) == 0.5


def test_wrong_frame_type_rejected():
    with pytest.raises(ValueError, match="GOP pattern"):
        decodable_frame_rate([FrameReceipt(1, "P", 0, True)], (12, 3))


def test_no_frames_is_insufficient():
    with pytest.raises(InsufficientDataError):
        decodable_frame_rate([], (12, 3))


@pytest.mark.parametrize("n,m", [(12, 3), (12, 1), (12, 2), (12, 12), (9, 3), (7, 4), (1, 1)])
def test_matches_dependency_graph_oracle_exhaustively(n, m):
    for bits in itertools.product((False, True), repeat=n):
        got = decodable_flags(receipts(list(bits), n, m))
        assert got == brute_force_decodable(list(bits), n, m), bits


def test_partial_last_gop_and_streams_independent():
    # a trailing GOP cut short and a second stream with its own GOP numbering
    a = receipts([True] * 5, 12, 3, gop=1, stream=0)
    b = receipts([False] + [True] * 11, 12, 3, gop=1, stream=1)
    flags = decodable_flags(a + b)
    assert flags[:5] == brute_force_decodable([True] * 5, 5, 3)
    assert not any(flags[5:])


def test_monotone_under_added_losses():
    rng = random.Random(11)
    n, m = 12, 3
    for _ in range(2000):
        lost = {p for p in range(n) if rng.random() < 0.3}
        more = lost | {p for p in range(n) if rng.random() < 0.3}
        a = sum(decodable_flags(receipts([p not in lost for p in range(n)], n, m)))
        b = sum(decodable_flags(receipts([p not in more for p in range(n)], n, m)))
        assert b <= a


def test_dfr_bounds_and_identity():
    rng = random.Random(12)
    for _ in range(500):
        rec = [rng.random() < 0.9 for _ in range(24)]
        rs = receipts(rec[:12], 12, 3, 0) + receipts(rec[12:], 12, 3, 1)
        v = decodable_frame_rate(rs, (12, 3))
        assert 0.0 <= v <= 1.0
        assert (v == 1.0) == all(rec)


# -- sample sets ------------------------------------------------------------

def test_sample_set_csv_round_trip():
    s = QoeSampleSet()
    s.add(0, {PAGE_DELAY: 0.1234567890123, DFR: 0.97})
    s.add(1, {PAGE_DELAY: 0.2, DFR: 1.0})
    s.validate()
    back = QoeSampleSet.from_csv(s.to_csv())
    assert back.replications == [0, 1]
    assert back.values == s.values
    assert s.to_csv().splitlines()[0] == "replication,metric,value"


@pytest.mark.parametrize("metrics", [{PAGE_DELAY: 0.0}, {DFR: 1.5}])
def test_sample_set_rejects_out_of_range(metrics):
    s = QoeSampleSet()
    s.add(0, metrics)
    with pytest.raises(ValueError):
        s.validate()


def test_sample_set_rejects_unequal_counts():
    s = QoeSampleSet()
    s.add(0, {PAGE_DELAY: 1.0, DFR: 1.0})
    s.add(1, {PAGE_DELAY: 1.0})
    with pytest.raises(ValueError, match="samples"):
        s.validate()
