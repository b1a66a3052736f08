import io
import math
import statistics

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ngoa.sim import Engine, PastEventError, SimulationError, derive_stream, to_ps, tx_time_ps
from ngoa.sim.rng import stream_seed


def test_schedule_at_current_clock_fires():
    eng = Engine()
    fired = []
    eng.schedule(5, lambda: eng.schedule(5, fired.append, eng.now))
    eng.run_until(10)
    assert fired == [5]


def test_equal_times_fire_in_insertion_order():
    eng = Engine()
    order = []
    eng.schedule(5, order.append, "A")
    eng.schedule(5, order.append, "B")
    eng.run_until(5)
    assert order == ["A", "B"]


def test_past_event_rejected():
    eng = Engine()
    eng.run_until(5)
    with pytest.raises(PastEventError, match="past event"):
        eng.schedule(4, print)


def test_empty_queue_advances_clock():
    eng = Engine()
    summary = eng.run_until(10)
    assert summary.events_processed == 0
    assert summary.clock == 10


def test_boundary_inclusive():
    eng = Engine()
    for t in (1, 2, 3):
        eng.schedule(t, lambda: None)
    assert eng.run_until(2).events_processed == 2
    assert eng.remaining == 1


def test_handler_error_names_event():
    eng = Engine()

    def boom():
        raise KeyError("x")

    eng.schedule(7, boom, target="onu/3", kind="burst")
    with pytest.raises(SimulationError) as err:
        eng.run_until(10)
    assert err.value.event.target == "onu/3"
    assert "burst" in str(err.value)


def test_trace_lines_and_hash_are_reproducible():
    def run():
        buf = io.StringIO()
        eng = Engine(trace=buf, hash_trace=True)
        eng.schedule(3, lambda: eng.schedule_in(2, lambda: None, target="b", kind="k2"),
                     target="a", kind="k1")
        h = eng.run_until(100).trace_hash
        return buf.getvalue(), h

    (t1, h1), (t2, h2) = run(), run()
    assert h1 == h2 and h1 is not None
    assert t1 == t2 == "3\t0\ta\tk1\n5\t1\tb\tk2\n"


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 1000), max_size=60), st.integers(0, 1000),
       st.lists(st.booleans(), max_size=60))
def test_event_conservation_and_monotone_times(times, t_end, cancel_mask):
    eng = Engine()
    seen = []
    evs = [eng.schedule(t, lambda t=t: seen.append(t)) for t in times]
    for ev, c in zip(evs, cancel_mask):
        if c:
            eng.cancel(ev)
    eng.run_until(t_end)
    assert seen == sorted(seen)
    assert eng.scheduled == eng.processed + eng.cancelled + eng.remaining


def test_cancel_after_fire_is_noop():
    eng = Engine()
    ev = eng.schedule(1, lambda: None)
    eng.run_until(2)
    eng.cancel(ev)
    assert eng.cancelled == 0
    assert eng.scheduled == eng.processed + eng.cancelled + eng.remaining


def test_time_conversions():
    assert to_ps(1e-6) == 1_000_000
    assert tx_time_ps(1500, 1_000_000_000) == 12_000_000
    assert tx_time_ps(1, 3) == math.ceil(8e12 / 3)
    with pytest.raises(ValueError):
        to_ps(-1.0)


def test_stream_reproducible():
    a = derive_stream(42, "onu/0")
    b = derive_stream(42, "onu/0")
    assert [a.uniform() for _ in range(100)] == [b.uniform() for _ in range(100)]


def test_stream_paths_differ():
    a = derive_stream(42, "onu/0")
    b = derive_stream(42, "onu/1")
    assert [a.uniform() for _ in range(10)] != [b.uniform() for _ in range(10)]


def test_stream_golden_values():
    # frozen generator: a change here silently changes every published result
    s = derive_stream(42, "onu/0")
    assert stream_seed(42, "onu/0") == 73541928885407122945179916972161280938
    assert [s.uniform() for _ in range(3)] == [
        0.9045470048368832, 0.640901360858654, 0.13107411269124392]


def test_path_forms_equivalent():
    assert stream_seed(1, "a/b") == stream_seed(1, ["a", "b"]) == stream_seed(1, "/a//b/")
    assert derive_stream(1, "a").child("b").uniform() == derive_stream(1, "a/b").uniform()


def test_uniform_mean_law_of_large_numbers():
    s = derive_stream(1, "x")
    xs = s.uniforms(10**6)
    assert abs(statistics.fmean(xs) - 0.5) < 0.002
    assert min(xs) >= 0.0 and max(xs) < 1.0


def test_variates_have_expected_moments():
    s = derive_stream(7, "moments")
    n = 100_000
    exp = [s.exponential(2.0) for _ in range(n)]
    assert abs(statistics.fmean(exp) - 2.0) < 0.03
    norm = [s.normal() for _ in range(n)]
    assert abs(statistics.fmean(norm)) < 0.015
    assert abs(statistics.stdev(norm) - 1.0) < 0.015
    geo = [s.geometric(0.25) for _ in range(n)]
    assert abs(statistics.fmean(geo) - 3.0) < 0.06
    geo1 = [s.geometric(0.25, start=1) for _ in range(n)]
    assert min(geo1) == 1


def test_lognormal_mean_and_truncation():
    s = derive_stream(3, "ln")
    xs = [s.lognormal(1000.0, 1.0) for _ in range(200_000)]
    assert abs(statistics.fmean(xs) / 1000.0 - 1) < 0.03
    ys = [s.lognormal(1000.0, 1.0, upper=2000.0) for _ in range(10_000)]
    assert max(ys) <= 2000.0
    assert s.lognormal(5.0, 0.0) == 5.0
