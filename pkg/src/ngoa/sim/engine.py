"""Deterministic discrete-event engine.

Time is kept as integer picoseconds so that event ordering is exact. Events
with equal timestamps fire in insertion order.
"""
from __future__ import annotations

import hashlib
import heapq
from dataclasses import dataclass
from typing import Any, Callable, Optional, TextIO

PS_PER_S = 10**12


def to_ps(seconds: float) -> int:
    """Convert seconds to integer picoseconds (round half to even)."""
    if seconds < 0:
        raise ValueError(f"negative time: {seconds}")
    return int(round(seconds * PS_PER_S))


def to_s(ps: int) -> float:
    return ps / PS_PER_S


def tx_time_ps(nbytes: int, rate_bps: int) -> int:
    """Serialization time of `nbytes` at `rate_bps`, rounded up to a picosecond."""
    return -((-nbytes * 8 * PS_PER_S) // rate_bps)


class SimulationError(RuntimeError):
    """A handler failed; carries the offending event."""

    def __init__(self, event: "Event", cause: BaseException):
        super().__init__(
            f"handler failed at t={event.time}ps seq={event.seq} "
            f"target={event.target} kind={event.kind}: {cause!r}"
        )
        self.event = event
        self.cause = cause


class PastEventError(ValueError):
    pass


class Event:
    __slots__ = ("time", "seq", "target", "kind", "handler", "args", "cancelled")

    def __init__(self, time, seq, target, kind, handler, args):
        self.time = time
        self.seq = seq
        self.target = target
        self.kind = kind
        self.handler = handler
        self.args = args
        self.cancelled = False

    def __repr__(self):
        return f"Event({self.time}, {self.seq}, {self.target!r}, {self.kind!r})"


@dataclass(frozen=True)
class RunSummary:
    events_processed: int
    clock: int
    trace_hash: Optional[str] = None


class Engine:
    """Single-threaded event loop.

    Handlers are plain callables invoked as ``handler(*args)``; they may
    schedule further events through the engine.
    """

    def __init__(self, trace: Optional[TextIO] = None, hash_trace: bool = False):
        self.now = 0
        self._queue: list[tuple[int, int, Event]] = []
        self._seq = 0
        self.scheduled = 0
        self.processed = 0
        self.cancelled = 0
        self._trace = trace
        self._hasher = hashlib.sha256() if hash_trace else None

    def schedule(self, time: int, handler: Callable[..., Any], *args,
                 target: str = "", kind: str = "") -> Event:
        if time < self.now:
            raise PastEventError(
                f"past event: t={time}ps < clock={self.now}ps ({target} {kind})")
        ev = Event(time, self._seq, target, kind, handler, args)
        self._seq += 1
        self.scheduled += 1
        heapq.heappush(self._queue, (time, ev.seq, ev))
        return ev

    def schedule_in(self, delay: int, handler, *args, target="", kind="") -> Event:
        return self.schedule(self.now + delay, handler, *args, target=target, kind=kind)

    def cancel(self, ev: Event) -> None:
        # handler is cleared once an event has fired
        if not ev.cancelled and ev.handler is not None:
            ev.cancelled = True
            self.cancelled += 1

    @property
    def remaining(self) -> int:
        return sum(1 for _, _, ev in self._queue if not ev.cancelled)

    def run_until(self, t_end: int) -> RunSummary:
        queue = self._queue
        pop = heapq.heappop
        trace = self._trace
        hasher = self._hasher
        start = self.processed
        last = self.now
        while queue and queue[0][0] <= t_end:
            ev = pop(queue)[2]
            if ev.cancelled:
                continue
            assert ev.time >= last, "event time went backwards"
            last = ev.time
            self.now = ev.time
            if trace is not None or hasher is not None:
                line = f"{ev.time}\t{ev.seq}\t{ev.target}\t{ev.kind}\n"
                if trace is not None:
                    trace.write(line)
                if hasher is not None:
                    hasher.update(line.encode())
            self.processed += 1
            handler, ev.handler = ev.handler, None
            try:
                handler(*ev.args)
            except SimulationError:
                raise
            except Exception as exc:
                raise SimulationError(ev, exc) from exc
        self.now = max(self.now, t_end)
        return RunSummary(
            events_processed=self.processed - start,
            clock=self.now,
            trace_hash=hasher.hexdigest() if hasher is not None else None,
        )
