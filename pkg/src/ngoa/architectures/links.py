from __future__ import annotations

from collections import deque
from typing import Optional

from ..sim.engine import tx_time_ps
from .config import DEFAULT_GROUP_VELOCITY


def propagation_delay(length_km: float, velocity: float = DEFAULT_GROUP_VELOCITY) -> float:
    """One-way fibre delay in seconds."""
    if length_km < 0:
        raise ValueError(f"negative fibre length: {length_km} km")
    return length_km * 1000.0 / velocity


class Activity:
    """Busy intervals of one component, in picoseconds."""

    __slots__ = ("intervals",)

    def __init__(self):
        self.intervals: list[list[int]] = []

    def add(self, start: int, end: int) -> None:
        iv = self.intervals
        if iv and iv[-1][0] <= start <= iv[-1][1]:
            if end > iv[-1][1]:
                iv[-1][1] = end
        else:
            iv.append([start, end])

    def merged(self, t_end: Optional[int] = None) -> list[tuple[int, int]]:
        out: list[list[int]] = []
        for s, e in sorted(self.intervals):
            if t_end is not None:
                if s >= t_end:
                    break
                e = min(e, t_end)
            if out and s <= out[-1][1]:
                out[-1][1] = max(out[-1][1], e)
            else:
                out.append([s, e])
        return [(s, e) for s, e in out]


class FifoLink:
    """Drop-tail FIFO transmitter evaluated without per-packet events.

    Arrivals must be offered in non-decreasing time order. That holds for
    every link fed by a single FIFO upstream stage or by sends made at the
    current event time, which is how the network uses it.
    """

    __slots__ = ("rate", "buffer_bytes", "busy_until", "_inq", "_inq_bytes",
                 "activity", "last_arrival")

    def __init__(self, rate: int, buffer_bytes: int, activity: Optional[Activity] = None):
        self.rate = int(rate)
        self.buffer_bytes = buffer_bytes
        self.busy_until = 0
        self._inq: deque = deque()
        self._inq_bytes = 0
        self.activity = activity
        self.last_arrival = 0

    def occupancy(self, t: int) -> int:
        q = self._inq
        while q and q[0][0] <= t:
            self._inq_bytes -= q.popleft()[1]
        return self._inq_bytes

    def send(self, arrival: int, nbytes: int) -> Optional[tuple[int, int]]:
        """Return (transmission start, departure) or None when dropped."""
        assert arrival >= self.last_arrival, "FIFO link arrivals out of order"
        self.last_arrival = arrival
        if self.occupancy(arrival) + nbytes > self.buffer_bytes:
            return None
        start = arrival if arrival > self.busy_until else self.busy_until
        dep = start + tx_time_ps(nbytes, self.rate)
        self.busy_until = dep
        self._inq.append((dep, nbytes))
        self._inq_bytes += nbytes
        if self.activity is not None:
            self.activity.add(start, dep)
        return start, dep
