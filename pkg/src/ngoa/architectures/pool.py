"""Tunable-transceiver pool scheduling for hybrid TDM/WDM-PON."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .config import PoolPolicy


@dataclass
class TransceiverState:
    id: int
    current_wavelength: Optional[int] = None
    busy_until: int = 0
    powered: str = "active"  # "active" | "off"

    def idle(self, now: int) -> bool:
        return self.busy_until <= now


@dataclass(frozen=True)
class Assignment:
    transceiver: int
    wavelength: int
    tune_until: int
    transmit_start: int


def assign_transceiver(
    pool: Sequence[TransceiverState],
    wavelength_queues: Mapping[int, int],
    now: int,
    tuning_time: int,
    policy: PoolPolicy = PoolPolicy.OLDEST_FIRST,
    queue_bytes: Optional[Mapping[int, int]] = None,
) -> list[Assignment]:
    """Match idle transceivers to backlogged, unserved wavelengths.

    `wavelength_queues` maps each non-empty wavelength to its head-of-line
    age. Wavelengths already held by a busy transceiver are skipped. Targets
    are ranked oldest head-of-line first (or by backlog for
    ``LONGEST_QUEUE_FIRST``), ties to the lowest wavelength index; a
    transceiver already parked on a chosen wavelength takes it without
    retuning, the rest go to the remaining targets in id order.
    """
    idle = []
    held = set()
    for t in pool:
        if t.busy_until <= now:
            idle.append(t)
        else:
            held.add(t.current_wavelength)
    backlog = [w for w in wavelength_queues if w not in held]
    if not idle or not backlog:
        return []
    if policy is PoolPolicy.LONGEST_QUEUE_FIRST:
        if queue_bytes is None:
            raise ValueError("longest_queue_first needs queue_bytes")
        backlog.sort(key=lambda w: (-queue_bytes[w], w))
    else:
        backlog.sort(key=lambda w: (-wavelength_queues[w], w))
    targets = backlog[: len(idle)]

    chosen: dict[int, TransceiverState] = {}
    free = []
    idle.sort(key=lambda t: t.id)
    for t in idle:
        w = t.current_wavelength
        if w in targets and w not in chosen:
            chosen[w] = t
        else:
            free.append(t)
    free_iter = iter(free)
    out = []
    for w in targets:
        t = chosen.get(w) or next(free_iter)
        tune = 0 if t.current_wavelength == w else tuning_time
        out.append(Assignment(t.id, w, now + tune, now + tune))
    return out
