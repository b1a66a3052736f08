"""Limited-service interleaved polling (IPACT-style) grant sizing."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from ..sim.engine import tx_time_ps


@dataclass(frozen=True)
class Grant:
    """Upstream burst window, timed as seen at the OLT receiver."""

    onu: int
    start: int  # ps, first bit arrives at OLT
    length: int  # bytes
    duration: int  # ps
    wavelength: Optional[int] = None

    @property
    def end(self) -> int:
        return self.start + self.duration


def dba_grant_cycle(
    reports: Sequence[tuple[int, int]] | Mapping[int, int],
    rtts: Mapping[int, int],
    now: int,
    *,
    rate: int,
    guard: int,
    max_grant: int,
    channel_free: Optional[int] = None,
    wavelength: Optional[int] = None,
) -> list[Grant]:
    """Size and sequence one round of grants.

    `reports` are (onu, queued bytes) in polling order. Each grant is
    ``min(report, max_grant)``; bursts follow each other on the shared channel
    separated by exactly `guard` unless an ONU's round trip forces a later
    start. `channel_free` is the end of the last burst already scheduled.
    """
    items = list(reports.items()) if isinstance(reports, Mapping) else list(reports)
    grants: list[Grant] = []
    prev_end = channel_free
    for onu, report in items:
        if report < 0:
            raise ValueError(f"negative report from ONU {onu}")
        length = min(report, max_grant)
        earliest = now + rtts[onu]
        start = earliest if prev_end is None else max(earliest, prev_end + guard)
        duration = tx_time_ps(length, rate)
        grants.append(Grant(onu, start, length, duration, wavelength))
        prev_end = start + duration
    return grants
