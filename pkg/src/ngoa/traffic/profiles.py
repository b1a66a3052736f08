"""User-behaviour layer: day profiles and session arrivals."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from ..sim.engine import PS_PER_S, to_ps
from ..sim.rng import RngStream

HOURS = 24
SECONDS_PER_HOUR = 3600.0


class ProfileError(ValueError):
    pass


def load_day_profile(source: str | Path) -> tuple[float, ...]:
    """Read a 24-line multiplier file. ``builtin:<name>`` loads a shipped shape."""
    source = str(source)
    if source.startswith("builtin:"):
        name = source.split(":", 1)[1]
        try:
            text = resources.files("ngoa.traffic.data").joinpath(f"{name}.txt").read_text()
        except FileNotFoundError:
            raise ProfileError(f"no built-in day profile {name!r}") from None
    else:
        text = Path(source).read_text()
    values = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise ProfileError(f"{source}:{lineno}: not a number: {line!r}") from None
    return tuple(values)


@dataclass(frozen=True)
class UserProfile:
    user_class: str  # "business" | "residential"
    day_profile: tuple[float, ...]
    session_rate: float  # sessions per hour, before the day multiplier
    mix: float = 0.8  # probability a session is web browsing (else video)

    def __post_init__(self):
        object.__setattr__(self, "day_profile", tuple(float(x) for x in self.day_profile))
        self.validate()

    def validate(self) -> None:
        p = self.day_profile
        if len(p) != HOURS:
            raise ProfileError(f"day profile needs {HOURS} bins, got {len(p)}")
        if any(x < 0 or not math.isfinite(x) for x in p):
            raise ProfileError("day profile multipliers must be finite and >= 0")
        if abs(math.fsum(p) / HOURS - 1.0) > 1e-9:
            raise ProfileError(f"day profile must average 1.0, got {math.fsum(p) / HOURS!r}")
        if not 0.0 <= self.mix <= 1.0:
            raise ProfileError(f"mix must lie in [0, 1], got {self.mix}")
        if self.session_rate < 0:
            raise ProfileError(f"session_rate must be >= 0, got {self.session_rate}")

    def rate_at(self, t_seconds: float, day_offset: float = 0.0) -> float:
        """Session rate (per second) at simulation time `t_seconds`."""
        hour = int((t_seconds + day_offset) // SECONDS_PER_HOUR) % HOURS
        return self.session_rate / SECONDS_PER_HOUR * self.day_profile[hour]


def next_session_time(profile: UserProfile, now: int, stream: RngStream,
                      day_offset: float = 0.0) -> Optional[int]:
    """Next arrival of the non-homogeneous Poisson session process, by thinning.

    Times are picoseconds; `day_offset` is the wall-clock second of day at
    simulation time zero. Returns None when the process has no arrivals.
    """
    peak = profile.session_rate / SECONDS_PER_HOUR * max(profile.day_profile)
    if peak <= 0:
        return None
    t = now / PS_PER_S
    while True:
        t += stream.exponential(1.0 / peak)
        if stream.uniform() * peak < profile.rate_at(t, day_offset):
            nxt = to_ps(t)
            return nxt if nxt > now else now + 1
