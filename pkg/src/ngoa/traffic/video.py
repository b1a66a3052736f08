from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple


@dataclass(frozen=True)
class VideoModel:
    frame_rate: float = 25.0
    gop_n: int = 12
    gop_m: int = 3
    i_size: int = 25_000
    p_size: int = 10_000
    b_size: int = 4_000
    duration: float = 60.0
    playout_delay: float = 1.0

    def __post_init__(self):
        if self.gop_n < 1 or self.gop_m < 1:
            raise ValueError("GOP needs N >= 1 and M >= 1")
        if self.frame_rate <= 0:
            raise ValueError("frame_rate must be > 0")
        if self.duration < 0 or self.playout_delay < 0:
            raise ValueError("duration and playout_delay must be >= 0")

    def size_of(self, ftype: str) -> int:
        return {"I": self.i_size, "P": self.p_size, "B": self.b_size}[ftype]


def frame_type(pos: int, m: int) -> str:
    """Type of the frame at display position `pos` inside its GOP."""
    if pos == 0:
        return "I"
    return "P" if pos % m == 0 else "B"


def gop_pattern(n: int, m: int) -> str:
    return "".join(frame_type(p, m) for p in range(n))


def decode_order(n: int, m: int) -> list[int]:
    """Display positions of one closed GOP in transmission order.

    Each reference frame precedes the B frames displayed before it; B frames
    after the last reference close the GOP.
    """
    pattern = gop_pattern(n, m)
    order, pending = [], []
    for pos, t in enumerate(pattern):
        if t == "B":
            pending.append(pos)
        else:
            order.append(pos)
            order.extend(pending)
            pending = []
    return order + pending


class ScheduledFrame(NamedTuple):
    index: int  # display index within the stream
    ftype: str
    gop: int
    t_emit: float  # seconds from stream start


def generate_gop_schedule(model: VideoModel) -> list[ScheduledFrame]:
    """Frames in transmission order, one every 1/frame_rate seconds."""
    total = int(math.floor(model.duration * model.frame_rate + 1e-9))
    n, m = model.gop_n, model.gop_m
    per_gop = decode_order(n, m)
    out: list[ScheduledFrame] = []
    gop = 0
    while len(out) < total:
        for pos in per_gop:
            idx = gop * n + pos
            if idx < total:
                out.append(ScheduledFrame(idx, frame_type(pos, m), gop, 0.0))
        gop += 1
    return [f._replace(t_emit=slot / model.frame_rate) for slot, f in enumerate(out)]
