from __future__ import annotations

from dataclasses import dataclass, field

from ..sim.rng import RngStream
from .distributions import Dist

MIB = 1 << 20


@dataclass(frozen=True)
class WebModel:
    pages: Dist = Dist("geometric1", 5.0)
    main_size: Dist = Dist("lognormal", 10 * 1024, 1.0, MIB)
    embedded_count: Dist = Dist("geometric", 5.0)
    embedded_size: Dist = Dist("lognormal", 7.5 * 1024, 1.0, MIB)
    think_time: Dist = Dist("exponential", 10.0)


@dataclass(frozen=True)
class Page:
    main: int
    embedded: tuple[int, ...]
    think: float

    @property
    def total_bytes(self) -> int:
        return self.main + sum(self.embedded)


def _size(d: Dist, stream: RngStream) -> int:
    return max(1, int(round(d.sample(stream))))


def generate_page(model: WebModel, stream: RngStream) -> Page:
    main = _size(model.main_size, stream)
    count = int(model.embedded_count.sample(stream))
    embedded = tuple(_size(model.embedded_size, stream) for _ in range(count))
    return Page(main, embedded, float(model.think_time.sample(stream)))


def generate_session(model: WebModel, stream: RngStream) -> list[Page]:
    n = max(1, int(model.pages.sample(stream)))
    return [generate_page(model, stream) for _ in range(n)]
