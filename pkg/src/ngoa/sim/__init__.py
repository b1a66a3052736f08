from .engine import (
    PS_PER_S,
    Engine,
    Event,
    PastEventError,
    RunSummary,
    SimulationError,
    to_ps,
    to_s,
    tx_time_ps,
)
from .rng import RngStream, derive_stream

__all__ = [
    "PS_PER_S", "Engine", "Event", "PastEventError", "RunSummary",
    "SimulationError", "to_ps", "to_s", "tx_time_ps", "RngStream", "derive_stream",
]
