from .config import ArchitectureConfig, ConfigError, Kind, PoolPolicy, point_to_point_reference
from .dba import Grant, dba_grant_cycle
from .links import Activity, FifoLink, propagation_delay
from .network import DOWN, UP, MacRow, Network, Packet, build_network
from .pool import Assignment, TransceiverState, assign_transceiver

__all__ = [
    "ArchitectureConfig", "ConfigError", "Kind", "PoolPolicy", "point_to_point_reference",
    "Grant", "dba_grant_cycle", "Activity", "FifoLink", "propagation_delay",
    "DOWN", "UP", "MacRow", "Network", "Packet", "build_network",
    "Assignment", "TransceiverState", "assign_transceiver",
]
