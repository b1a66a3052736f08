from .distributions import Dist
from .profiles import ProfileError, UserProfile, load_day_profile, next_session_time
from .transport import Segment, Transfer, TransportConfig, segment_object
from .video import ScheduledFrame, VideoModel, decode_order, generate_gop_schedule, gop_pattern
from .web import Page, WebModel, generate_page, generate_session
from .workload import TrafficConfig, Workload

__all__ = [
    "Dist", "ProfileError", "UserProfile", "load_day_profile", "next_session_time",
    "Segment", "Transfer", "TransportConfig", "segment_object",
    "ScheduledFrame", "VideoModel", "decode_order", "generate_gop_schedule", "gop_pattern",
    "Page", "WebModel", "generate_page", "generate_session",
    "TrafficConfig", "Workload",
]
