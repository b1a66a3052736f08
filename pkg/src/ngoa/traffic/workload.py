"""Drives sessions from the behaviour layer through the application models."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..architectures.network import Network, Packet
from ..qoe import FrameReceipt, PageTrace
from ..sim.engine import PS_PER_S, to_ps
from ..sim.rng import derive_stream
from .profiles import UserProfile, next_session_time
from .transport import Transfer, TransportConfig, segment_object, send_request
from .video import VideoModel, generate_gop_schedule
from .web import WebModel, generate_session


@dataclass(frozen=True)
class TrafficConfig:
    profiles: dict  # user class -> 24 multipliers
    session_rate: float = 30.0  # sessions / hour / user
    web_fraction: float = 0.8
    business_fraction: float = 0.0
    start_hour: float = 20.0
    web: WebModel = WebModel()
    video: VideoModel = VideoModel()
    transport: TransportConfig = TransportConfig()

    def user_profile(self, user: int, user_count: int) -> UserProfile:
        n_business = round(self.business_fraction * user_count)
        cls = "business" if user < n_business else "residential"
        return UserProfile(cls, self.profiles[cls], self.session_rate, self.web_fraction)


class _Frame:
    __slots__ = ("index", "ftype", "gop", "deadline", "segments", "ok")

    def __init__(self, index, ftype, gop, deadline, segments):
        self.index = index
        self.ftype = ftype
        self.gop = gop
        self.deadline = deadline
        self.segments = segments
        self.ok = 0


@dataclass
class VideoStreamRecord:
    request: float
    frames: list = field(default_factory=list)


class Workload:
    """Session arrivals and application behaviour of every user in one run.

    `traffic_path` prefixes every stream label, so two runs sharing it see
    the same workload (common random numbers).
    """

    def __init__(self, net: Network, cfg: TrafficConfig, root_seed: int, traffic_path: str):
        self.net = net
        self.engine = net.engine
        self.cfg = cfg
        self.root_seed = root_seed
        self.path = traffic_path.rstrip("/")
        self.day_offset = cfg.start_hour * 3600.0
        self.pages: list[PageTrace] = []
        self._open_pages: dict[int, float] = {}
        self._page_ids = 0
        self.videos: list[VideoStreamRecord] = []
        self.sessions = 0
        users = net.cfg.user_count
        self.profiles = [cfg.user_profile(u, users) for u in range(users)]
        self.arrival_streams = [derive_stream(root_seed, f"{self.path}/user/{u}/arrivals")
                                for u in range(users)]
        self.session_count = [0] * users
        self.gop_schedule = generate_gop_schedule(cfg.video)

    def start(self) -> None:
        for u in range(len(self.profiles)):
            self._schedule_arrival(u)

    def _schedule_arrival(self, u: int) -> None:
        t = next_session_time(self.profiles[u], self.engine.now, self.arrival_streams[u],
                              self.day_offset)
        if t is not None and t <= self.net.t_end:
            self.engine.schedule(t, self._on_session, u, target=f"user/{u}", kind="session")

    def _on_session(self, u: int) -> None:
        stream = self.arrival_streams[u]
        is_web = stream.uniform() < self.profiles[u].mix
        j = self.session_count[u]
        self.session_count[u] += 1
        self.sessions += 1
        content = derive_stream(self.root_seed, f"{self.path}/user/{u}/session/{j}")
        if is_web:
            self._next_page(u, generate_session(self.cfg.web, content), 0)
        else:
            self._start_video(u)
        self._schedule_arrival(u)

    # -- web -----------------------------------------------------------------

    def _next_page(self, u: int, pages: list, i: int) -> None:
        if i >= len(pages):
            return
        page = pages[i]
        pid = self._page_ids
        self._page_ids += 1
        self._open_pages[pid] = self.engine.now / PS_PER_S
        net, tcfg = self.net, self.cfg.transport

        def finished(t):
            self.pages.append(PageTrace(self._open_pages.pop(pid), t / PS_PER_S))
            delay = to_ps(page.think)
            if self.engine.now + delay <= net.t_end:
                self.engine.schedule(self.engine.now + delay, self._next_page, u, pages, i + 1,
                                     target=f"user/{u}", kind="think")

        def embedded_requested(t):
            Transfer(net, tcfg, u, list(page.embedded), finished).start()

        def main_done(t):
            if page.embedded:
                send_request(net, tcfg, u, embedded_requested)
            else:
                finished(t)

        def main_requested(t):
            Transfer(net, tcfg, u, [page.main], main_done).start()

        send_request(net, tcfg, u, main_requested)

    # -- video ---------------------------------------------------------------

    def _start_video(self, u: int) -> None:
        rec = VideoStreamRecord(self.engine.now / PS_PER_S)
        self.videos.append(rec)
        send_request(self.net, self.cfg.transport, u,
                     lambda t: self._emit_frame(u, rec, self.engine.now, 0))

    def _emit_frame(self, u: int, rec: VideoStreamRecord, t0: int, slot: int) -> None:
        sched = self.gop_schedule
        model = self.cfg.video
        tcfg = self.cfg.transport
        f = sched[slot]
        now = self.engine.now
        segs = segment_object(model.size_of(f.ftype), tcfg.mtu_payload)
        frame = _Frame(f.index, f.ftype, f.gop, now + to_ps(model.playout_delay), len(segs))
        rec.frames.append(frame)
        for s in segs:
            self.net.send_down(Packet(s.payload + tcfg.udp_header_bytes, u,
                                      on_deliver=_frame_segment, ctx=frame, immediate=True))
        if slot + 1 < len(sched):
            t_next = t0 + to_ps(sched[slot + 1].t_emit)
            if t_next <= self.net.t_end:
                self.engine.schedule(t_next, self._emit_frame, u, rec, t0, slot + 1,
                                     target=f"user/{u}", kind="frame")

    # -- results -------------------------------------------------------------

    def page_traces(self) -> list[PageTrace]:
        open_ = [PageTrace(t, None) for t in self._open_pages.values()]
        return sorted(self.pages + open_)

    def frame_receipts(self, warmup: float, t_end: int) -> list[FrameReceipt]:
        """Frames of streams requested after warm-up whose deadline fell inside the run."""
        out = []
        for sid, rec in enumerate(self.videos):
            if rec.request < warmup:
                continue
            for fr in rec.frames:
                if fr.deadline <= t_end:
                    out.append(FrameReceipt(fr.index, fr.ftype, fr.gop,
                                            fr.ok == fr.segments, sid))
        return out


def _frame_segment(t: int, pkt: Packet) -> None:
    fr = pkt.ctx
    if t <= fr.deadline:
        fr.ok += 1
