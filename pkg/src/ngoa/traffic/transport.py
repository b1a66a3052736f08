"""Abstract reliable transport: fixed window, acknowledgment clocked.

Lost segments (or lost acknowledgments) are resent one retransmission
timeout after the loss; there is no congestion control.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

from ..architectures.network import Network, Packet
from ..sim.engine import to_ps


@dataclass(frozen=True)
class TransportConfig:
    window: int = 16
    mtu_payload: int = 1460
    header_bytes: int = 40
    ack_bytes: int = 40
    udp_header_bytes: int = 28
    request_bytes: int = 400
    core_rtt: float = 0.010
    rto: float = 0.200

    def __post_init__(self):
        if self.window < 1 or self.mtu_payload < 1:
            raise ValueError("window and mtu_payload must be >= 1")
        if self.core_rtt < 0 or self.rto <= 0:
            raise ValueError("core_rtt must be >= 0 and rto > 0")


class Segment(NamedTuple):
    flow: int
    seq: int
    payload: int
    ref: object = None


def segment_object(size: int, mtu_payload: int, flow: int = 0, first_seq: int = 0,
                   ref: object = None) -> list[Segment]:
    if size < 1 or mtu_payload < 1:
        raise ValueError("size and mtu_payload must be >= 1")
    full, rest = divmod(size, mtu_payload)
    sizes = [mtu_payload] * full + ([rest] if rest else [])
    return [Segment(flow, first_seq + i, s, ref) for i, s in enumerate(sizes)]


class Transfer:
    """Server-to-user transfer of one or more objects over one connection."""

    __slots__ = ("net", "cfg", "user", "sizes", "on_complete", "next", "received",
                 "acked", "nrecv", "rto", "done")

    def __init__(self, net: Network, cfg: TransportConfig, user: int, objects: list[int],
                 on_complete: Callable[[int], None]):
        self.net = net
        self.cfg = cfg
        self.user = user
        self.sizes = [s.payload for size in objects for s in segment_object(size, cfg.mtu_payload)]
        self.on_complete = on_complete
        self.next = 0
        self.received = bytearray(len(self.sizes))
        self.acked = bytearray(len(self.sizes))
        self.nrecv = 0
        self.rto = to_ps(cfg.rto)
        self.done = False

    def start(self) -> None:
        for _ in range(min(self.cfg.window, len(self.sizes))):
            self._send_next()

    def _send_next(self) -> None:
        i = self.next
        self.next += 1
        self._send(i)

    def _send(self, i: int) -> None:
        if self.acked[i]:
            return
        pkt = Packet(self.sizes[i] + self.cfg.header_bytes, self.user,
                     on_deliver=self._on_segment, on_drop=self._on_loss, ctx=i)
        self.net.send_down(pkt)

    def _on_loss(self, t: int, pkt: Packet) -> None:
        eng = self.net.engine
        eng.schedule(eng.now + self.rto, self._send, pkt.ctx, target=f"user/{self.user}", kind="rto")

    def _on_segment(self, t: int, pkt: Packet) -> None:
        i = pkt.ctx
        if not self.received[i]:
            self.received[i] = 1
            self.nrecv += 1
        ack = Packet(self.cfg.ack_bytes, self.user, on_deliver=self._on_ack,
                     on_drop=self._on_loss, ctx=i)
        self.net.send_up(ack)
        if self.nrecv == len(self.sizes) and not self.done:
            self.done = True
            self.on_complete(t)

    def _on_ack(self, t: int, pkt: Packet) -> None:
        i = pkt.ctx
        if self.acked[i]:
            return
        self.acked[i] = 1
        if self.next < len(self.sizes):
            self._send_next()


def send_request(net: Network, cfg: TransportConfig, user: int,
                 on_arrival: Callable[[int], None]) -> None:
    """Reliable single-packet request from a user to the server."""
    rto = to_ps(cfg.rto)

    def deliver(t, pkt):
        on_arrival(t)

    def lost(t, pkt):
        net.engine.schedule(net.engine.now + rto, attempt, target=f"user/{user}", kind="rto")

    def attempt():
        net.send_up(Packet(cfg.request_bytes, user, on_deliver=deliver, on_drop=lost))

    attempt()
