"""Packet-level model of the three access architectures.

Downstream: core -> OLT resource -> feeder -> ONU -> per-user drop.
Upstream:   user -> drop -> ONU queue -> feeder -> OLT -> core.

Chains of FIFO stages are evaluated in closed form when a packet is sent
(each stage sees its arrivals in time order); only stages with non-FIFO
service (polling, the transceiver pool) and endpoint deliveries that need a
reaction cost events.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional

from ..sim.engine import Engine, to_ps, tx_time_ps
from .config import ArchitectureConfig, Kind
from .dba import Grant, dba_grant_cycle
from .links import Activity, FifoLink, propagation_delay
from .pool import TransceiverState, assign_transceiver

DOWN, UP = 0, 1
MAX_PACKET_BYTES = 1600


class Packet:
    __slots__ = ("size", "user", "onu", "t_in", "t_enq", "on_deliver", "on_drop",
                 "ctx", "immediate", "direction")

    def __init__(self, size: int, user: int, on_deliver: Optional[Callable] = None,
                 on_drop: Optional[Callable] = None, ctx=None, immediate: bool = False):
        self.size = size
        self.user = user
        self.onu = -1
        self.t_in = 0
        self.t_enq = 0
        self.on_deliver = on_deliver
        self.on_drop = on_drop
        self.ctx = ctx
        self.immediate = immediate
        self.direction = DOWN


@dataclass
class MacRow:
    onu: int
    bytes_in: int = 0
    bytes_out: int = 0
    drops: int = 0
    injected: int = 0
    delivered: int = 0
    late: int = 0  # delivery scheduled after the run end
    qdelay_sum: int = 0
    qdelay_n: int = 0
    delay_sum: int = 0  # OLT <-> ONU access delay of delivered packets
    delay_n: int = 0

    @property
    def mean_queue_delay_s(self) -> float:
        return self.qdelay_sum / self.qdelay_n / 1e12 if self.qdelay_n else 0.0

    @property
    def mean_access_delay_s(self) -> float:
        return self.delay_sum / self.delay_n / 1e12 if self.delay_n else math.nan


class _UpQueue:
    __slots__ = ("onu", "q", "bytes", "parked", "t_report", "saturated", "sat_size",
                 "sat_sent")

    def __init__(self, onu: int):
        self.onu = onu
        self.q: deque[Packet] = deque()
        self.bytes = 0
        self.parked = True
        self.t_report = 0
        self.saturated = False
        self.sat_size = 1500
        self.sat_sent = 0

    def bytes_before(self, t: int) -> int:
        if self.saturated:
            return 1 << 40
        total = 0
        for p in self.q:
            if p.t_enq > t:
                break
            total += p.size
        return total


class PollingChannel:
    """One shared upstream channel (TDM-PON feeder or one hybrid wavelength)."""

    def __init__(self, net: "Network", onus: list[int], wavelength: Optional[int]):
        self.net = net
        self.onus = onus
        self.wavelength = wavelength
        self.free: Optional[int] = None
        self.grants: Optional[list[Grant]] = [] if net.log_grants else None
        self.rx_activity = Activity()

    def _reserve(self, g: Grant) -> None:
        guard = self.net.guard
        if self.free is not None:
            assert g.start >= self.free + guard, "overlapping upstream bursts"
        self.free = g.end
        if self.grants is not None:
            self.grants.append(g)

    def wake(self, uq: _UpQueue, t_arrival: int) -> None:
        """Schedule the next report of a parked ONU that now has data."""
        net = self.net
        rtt = net.rtt
        uq.parked = False
        # virtual zero-length polls recur every round trip while parked
        k = max(1, math.ceil((t_arrival + net.prop - uq.t_report) / rtt)) if rtt else 1
        t_next = max(uq.t_report + k * rtt, net.engine.now)
        if self.free is not None:
            t_next = max(t_next, self.free + net.guard)
        self._reserve(Grant(uq.onu, t_next, 0, 0, self.wavelength))
        net.engine.schedule(t_next, self.on_report, uq, target=f"onu/{uq.onu}", kind="report")

    def on_report(self, uq: _UpQueue) -> None:
        net = self.net
        now = net.engine.now
        report = uq.bytes_before(now - net.prop)
        if report == 0:
            uq.parked = True
            uq.t_report = now
            if uq.q:
                self.wake(uq, uq.q[0].t_enq)
            return
        (g,) = dba_grant_cycle(
            [(uq.onu, report)], {uq.onu: net.rtt}, now,
            rate=net.access_rate, guard=net.guard, max_grant=net.cfg.max_grant_bytes,
            channel_free=self.free, wavelength=self.wavelength)
        self._reserve(g)
        net.engine.schedule(g.start, self.on_burst, uq, g, target=f"onu/{uq.onu}", kind="burst")

    def on_burst(self, uq: _UpQueue, g: Grant) -> None:
        net = self.net
        prop = net.prop
        s_onu = g.start - prop
        rate = net.access_rate
        used = 0
        row = net.mac[UP][uq.onu]
        if uq.saturated:
            n = g.length // uq.sat_size
            used = n * uq.sat_size
            uq.sat_sent += used
        else:
            q = uq.q
            while q:
                p = q[0]
                if p.t_enq > s_onu or used + p.size > g.length:
                    break
                q.popleft()
                uq.bytes -= p.size
                t_tx = s_onu + tx_time_ps(used, rate)
                used += p.size
                arr_olt = g.start + tx_time_ps(used, rate)
                row.qdelay_sum += t_tx - p.t_enq
                row.qdelay_n += 1
                net._deliver_up(p, arr_olt, arr_olt - p.t_enq)
        if used:
            end = g.start + tx_time_ps(used, rate)
            self.rx_activity.add(g.start, end)
            net.onu_activity[uq.onu].add(s_onu, end - prop)
        net.engine.schedule(g.end, self.on_report, uq, target=f"onu/{uq.onu}", kind="report")


class TransceiverPool:
    """Downstream service of hybrid wavelengths by K tunable transceivers."""

    def __init__(self, net: "Network"):
        cfg = net.cfg
        self.net = net
        self.state = [TransceiverState(i, current_wavelength=i) for i in range(cfg.transceiver_pool)]
        self.activity = [Activity() for _ in self.state]
        self.queues: list[deque[Packet]] = [deque() for _ in range(cfg.wavelength_count)]
        self.qbytes = [0] * cfg.wavelength_count
        self.tuning = to_ps(cfg.tuning_time)
        self.retunes = 0
        self.log: Optional[list] = [] if net.log_grants else None

    def on_arrival(self, p: Packet) -> None:
        net = self.net
        net._pending[DOWN][p.onu] -= 1
        w = net.cfg.wavelength_of(p.onu)
        if self.qbytes[w] + p.size > net.cfg.buffer_bytes:
            net._drop(p)
            return
        p.t_enq = net.engine.now
        self.queues[w].append(p)
        self.qbytes[w] += p.size
        self.dispatch()

    def dispatch(self) -> None:
        net = self.net
        now = net.engine.now
        for t in self.state:
            if t.busy_until <= now:
                break
        else:
            return
        ages = {w: now - q[0].t_enq for w, q in enumerate(self.queues) if q}
        if not ages:
            return
        decisions = assign_transceiver(
            self.state, ages, now, self.tuning, net.cfg.pool_policy,
            queue_bytes=self.qbytes)
        for a in decisions:
            t = self.state[a.transceiver]
            if t.current_wavelength != a.wavelength:
                self.retunes += 1
            p = self.queues[a.wavelength].popleft()
            self.qbytes[a.wavelength] -= p.size
            end = a.transmit_start + tx_time_ps(p.size, net.access_rate)
            t.current_wavelength = a.wavelength
            t.busy_until = end
            t.powered = "active"
            self.activity[t.id].add(now, end)
            if self.log is not None:
                self.log.append((t.id, a.wavelength, a.transmit_start, end))
            net.mac[DOWN][p.onu].qdelay_sum += a.transmit_start - p.t_enq
            net.mac[DOWN][p.onu].qdelay_n += 1
            net._pending[DOWN][p.onu] += 1
            net.engine.schedule(end, self.on_tx_done, p, a.transmit_start,
                                target=f"trx/{t.id}", kind="tx")

    def on_tx_done(self, p: Packet, t_start: int) -> None:
        net = self.net
        net._pending[DOWN][p.onu] -= 1
        now = net.engine.now
        net.onu_activity[p.onu].add(t_start + net.prop, now + net.prop)
        net._to_user(p, now + net.prop)
        self.dispatch()


class Network:
    """Instantiated architecture bound to one engine."""

    def __init__(self, cfg: ArchitectureConfig, engine: Engine, t_end: int,
                 core_delay: int = 0, log_grants: bool = False):
        if cfg.max_grant_bytes < MAX_PACKET_BYTES and cfg.kind is not Kind.POINT_TO_POINT:
            raise ValueError(
                f"max_grant_bytes ({cfg.max_grant_bytes}) below the largest packet "
                f"({MAX_PACKET_BYTES} B)")
        self.cfg = cfg
        self.engine = engine
        self.t_end = t_end
        self.core_delay = core_delay
        self.log_grants = log_grants
        self.prop = to_ps(propagation_delay(cfg.feeder_length_km, cfg.group_velocity))
        self.rtt = 2 * self.prop
        self.guard = to_ps(cfg.guard_time)
        self.access_rate = cfg.access_rate
        n, users = cfg.onu_count, cfg.user_count
        buf = cfg.buffer_bytes

        self.onu_of_user = [u // cfg.users_per_onu for u in range(users)]
        self.onu_activity = [Activity() for _ in range(n)]
        self.mac = [[MacRow(i) for i in range(n)], [MacRow(i) for i in range(n)]]
        self._pending = [[0] * n, [0] * n]
        self.dist_down = [FifoLink(cfg.drop_rate, buf, self.onu_activity[self.onu_of_user[u]])
                          for u in range(users)]
        self.dist_up = [FifoLink(cfg.drop_rate, buf, self.onu_activity[self.onu_of_user[u]])
                        for u in range(users)]

        self.p2p_down = self.p2p_up = None
        self.feeder_down = None
        self.channels: list[PollingChannel] = []
        self.pool: Optional[TransceiverPool] = None
        self.upq: list[_UpQueue] = []
        if cfg.kind is Kind.POINT_TO_POINT:
            self.olt_activity = [Activity() for _ in range(n)]
            self.p2p_down = [FifoLink(self.access_rate, buf, self.olt_activity[i]) for i in range(n)]
            self.p2p_up = [FifoLink(self.access_rate, buf) for i in range(n)]
        elif cfg.kind is Kind.TDM_PON:
            self.olt_activity = [Activity()]
            self.feeder_down = FifoLink(self.access_rate, buf, self.olt_activity[0])
        else:
            self.pool = TransceiverPool(self)
            self.olt_activity = self.pool.activity
        if cfg.kind is not Kind.POINT_TO_POINT:
            self.upq = [_UpQueue(i) for i in range(n)]
            w_count = cfg.wavelength_count if cfg.kind is Kind.HYBRID else 1
            for w in range(w_count):
                onus = [i for i in range(n) if cfg.wavelength_of(i) == w]
                self.channels.append(
                    PollingChannel(self, onus, w if cfg.kind is Kind.HYBRID else None))
            if cfg.kind is Kind.TDM_PON:
                # the single OLT transceiver also receives the upstream bursts
                self.channels[0].rx_activity = self.olt_activity[0]

    # -- bookkeeping ---------------------------------------------------------

    def _drop(self, p: Packet) -> None:
        row = self.mac[p.direction][p.onu]
        row.drops += 1
        if p.on_drop is not None:
            p.on_drop(self.engine.now, p)

    def _finish(self, p: Packet, t: int, access_delay: int) -> None:
        row = self.mac[p.direction][p.onu]
        if t <= self.t_end:
            row.delivered += 1
            row.bytes_out += p.size
            row.delay_sum += access_delay
            row.delay_n += 1
        else:
            row.late += 1
        if p.on_deliver is not None:
            if p.immediate:
                p.on_deliver(t, p)
            elif t <= self.t_end:
                self.engine.schedule(t, p.on_deliver, t, p, target=f"user/{p.user}", kind="rx")

    # -- downstream ----------------------------------------------------------

    def send_down(self, p: Packet) -> None:
        """Server hands a packet for user `p.user` to the core at the current time."""
        now = self.engine.now
        p.direction = DOWN
        p.onu = onu = self.onu_of_user[p.user]
        row = self.mac[DOWN][onu]
        row.injected += 1
        row.bytes_in += p.size
        t_olt = now + self.core_delay
        p.t_in = t_olt
        if self.pool is not None:
            self._pending[DOWN][onu] += 1
            self.engine.schedule(t_olt, self.pool.on_arrival, p, target="olt", kind="arrive")
            return
        link = self.p2p_down[onu] if self.p2p_down is not None else self.feeder_down
        res = link.send(t_olt, p.size)
        if res is None:
            self._drop(p)
            return
        start, dep = res
        row.qdelay_sum += start - t_olt
        row.qdelay_n += 1
        self.onu_activity[onu].add(start + self.prop, dep + self.prop)
        self._to_user(p, dep + self.prop)

    def _to_user(self, p: Packet, t_onu: int) -> None:
        access_delay = t_onu - p.t_in
        res = self.dist_down[p.user].send(t_onu, p.size)
        if res is None:
            self._drop(p)
            return
        self._finish(p, res[1], access_delay)

    # -- upstream ------------------------------------------------------------

    def send_up(self, p: Packet) -> None:
        """User hands a packet for the server to its drop at the current time."""
        now = self.engine.now
        p.direction = UP
        p.onu = onu = self.onu_of_user[p.user]
        row = self.mac[UP][onu]
        row.injected += 1
        row.bytes_in += p.size
        res = self.dist_up[p.user].send(now, p.size)
        if res is None:
            self._drop(p)
            return
        t_onu = res[1]
        p.t_in = t_onu
        if self.p2p_up is not None:
            res = self.p2p_up[onu].send(t_onu, p.size)
            if res is None:
                self._drop(p)
                return
            start, dep = res
            row.qdelay_sum += start - t_onu
            row.qdelay_n += 1
            self.onu_activity[onu].add(start, dep)
            self.olt_activity[onu].add(start + self.prop, dep + self.prop)
            self._deliver_up(p, dep + self.prop, dep + self.prop - t_onu)
        else:
            self._pending[UP][onu] += 1
            self.engine.schedule(t_onu, self._enqueue_up, p, target=f"onu/{onu}", kind="enqueue")

    def _enqueue_up(self, p: Packet) -> None:
        onu = p.onu
        self._pending[UP][onu] -= 1
        uq = self.upq[onu]
        if uq.bytes + p.size > self.cfg.buffer_bytes:
            self._drop(p)
            return
        p.t_enq = self.engine.now
        uq.q.append(p)
        uq.bytes += p.size
        if uq.parked:
            self.channels[self.cfg.wavelength_of(onu) if self.pool else 0].wake(uq, p.t_enq)

    def _deliver_up(self, p: Packet, t_olt: int, access_delay: int) -> None:
        self._finish(p, t_olt + self.core_delay, access_delay)

    # -- control -------------------------------------------------------------

    def saturate_upstream(self, onu: int, packet_size: int = 1500) -> None:
        """Give an ONU an infinite upstream backlog (for capacity tests)."""
        uq = self.upq[onu]
        uq.saturated = True
        uq.sat_size = packet_size
        if uq.parked:
            self.channels[self.cfg.wavelength_of(onu) if self.pool else 0].wake(uq, self.engine.now)

    def resident(self, direction: int, onu: int) -> int:
        n = self._pending[direction][onu] + self.mac[direction][onu].late
        if direction == UP and self.upq:
            n += len(self.upq[onu].q)
        if direction == DOWN and self.pool is not None:
            w = self.cfg.wavelength_of(onu)
            n += sum(1 for p in self.pool.queues[w] if p.onu == onu)
        return n

    def grant_log(self) -> list[Grant]:
        out: list[Grant] = []
        for ch in self.channels:
            out.extend(ch.grants or [])
        return out


def build_network(config: ArchitectureConfig, engine: Engine, t_end: int,
                  core_delay: int = 0, log_grants: bool = False) -> Network:
    config.validate()
    return Network(config, engine, t_end, core_delay=core_delay, log_grants=log_grants)
