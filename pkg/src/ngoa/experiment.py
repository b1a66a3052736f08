"""One simulation run: network + workload + QoE + energy accounting."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

from .architectures.config import ArchitectureConfig, Kind
from .architectures.network import DOWN, UP, build_network
from .energy import (PowerProfile, PowerTimeline, component_inventory, component_states,
                     energy_report)
from .qoe import DFR, PAGE_DELAY, InsufficientDataError, decodable_frame_rate, page_delay_stats
from .sim.engine import PS_PER_S, Engine, to_ps
from .traffic.workload import TrafficConfig, Workload

DIRECTIONS = ("downstream", "upstream", "both")


@dataclass(frozen=True)
class RunSpec:
    arch: ArchitectureConfig
    traffic: TrafficConfig
    duration: float
    warmup: float
    root_seed: int
    traffic_path: str
    metrics: tuple[str, ...] = (PAGE_DELAY, DFR)
    power: Optional[PowerProfile] = None
    direction: str = "downstream"
    power_bin: float = 1.0
    hash_trace: bool = False


@dataclass
class RunResult:
    qoe: dict
    qoe_error: Optional[str]
    pages: int
    pages_censored: int
    frames: int
    sessions: int
    mac: list
    energy: Optional[dict]
    power_bins: list
    delivered_bits: int
    events: int
    trace_hash: Optional[str] = None


def mac_rows(net, direction: str) -> list[dict]:
    dirs = {"downstream": (DOWN,), "upstream": (UP,), "both": (DOWN, UP)}[direction]
    rows = []
    for onu in range(net.cfg.onu_count):
        parts = [net.mac[d][onu] for d in dirs]
        qn = sum(p.qdelay_n for p in parts)
        rows.append({
            "onu": onu,
            "bytes_in": sum(p.bytes_in for p in parts),
            "bytes_out": sum(p.bytes_out for p in parts),
            "drops": sum(p.drops for p in parts),
            "mean_queue_delay_s": sum(p.qdelay_sum for p in parts) / qn / PS_PER_S if qn else 0.0,
        })
    return rows


def power_timeline(net, profile: PowerProfile, t_end: int) -> PowerTimeline:
    cfg = net.cfg
    inv = component_inventory(cfg)
    segs: dict[str, list] = {c: [] for c in profile.classes}
    pooled = cfg.kind is Kind.HYBRID
    activity = {f"olt/{i}": a for i, a in enumerate(net.olt_activity)}
    activity.update({f"onu/{i}": a for i, a in enumerate(net.onu_activity)})
    for comp, cls in inv.items():
        params = profile.classes[cls]
        act = activity.get(comp)
        if act is None:
            segs[cls].append((0, t_end, params.active))
            continue
        can_sleep = cls == "onu" or (cls == "olt_transceiver" and pooled)
        for a, b, state in component_states(act.merged(t_end), t_end, params, can_sleep):
            segs[cls].append((a, b, params.watts(state)))
    return PowerTimeline.from_segments(segs, 0, t_end)


def simulate(spec: RunSpec):
    """Build and run the network; returns (network, workload, run summary)."""
    t_end = to_ps(spec.duration)
    engine = Engine(hash_trace=spec.hash_trace)
    net = build_network(spec.arch, engine, t_end,
                        core_delay=to_ps(spec.traffic.transport.core_rtt / 2))
    wl = Workload(net, spec.traffic, spec.root_seed, spec.traffic_path)
    wl.start()
    return net, wl, engine.run_until(t_end)


def run_once(spec: RunSpec) -> RunResult:
    t_end = to_ps(spec.duration)
    net, wl, summary = simulate(spec)

    qoe: dict[str, float] = {}
    errors = []
    traces = wl.page_traces()
    censored = 0
    receipts = wl.frame_receipts(spec.warmup, t_end)
    if PAGE_DELAY in spec.metrics:
        try:
            st = page_delay_stats(traces, spec.warmup)
            qoe[PAGE_DELAY] = st.mean
            censored = st.censored
        except InsufficientDataError as exc:
            errors.append(f"{PAGE_DELAY}: {exc}")
    if DFR in spec.metrics:
        v = spec.traffic.video
        try:
            qoe[DFR] = decodable_frame_rate(receipts, (v.gop_n, v.gop_m))
        except InsufficientDataError as exc:
            errors.append(f"{DFR}: {exc}")
    error = "; ".join(errors) or None

    delivered = 8 * sum(net.mac[d][i].bytes_out for d in (DOWN, UP)
                        for i in range(spec.arch.onu_count))
    energy = None
    bins: list = []
    if spec.power is not None:
        tl = power_timeline(net, spec.power, t_end)
        energy = energy_report(tl, delivered).to_dict()
        bins = [(t, dict(w)) for t, w in tl.binned(to_ps(spec.power_bin))]
    return RunResult(
        qoe=qoe,
        qoe_error=error,
        pages=sum(1 for t in traces if t.request >= spec.warmup and t.completion is not None),
        pages_censored=censored,
        frames=len(receipts),
        sessions=wl.sessions,
        mac=mac_rows(net, spec.direction),
        energy=energy,
        power_bins=bins,
        delivered_bits=delivered,
        events=summary.events_processed,
        trace_hash=summary.trace_hash,
    )
