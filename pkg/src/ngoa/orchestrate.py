"""Execute a validated scenario and persist the result bundle."""
from __future__ import annotations

import logging
import math
import statistics
from pathlib import Path
from typing import Optional

from .bundle import COMPLETE, INCOMPLETE, BundleWriter
from .ecr import MBPS, RunCache, candidate_runs, compute_ecr
from .energy import CLASSES, all_active_report
from .scenario import Scenario, dump_document

log = logging.getLogger(__name__)

MAC_HEADER = ("replication", "onu", "bytes_in", "bytes_out", "drops", "mean_queue_delay_s")
RUN_HEADER = ("replication", "pages", "pages_censored", "frames", "sessions", "events",
              "delivered_bits", "trace_hash", "qoe_error")


def _mean_energy(reports: list[dict]) -> dict:
    """Average per-replication energy reports class by class."""
    n = len(reports)
    by_class = {c: math.fsum(r["energy_by_class"][c] for r in reports) / n
                for c in reports[0]["energy_by_class"]}
    total = math.fsum(by_class.values())
    bits = [r["delivered_bits"] for r in reports]
    return {
        "replications": n,
        "energy_by_class": by_class,
        "total_energy": total,
        "share_by_class": {c: 100.0 * e / total if total else 0.0 for c, e in by_class.items()},
        "mean_delivered_bits": statistics.fmean(bits),
        "energy_per_bit": total / statistics.fmean(bits) if all(bits) else None,
        "duration": reports[0]["duration"],
    }


def _write_runs(w: BundleWriter, results: list, scenario: Scenario) -> None:
    w.write_csv("runs.csv", RUN_HEADER, [
        (k, r.pages, r.pages_censored, r.frames, r.sessions, r.events, r.delivered_bits,
         r.trace_hash, r.qoe_error) for k, r in enumerate(results)])
    w.write_csv("mac.csv", MAC_HEADER, [
        (k, row["onu"], row["bytes_in"], row["bytes_out"], row["drops"], row["mean_queue_delay_s"])
        for k, r in enumerate(results) for row in r.mac])
    # a replication may lack one metric (no video watched) yet carry the other
    w.write_csv("qoe.csv", ("replication", "metric", "value"), [
        (k, m.name, r.qoe[m.name]) for k, r in enumerate(results)
        for m in sorted(scenario.metrics, key=lambda m: m.name) if m.name in r.qoe])
    if scenario.power is not None:
        classes = [c for c in CLASSES if c in scenario.power.classes]
        w.write_csv("power.csv", ("replication", "time_s") + tuple(classes), [
            (k, t) + tuple(watts[c] for c in classes)
            for k, r in enumerate(results) for t, watts in r.power_bins])
        reports = [r.energy for r in results]
        w.write_json("energy.json", {"mean": _mean_energy(reports), "replications": reports,
                                     "profile": scenario.power.to_dict()})


def _summary(scenario: Scenario, results: list) -> dict:
    metrics = {}
    for m in scenario.metrics:
        vals = [r.qoe[m.name] for r in results if m.name in r.qoe]
        metrics[m.name] = {
            "n": len(vals),
            "mean": statistics.fmean(vals) if vals else None,
            "sd": statistics.stdev(vals) if len(vals) > 1 else None,
        }
    return {"mode": scenario.mode, "replications": len(results), "qoe": metrics,
            "qoe_errors": {str(k): r.qoe_error for k, r in enumerate(results) if r.qoe_error}}


def execute(scenario: Scenario, out_dir: str | Path, workers: int = 1) -> Path:
    """Run the scenario and write its bundle; returns the bundle directory.

    On failure the bundle is closed as incomplete and the error re-raised.
    """
    w = BundleWriter(out_dir)
    w.write_text("scenario.yaml", dump_document(scenario.document))
    try:
        if scenario.mode == "energy":
            _execute_energy(w, scenario)
        elif scenario.mode == "ecr":
            _execute_ecr(w, scenario, workers)
        else:
            _execute_run(w, scenario, workers)
    except BaseException as exc:
        w.close(INCOMPLETE, f"{type(exc).__name__}: {exc}")
        raise
    w.close(COMPLETE)
    return w.root


def _execute_run(w: BundleWriter, scenario: Scenario, workers: int) -> None:
    cache = RunCache(workers)
    specs = [scenario.run_spec(k) for k in range(scenario.replications)]
    results = cache.run_many(specs)
    _write_runs(w, results, scenario)
    w.write_json("summary.json", _summary(scenario, results))


def _execute_ecr(w: BundleWriter, scenario: Scenario, workers: int) -> None:
    request = scenario.ecr_request()
    cache = RunCache(workers)
    result = compute_ecr(request, cache=cache)
    w.write_json("ecr.json", result.to_dict())
    w.write_csv("ecr_samples.csv", ("rate_mbps", "arm", "metric", "replication", "value"), [
        (row["rate"] / MBPS, row["arm"], row["metric"], row["replication"], row["value"])
        for row in result.sample_rows()])
    w.write_csv("ecr_decisions.csv",
                ("rate_mbps", "metric", "test", "estimate", "bound", "margin", "p_value",
                 "decision", "overall"),
                [(d.rate / MBPS, c.metric, c.test, c.estimate, c.bound, c.margin, c.p_value,
                  c.decision, d.iut.decision)
                 for d in result.decisions for c in d.iut.components])
    runs = candidate_runs(request, cache)
    _write_runs(w, runs, scenario)
    w.write_json("summary.json", {
        **_summary(scenario, runs),
        "ecr": result.ecr, "ecr_status": result.status, "upper_bound": result.upper_bound,
        "simulations": cache.executed,
    })


def _execute_energy(w: BundleWriter, scenario: Scenario) -> None:
    rep = all_active_report(scenario.arch, scenario.power, scenario.duration)
    w.write_json("energy.json", {"mean": rep.to_dict(), "all_active": True,
                                 "profile": scenario.power.to_dict()})
    w.write_json("summary.json", {"mode": "energy", "share_by_class": rep.share_by_class})


def default_output(scenario: Scenario, scenario_path: Optional[Path], root: Optional[str]) -> Path:
    stem = scenario_path.stem if scenario_path else "scenario"
    name = f"{stem}-{scenario.mode}-seed{scenario.root_seed}"
    return Path(root or "ngoa-results") / name
