"""Human-readable summaries, plot-ready tables and figures for a bundle."""
from __future__ import annotations

import csv
import json
import math
import statistics
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.ticker import FormatStrFormatter, NullFormatter  # noqa: E402

from .bundle import COMPLETE, REPORT_DIR, csv_text, verify_bundle  # noqa: E402
from .ecr import MBPS  # noqa: E402
from .stats import t_ppf  # noqa: E402


def _read_csv(path: Path) -> list[dict]:
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def _fmt_rate(bps) -> str:
    return "n/a" if bps is None else f"{bps / MBPS:g} Mb/s"


def _mean_ci(values: list[float], alpha: float) -> tuple[float, float, float]:
    m = statistics.fmean(values)
    if len(values) < 2:
        return m, m, m
    h = t_ppf(1 - alpha / 2, len(values) - 1) * statistics.stdev(values) / math.sqrt(len(values))
    return m, m - h, m + h


def ecr_tables(bundle: Path) -> tuple[list[tuple], list[tuple]]:
    """(decision rows, plot rows) from an ECR bundle."""
    ecr = json.loads((bundle / "ecr.json").read_text())
    alpha = ecr["settings"]["alpha"]
    decisions = []
    for d in ecr["decisions"]:
        for c in d["iut"]["components"]:
            decisions.append((d["rate"] / MBPS, c["metric"], c["estimate"], c["bound"],
                              c["margin"], c["decision"], d["decision"]))
    samples: dict[tuple, list[float]] = {}
    for row in _read_csv(bundle / "ecr_samples.csv"):
        key = (float(row["rate_mbps"]), row["metric"], row["arm"])
        samples.setdefault(key, []).append(float(row["value"]))
    plot = []
    for rate, metric, arm in sorted(samples):
        m, lo, hi = _mean_ci(samples[(rate, metric, arm)], alpha)
        plot.append((rate, metric, arm, m, lo, hi))
    return decisions, plot


def _power_table(bundle: Path) -> tuple[list[str], list[tuple]]:
    rows = _read_csv(bundle / "power.csv")
    classes = [c for c in rows[0] if c not in ("replication", "time_s")] if rows else []
    acc: dict[float, list[list[float]]] = {}
    for r in rows:
        acc.setdefault(float(r["time_s"]), []).append([float(r[c]) for c in classes])
    out = []
    for t in sorted(acc):
        cols = list(zip(*acc[t]))
        out.append((t,) + tuple(statistics.fmean(c) for c in cols))
    return classes, out


def _plot_ecr(plot_rows: list[tuple], path: Path) -> None:
    metrics = sorted({r[1] for r in plot_rows})
    fig, axes = plt.subplots(1, len(metrics), figsize=(5 * len(metrics), 3.6), squeeze=False)
    for ax, metric in zip(axes[0], metrics):
        for arm, style in (("reference", "o-"), ("candidate", "s--")):
            rows = [r for r in plot_rows if r[1] == metric and r[2] == arm]
            if not rows:
                continue
            x = [r[0] for r in rows]
            y = [r[3] for r in rows]
            err = [[r[3] - r[4] for r in rows], [r[5] - r[3] for r in rows]]
            ax.errorbar(x, y, yerr=err, fmt=style, capsize=3, label=arm)
        ax.set_xscale("log")
        rates = sorted({r[0] for r in plot_rows if r[1] == metric})
        ax.set_xticks(rates)
        ax.xaxis.set_major_formatter(FormatStrFormatter("%g"))
        ax.xaxis.set_minor_formatter(NullFormatter())
        ax.set_xlabel("reference rate (Mb/s)")
        ax.set_ylabel(metric)
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)


def _plot_power(classes: list[str], rows: list[tuple], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 3.6))
    t = [r[0] for r in rows]
    ax.stackplot(t, *[[r[i + 1] for r in rows] for i in range(len(classes))], labels=classes)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("power (W)")
    ax.legend(loc="upper right", fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)


def _plot_shares(shares: dict, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    names = list(shares)
    ax.bar(names, [shares[n] for n in names])
    ax.set_ylabel("share of energy (%)")
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)


def report(bundle: str | Path, figures: bool = True) -> str:
    """Verify the bundle, write report/ files and return the summary text."""
    bundle = Path(bundle)
    status = verify_bundle(bundle)
    out = bundle / REPORT_DIR
    out.mkdir(exist_ok=True)
    lines = [f"bundle: {bundle.name}"]
    if status != COMPLETE:
        lines.append(f"WARNING: bundle is marked {status}")
    summary = json.loads((bundle / "summary.json").read_text())
    lines.append(f"mode: {summary['mode']}")

    if (bundle / "ecr.json").exists():
        ecr = json.loads((bundle / "ecr.json").read_text())
        if ecr["status"] == "value":
            lines.append(f"ECR: {_fmt_rate(ecr['ecr'])}")
        else:
            lines.append(f"ECR: {ecr['status']} (largest passing {_fmt_rate(ecr['largest_passing'])})")
        lines.append(f"upper bound min(feeder, distribution): {_fmt_rate(ecr['upper_bound'])}")
        decisions, plot = ecr_tables(bundle)
        header = ("rate_mbps", "metric", "estimate", "bound", "margin", "decision", "overall")
        (out / "ecr_table.csv").write_text(csv_text(header, decisions))
        (out / "ecr_plot.csv").write_text(csv_text(
            ("rate_mbps", "metric", "arm", "mean", "ci_low", "ci_high"), plot))
        lines.append("")
        lines.append(f"{'rate':>9}  {'metric':<11} {'bound':>12} {'margin':>12}  decision")
        for rate, metric, _, bound, margin, dec, _ in decisions:
            lines.append(f"{rate:>9g}  {metric:<11} {bound:>12.6g} {margin:>12.6g}  {dec}")
        if figures and plot:
            _plot_ecr(plot, out / "ecr_qoe.png")

    if summary.get("qoe"):
        lines.append("")
        for name, st in summary["qoe"].items():
            if st["mean"] is not None:
                sd = "" if st["sd"] is None else f" sd {st['sd']:.6g}"
                lines.append(f"{name}: mean {st['mean']:.6g}{sd} over {st['n']} replications")

    if (bundle / "energy.json").exists():
        energy = json.loads((bundle / "energy.json").read_text())["mean"]
        shares = energy["share_by_class"]
        rows = [(c, energy["energy_by_class"][c], shares[c]) for c in shares]
        (out / "energy_shares.csv").write_text(
            csv_text(("class", "energy_j", "share_pct"), rows))
        lines.append("")
        lines.append("energy shares:")
        for c, _, s in rows:
            lines.append(f"  {c:<16} {s:6.2f} %")
        lines.append(f"  {'total':<16} {sum(r[2] for r in rows):6.2f} %")
        if figures:
            _plot_shares(shares, out / "energy_shares.png")

    if (bundle / "power.csv").exists():
        classes, rows = _power_table(bundle)
        (out / "power_plot.csv").write_text(csv_text(("time_s",) + tuple(classes), rows))
        if figures and rows:
            _plot_power(classes, rows, out / "power.png")

    text = "\n".join(lines) + "\n"
    (out / "summary.txt").write_text(text)
    return text
