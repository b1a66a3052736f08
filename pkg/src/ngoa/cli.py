"""Command line: ``ngoa run|ecr|report``.

Exit codes: 0 success, 1 simulation failure (bundle marked incomplete),
2 invalid scenario or arguments, 3 corrupted bundle.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .bundle import BundleError
from .orchestrate import default_output, execute
from .scenario import ScenarioError, load_scenario

OUTPUT_ROOT_ENV = "NGOA_OUTPUT_ROOT"

log = logging.getLogger("ngoa")


def _add_scenario_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("scenario", type=Path, help="scenario YAML file")
    p.add_argument("--seed", type=int, help="root seed (overrides run.root_seed)")
    p.add_argument("--replications", type=int,
                   help="replications per run, or per arm in ECR mode")
    p.add_argument("--out", type=Path, help="bundle directory")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a scenario key, e.g. architecture.onu_count=8")
    p.add_argument("--workers", type=int, default=None,
                   help="parallel simulation processes (default: one per CPU)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ngoa", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_scenario_args(sub.add_parser("run", help="execute a scenario in its own mode"))
    _add_scenario_args(sub.add_parser("ecr", help="compute the equivalent circuit rate"))
    rp = sub.add_parser("report", help="summarise a result bundle")
    rp.add_argument("bundle", type=Path)
    rp.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    return parser


def _scenario_command(args) -> int:
    overrides = list(args.overrides)
    if args.command == "ecr":
        overrides.insert(0, "mode=ecr")
    if args.seed is not None:
        overrides.append(f"run.root_seed={args.seed}")
    try:
        scenario = load_scenario(args.scenario, overrides)
        if args.replications is not None:
            key = "ecr.replications" if scenario.mode == "ecr" else "run.replications"
            scenario = load_scenario(args.scenario, overrides + [f"{key}={args.replications}"])
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = args.out or (Path(scenario.output) if scenario.output else
                       default_output(scenario, args.scenario, os.environ.get(OUTPUT_ROOT_ENV)))
    workers = args.workers if args.workers is not None else (os.cpu_count() or 1)
    try:
        path = execute(scenario, out, workers=workers)
    except BundleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: simulation failed: {exc}", file=sys.stderr)
        print(f"partial bundle marked incomplete: {out}", file=sys.stderr)
        return 1
    print(path)
    return 0


def _report_command(args) -> int:
    from .report import report  # matplotlib import is deferred to here
    try:
        text = report(args.bundle, figures=not args.no_figures)
    except BundleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    sys.stdout.write(text)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "report":
        return _report_command(args)
    return _scenario_command(args)


if __name__ == "__main__":
    sys.exit(main())
