"""Scenario documents: YAML with a fixed schema, materialised defaults and overrides.

Every key a scenario may carry appears in ``DEFAULTS``; anything else is an
error that names the key and its line. ``load_scenario`` returns both the
resolved document (defaults filled in, overrides applied) and the domain
objects built from it, so validation always happens before a simulation
exists.
"""
from __future__ import annotations

import copy
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Optional, Sequence

import yaml

from .architectures.config import ArchitectureConfig
from .ecr import DEFAULT_GRID, MBPS, EcrRequest, Pairing, Search
from .energy import CLASSES, EnergyError, PowerProfile
from .experiment import DIRECTIONS, RunSpec
from .qoe import DFR, PAGE_DELAY
from .stats import Direction, MetricSpec, TestKind
from .traffic.distributions import Dist
from .traffic.profiles import ProfileError, UserProfile, load_day_profile
from .traffic.transport import TransportConfig
from .traffic.video import VideoModel
from .traffic.web import WebModel
from .traffic.workload import TrafficConfig

MODES = ("run", "ecr", "energy")


class ScenarioError(ValueError):
    """Parse or validation problem, located by key path and line when known."""

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None,
                 source: Optional[str] = None):
        self.key = key
        self.line = line
        self.source = source
        where = source or "<scenario>"
        if line is not None:
            where += f":{line}"
        if key:
            where += f": {key}"
        super().__init__(f"{where}: {message}")


def _dataclass_defaults(obj) -> dict:
    out = {}
    for f in fields(obj):
        v = getattr(obj, f.name)
        if isinstance(v, Dist):
            v = v.to_dict()  # upper: null means untruncated
        elif hasattr(v, "value"):
            v = v.value
        out[f.name] = v
    return out


def _architecture_defaults() -> dict:
    return ArchitectureConfig(kind="tdm_pon", onu_count=16).to_dict()


DEFAULTS: dict = {
    "mode": "run",
    "architecture": _architecture_defaults(),
    "traffic": {
        "profiles": {"residential": "builtin:residential", "business": "builtin:business"},
        "session_rate": 30.0,
        "web_fraction": 0.8,
        "business_fraction": 0.0,
        "start_hour": 20.0,
        "web": _dataclass_defaults(WebModel()),
        "video": _dataclass_defaults(VideoModel()),
        "transport": _dataclass_defaults(TransportConfig()),
    },
    "qoe": {
        "warmup": 10.0,
        "metrics": [
            {"name": PAGE_DELAY, "direction": "smaller_better", "margin": 0.10, "relative": True},
            {"name": DFR, "direction": "larger_better", "margin": 0.02, "relative": False},
        ],
    },
    "stats": {"alpha": 0.05, "test": "welch"},
    "ecr": {
        "grid_mbps": [r / MBPS for r in DEFAULT_GRID],
        "replications": 10,
        "pairing": "common_random_numbers",
        "search": "scan",
    },
    "energy": {"enabled": True, "profile": "builtin", "bin": 1.0},
    "run": {
        "duration": 120.0,
        "root_seed": 1,
        "replications": 1,
        "direction": "downstream",
        "output": None,
        "trace_hash": False,
    },
}

# Subtrees whose keys are user-chosen rather than fixed by the schema
_FREE_FORM = {("traffic", "profiles"), ("energy", "profile")}
_METRIC_KEYS = {"name", "direction", "margin", "relative"}
_NULLABLE = {("architecture", "line_rate"), ("architecture", "distribution_rate"),
             ("run", "output")}


def _line_index(text: str) -> dict[tuple, int]:
    """Key path -> 1-based line of the key, from the YAML node tree."""
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    out: dict[tuple, int] = {}

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                p = path + (k.value,)
                out[p] = k.start_mark.line + 1
                walk(v, p)
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                p = path + (i,)
                out[p] = v.start_mark.line + 1
                walk(v, p)

    if root is not None:
        walk(root, ())
    return out


def _dotted(path: Sequence) -> str:
    return ".".join(str(p) for p in path)


def _merge(defaults: Any, given: Any, path: tuple, lines: dict, source: str) -> Any:
    if path in _FREE_FORM:
        return copy.deepcopy(given)
    if isinstance(defaults, dict):
        if not isinstance(given, dict):
            raise ScenarioError("expected a mapping", _dotted(path), lines.get(path), source)
        out = copy.deepcopy(defaults)
        for k, v in given.items():
            p = path + (k,)
            if k not in defaults:
                raise ScenarioError("unknown key", _dotted(p), lines.get(p), source)
            out[k] = _merge(defaults[k], v, p, lines, source)
        return out
    if path == ("qoe", "metrics"):
        if not isinstance(given, list):
            raise ScenarioError("expected a list of metrics", _dotted(path), lines.get(path), source)
        for i, m in enumerate(given):
            p = path + (i,)
            if not isinstance(m, dict):
                raise ScenarioError("expected a mapping", _dotted(p), lines.get(p), source)
            for k in m:
                if k not in _METRIC_KEYS:
                    raise ScenarioError("unknown key", _dotted(p + (k,)), lines.get(p + (k,)), source)
        return [{"relative": False, **m} for m in given]
    return given


def _parse_value(text: str) -> Any:
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError:
        return text


def apply_override(doc: dict, assignment: str) -> tuple:
    """Apply one ``dotted.key=value`` override; the key must already exist.

    Returns the key path that was set.
    """
    if "=" not in assignment:
        raise ScenarioError(f"override {assignment!r} is not key=value", source="--set")
    key, raw = assignment.split("=", 1)
    key = key.strip()
    parts = key.split(".")
    node: Any = doc
    trail: list = []
    for i, part in enumerate(parts):
        trail.append(part)
        last = i == len(parts) - 1
        if isinstance(node, list):
            try:
                idx = int(part)
                node[idx]
            except (ValueError, IndexError):
                raise ScenarioError("unknown key", key, source="--set") from None
            if last:
                node[idx] = _parse_value(raw)
                return tuple(int(x) if x.isdigit() else x for x in parts)
            node = node[idx]
            continue
        free = tuple(trail[:-1]) in _FREE_FORM
        if not isinstance(node, dict) or (part not in node and not free):
            raise ScenarioError("unknown key", key, source="--set")
        if last:
            node[part] = _parse_value(raw)
            return tuple(int(x) if x.isdigit() else x for x in parts)
        node = node[part]


@dataclass
class Scenario:
    document: dict  # fully resolved, suitable for echoing
    mode: str
    arch: ArchitectureConfig
    traffic: TrafficConfig
    metrics: tuple
    alpha: float
    power: Optional[PowerProfile]
    duration: float
    warmup: float
    root_seed: int
    replications: int
    direction: str
    power_bin: float
    trace_hash: bool
    ecr_grid: tuple
    ecr_replications: int
    pairing: Pairing
    search: Search
    output: Optional[str]

    def run_spec(self, replication: int) -> RunSpec:
        return RunSpec(arch=self.arch, traffic=self.traffic, duration=self.duration,
                       warmup=self.warmup, root_seed=self.root_seed,
                       traffic_path=f"rep/{replication}",
                       metrics=tuple(m.name for m in self.metrics), power=self.power,
                       direction=self.direction, power_bin=self.power_bin,
                       hash_trace=self.trace_hash)

    def ecr_request(self) -> EcrRequest:
        return EcrRequest(candidate=self.arch, traffic=self.traffic, duration=self.duration,
                          warmup=self.warmup, rate_grid=self.ecr_grid, metrics=self.metrics,
                          alpha=self.alpha, replications=self.ecr_replications,
                          root_seed=self.root_seed, pairing=self.pairing, search=self.search,
                          power=self.power)


def _check_types(defaults: Any, value: Any, path: tuple, lines: dict, source: str) -> None:
    """Leaves must keep the kind of their default (numbers stay numbers, ...)."""
    def fail(msg):
        raise ScenarioError(msg, _dotted(path), lines.get(path), source)

    if path in _FREE_FORM or path == ("qoe", "metrics"):
        return
    if isinstance(defaults, dict):
        if not isinstance(value, dict):
            fail("expected a mapping")
        for k, v in value.items():
            _check_types(defaults[k], v, path + (k,), lines, source)
        return
    nullable = path in _NULLABLE or path[:2] == ("traffic", "web") and path[-1] == "upper"
    if value is None:
        if not nullable:
            fail("must not be empty")
        return
    if isinstance(defaults, bool) or defaults is None and path == ("run", "output"):
        want = bool if isinstance(defaults, bool) else str
        if not isinstance(value, want):
            fail(f"expected {want.__name__}, got {type(value).__name__}")
    elif isinstance(defaults, (int, float)) or nullable:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            fail(f"expected a number, got {value!r}")
        if isinstance(defaults, int) and not isinstance(value, int):
            fail(f"expected an integer, got {value!r}")
        if isinstance(value, float) and math.isnan(value):
            fail("must not be NaN")
    elif isinstance(defaults, str):
        if not isinstance(value, str):
            fail(f"expected a string, got {value!r}")
    elif isinstance(defaults, list):
        if not isinstance(value, list):
            fail("expected a list")


def _resolve_path(src: str, source_dir: Optional[Path]) -> Path:
    p = Path(src)
    if not p.is_absolute() and source_dir is not None:
        p = source_dir / p
    return p


def _build(doc: dict, lines: dict, source: str, source_dir: Optional[Path]) -> Scenario:
    def fail(path: tuple, msg: str):
        raise ScenarioError(msg, _dotted(path), lines.get(path), source)

    mode = doc["mode"]
    if mode not in MODES:
        fail(("mode",), f"must be one of {', '.join(MODES)}")
    _check_types(DEFAULTS, doc, (), lines, source)

    try:
        arch = ArchitectureConfig(**doc["architecture"])
    except ValueError as exc:
        fail(("architecture",), str(exc))

    t = doc["traffic"]
    profiles = {}
    for cls in ("residential", "business"):
        src = t["profiles"].get(cls)
        path = ("traffic", "profiles", cls)
        try:
            if isinstance(src, list):
                profiles[cls] = tuple(float(x) for x in src)
            elif isinstance(src, str):
                profiles[cls] = load_day_profile(
                    src if src.startswith("builtin:") else _resolve_path(src, source_dir))
            else:
                fail(path, "expected builtin:<name>, a file path or 24 multipliers")
            UserProfile(cls, profiles[cls], float(t["session_rate"]), float(t["web_fraction"]))
        except (ProfileError, OSError, ValueError) as exc:
            if isinstance(exc, ScenarioError):
                raise
            fail(path, str(exc))
    extra = set(t["profiles"]) - {"residential", "business"}
    if extra:
        fail(("traffic", "profiles"), f"unknown user class {sorted(extra)[0]!r}")
    if not 0.0 <= t["business_fraction"] <= 1.0:
        fail(("traffic", "business_fraction"), "must lie in [0, 1]")
    if t["session_rate"] < 0:
        fail(("traffic", "session_rate"), "must be >= 0")
    web = {}
    for k, v in t["web"].items():
        try:
            web[k] = Dist.from_dict(v)
        except (ValueError, TypeError) as exc:
            fail(("traffic", "web", k), str(exc))
    for name, cls in (("video", VideoModel), ("transport", TransportConfig)):
        try:
            cls(**t[name])
        except (ValueError, TypeError) as exc:
            fail(("traffic", name), str(exc))
    traffic = TrafficConfig(profiles=profiles, session_rate=float(t["session_rate"]),
                            web_fraction=float(t["web_fraction"]),
                            business_fraction=float(t["business_fraction"]),
                            start_hour=float(t["start_hour"]), web=WebModel(**web),
                            video=VideoModel(**t["video"]),
                            transport=TransportConfig(**t["transport"]))

    q, s, e, r, en = doc["qoe"], doc["stats"], doc["ecr"], doc["run"], doc["energy"]
    try:
        test = TestKind(s["test"])
    except ValueError:
        fail(("stats", "test"), "must be welch or nonparametric")
    alpha = float(s["alpha"])
    if not 0.0 < alpha < 0.5:
        fail(("stats", "alpha"), "must lie in (0, 0.5)")
    metrics = []
    for i, m in enumerate(q["metrics"]):
        path = ("qoe", "metrics", i)
        if m.get("name") not in (PAGE_DELAY, DFR):
            fail(path, f"metric name must be {PAGE_DELAY} or {DFR}")
        try:
            metrics.append(MetricSpec(m["name"], Direction(m["direction"]), float(m["margin"]),
                                      test, bool(m.get("relative", False))))
        except (KeyError, ValueError, TypeError) as exc:
            fail(path, f"bad metric: {exc}")
    if not metrics:
        fail(("qoe", "metrics"), "at least one metric is required")
    if len({m.name for m in metrics}) != len(metrics):
        fail(("qoe", "metrics"), "duplicate metric")

    duration, warmup = float(r["duration"]), float(q["warmup"])
    if not duration > 0:
        fail(("run", "duration"), "must be > 0")
    if not 0 <= warmup < duration:
        fail(("qoe", "warmup"), "must satisfy 0 <= warmup < run.duration")
    if r["replications"] < 1:
        fail(("run", "replications"), "must be >= 1")
    if r["direction"] not in DIRECTIONS:
        fail(("run", "direction"), f"must be one of {', '.join(DIRECTIONS)}")

    power = None
    if en["enabled"]:
        p = en["profile"]
        try:
            if p == "builtin":
                power = PowerProfile.default()
            elif isinstance(p, str):
                power = PowerProfile.from_dict(
                    yaml.safe_load(_resolve_path(p, source_dir).read_text()))
            elif isinstance(p, dict):
                power = PowerProfile.from_dict(p)
            else:
                fail(("energy", "profile"), "expected builtin, a file path or a mapping")
        except (EnergyError, TypeError, OSError, AttributeError) as exc:
            fail(("energy", "profile"), str(exc))
        missing = [c for c in CLASSES if c not in power.classes]
        if missing:
            fail(("energy", "profile"), f"missing power classes: {', '.join(missing)}")
        if not en["bin"] > 0:
            fail(("energy", "bin"), "must be > 0")
    elif mode == "energy":
        fail(("energy", "enabled"), "energy mode needs energy.enabled: true")

    grid = e["grid_mbps"]
    if not grid or any(isinstance(x, bool) or not isinstance(x, (int, float)) or x <= 0
                       for x in grid):
        fail(("ecr", "grid_mbps"), "must be a non-empty list of positive rates")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        fail(("ecr", "grid_mbps"), "must be strictly increasing")
    grid = tuple(float(x) * MBPS for x in grid)
    try:
        pairing = Pairing(e["pairing"])
    except ValueError:
        fail(("ecr", "pairing"), "must be common_random_numbers or independent")
    try:
        search = Search(e["search"])
    except ValueError:
        fail(("ecr", "search"), "must be scan or binary")
    if e["replications"] < 3:
        fail(("ecr", "replications"), "must be >= 3")
    if mode == "ecr" and not any(g <= arch.ecr_bound for g in grid):
        fail(("ecr", "grid_mbps"), "no grid rate at or below the candidate's "
             f"min(feeder, distribution) = {arch.ecr_bound / MBPS:g} Mb/s")

    return Scenario(
        document=doc, mode=mode, arch=arch, traffic=traffic, metrics=tuple(metrics),
        alpha=alpha, power=power, duration=duration, warmup=warmup,
        root_seed=r["root_seed"], replications=r["replications"],
        direction=r["direction"], power_bin=float(en["bin"]), trace_hash=r["trace_hash"],
        ecr_grid=grid, ecr_replications=e["replications"], pairing=pairing, search=search,
        output=r["output"],
    )


def resolve(given: Optional[dict], overrides: Sequence[str] = (), *, text: str = "",
            source: str = "<scenario>", source_dir: Optional[Path] = None) -> Scenario:
    """Merge a parsed document onto the defaults, apply overrides, validate."""
    lines = _line_index(text) if text else {}
    doc = _merge(DEFAULTS, given or {}, (), lines, source)
    for o in overrides:
        path = apply_override(doc, o)
        # an overridden value no longer lives on its file line
        for p in [p for p in lines if p[:len(path)] == path]:
            del lines[p]
    return _build(doc, lines, source, source_dir)


def load_scenario(path: str | Path, overrides: Sequence[str] = ()) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}", source=str(path)) from None
    try:
        given = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ScenarioError(f"YAML parse error: {getattr(exc, 'problem', exc)}",
                            line=line, source=str(path)) from None
    if given is not None and not isinstance(given, dict):
        raise ScenarioError("top level must be a mapping", source=str(path))
    return resolve(given, overrides, text=text, source=str(path), source_dir=path.parent)


def dump_document(doc: dict) -> str:
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=False)
