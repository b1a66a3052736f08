"""Result bundles: a directory of CSV/JSON files plus a sha256 manifest.

Writers produce bytes that depend only on their inputs (sorted JSON keys,
fixed float formatting, no timestamps or absolute paths), so re-running a
scenario reproduces the bundle byte for byte.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import shutil
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

MANIFEST = "manifest.sha256"
COMPLETE = "complete"
INCOMPLETE = "incomplete"
REPORT_DIR = "report"


class BundleError(RuntimeError):
    pass


def _plain(obj: Any) -> Any:
    """JSON-safe copy: non-finite floats become strings, tuples lists."""
    if isinstance(obj, float):
        if math.isnan(obj):
            return None
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def dumps_json(obj: Any) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class BundleWriter:
    """Writes files under `root`; `close` records them in the manifest.

    An existing directory is reused only if it already holds a bundle, in
    which case it is cleared first so no stale file survives.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        if self.root.exists():
            if not self.root.is_dir():
                raise BundleError(f"{self.root} exists and is not a directory")
            if any(self.root.iterdir()):
                if not (self.root / MANIFEST).exists():
                    raise BundleError(
                        f"{self.root} is not empty and holds no bundle; refusing to overwrite")
                shutil.rmtree(self.root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []

    def write_text(self, rel: str, text: str) -> Path:
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(text.encode("utf-8"))
        if rel not in self.files:
            self.files.append(rel)
        return path

    def write_json(self, rel: str, obj: Any) -> Path:
        return self.write_text(rel, dumps_json(obj))

    def write_csv(self, rel: str, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
        return self.write_text(rel, csv_text(header, rows))

    def close(self, status: str = COMPLETE, reason: Optional[str] = None) -> Path:
        lines = [f"# status: {status}"]
        if reason:
            lines.append("# reason: " + " ".join(reason.split()))
        for rel in sorted(self.files):
            lines.append(f"{sha256_file(self.root / rel)}  {rel}")
        path = self.root / MANIFEST
        path.write_text("\n".join(lines) + "\n")
        return path


def read_manifest(root: str | Path) -> tuple[str, dict[str, str]]:
    """(status, {relative path: sha256})."""
    path = Path(root) / MANIFEST
    if not path.exists():
        raise BundleError(f"{root}: no {MANIFEST}; not a result bundle")
    status = INCOMPLETE
    entries: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        if line.startswith("# status:"):
            status = line.split(":", 1)[1].strip()
            continue
        if not line.strip() or line.startswith("#"):
            continue
        digest, sep, rel = line.partition("  ")
        if not sep or len(digest) != 64:
            raise BundleError(f"{path}:{lineno}: malformed manifest line")
        entries[rel] = digest
    return status, entries


def verify_bundle(root: str | Path) -> str:
    """Check every manifest entry; returns the recorded status."""
    root = Path(root)
    status, entries = read_manifest(root)
    problems = []
    for rel, digest in entries.items():
        p = root / rel
        if not p.exists():
            problems.append(f"missing {rel}")
        elif sha256_file(p) != digest:
            problems.append(f"hash mismatch for {rel}")
    if problems:
        raise BundleError(f"{root}: corrupted bundle: " + "; ".join(problems))
    return status
