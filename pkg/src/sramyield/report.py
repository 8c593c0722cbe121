"""Run manifests and deterministic report writers (CSV, JSON, netlists).

Every output starts with the run manifest.  Reports must be reproducible
byte for byte from the manifest, so nothing time- or machine-dependent goes
into them: the manifest timestamp comes from ``SOURCE_DATE_EPOCH`` (``null``
when unset) and wall-clock data is written to a ``*.timing.json`` sidecar.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from datetime import datetime, timezone
from pathlib import Path

from . import __version__


def build_timestamp() -> str | None:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if not epoch:
        return None
    return datetime.fromtimestamp(int(epoch), tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def make_manifest(command: str, *, config_hash: str | None, seed: int | None, backend: str,
                  options: dict | None = None) -> dict:
    return {
        "command": command,
        "config_hash": config_hash,
        "seed": seed,
        "backend": backend,
        "tool_version": f"sramyield {__version__}",
        "timestamp": build_timestamp(),
        "options": clean(options or {}),
    }


def manifest_hash(manifest: dict) -> str:
    blob = json.dumps(manifest, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def manifest_line(manifest: dict) -> str:
    return json.dumps(manifest, sort_keys=True, separators=(",", ":"))


def clean(obj):
    """JSON-safe copy: non-finite floats become strings, tuples lists, numpy scalars Python."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if hasattr(obj, "tolist") and getattr(obj, "ndim", 0) > 0:
        return clean(obj.tolist())
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        try:
            obj = obj.item()
        except (ValueError, AttributeError):
            pass
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return str(int(v))
    return "" if v is None else str(v)


def csv_text(manifest: dict, rows: list[dict], columns: list[str] | None = None) -> str:
    cols = columns or (list(rows[0].keys()) if rows else [])
    buf = io.StringIO()
    buf.write(f"# manifest: {manifest_line(manifest)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in cols])
    return buf.getvalue()


def json_text(manifest: dict, body: dict) -> str:
    return json.dumps({"manifest": manifest, **clean(body)}, indent=2, sort_keys=False,
                      allow_nan=False) + "\n"


def spice_text(manifest: dict, deck_text: str) -> str:
    first, _, rest = deck_text.partition("\n")
    return f"{first}\n* manifest: {manifest_line(manifest)}\n{rest}"


class OutputDir:
    """Writes files named ``<stem>_<manifest hash><suffix>`` under ``root``."""

    def __init__(self, root: str | Path, manifest: dict):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.manifest = manifest
        self.tag = manifest_hash(manifest)
        self.written: list[Path] = []

    def path(self, stem: str, suffix: str) -> Path:
        return self.root / f"{stem}_{self.tag}{suffix}"

    def write(self, stem: str, suffix: str, text: str) -> Path:
        p = self.path(stem, suffix)
        with open(p, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        self.written.append(p)
        return p

    def csv(self, stem: str, rows: list[dict], columns: list[str] | None = None) -> Path:
        return self.write(stem, ".csv", csv_text(self.manifest, rows, columns))

    def json(self, stem: str, body: dict) -> Path:
        return self.write(stem, ".json", json_text(self.manifest, body))

    def timing(self, stem: str, data: dict) -> Path:
        p = self.path(stem, ".timing.json")
        p.write_text(json.dumps(clean(data), indent=2) + "\n", encoding="utf-8")
        return p
