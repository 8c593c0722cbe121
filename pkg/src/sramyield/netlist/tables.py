"""Monte Carlo deviation tables (``.mc.csv``).

One row per sample in canonical coordinate order, standardized units,
17 significant digits so that import reproduces the float64 values exactly.
Lines starting with ``#`` carry the provenance header.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .. import __version__
from ..circuit_model import SramArrayConfig, VariationSample, parameter_names


def emit_mc_tables(config: SramArrayConfig, samples) -> str:
    samples = list(samples)
    if not samples:
        raise ValueError("at least one sample is required")
    names = parameter_names(config)
    buf = io.StringIO()
    buf.write(f"# generator: sramyield {__version__}\n")
    buf.write(f"# config_hash: {config.hash()}\n")
    buf.write("# units: standardized (multiples of each parameter sigma)\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["sample_index", *names])
    for s in samples:
        vals = s.values if isinstance(s, VariationSample) else np.asarray(s, dtype=np.float64)
        if vals.shape != (len(names),):
            raise ValueError(f"sample has {vals.shape[-1]} values, expected {len(names)}")
        idx = s.sample_index if isinstance(s, VariationSample) else 0
        writer.writerow([idx, *(format(float(v), ".17g") for v in vals)])
    return buf.getvalue()


def read_mc_tables(text: str) -> tuple[list[str], list[VariationSample]]:
    """Parse a table produced by :func:`emit_mc_tables`; returns (names, samples)."""
    body = "\n".join(line for line in text.splitlines() if not line.startswith("#"))
    rows = list(csv.reader(io.StringIO(body)))
    head, data = rows[0], rows[1:]
    if head[0] != "sample_index":
        raise ValueError("missing sample_index column")
    samples = [VariationSample(np.array([float(v) for v in row[1:]]), int(row[0])) for row in data]
    return head[1:], samples


def write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path
