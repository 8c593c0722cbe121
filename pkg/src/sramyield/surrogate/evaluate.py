"""Config + variation sample -> MetricsRecord."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ..circuit_model import SramArrayConfig, VariationSample
from . import snm as snm_mod
from . import timing
from .devices import cell_devices

METRIC_NAMES = ("hsnm", "rsnm", "wsnm", "t_read", "t_write", "p_read", "p_write", "area")
HSNM_FLOOR = 0.100
RSNM_FLOOR = 0.050
WSNM_FLOOR = 0.050


@dataclass(frozen=True)
class MetricsRecord:
    """Performance of one sample or design, in SI units (V, s, W, m^2)."""

    hsnm: float
    rsnm: float
    wsnm: float
    t_read: float
    t_write: float
    p_read: float
    p_write: float
    area: float

    def to_dict(self) -> dict[str, float]:
        return asdict(self)

    @property
    def min_snm(self) -> float:
        return min(self.hsnm, self.rsnm, self.wsnm)

    @property
    def max_power(self) -> float:
        return max(self.p_read, self.p_write)


@dataclass(frozen=True)
class SnmFloors:
    hsnm: float = HSNM_FLOOR
    rsnm: float = RSNM_FLOOR
    wsnm: float = WSNM_FLOOR


def _as_matrix(config: SramArrayConfig, sample) -> np.ndarray:
    if sample is None:
        return np.zeros((1, config.variation_dim))
    if isinstance(sample, VariationSample):
        z = sample.values[None, :]
    else:
        z = np.asarray(sample, dtype=np.float64)
        if z.ndim == 1:
            z = z[None, :]
    if z.shape[-1] != config.variation_dim:
        raise ValueError(f"sample dimension {z.shape[-1]} does not match config "
                         f"dimension {config.variation_dim}")
    return z


def read_delay(config: SramArrayConfig, sample=None):
    """Worst-cell read delay (s); ``inf`` if the net discharge current is not positive.

    Returns a float for a single sample and an array for a ``(batch, dim)`` input.
    """
    z = _as_matrix(config, sample)
    out = timing.read_delay_from_devices(config, cell_devices(config, z))
    return float(out[0]) if _single(sample) else out


def write_delay(config: SramArrayConfig, sample=None):
    """Worst-cell write delay (s); ``inf`` if the pass gate cannot flip the cell."""
    z = _as_matrix(config, sample)
    out = timing.write_delay_from_devices(config, cell_devices(config, z))
    return float(out[0]) if _single(sample) else out


def _single(sample) -> bool:
    return sample is None or isinstance(sample, VariationSample) or np.ndim(sample) == 1


def evaluate_batch(config: SramArrayConfig, z, metrics=METRIC_NAMES) -> dict[str, np.ndarray]:
    """Selected metrics for every row of ``z`` as arrays of length ``batch``.

    Only the requested quantities are computed, so a write-delay limit state
    does not pay for butterfly sweeps.
    """
    z = _as_matrix(config, z)
    batch = z.shape[0]
    devs = cell_devices(config, z)
    out: dict[str, np.ndarray] = {}
    wanted = set(metrics)
    unknown = wanted - set(METRIC_NAMES)
    if unknown:
        raise ValueError(f"unknown metrics {sorted(unknown)}")
    if wanted & {"hsnm", "rsnm", "wsnm"}:
        table = snm_mod.snm_table(devs, config.vdd)
        for key, mode in (("hsnm", "hold"), ("rsnm", "read"), ("wsnm", "write")):
            if key in wanted:
                out[key] = table[mode].min(axis=1)
    if "t_read" in wanted:
        out["t_read"] = timing.read_delay_from_devices(config, devs)
    if "t_write" in wanted:
        out["t_write"] = timing.write_delay_from_devices(config, devs)
    # Power and area do not depend on the variation sample.
    if "p_read" in wanted:
        out["p_read"] = np.full(batch, timing.read_power(config))
    if "p_write" in wanted:
        out["p_write"] = np.full(batch, timing.write_power(config))
    if "area" in wanted:
        out["area"] = np.full(batch, timing.cell_area(config.cell))
    return {k: out[k] for k in METRIC_NAMES if k in out}


def evaluate(config: SramArrayConfig, sample=None) -> MetricsRecord:
    """All metrics of one sample (``None`` for nominal)."""
    z = _as_matrix(config, sample)
    if z.shape[0] != 1:
        raise ValueError("evaluate takes a single sample; use evaluate_batch")
    vals = evaluate_batch(config, z)
    return MetricsRecord(**{k: float(v[0]) for k, v in vals.items()})


def records_from_batch(vals: dict[str, np.ndarray]) -> list[MetricsRecord]:
    n = len(next(iter(vals.values())))
    return [MetricsRecord(**{k: float(vals[k][i]) for k in METRIC_NAMES}) for i in range(n)]


def slacks(metrics: MetricsRecord | dict, config: SramArrayConfig,
           floors: SnmFloors = SnmFloors()) -> dict[str, float]:
    """Normalized constraint slacks; every entry is >= 0 exactly when that check passes."""
    m = metrics.to_dict() if isinstance(metrics, MetricsRecord) else metrics
    spec = config.timing_spec

    def rel(limit, value):
        return (limit - value) / limit

    return {
        "t_read": rel(spec.t_read_max, m["t_read"]),
        "t_write": rel(spec.t_write_max, m["t_write"]),
        "hsnm": (m["hsnm"] - floors.hsnm) / floors.hsnm if floors.hsnm else m["hsnm"],
        "rsnm": (m["rsnm"] - floors.rsnm) / floors.rsnm if floors.rsnm else m["rsnm"],
        "wsnm": (m["wsnm"] - floors.wsnm) / floors.wsnm if floors.wsnm else m["wsnm"],
    }


def pass_fail(metrics: MetricsRecord, config: SramArrayConfig,
              floors: SnmFloors = SnmFloors()) -> bool:
    """True when both delays meet the timing spec (inclusive) and every SNM exceeds its floor."""
    spec = config.timing_spec
    return bool(
        metrics.t_read <= spec.t_read_max
        and metrics.t_write <= spec.t_write_max
        and metrics.hsnm > floors.hsnm
        and metrics.rsnm > floors.rsnm
        and metrics.wsnm > floors.wsnm
    )


def margin(metrics: MetricsRecord, config: SramArrayConfig, floors: SnmFloors = SnmFloors()) -> float:
    """Smallest normalized slack; negative means failing."""
    s = slacks(metrics, config, floors)
    v = min(s.values())
    return -math.inf if math.isnan(v) else v

