"""Array configuration, variation statistics and process-variation sampling.

Variation samples are kept in standardized units (multiples of each
parameter's sigma).  Physical deviations are produced on demand by
:func:`physical_deviations`, which is the only place sigmas are applied.

Canonical coordinate order of a sample vector::

    for each cell (row-major: r, then c):
        for each device M0..M5:
            vth0, u0, voff
    then, if peripherals are enabled:
        sa_offset, wl_skew, precharge_level, write_driver_delay

Device roles in the 6T cell: M0/M1 pull-down (NMOS), M2/M3 pass-gate (NMOS,
M2 on Q/BL, M3 on QB/BLB), M4/M5 pull-up (PMOS, M4 drives Q, M5 drives QB).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import rng

VT_CLASSES = ("vtl", "vtg", "vth")
DEVICES = ("M0", "M1", "M2", "M3", "M4", "M5")
DEVICE_PARAMS = ("vth0", "u0", "voff")
PERIPHERAL_PARAMS = ("sa_offset", "wl_skew", "precharge_level", "write_driver_delay")
PARAMS_PER_CELL = len(DEVICES) * len(DEVICE_PARAMS)
NMOS_DEVICES = (0, 1, 2, 3)
PMOS_DEVICES = (4, 5)

# Nominal threshold magnitudes (V) per polarity and class, 45 nm-like.
NOMINAL_VTH0 = {
    ("n", "vtl"): 0.32,
    ("n", "vtg"): 0.42,
    ("n", "vth"): 0.52,
    ("p", "vtl"): 0.30,
    ("p", "vtg"): 0.40,
    ("p", "vth"): 0.50,
}
NOMINAL_VOFF = {"n": -0.13, "p": -0.126}

# Random stream ids; one per consumer so draws never overlap.
STREAM_VARIATION = 0


class ConfigError(ValueError):
    """Invalid configuration value; ``field`` names the offending key."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def _require(cond: bool, field_name: str, message: str) -> None:
    if not cond:
        raise ConfigError(field_name, message)


@dataclass(frozen=True)
class CellGeometry:
    vt_class_nmos: str = "vtg"
    vt_class_pmos: str = "vtg"
    w_pd: float = 0.205e-6
    w_pu: float = 0.090e-6
    w_pg: float = 0.135e-6
    l: float = 50e-9

    def __post_init__(self):
        for name in ("vt_class_nmos", "vt_class_pmos"):
            _require(getattr(self, name) in VT_CLASSES, name, f"must be one of {VT_CLASSES}")
        for name in ("w_pd", "w_pu", "w_pg", "l"):
            v = getattr(self, name)
            _require(math.isfinite(v) and v > 0, name, "must be > 0")

    def width(self, device: int) -> float:
        return (self.w_pd, self.w_pd, self.w_pg, self.w_pg, self.w_pu, self.w_pu)[device]


@dataclass(frozen=True)
class VariationSpec:
    """Relative sigmas of vth0/u0/voff; ``a_vt`` (mV·µm) overrides the vth0 sigma."""

    vth0: float = 0.05
    u0: float = 0.05
    voff: float = 0.05
    a_vt: float | None = None

    def __post_init__(self):
        for name in ("vth0", "u0", "voff"):
            _require(getattr(self, name) >= 0, name, "sigma must be >= 0")
        if self.a_vt is not None:
            _require(0 <= self.a_vt <= 10, "a_vt", "must lie in [0, 10] mV·um")


@dataclass(frozen=True)
class ParasiticSpec:
    """Per-cell-pitch pi-segment values; bitline defaults give 1.28 kOhm / 256 fF at 256 rows."""

    r_bl_seg: float = 5.0
    c_bl_seg: float = 1e-15
    r_wl_seg: float = 10.0
    c_wl_seg: float = 0.5e-15
    enabled: bool = True

    def __post_init__(self):
        for name in ("r_bl_seg", "c_bl_seg", "r_wl_seg", "c_wl_seg"):
            _require(getattr(self, name) >= 0, name, "must be >= 0")


@dataclass(frozen=True)
class PeripheralSpec:
    sa_offset_sigma: float = 20e-3
    wl_driver_skew_sigma: float = 5e-12
    precharge_level_sigma: float = 10e-3
    write_driver_delay_sigma: float = 5e-12

    def __post_init__(self):
        for name in ("sa_offset_sigma", "wl_driver_skew_sigma", "precharge_level_sigma",
                     "write_driver_delay_sigma"):
            _require(getattr(self, name) >= 0, name, "must be >= 0")

    def sigmas(self) -> np.ndarray:
        return np.array([self.sa_offset_sigma, self.wl_driver_skew_sigma,
                         self.precharge_level_sigma, self.write_driver_delay_sigma])


@dataclass(frozen=True)
class LeakagePolicy:
    """Idle-cell data pattern and per-cell leakage current at vdd = 1 V."""

    idle_pattern: str | tuple[int, ...] = "all_zero"
    i_leak_per_cell: float = 2e-9
    vdd_exponent: float = 3.0

    def __post_init__(self):
        if isinstance(self.idle_pattern, str):
            _require(self.idle_pattern in ("all_zero", "all_one"), "idle_pattern",
                     "must be all_zero, all_one or a bit vector")
        else:
            bits = tuple(int(b) for b in self.idle_pattern)
            _require(all(b in (0, 1) for b in bits), "idle_pattern", "bits must be 0/1")
            object.__setattr__(self, "idle_pattern", bits)
        _require(self.i_leak_per_cell >= 0, "i_leak_per_cell", "must be >= 0")

    def idle_bits(self, n_idle: int) -> tuple[int, ...]:
        if self.idle_pattern == "all_zero":
            return (0,) * n_idle
        if self.idle_pattern == "all_one":
            return (1,) * n_idle
        _require(len(self.idle_pattern) == n_idle, "idle_pattern",
                 f"explicit pattern needs {n_idle} bits (rows - 1), got {len(self.idle_pattern)}")
        return self.idle_pattern


@dataclass(frozen=True)
class TimingSpec:
    t_read_max: float = 0.5e-9
    t_write_max: float = 0.5e-9

    def __post_init__(self):
        _require(self.t_read_max > 0, "t_read_max", "must be > 0")
        _require(self.t_write_max > 0, "t_write_max", "must be > 0")


@dataclass(frozen=True)
class SramArrayConfig:
    rows: int
    cols: int
    vdd: float = 1.0
    cell: CellGeometry = field(default_factory=CellGeometry)
    mux_ratio: int = 1
    parasitics: ParasiticSpec = field(default_factory=ParasiticSpec)
    peripherals: PeripheralSpec | None = None
    leakage: LeakagePolicy = field(default_factory=LeakagePolicy)
    variation: VariationSpec = field(default_factory=VariationSpec)
    timing_spec: TimingSpec = field(default_factory=TimingSpec)
    sense_differential: float = 0.25
    write_flip_fraction: float = 0.9

    def __post_init__(self):
        _require(int(self.rows) == self.rows and self.rows >= 1, "rows", "must be a positive integer")
        _require(int(self.cols) == self.cols and self.cols >= 1, "cols", "must be a positive integer")
        _require(self.mux_ratio >= 1, "mux_ratio", "must be a positive integer")
        _require(self.cols % self.mux_ratio == 0, "mux_ratio", "cols must be divisible by mux_ratio")
        _require(self.vdd > 0, "vdd", "must be > 0")
        _require(0 < self.sense_differential < self.vdd, "sense_differential", "must lie in (0, vdd)")
        _require(0 < self.write_flip_fraction < 1, "write_flip_fraction", "must lie in (0, 1)")
        if not isinstance(self.leakage.idle_pattern, str):
            self.leakage.idle_bits(self.rows - 1)

    @property
    def n_cells(self) -> int:
        return self.rows * self.cols

    @property
    def variation_dim(self) -> int:
        return variation_dimension(self.rows, self.cols, self.peripherals is not None)

    def with_cell(self, cell: CellGeometry) -> "SramArrayConfig":
        return replace(self, cell=cell)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        pat = self.leakage.idle_pattern
        d["leakage"]["idle_pattern"] = pat if isinstance(pat, str) else list(pat)
        return d

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class VariationSample:
    values: np.ndarray
    sample_index: int = 0

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, VariationSample):
            return NotImplemented
        return self.sample_index == other.sample_index and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.sample_index, self.values.tobytes()))


def variation_dimension(rows: int, cols: int, peripherals: bool) -> int:
    return PARAMS_PER_CELL * rows * cols + (len(PERIPHERAL_PARAMS) if peripherals else 0)


def default_config(rows: int, cols: int, *, peripherals: bool = False,
                   parasitics: bool = True) -> SramArrayConfig:
    """Nominal 45 nm-class configuration: 1.0 V supply, 5% sigmas, 0.5 ns timing spec.

    Peripheral variation is off unless requested; when on, the SA offset sigma
    is 20 mV.
    """
    if rows < 1 or cols < 1:
        raise ConfigError("rows" if rows < 1 else "cols", "must be >= 1")
    return SramArrayConfig(
        rows=rows,
        cols=cols,
        peripherals=PeripheralSpec() if peripherals else None,
        parasitics=ParasiticSpec(enabled=parasitics),
    )


def pelgrom_sigma(a_vt: float, w: float, l: float) -> float:
    """Threshold mismatch sigma in volts for ``a_vt`` in mV·µm and w, l in meters."""
    if not (w > 0 and l > 0):
        raise ValueError("w and l must be positive")
    area_um2 = (w * 1e6) * (l * 1e6)
    return a_vt * 1e-3 / math.sqrt(area_um2)


def parameter_names(config: SramArrayConfig) -> list[str]:
    names = [
        f"r{r}c{c}.{dev}.{p}"
        for r in range(config.rows)
        for c in range(config.cols)
        for dev in DEVICES
        for p in DEVICE_PARAMS
    ]
    if config.peripherals is not None:
        names += [f"periph.{p}" for p in PERIPHERAL_PARAMS]
    return names


def sample_matrix(config: SramArrayConfig, seed: int, start: int, n: int) -> np.ndarray:
    """Standardized variation rows ``start..start+n-1`` as an ``(n, dim)`` array."""
    return rng.normal_rows(seed, STREAM_VARIATION, start, n, config.variation_dim)


def sample_variations(config: SramArrayConfig, seed: int, n: int,
                      start: int = 0) -> list[VariationSample]:
    if n < 1:
        raise ValueError("n must be >= 1")
    block = sample_matrix(config, seed, start, n)
    return [VariationSample(block[i], start + i) for i in range(n)]


def nominal_sample(config: SramArrayConfig) -> VariationSample:
    return VariationSample(np.zeros(config.variation_dim), 0)


def device_vth0(cell: CellGeometry, device: int) -> float:
    if device in NMOS_DEVICES:
        return NOMINAL_VTH0[("n", cell.vt_class_nmos)]
    return NOMINAL_VTH0[("p", cell.vt_class_pmos)]


def vth0_sigmas(config: SramArrayConfig) -> np.ndarray:
    """Absolute vth0 sigma (V) per device M0..M5."""
    cell = config.cell
    spec = config.variation
    out = np.empty(len(DEVICES))
    for d in range(len(DEVICES)):
        if spec.a_vt is not None:
            out[d] = pelgrom_sigma(spec.a_vt, cell.width(d), cell.l)
        else:
            out[d] = spec.vth0 * device_vth0(cell, d)
    return out


@dataclass(frozen=True)
class PhysicalDeviations:
    """Physical deviations for a batch: arrays shaped ``(batch, n_cells, 6)``.

    ``dvth`` is an additive threshold-magnitude shift in volts (positive means
    a weaker device for both polarities), ``u0_factor`` multiplies mobility,
    ``dvoff`` is an additive subthreshold offset shift in volts.  ``periph`` is
    ``(batch, 4)`` in SI units (V, s, V, s), zeros when peripherals are off.
    """

    dvth: np.ndarray
    u0_factor: np.ndarray
    dvoff: np.ndarray
    periph: np.ndarray


def physical_deviations(config: SramArrayConfig, z: np.ndarray | VariationSample | None) -> PhysicalDeviations:
    """Scale standardized coordinates by their sigmas.

    ``z`` may be a single sample, a ``(dim,)`` vector, a ``(batch, dim)`` array
    or ``None`` (nominal).
    """
    dim = config.variation_dim
    if z is None:
        z = np.zeros((1, dim))
    elif isinstance(z, VariationSample):
        z = z.values[None, :]
    else:
        z = np.asarray(z, dtype=np.float64)
        if z.ndim == 1:
            z = z[None, :]
    if z.shape[-1] != dim:
        raise ValueError(f"sample dimension {z.shape[-1]} does not match config dimension {dim}")
    batch = z.shape[0]
    core = z[:, : PARAMS_PER_CELL * config.n_cells].reshape(batch, config.n_cells, len(DEVICES), 3)
    spec = config.variation
    dvth = core[..., 0] * vth0_sigmas(config)
    u0_factor = np.maximum(1.0 + spec.u0 * core[..., 1], 0.05)
    voff_nom = np.array([abs(NOMINAL_VOFF["n" if d in NMOS_DEVICES else "p"]) for d in range(6)])
    dvoff = core[..., 2] * spec.voff * voff_nom
    if config.peripherals is not None:
        periph = z[:, PARAMS_PER_CELL * config.n_cells:] * config.peripherals.sigmas()
    else:
        periph = np.zeros((batch, len(PERIPHERAL_PARAMS)))
    return PhysicalDeviations(dvth, u0_factor, dvoff, periph)


# ---------------------------------------------------------------------------
# config files

_SECTIONS = {
    "cell": CellGeometry,
    "parasitics": ParasiticSpec,
    "peripherals": PeripheralSpec,
    "leakage": LeakagePolicy,
    "variation": VariationSpec,
    "timing_spec": TimingSpec,
}


def schema_path() -> Path:
    return Path(__file__).with_name("schema") / "config.schema.json"


def config_from_dict(data: dict[str, Any]) -> SramArrayConfig:
    """Build a config from a mapping whose keys match the dataclass fields (SI units)."""
    import jsonschema

    schema = json.loads(schema_path().read_text())
    try:
        jsonschema.validate(data, schema)
    except jsonschema.ValidationError as exc:
        where = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(where, exc.message) from None
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        cls = _SECTIONS.get(key)
        if cls is None:
            kwargs[key] = value
        elif value is None:
            kwargs[key] = None
        else:
            if key == "leakage" and isinstance(value.get("idle_pattern"), list):
                value = dict(value, idle_pattern=tuple(value["idle_pattern"]))
            kwargs[key] = cls(**value)
    return SramArrayConfig(**kwargs)


def load_config(path: str | Path) -> SramArrayConfig:
    import yaml

    text = Path(path).read_text(encoding="utf-8")
    data = yaml.safe_load(text)
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config file must contain a mapping")
    return config_from_dict(data)


def dump_config(config: SramArrayConfig) -> str:
    import yaml

    return yaml.safe_dump(config.to_dict(), sort_keys=False)


def stack_samples(samples: Sequence[VariationSample]) -> np.ndarray:
    return np.stack([s.values for s in samples])
