"""Run generated decks through an external SPICE simulator (ngspice or Xyce).

Nothing here is needed for the surrogate path; every entry point degrades to
an "unavailable" status when no simulator is installed.

Output grammar
--------------
Measurements (``.MEAS``) are read from lines of the form::

    name = value [anything]

ngspice writes these to its batch log (``t_read = 2.3e-10 targ= ... trig= ...``),
Xyce to ``<deck>.mt0`` (``T_READ = 2.3e-10``).  Names are case-folded.  A
measurement that the simulator could not resolve (ngspice prints ``failed``
or an error) is simply absent and reported as missing.

``.PRINT DC`` tables are read as every line made only of numbers with at least
three columns; ngspice repeats page headers and index columns, Xyce writes a
``.prn`` file with an index column.  The last three columns are taken as
sweep, ``V(QB_OUT)`` and ``V(Q_OUT)``.
"""

from __future__ import annotations

import os
import re
import shutil
import subprocess
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .circuit_model import SramArrayConfig
from .netlist import DeckKind, NetlistDocument, emit_deck
from .surrogate import timing
from .surrogate.snm import ButterflyCurve, snm, sweep_grid, write_margin
from .surrogate.evaluate import MetricsRecord

ENV_PATH = "SRAMYIELD_SPICE"
ENV_DIALECT = "SRAMYIELD_SPICE_DIALECT"
DIALECTS = ("ngspice", "xyce")

MEAS_RE = re.compile(
    r"^\s*([A-Za-z_]\w*)\s*=\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)(?![\w.])")
_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
ROW_RE = re.compile(rf"^\s*{_NUM}(?:\s+{_NUM})+\s*$")
VERSION_RE = re.compile(r"(ngspice[-\s]?\d[\w.\-]*|Xyce[^\n]*?\d+\.\d+[\w.\-]*)", re.IGNORECASE)


class SpiceError(RuntimeError):
    """Base class; ``log_path`` points at the retained log (may be ``None``)."""

    def __init__(self, message: str, log_path: Path | None = None):
        super().__init__(message if log_path is None else f"{message} (log: {log_path})")
        self.log_path = log_path


class SimulatorUnavailable(SpiceError):
    pass


class SimulatorTimeout(SpiceError):
    pass


class SimulatorFailed(SpiceError):
    pass


class MissingMeasurement(SpiceError):
    def __init__(self, names, log_path=None):
        super().__init__(f"missing measurements: {', '.join(sorted(names))}", log_path)
        self.names = set(names)


@dataclass
class SimulatorHandle:
    executable: str
    dialect: str = "auto"
    timeout: float = 120.0
    workdir: str | None = None
    keep: bool = False
    model_include: str | None = None
    probed: bool = field(default=False, init=False)
    version: str = field(default="", init=False)

    def __post_init__(self):
        if self.dialect == "auto":
            base = Path(self.executable).name.lower()
            self.dialect = "xyce" if "xyce" in base else "ngspice"
        if self.dialect not in DIALECTS:
            raise ValueError(f"dialect must be one of {DIALECTS}")


@dataclass
class ProbeResult:
    available: bool
    version: str = ""
    diagnostic: str = ""


@dataclass
class MeasurementSet:
    values: dict[str, float]
    log_path: Path | None
    table: np.ndarray | None = None

    def __getitem__(self, name: str) -> float:
        return self.values[name.lower()]


def handle_from_env(**kwargs) -> SimulatorHandle | None:
    exe = os.environ.get(ENV_PATH)
    if not exe:
        for name in ("ngspice", "Xyce"):
            exe = shutil.which(name)
            if exe:
                break
    if not exe:
        return None
    return SimulatorHandle(exe, os.environ.get(ENV_DIALECT, "auto"), **kwargs)


def probe(handle: SimulatorHandle | None) -> ProbeResult:
    """Identify the simulator; never raises."""
    if handle is None:
        return ProbeResult(False, diagnostic="no simulator configured")
    exe = shutil.which(handle.executable) or handle.executable
    if not Path(exe).exists():
        return ProbeResult(False, diagnostic=f"{handle.executable}: not found")
    flag = "-v" if handle.dialect == "xyce" else "--version"
    try:
        out = subprocess.run([exe, flag], capture_output=True, text=True, timeout=min(handle.timeout, 30))
    except (OSError, subprocess.TimeoutExpired) as exc:
        return ProbeResult(False, diagnostic=f"{handle.executable}: {exc}")
    m = VERSION_RE.search(out.stdout + "\n" + out.stderr)
    if not m:
        text = (out.stdout + out.stderr).strip().splitlines()
        return ProbeResult(False, diagnostic="unrecognised version output: " + (text[0] if text else "<empty>"))
    handle.probed = True
    handle.version = m.group(1).strip()
    return ProbeResult(True, handle.version)


def parse_measurements(text: str) -> dict[str, float]:
    out: dict[str, float] = {}
    for line in text.splitlines():
        m = MEAS_RE.match(line)
        if m:
            out.setdefault(m.group(1).lower(), float(m.group(2)))
    return out


def parse_table(text: str) -> np.ndarray:
    rows = [[float(t) for t in line.split()] for line in text.splitlines() if ROW_RE.match(line)]
    if not rows:
        return np.zeros((0, 0))
    width = max(len(r) for r in rows)
    rows = [r for r in rows if len(r) == width]
    arr = np.array(rows)
    # ngspice repeats rows across page breaks only via headers; drop exact duplicates
    _, first = np.unique(arr, axis=0, return_index=True)
    return arr[np.sort(first)]


def _requested(deck_text: str) -> set[str]:
    return {m.group(1).lower() for m in re.finditer(r"^\.MEAS\w*\s+\w+\s+(\w+)", deck_text,
                                                    re.IGNORECASE | re.MULTILINE)}


def _excerpt(path: Path, n: int = 15) -> str:
    try:
        lines = path.read_text(errors="replace").splitlines()
    except OSError:
        return ""
    return "\n".join(lines[-n:])


def run_deck(handle: SimulatorHandle, deck: NetlistDocument | str, name: str = "deck") -> MeasurementSet:
    """Write ``deck`` to a scratch directory, run it and parse the results.

    Raises
    ------
    SimulatorUnavailable, SimulatorTimeout, SimulatorFailed, MissingMeasurement
    """
    if not handle.probed and not probe(handle).available:
        raise SimulatorUnavailable(f"{handle.executable} is not a usable simulator")
    text = deck.text if isinstance(deck, NetlistDocument) else deck
    if handle.model_include:
        first, _, rest = text.partition("\n")
        text = f"{first}\n.INCLUDE '{handle.model_include}'\n{rest}"
    scratch = Path(tempfile.mkdtemp(prefix=f"{name}-", dir=handle.workdir))
    deck_path = scratch / f"{name}.sp"
    deck_path.write_text(text, encoding="utf-8", newline="\n")
    log_path = scratch / f"{name}.log"
    out_path = scratch / f"{name}.out"
    if handle.dialect == "ngspice":
        cmd = [handle.executable, "-b", "-o", str(log_path), str(deck_path)]
    else:
        cmd = [handle.executable, str(deck_path)]
        out_path = log_path
    ok = False
    try:
        with open(out_path, "w", encoding="utf-8") as log:
            try:
                proc = subprocess.run(cmd, stdout=log, stderr=subprocess.STDOUT, cwd=scratch,
                                      timeout=handle.timeout)
            except subprocess.TimeoutExpired:
                raise SimulatorTimeout(f"{name}: no result within {handle.timeout} s", log_path) from None
        if out_path != log_path and out_path.exists():
            # ngspice: fold console output into the log so one file holds everything
            with open(log_path, "a", encoding="utf-8") as log:
                log.write(out_path.read_text(errors="replace"))
        if proc.returncode != 0:
            raise SimulatorFailed(f"{name}: exit status {proc.returncode}\n{_excerpt(log_path)}", log_path)
        blob = log_path.read_text(errors="replace")
        for extra in (deck_path.with_suffix(".sp.mt0"), scratch / f"{name}.mt0"):
            if extra.exists():
                blob += "\n" + extra.read_text(errors="replace")
        table_src = blob
        prn = deck_path.with_suffix(".sp.prn")
        if prn.exists():
            table_src = prn.read_text(errors="replace")
        values = parse_measurements(blob)
        missing = _requested(text) - set(values)
        if missing:
            raise MissingMeasurement(missing, log_path)
        table = parse_table(table_src) if re.search(r"^\.DC\b", text, re.IGNORECASE | re.MULTILINE) else None
        ok = True
        return MeasurementSet(values, None if not handle.keep else log_path, table)
    finally:
        if ok and not handle.keep:
            shutil.rmtree(scratch, ignore_errors=True)


def _curve(table: np.ndarray, vdd: float) -> ButterflyCurve:
    if table is None or table.size == 0 or table.shape[1] < 3:
        raise SimulatorFailed("DC sweep produced no table")
    sweep, qb, q = table[:, -3], table[:, -2], table[:, -1]
    grid = sweep_grid(vdd)
    order = np.argsort(sweep, kind="stable")
    sweep, qb, q = sweep[order], qb[order], q[order]
    return ButterflyCurve(grid, np.interp(grid, sweep, qb), np.interp(grid, sweep, q))


def evaluate_via_spice(config: SramArrayConfig, sample=None, handle: SimulatorHandle | None = None,
                       jobs: int = 1) -> MetricsRecord:
    """Metrics of one sample from simulation.

    SNMs come from the three DC butterfly decks and delays from the two
    transient decks.  Power uses the analytic switched-capacitance model
    (the decks carry no power measurement) and area the analytic layout model.
    """
    handle = handle or handle_from_env()
    if handle is None or not (handle.probed or probe(handle).available):
        raise SimulatorUnavailable("no SPICE simulator available")
    kinds = list(DeckKind)
    decks = [emit_deck(config, k, sample) for k in kinds]

    def one(i):
        try:
            return run_deck(handle, decks[i], kinds[i].value)
        except SpiceError as exc:
            raise type(exc)(f"{kinds[i].value}: {exc}", exc.log_path) if not isinstance(
                exc, MissingMeasurement) else exc

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as ex:
            res = list(ex.map(one, range(len(kinds))))
    else:
        res = [one(i) for i in range(len(kinds))]
    by = dict(zip(kinds, res))
    vdd = config.vdd
    hsnm = snm(_curve(by[DeckKind.DC_HOLD_SNM].table, vdd))
    rsnm = snm(_curve(by[DeckKind.DC_READ_SNM].table, vdd))
    wsnm = write_margin(_curve(by[DeckKind.DC_WRITE_SNM].table, vdd))
    return MetricsRecord(
        hsnm=hsnm, rsnm=rsnm, wsnm=wsnm,
        t_read=by[DeckKind.TRAN_READ]["t_read"],
        t_write=by[DeckKind.TRAN_WRITE]["t_write"],
        p_read=timing.read_power(config),
        p_write=timing.write_power(config),
        area=timing.cell_area(config.cell),
    )


def spice_backend(handle: SimulatorHandle, jobs: int = 1):
    """Optimizer backend: nominal metrics of a config via simulation."""
    def backend(config: SramArrayConfig) -> MetricsRecord:
        return evaluate_via_spice(config, None, handle, jobs)
    return backend


class SpiceLimitState:
    """Delay margin ``(spec - t) / spec`` of one transient deck per sample, by simulation."""

    has_margin = True

    def __init__(self, config: SramArrayConfig, handle: SimulatorHandle, metric: str = "t_write",
                 threshold: float | None = None):
        if metric not in ("t_read", "t_write"):
            raise ValueError("SPICE limit states support t_read and t_write")
        self.config = config
        self.handle = handle
        self.metric = metric
        self.dim = config.variation_dim
        spec = config.timing_spec
        self.threshold = threshold or (spec.t_read_max if metric == "t_read" else spec.t_write_max)
        self.kind = DeckKind.TRAN_READ if metric == "t_read" else DeckKind.TRAN_WRITE
        self.name = f"spice:{metric}"
        self.p_true = None

    def margin(self, x):
        x = np.atleast_2d(x)
        out = np.empty(x.shape[0])
        for i, row in enumerate(x):
            try:
                t = run_deck(self.handle, emit_deck(self.config, self.kind, row), self.kind.value)[self.metric]
            except MissingMeasurement:
                t = np.inf  # the node never crossed: a failing sample
            out[i] = (self.threshold - t) / self.threshold
        return np.clip(np.nan_to_num(out, neginf=-10.0), -10.0, 10.0)
