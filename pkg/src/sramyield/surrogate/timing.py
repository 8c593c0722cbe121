"""Delay, power and area models of the analytic evaluator.

Bitline and wordline interconnect are pi-chains of per-pitch segments
(C/2, R, C/2).  Node 0 of the bitline chain is the sense end; the cell in row
``r`` taps node ``r + 1``, so the last row is the far cell.  The wordline
driver sits at column 0.

Read delay of the cell at (r, c)::

    t = t_wl(c) + C_bl * dV_eff / I_net + R_bl * sum_{j=1..r+1} C_<j

where ``C_<j`` is the capacitance between the sense node and segment ``j``
(half-capacitance endpoint convention) and ``I_net`` is the access-path current
minus the idle-cell leakage that opposes discharge.  The array read delay is
the worst cell.

Write delay integrates ``C dV / I(V)`` in two phases: QB pulled from vdd down
to the trip point of the opposite inverter, then Q pulled up from 0 to
``write_flip_fraction * vdd``.  Either phase failing to reach its target gives
``+inf``.
"""

from __future__ import annotations

import math

import numpy as np

from ..circuit_model import SramArrayConfig
from . import devices as dv
from .devices import CellDevices

T_CYCLE = 1e-9  # s, activity period for dynamic power
C_SENSE = 1e-15  # F, sense-node input load
C_SA_PERIPH = 2e-15  # F, sense amplifier + precharge load when peripherals are modeled
C_MUX_PER_WAY = 0.5e-15  # F, column-mux diffusion per shared column
R_MUX = 200.0  # Ohm, column-mux pass device
R_WL_DRIVER = 1e3  # Ohm, wordline driver output resistance
T_WL_DRIVER = 35e-12  # s, intrinsic wordline driver delay (peripherals on)
T_WRITE_DRIVER = 20e-12  # s, intrinsic write driver delay (peripherals on)
L_OVERHEAD = 140e-9  # m, spacing added to the gate length in the cell-height term
AREA_DEFAULT = 0.61e-12  # m^2, calibration point of the area model
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)
_LN2 = math.log(2.0)


def _area_raw(cell) -> float:
    return 2.0 * (cell.w_pd + cell.w_pu + cell.w_pg) * (cell.l + L_OVERHEAD)


def _area_scale() -> float:
    from ..circuit_model import CellGeometry

    return AREA_DEFAULT / _area_raw(CellGeometry())


K_AREA = _area_scale()


def cell_area(cell) -> float:
    """Bitcell area (m^2); calibrated so the default geometry gives 0.61 um^2."""
    return K_AREA * _area_raw(cell)


def discharge_time(c_load, dv_swing, i_net):
    """Linear discharge time ``C * dV / I``; ``inf`` where ``I <= 0``."""
    c_load, dv_swing, i_net = np.broadcast_arrays(*(np.asarray(a, dtype=np.float64)
                                                    for a in (c_load, dv_swing, i_net)))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(i_net > 0, c_load * dv_swing / np.where(i_net > 0, i_net, 1.0), np.inf)
    return out if out.ndim else float(out)


def leakage_current(config: SramArrayConfig) -> float:
    """Per-cell idle leakage (A) at the configured supply."""
    lk = config.leakage
    return lk.i_leak_per_cell * config.vdd ** lk.vdd_exponent


def node_capacitance(cell) -> float:
    """Storage node capacitance (F): gate load of the opposite inverter plus drains.

    The pass-gate junction is folded into ``C_NODE`` so the write path is
    monotone in the pass-gate width.
    """
    return dv.C_NODE + dv.C_OX * cell.l * (cell.w_pd + cell.w_pu) + dv.C_JUNCTION * (cell.w_pd + cell.w_pu)


# ---------------------------------------------------------------------------
# interconnect

def _chain_node_caps(n_seg: int, c_seg: float, taps: float, c_end0: float) -> np.ndarray:
    """Node capacitances of an ``n_seg`` pi-chain, node 0 first; taps at nodes 1..n."""
    caps = np.full(n_seg + 1, c_seg)
    caps[0] = c_seg / 2.0 + c_end0
    caps[-1] = c_seg / 2.0
    caps[1:] += taps
    return caps


def bitline_profile(config: SramArrayConfig) -> tuple[float, np.ndarray]:
    """Total bitline capacitance (F) and per-row resistive lag (s).

    ``lag[r]`` is the extra delay seen at the sense node for a cell in row ``r``.
    """
    par = config.parasitics
    c_seg = par.c_bl_seg if par.enabled else 0.0
    r_seg = par.r_bl_seg if par.enabled else 0.0
    tap = dv.C_JUNCTION * config.cell.w_pg
    c_end = C_SENSE
    lag0 = 0.0
    if config.peripherals is not None:
        c_sa = C_SA_PERIPH + C_MUX_PER_WAY * config.mux_ratio
        c_end += c_sa
        lag0 = R_MUX * c_sa
    caps = _chain_node_caps(config.rows, c_seg, tap, c_end)
    c_before = np.cumsum(caps)[:-1]  # C_<j for j = 1..rows
    lag = lag0 + r_seg * np.cumsum(c_before)
    return float(caps.sum()), lag


def wordline_total_cap(config: SramArrayConfig) -> float:
    par = config.parasitics
    c_seg = par.c_wl_seg if par.enabled else 0.0
    tap = 2.0 * dv.C_OX * config.cell.w_pg * config.cell.l
    return float(_chain_node_caps(config.cols, c_seg, tap, 0.0).sum())


def wordline_delay(config: SramArrayConfig) -> np.ndarray:
    """50% wordline arrival time per column (driver at column 0)."""
    par = config.parasitics
    c_seg = par.c_wl_seg if par.enabled else 0.0
    r_seg = par.r_wl_seg if par.enabled else 0.0
    tap = 2.0 * dv.C_OX * config.cell.w_pg * config.cell.l
    caps = _chain_node_caps(config.cols, c_seg, tap, 0.0)
    downstream = np.cumsum(caps[::-1])[::-1][1:]  # C_>=j for j = 1..cols
    elmore = R_WL_DRIVER * caps.sum() + r_seg * np.cumsum(downstream)
    t = _LN2 * elmore
    if config.peripherals is not None:
        t = t + T_WL_DRIVER
    return t


# ---------------------------------------------------------------------------
# read

def read_current(devs: CellDevices, vdd: float, v_bl) -> np.ndarray:
    """Access-path current (A) of each cell holding Q = 0, shape ``(batch, n_cells)``."""
    pd = dv.device_triplet(devs, 0)
    pu = dv.device_triplet(devs, 4)
    pg = dv.device_triplet(devs, 2)
    v_bl = np.broadcast_to(np.asarray(v_bl, dtype=np.float64)[..., None], devs.beta.shape[:-1])
    vq = dv.solve_node(vdd, pd, pu, pg, vdd, v_bl, vdd)
    return dv.current(vdd - vq, v_bl - vq, pg)


def read_delay_from_devices(config: SramArrayConfig, devs: CellDevices) -> np.ndarray:
    """Worst-cell read delay for each batch row (s)."""
    vdd = config.vdd
    periph = devs.periph
    v_bl = vdd + periph[:, 2]
    i_cell = read_current(devs, vdd, v_bl)
    n_idle = config.rows - 1
    bits = np.array(config.leakage.idle_bits(n_idle), dtype=np.int64) if n_idle else np.zeros(0, int)
    n_one = int(bits.sum())
    n_zero = n_idle - n_one
    # Idle zeros oppose the developing differential, idle ones aid it.
    i_net = i_cell - leakage_current(config) * (n_zero - n_one)
    dv_eff = np.maximum(config.sense_differential + periph[:, 0], 0.0)
    c_bl, lag = bitline_profile(config)
    t_wl = wordline_delay(config)
    rows = np.repeat(np.arange(config.rows), config.cols)
    cols = np.tile(np.arange(config.cols), config.rows)
    t_cell = (discharge_time(c_bl, dv_eff[:, None], i_net)
              + lag[rows][None, :] + t_wl[cols][None, :] + periph[:, 1:2])
    return t_cell.max(axis=1)


# ---------------------------------------------------------------------------
# write

def _expand(triplet):
    return tuple(a[..., None] for a in triplet)


def trip_voltage(devs: CellDevices, vdd: float) -> np.ndarray:
    """Switching point of the Q inverter (input QB) with the pass gate on to a high BL."""
    pd, pu, pg = (dv.device_triplet(devs, k) for k in (0, 4, 2))

    def fun(v):
        return dv.node_residual(v, v, pd, pu, pg, vdd, vdd, vdd)

    shape = devs.beta.shape[:-1]
    return dv.bisect(fun, np.zeros(shape), np.full(shape, vdd))


def _integrate(lo, hi, rate):
    """Gauss-Legendre estimate of ``int_lo^hi dv / rate(v)``; ``inf`` if rate <= 0 anywhere."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    v = mid[..., None] + half[..., None] * _GL_NODES
    r = rate(v)
    bad = np.any(r <= 0, axis=-1)
    with np.errstate(divide="ignore"):
        val = half * np.sum(_GL_WEIGHTS / np.where(r > 0, r, 1.0), axis=-1)
    return np.where(bad, np.inf, val)


def write_phases(config: SramArrayConfig, devs: CellDevices) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell (QB pull-down, Q pull-up) durations, each ``(batch, n_cells)``."""
    vdd = config.vdd
    c_node = node_capacitance(config.cell)
    shape = devs.beta.shape[:-1]
    pd_b, pu_b, pg_b = (dv.device_triplet(devs, k) for k in (1, 5, 3))
    pd_q, pu_q, pg_q = (dv.device_triplet(devs, k) for k in (0, 4, 2))
    v_trip = trip_voltage(devs, vdd)
    # QB equilibrium while Q is still low: the write fails if it stays above the trip point.
    v_eq = dv.solve_node(np.zeros(shape), pd_b, pu_b, pg_b, vdd, np.zeros(shape), vdd)
    ok1 = v_eq < v_trip

    def rate_qb(v):
        return dv.node_residual(v, 0.0, _expand(pd_b), _expand(pu_b), _expand(pg_b), vdd, 0.0, vdd) / c_node

    t1 = _integrate(np.where(ok1, v_trip, 0.0), np.full(shape, vdd), rate_qb)
    t1 = np.where(ok1, t1, np.inf)
    target = config.write_flip_fraction * vdd

    def rate_q(v):
        return -dv.node_residual(v, 0.0, _expand(pd_q), _expand(pu_q), _expand(pg_q), vdd, vdd, vdd) / c_node

    t2 = _integrate(np.zeros(shape), np.full(shape, target), rate_q)
    return t1, t2


def write_delay_from_devices(config: SramArrayConfig, devs: CellDevices) -> np.ndarray:
    """Worst-cell write delay for each batch row (s); independent of the row count."""
    t1, t2 = write_phases(config, devs)
    t_wl = wordline_delay(config)
    cols = np.tile(np.arange(config.cols), config.rows)
    t_cell = t1 + t2 + t_wl[cols][None, :]
    extra = devs.periph[:, 3]
    if config.peripherals is not None:
        extra = extra + T_WRITE_DRIVER
    return t_cell.max(axis=1) + extra


def write_trajectory(config: SramArrayConfig, devs: CellDevices, cell: int = 0,
                     n_points: int = 200) -> dict[str, np.ndarray]:
    """Piecewise node-voltage trace of one write (batch row 0), for plotting.

    Returns times and voltages of QB during phase 1 and Q during phase 2,
    offset by the wordline arrival time.
    """
    vdd = config.vdd
    c_node = node_capacitance(config.cell)
    one = CellDevices(devs.beta[:1, cell:cell + 1], devs.vt[:1, cell:cell + 1],
                      devs.dvoff[:1, cell:cell + 1], devs.periph[:1])
    v_trip = float(trip_voltage(one, vdd)[0, 0])
    t0 = float(wordline_delay(config)[cell % config.cols])
    pd_b, pu_b, pg_b = (dv.device_triplet(one, k) for k in (1, 5, 3))
    pd_q, pu_q, pg_q = (dv.device_triplet(one, k) for k in (0, 4, 2))
    qb = np.linspace(vdd, v_trip, n_points)
    r1 = dv.node_residual(qb, 0.0, pd_b, pu_b, pg_b, vdd, 0.0, vdd)[0] / c_node
    q = np.linspace(0.0, config.write_flip_fraction * vdd, n_points)
    r2 = -dv.node_residual(q, 0.0, pd_q, pu_q, pg_q, vdd, vdd, vdd)[0] / c_node
    with np.errstate(divide="ignore"):
        dt1 = np.abs(np.diff(qb)) / np.where(r1 > 0, r1, np.nan)[1:]
        dt2 = np.diff(q) / np.where(r2 > 0, r2, np.nan)[1:]
    t1 = t0 + np.concatenate([[0.0], np.cumsum(dt1)])
    t2 = t1[-1] + np.concatenate([[0.0], np.cumsum(dt2)])
    return {"t_qb": t1, "v_qb": qb, "t_q": t2, "v_q": q}


# ---------------------------------------------------------------------------
# power

def static_power(config: SramArrayConfig) -> float:
    return config.n_cells * leakage_current(config) * config.vdd


def read_power(config: SramArrayConfig) -> float:
    """Average read power (W): every column swings its bitline by the sense differential."""
    c_bl, _ = bitline_profile(config)
    vdd = config.vdd
    e = config.cols * c_bl * vdd * config.sense_differential + wordline_total_cap(config) * vdd**2
    return e / T_CYCLE + static_power(config)


def write_power(config: SramArrayConfig) -> float:
    """Average write power (W): one selected cell per mux group flips both nodes."""
    vdd = config.vdd
    c_node = node_capacitance(config.cell)
    n_written = config.cols // config.mux_ratio
    e = n_written * 2.0 * c_node * vdd**2 + wordline_total_cap(config) * vdd**2
    return e / T_CYCLE + static_power(config)
