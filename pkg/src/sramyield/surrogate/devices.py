"""Technology constants and per-device parameter assembly for the 6T cell."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..circuit_model import (
    NMOS_DEVICES,
    PhysicalDeviations,
    SramArrayConfig,
    device_vth0,
    physical_deviations,
)

K_PRIME_N = 300e-6  # A/V^2, u0*Cox for NMOS
K_PRIME_P = 120e-6  # A/V^2, u0*Cox for PMOS
C_OX = 0.0314  # F/m^2 gate capacitance per area
C_JUNCTION = 1e-9  # F/m drain junction capacitance per width
C_NODE = 0.5e-15  # F fixed storage-node wiring (includes pass-gate junction)


@dataclass(frozen=True)
class CellDevices:
    """Device parameters shaped ``(batch, n_cells, 6)`` for M0..M5."""

    beta: np.ndarray
    vt: np.ndarray
    dvoff: np.ndarray
    periph: np.ndarray

    @property
    def batch(self) -> int:
        return self.beta.shape[0]


def cell_devices(config: SramArrayConfig, z=None) -> CellDevices:
    dev: PhysicalDeviations = physical_deviations(config, z)
    cell = config.cell
    widths = np.array([cell.width(d) for d in range(6)])
    kp = np.array([K_PRIME_N if d in NMOS_DEVICES else K_PRIME_P for d in range(6)])
    vt0 = np.array([device_vth0(cell, d) for d in range(6)])
    beta = kp * widths / cell.l * dev.u0_factor
    vt = vt0 + dev.dvth
    return CellDevices(beta, vt, dev.dvoff, dev.periph)


def device_triplet(devs: CellDevices, d: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return devs.beta[..., d], devs.vt[..., d], devs.dvoff[..., d]


def current(vgs, vds, triplet) -> np.ndarray:
    beta, vt, dvoff = triplet
    shape = np.broadcast_shapes(np.shape(vgs), np.shape(vds), np.shape(beta))
    args = [np.array(np.broadcast_to(np.asarray(a, dtype=np.float64), shape)).ravel()
            for a in (vgs, vds, beta, vt, dvoff)]
    return np.asarray(kernels.drain_current(*args)).reshape(shape)


def node_residual(v, vin, pd, pu, pg, v_wl, v_bl, vdd) -> np.ndarray:
    """Net current leaving an inverter output node held at ``v`` (A)."""
    i_pd = current(vin, v, pd)
    i_pu = current(vdd - vin, vdd - v, pu)
    lo = np.minimum(v, v_bl)
    mag = current(v_wl - lo, np.abs(v - v_bl), pg)
    return i_pd - i_pu + np.where(v >= v_bl, mag, -mag)


def solve_node(vin, pd, pu, pg, v_wl, v_bl, vdd) -> np.ndarray:
    """Equilibrium of the loaded inverter output for each broadcast element."""
    arrays = (vin, *pd, *pu, *pg, v_wl, v_bl)
    shape = np.broadcast_shapes(*(np.shape(a) for a in arrays))
    flat = [np.array(np.broadcast_to(np.asarray(a, dtype=np.float64), shape)).ravel() for a in arrays]
    return np.asarray(kernels.solve_node(*flat, float(vdd))).reshape(shape)


def bisect(fun, lo, hi, tol: float = 1e-7) -> np.ndarray:
    """Vectorized bisection for an increasing ``fun`` with ``fun(lo) <= 0 <= fun(hi)``."""
    lo = np.array(lo, dtype=np.float64)
    hi = np.array(hi, dtype=np.float64)
    lo, hi = np.broadcast_arrays(lo, hi)
    lo, hi = lo.copy(), hi.copy()
    n_iter = int(np.ceil(np.log2(max(float(np.max(hi - lo)), tol) / tol))) + 1
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        pos = fun(mid) > 0.0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    return 0.5 * (lo + hi)
