"""Butterfly curves and static noise margins.

A butterfly is stored as two transfer curves on a shared sweep grid:
``lobe1`` is QB as a function of Q (the M1/M5 inverter) and ``lobe2`` is Q as
a function of QB (the M0/M4 inverter), i.e. plotted with axes exchanged.
Margins use the 45-degree rotation method: both curves are rotated so that the
diagonal of an inscribed square becomes vertical, the largest vertical gap in
each lobe is taken, and the side is that gap divided by sqrt(2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..circuit_model import SramArrayConfig
from .devices import CellDevices, cell_devices

SWEEP_STEP = 1e-3
MODES = ("hold", "read", "write")


@dataclass(frozen=True)
class ButterflyCurve:
    grid: np.ndarray
    lobe1: np.ndarray
    lobe2: np.ndarray


def sweep_grid(vdd: float, step: float = SWEEP_STEP) -> np.ndarray:
    n = int(round(vdd / step)) + 1
    return np.linspace(0.0, vdd, n)


def inverter_vtc(pd_strength, pu_strength, vt_shifts=(0.0, 0.0), vdd: float = 1.0,
                 vin_grid=None, *, vt_nominal: float = 0.4) -> np.ndarray:
    """Unloaded inverter transfer curve.

    Strengths are transconductance factors (A/V^2); ``vt_shifts`` are additive
    (NMOS, PMOS) threshold-magnitude shifts applied to a common nominal.
    """
    grid = sweep_grid(vdd) if vin_grid is None else np.asarray(vin_grid, dtype=np.float64)
    params = np.array([[pd_strength, vt_nominal + vt_shifts[0], 0.0,
                        pu_strength, vt_nominal + vt_shifts[1], 0.0,
                        0.0, vt_nominal, 0.0, 0.0, vdd]])
    out = np.clip(kernels.vtc_batch(grid, params, float(vdd))[0], 0.0, vdd)
    # the node solver is exact to ~1e-7 V; remove sub-tolerance ripple
    return np.minimum.accumulate(out)


def trip_point(vin_grid, vout) -> float:
    """Input voltage where the transfer curve crosses ``vout == vin``."""
    g = np.asarray(vin_grid)
    diff = np.asarray(vout) - g
    k = int(np.argmax(diff <= 0))
    if k == 0:
        return float(g[0])
    d0, d1 = diff[k - 1], diff[k]
    return float(g[k - 1] + (g[k] - g[k - 1]) * d0 / (d0 - d1))


def snm(curve: ButterflyCurve) -> float:
    """Hold/read margin: the smaller lobe's inscribed-square side (negative if monostable)."""
    ul, lr, _ = kernels.rotated_gaps(curve.lobe1[None, :], curve.lobe2[None, :], curve.grid)
    return float(min(ul[0], lr[0]))


def write_margin(curve: ButterflyCurve) -> float:
    """Write margin: narrowest separation on the retention side; negative if the old state survives."""
    _, _, wm = kernels.rotated_gaps(curve.lobe1[None, :], curve.lobe2[None, :], curve.grid)
    return float(wm[0])


def _mode_bias(mode: str, vdd: float) -> tuple[float, float, float]:
    # (wordline, BL on the Q side, BLB on the QB side); write drives Q toward 1.
    if mode == "hold":
        return 0.0, vdd, vdd
    if mode == "read":
        return vdd, vdd, vdd
    if mode == "write":
        return vdd, vdd, 0.0
    raise ValueError(f"unknown mode {mode!r}")


def _curve_params(devs: CellDevices, mode: str, vdd: float) -> tuple[np.ndarray, np.ndarray]:
    wl, bl, blb = _mode_bias(mode, vdd)
    b, v, o = devs.beta, devs.vt, devs.dvoff
    ones = np.ones(b.shape[:-1])
    # lobe1: QB = f(Q) through M1 (PD), M5 (PU), M3 (PG to BLB)
    p1 = np.stack([b[..., 1], v[..., 1], o[..., 1], b[..., 5], v[..., 5], o[..., 5],
                   b[..., 3], v[..., 3], o[..., 3], wl * ones, blb * ones], axis=-1)
    # lobe2: Q = f(QB) through M0 (PD), M4 (PU), M2 (PG to BL)
    p2 = np.stack([b[..., 0], v[..., 0], o[..., 0], b[..., 4], v[..., 4], o[..., 4],
                   b[..., 2], v[..., 2], o[..., 2], wl * ones, bl * ones], axis=-1)
    return p1.reshape(-1, 11), p2.reshape(-1, 11)


def cell_butterfly(config: SramArrayConfig, mode: str, z=None, cell_index: int = 0) -> ButterflyCurve:
    devs = cell_devices(config, z)
    grid = sweep_grid(config.vdd)
    p1, p2 = _curve_params(devs, mode, config.vdd)
    row = cell_index
    l1 = kernels.vtc_batch(grid, p1[row:row + 1], config.vdd)[0]
    l2 = kernels.vtc_batch(grid, p2[row:row + 1], config.vdd)[0]
    return ButterflyCurve(grid, l1, l2)


def snm_table(devs: CellDevices, vdd: float) -> dict[str, np.ndarray]:
    """HSNM/RSNM/WSNM for every (batch, cell), shaped ``(batch, n_cells)``.

    Identical parameter rows (e.g. the nominal array) are solved once.
    """
    grid = sweep_grid(vdd)
    out = {}
    for mode in MODES:
        p1, p2 = _curve_params(devs, mode, vdd)
        both = np.concatenate([p1, p2], axis=1)
        uniq, inverse = np.unique(both, axis=0, return_inverse=True)
        inverse = np.asarray(inverse).ravel()
        l1 = kernels.vtc_batch(grid, np.ascontiguousarray(uniq[:, :11]), vdd)
        l2 = kernels.vtc_batch(grid, np.ascontiguousarray(uniq[:, 11:]), vdd)
        ul, lr, wm = kernels.rotated_gaps(l1, l2, grid)
        val = wm if mode == "write" else np.minimum(ul, lr)
        out[mode] = np.asarray(val)[inverse].reshape(devs.beta.shape[:-1])
    return out
