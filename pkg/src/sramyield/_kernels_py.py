"""Pure-numpy implementation of the inner numerical kernels.

Mirrors :mod:`sramyield._kernels` (Cython).  All functions take flat float64
arrays of equal length; broadcasting is done by the caller.
"""

from __future__ import annotations

import numpy as np

PHI_T = 0.02585
N_SLOPE = 1.4
THETA = 1.2
NODE_TOL = 1e-7
SQRT2 = np.sqrt(2.0)


def drain_current(vgs, vds, beta, vt, dvoff):
    """Smooth long-channel drain current (EKV interpolation, mobility roll-off).

    ``I = beta * 2 n phi_t^2 [F(x_f) - F(x_r)] / (1 + theta * v_ov)`` with
    ``F(x) = ln^2(1 + e^x)``, ``x_f = (vgs - vt_eff) / (2 n phi_t)`` and
    ``x_r = x_f - vds / (2 phi_t)``.  ``vt_eff`` adds ``dvoff`` weighted by a
    logistic that is 1 deep in subthreshold and 0 in strong inversion, so the
    voff knob only moves the leakage regime.
    """
    nphi = N_SLOPE * PHI_T
    s = 0.5 * (1.0 - np.tanh(0.5 * (vgs - vt) / nphi))
    vte = vt + dvoff * s
    xf = (vgs - vte) / (2.0 * nphi)
    xr = xf - vds / (2.0 * PHI_T)
    spf = np.logaddexp(0.0, xf)
    spr = np.logaddexp(0.0, xr)
    vov = 2.0 * nphi * spf
    return beta * 2.0 * N_SLOPE * PHI_T**2 * (spf * spf - spr * spr) / (1.0 + THETA * vov)


def _pg_out(v, pg_beta, pg_vt, pg_dvoff, v_wl, v_bl):
    # Current leaving the storage node through the pass gate toward the bitline.
    lo = np.minimum(v, v_bl)
    mag = drain_current(v_wl - lo, np.abs(v - v_bl), pg_beta, pg_vt, pg_dvoff)
    return np.where(v >= v_bl, mag, -mag)


def node_residual(v, vin, pd_beta, pd_vt, pd_dvoff, pu_beta, pu_vt, pu_dvoff,
                  pg_beta, pg_vt, pg_dvoff, v_wl, v_bl, vdd):
    """Net current leaving the inverter output node at voltage ``v`` (increasing in ``v``)."""
    i_pd = drain_current(vin, v, pd_beta, pd_vt, pd_dvoff)
    i_pu = drain_current(vdd - vin, vdd - v, pu_beta, pu_vt, pu_dvoff)
    return i_pd - i_pu + _pg_out(v, pg_beta, pg_vt, pg_dvoff, v_wl, v_bl)


def solve_node(vin, pd_beta, pd_vt, pd_dvoff, pu_beta, pu_vt, pu_dvoff,
               pg_beta, pg_vt, pg_dvoff, v_wl, v_bl, vdd):
    """Output voltage of an inverter loaded by a pass gate, by bisection on [0, vdd]."""
    args = (vin, pd_beta, pd_vt, pd_dvoff, pu_beta, pu_vt, pu_dvoff,
            pg_beta, pg_vt, pg_dvoff, v_wl, v_bl, vdd)
    lo = np.zeros_like(vin)
    hi = np.full_like(vin, vdd)
    n_iter = int(np.ceil(np.log2(vdd / NODE_TOL)))
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        pos = node_residual(mid, *args) > 0.0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    return 0.5 * (lo + hi)


def vtc_batch(grid, params, vdd):
    """Transfer curves for ``m`` parameter rows over a shared input ``grid``.

    ``params`` is ``(m, 11)``: pd beta/vt/dvoff, pu beta/vt/dvoff, pg
    beta/vt/dvoff, wordline voltage, bitline voltage.  Returns ``(m, n)``.
    """
    grid = np.asarray(grid, dtype=np.float64)
    params = np.atleast_2d(np.asarray(params, dtype=np.float64))
    m, n = params.shape[0], grid.shape[0]
    vin = np.broadcast_to(grid, (m, n)).ravel()
    cols = [np.broadcast_to(params[:, k:k + 1], (m, n)).ravel() for k in range(11)]
    return solve_node(vin, *cols, vdd).reshape(m, n)


def _rotated(x, y):
    return (x - y) / SQRT2, (x + y) / SQRT2


def _gap_profile(lobe1, lobe2, grid):
    # Curve A: (grid, lobe1); curve B: (lobe2, grid).  Rotate by 45 degrees and
    # compare on the union of both knot sets so piecewise-linear maxima are exact.
    ua, va = _rotated(grid, lobe1)
    ub, vb = _rotated(lobe2, grid)
    ub, vb = ub[::-1], vb[::-1]
    lo = max(ua[0], ub[0])
    hi = min(ua[-1], ub[-1])
    u = np.union1d(ua, ub)
    u = u[(u >= lo) & (u <= hi)]
    d = np.interp(u, ua, va) - np.interp(u, ub, vb)
    return u, d


def rotated_gaps(lobe1, lobe2, grid):
    """Per-row lobe sizes of butterfly curves.

    Returns ``(upper_left, lower_right, write_margin)`` arrays, each already
    divided by sqrt(2) so they are square sides in volts.  ``write_margin`` is
    the smallest separation on the upper-left side of the lower-right lobe
    centre; it is negative when an upper-left (retention) lobe survives.
    """
    lobe1 = np.atleast_2d(lobe1)
    lobe2 = np.atleast_2d(lobe2)
    m = lobe1.shape[0]
    ul = np.empty(m)
    lr = np.empty(m)
    wm = np.empty(m)
    for i in range(m):
        _, d = _gap_profile(lobe1[i], lobe2[i], grid)
        ul[i] = d.max() / SQRT2
        lr[i] = (-d).max() / SQRT2
        k = int(np.argmax(-d))
        wm[i] = (-d[: k + 1]).min() / SQRT2
    return ul, lr, wm
