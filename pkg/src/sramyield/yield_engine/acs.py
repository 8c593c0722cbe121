"""Adaptive compressed-sensing importance sampling.

Our concretisation of the sparse idea, in stages:

1. wide presample to find failing regions (shared with mean-shift IS);
2. for each mode, probe around its boundary point and fit a sparse linear
   model of the margin by orthogonal matching pursuit (``sparsity_k`` terms);
3. shift = minimum-norm zero of the fitted model restricted to the recovered
   support, i.e. ``x_S = -a b_S / |b_S|^2``;
4. repeat 2-3 around the new shift ``n_stage - 1`` more times, re-estimating
   the support each stage;
5. mixture importance sampling around the shifts.

A mode whose fit explains less than ``r2_min`` of the probe variance (a
dense or strongly curved boundary), or whose support comes back empty,
makes the whole run fall back to mean-shift IS with a warning.
"""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.linear_model import OrthogonalMatchingPursuit

from .. import rng
from .core import (
    STREAM_PROBE,
    GaussianMixture,
    ShiftNotFoundError,
    StoppingRule,
    YieldEstimate,
    explained_by,
    importance_loop,
    ray_boundary,
    wide_presample,
)
from .limit_states import LimitState, evaluate_margin
from .mnis import run_mnis


def sparse_fit(x: np.ndarray, m: np.ndarray, sparsity_k: int,
               prune: float = 0.05) -> tuple[float, np.ndarray, np.ndarray, float]:
    """OMP fit ``m ~ a + b.x``; returns ``(a, b, support, r2)`` with tiny terms pruned."""
    k = min(sparsity_k, x.shape[1], max(1, x.shape[0] - 1))
    omp = OrthogonalMatchingPursuit(n_nonzero_coefs=k, fit_intercept=True)
    with warnings.catch_warnings():
        # exact sparse targets terminate OMP early; that is the good case
        warnings.simplefilter("ignore", RuntimeWarning)
        omp.fit(x, m)
    b = np.asarray(omp.coef_, dtype=np.float64).copy()
    a = float(omp.intercept_)
    top = np.max(np.abs(b)) if b.size else 0.0
    if top > 0:
        b[np.abs(b) < prune * top] = 0.0
    support = np.flatnonzero(b)
    resid = m - (a + x @ b)
    var = float(np.var(m))
    r2 = 1.0 - float(np.var(resid)) / var if var > 0 else 0.0
    return a, b, support, r2


def sparse_shift(a: float, b: np.ndarray, support: np.ndarray) -> np.ndarray:
    x = np.zeros_like(b)
    bs = b[support]
    x[support] = -a * bs / np.dot(bs, bs)
    return x


def run_acs(limit: LimitState, stop: StoppingRule = StoppingRule(), seed: int = 0, *,
            sparsity_k: int = 5, n_stage: int = 2, n_probe: int | None = None,
            probe_sigma: float = 1.0, n_presample: int = 500, presample_sigma: float = 3.0,
            max_modes: int = 4, r2_min: float = 0.9, batch_size: int = 200,
            jobs: int = 1) -> YieldEstimate:
    d = limit.dim
    if n_probe is None:
        n_probe = max(40, int(np.ceil(4 * sparsity_k * np.log(max(d, 2)))))
    x0, m0 = wide_presample(limit, seed, n_presample, presample_sigma, jobs)
    used = n_presample
    failing = x0[m0 < 0.0]
    if failing.shape[0] == 0:
        raise ShiftNotFoundError(n_presample)
    failing = failing[np.argsort(np.einsum("ij,ij->i", failing, failing))]
    shifts: list[np.ndarray] = []
    supports: list[list[int]] = []
    fit_quality: list[float] = []
    fallback_reason = None
    probe_pos = 0
    remaining = failing
    while remaining.shape[0] and len(shifts) + 1 <= max_modes and fallback_reason is None:
        centre, u = ray_boundary(limit, remaining[0], jobs=jobs)
        used += u
        shift = None
        for _ in range(n_stage):
            xp = centre + probe_sigma * rng.normal_rows(seed, STREAM_PROBE, probe_pos, n_probe, d)
            probe_pos += n_probe
            mp = evaluate_margin(limit, xp, jobs)
            used += n_probe
            a, b, support, r2 = sparse_fit(xp, mp, sparsity_k)
            if support.size == 0 or r2 < r2_min:
                fallback_reason = ("empty support" if support.size == 0
                                   else f"sparse fit explains only {r2:.2f} of margin variance")
                break
            shift = sparse_shift(a, b, support)
            centre = shift
        if fallback_reason is not None:
            break
        if not any(np.linalg.norm(shift - s) < 0.25 for s in shifts):
            shifts.append(shift)
            supports.append(support.tolist())
            fit_quality.append(r2)
        keep = ~explained_by([shift], remaining)
        keep[0] = False
        remaining = remaining[keep]
    if fallback_reason is not None:
        est = run_mnis(limit, stop, seed, n_presample=n_presample, presample_sigma=presample_sigma,
                       max_modes=max_modes, batch_size=batch_size, jobs=jobs)
        est.method = "acs"
        est.n_sims += used
        est.trace = [(n + used, p, f) for n, p, f in est.trace]
        est.warnings.append(f"fell back to mean-shift IS: {fallback_reason}")
        est.diagnostics["fallback"] = True
        return est
    proposal = GaussianMixture.shifted(np.array(shifts), 1.0)
    est = importance_loop(limit, proposal, stop, seed, used, batch_size=batch_size, jobs=jobs,
                          method="acs")
    est.diagnostics.update({"support": supports, "fit_r2": fit_quality, "fallback": False,
                            "shifts": [s.tolist() for s in shifts]})
    return est
