"""Crude Monte Carlo with optional stratification and control variates.

Stratification splits the probability mass of one direction ``v`` (default
the first coordinate) into ``n_strata`` equal-probability slices and samples
each in proportion to its probability:

    p = sum_k p_k / K,   Var = sum_k p_k (1 - p_k) / (K^2 n_k)

The control variate is any function ``c(x)`` with known mean; the estimate is
``mean(f) - b (mean(c) - E[c])`` with ``b`` the sample regression
coefficient, and its variance is that of the residual ``f - b c`` over ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import ndtri
from scipy.stats import norm

from .. import rng
from .core import STREAM_MC, STREAM_MISC, StoppingRule, YieldEstimate, estimator_fom
from .limit_states import LimitState, evaluate_margin


@dataclass(frozen=True)
class ControlVariate:
    fn: Callable[[np.ndarray], np.ndarray]
    mean: float
    name: str = "control"


def halfspace_control(direction, offset: float) -> ControlVariate:
    """Indicator of ``v . x > offset`` for unit-normalised ``v``; mean ``Phi(-offset / |v|)``."""
    v = np.asarray(direction, dtype=np.float64)
    nv = float(np.linalg.norm(v))
    if nv == 0:
        raise ValueError("direction must be nonzero")
    u = v / nv
    beta = offset / nv

    def fn(x):
        return (x @ u > beta).astype(np.float64)

    return ControlVariate(fn, float(norm.sf(beta)), "halfspace")


def _linear_control(x: np.ndarray, m: np.ndarray) -> ControlVariate | None:
    # Least-squares linear fit of the margin, turned into a half-space indicator.
    a = np.column_stack([np.ones(x.shape[0]), x])
    coef, *_ = np.linalg.lstsq(a, m, rcond=None)
    b0, b = coef[0], coef[1:]
    nb = float(np.linalg.norm(b))
    if not np.isfinite(nb) or nb == 0:
        return None
    # margin ~ b0 + b.x < 0  <=>  (-b).x > b0
    return halfspace_control(-b, b0)


class _Moments:
    def __init__(self):
        self.n = 0
        self.sf = 0.0
        self.sff = 0.0
        self.sc = 0.0
        self.scc = 0.0
        self.sfc = 0.0

    def add(self, f, c=None):
        self.n += f.shape[0]
        self.sf += float(f.sum())
        self.sff += float(np.dot(f, f))
        if c is not None:
            self.sc += float(c.sum())
            self.scc += float(np.dot(c, c))
            self.sfc += float(np.dot(f, c))


def _plain(mo: _Moments) -> tuple[float, float]:
    p = mo.sf / mo.n
    return p, math.sqrt(max(p * (1.0 - p), 0.0) / mo.n)


def _cv(mo: _Moments, mean_c: float) -> tuple[float, float]:
    n = mo.n
    mf, mc = mo.sf / n, mo.sc / n
    vcc = mo.scc / n - mc * mc
    vfc = mo.sfc / n - mf * mc
    vff = mo.sff / n - mf * mf
    if vcc <= 0:
        return _plain(mo)
    b = vfc / vcc
    p = mf - b * (mc - mean_c)
    var = max(vff - 2 * b * vfc + b * b * vcc, 0.0) * n / max(n - 1, 1)
    return min(max(p, 0.0), 1.0), math.sqrt(var / n)


def stratified_rows(seed: int, start: int, n: int, dim: int, n_strata: int,
                    direction: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rows whose projection on ``direction`` is placed in stratum ``i mod K``.

    Proportional allocation with equal-probability strata is realised by
    cycling through the strata; row ``i`` depends only on ``(seed, i)``.
    """
    z = rng.normal_rows(seed, STREAM_MC, start, n, dim)
    u = rng.uniform_rows(seed, STREAM_MISC, start, n, 1)[:, 0]
    idx = np.arange(start, start + n)
    strata = idx % n_strata
    t = ndtri((strata + u) / n_strata)
    v = direction / np.linalg.norm(direction)
    x = z - np.outer(z @ v, v) + np.outer(t, v)
    return x, strata


def run_mc(limit: LimitState, stop: StoppingRule = StoppingRule(), seed: int = 0, *,
           stratified: bool = False, n_strata: int = 20, strat_direction=None,
           control_variate: ControlVariate | str | None = None, batch_size: int = 10_000,
           jobs: int = 1) -> YieldEstimate:
    """Monte Carlo failure probability.

    ``control_variate="auto"`` fits a linear margin model on the first batch
    and uses its half-space indicator (known Gaussian mean) as the control.
    Stratification and control variates are mutually exclusive.
    """
    if stratified and control_variate is not None:
        raise ValueError("choose either stratification or a control variate")
    dim = limit.dim
    direction = np.eye(dim)[0] if strat_direction is None else np.asarray(strat_direction, float)
    if stratified:
        batch_size = max(n_strata, (batch_size // n_strata) * n_strata)
    mo = _Moments()
    strata_n = np.zeros(n_strata)
    strata_f = np.zeros(n_strata)
    cv = control_variate
    trace: list[tuple[int, float, float]] = []
    n_used = 0
    n_fail = 0
    status = "max_sims"
    p = std = 0.0
    while n_used < stop.max_sims:
        b = min(batch_size, stop.max_sims - n_used)
        if stratified:
            x, strata = stratified_rows(seed, n_used, b, dim, n_strata, direction)
        else:
            x = rng.normal_rows(seed, STREAM_MC, n_used, b, dim)
        m = evaluate_margin(limit, x, jobs)
        f = (m < 0.0).astype(np.float64)
        n_fail += int(f.sum())
        if cv == "auto":
            cv = _linear_control(x, m) if getattr(limit, "has_margin", False) else None
        if stratified:
            np.add.at(strata_n, strata, 1.0)
            np.add.at(strata_f, strata, f)
            mo.n += b
        elif isinstance(cv, ControlVariate):
            mo.add(f, cv.fn(x))
        else:
            mo.add(f)
        n_used += b
        if stratified:
            ok = strata_n > 0
            pk = np.where(ok, strata_f / np.maximum(strata_n, 1), 0.0)
            p = float(pk.sum() / n_strata)
            var = float(np.sum(np.where(ok, pk * (1 - pk) / np.maximum(strata_n, 1), 0.0))) / n_strata**2
            std = math.sqrt(var)
        elif isinstance(cv, ControlVariate):
            p, std = _cv(mo, cv.mean)
        else:
            p, std = _plain(mo)
        fom = estimator_fom(p, std)
        trace.append((n_used, p, fom))
        if p >= 1.0 and n_fail >= stop.min_failures:
            status = "converged"
            break
        if stop.satisfied(p, fom, n_fail):
            status = "converged"
            break
    if n_fail == 0:
        status = "unresolved"
    est = YieldEstimate(p, std, estimator_fom(p, std), n_used, trace, "mc", status, n_fail)
    if stratified:
        est.diagnostics["strata"] = n_strata
    if isinstance(cv, ControlVariate):
        est.diagnostics["control_variate"] = cv.name
        est.diagnostics["control_mean"] = cv.mean
    return est
