"""Adaptive importance sampling by cross-entropy with a Gaussian-mixture proposal.

Each iteration samples the current mixture, picks elites, clusters them into
up to ``n_components`` groups and refits each group's mean and diagonal sigma
with likelihood-ratio weights.  With a continuous margin the elite level is
``max(quantile(margin, elite_fraction), 0)``; with an indicator the elites are
the failing samples.  Components whose means point the same way (cosine >
``merge_cos``) are merged.  Sigmas are floored at ``sigma_floor``: below
1/sqrt(2) the weight variance of a Gaussian proposal is infinite.  Coordinates
whose fitted shift is not significant (under 3 standard errors) are reset to
N(0, 1), which keeps the proposal usable in a few hundred dimensions.
"""

from __future__ import annotations

import numpy as np
from sklearn.cluster import KMeans

from .core import (
    STREAM_CE,
    STREAM_CE_COMPONENT,
    GaussianMixture,
    StoppingRule,
    YieldEstimate,
    importance_loop,
)
from .limit_states import LimitState, evaluate_margin


def _weighted_fit(x: np.ndarray, w: np.ndarray, floor: float,
                  z_keep: float = 3.0) -> tuple[np.ndarray, np.ndarray]:
    w = w / w.sum()
    mu = w @ x
    sd = np.sqrt(w @ (x - mu) ** 2)
    # coordinates whose shift is within noise are reset to the nominal N(0, 1);
    # otherwise hundreds of slightly-off sigmas blow up the weight variance
    n_eff = 1.0 / float(np.dot(w, w))
    idle = np.abs(mu) < z_keep * np.maximum(sd, 1e-12) / np.sqrt(n_eff)
    mu = np.where(idle, 0.0, mu)
    sd = np.where(idle, 1.0, np.maximum(sd, floor))
    return mu, sd


def _merge(means: list[np.ndarray], sigmas: list[np.ndarray], mass: list[float],
           merge_cos: float) -> tuple[list, list, list]:
    out_m, out_s, out_w = [], [], []
    for m, s, w in sorted(zip(means, sigmas, mass), key=lambda t: -t[2]):
        hit = None
        for j, m2 in enumerate(out_m):
            denom = np.linalg.norm(m) * np.linalg.norm(m2)
            if denom > 0 and np.dot(m, m2) / denom > merge_cos:
                hit = j
                break
        if hit is None:
            out_m.append(m)
            out_s.append(s)
            out_w.append(w)
        else:
            tot = out_w[hit] + w
            out_m[hit] = (out_w[hit] * out_m[hit] + w * m) / tot
            out_s[hit] = np.maximum(out_s[hit], s)
            out_w[hit] = tot
    return out_m, out_s, out_w


def cross_entropy(limit: LimitState, seed: int, *, n_per_iter: int = 1000, elite_fraction: float = 0.1,
                  max_iters: int = 20, n_components: int = 2, sigma_floor: float = 0.75,
                  init_sigma: float = 1.0, merge_cos: float = 0.8,
                  jobs: int = 1) -> tuple[GaussianMixture, int, list[str], list[dict]]:
    """Run the CE iterations; returns ``(proposal, evaluations, warnings, history)``."""
    d = limit.dim
    proposal = GaussianMixture(np.zeros((1, d)), np.full((1, d), init_sigma), np.ones(1))
    warnings: list[str] = []
    history: list[dict] = []
    used = 0
    has_margin = getattr(limit, "has_margin", False)
    reached = False
    for it in range(max_iters):
        x = proposal.sample(seed, it * n_per_iter, n_per_iter, STREAM_CE, STREAM_CE_COMPONENT)
        m = evaluate_margin(limit, x, jobs)
        used += n_per_iter
        logw = proposal.log_ratio(x)
        if has_margin:
            gamma = max(float(np.quantile(m, elite_fraction)), 0.0)
            elite = m <= gamma
        else:
            gamma = 0.0
            elite = m < 0.0
            if not elite.any():
                proposal = GaussianMixture(proposal.means, proposal.sigmas * 1.5, proposal.weights)
                history.append({"iter": it, "level": None, "components": proposal.k})
                continue
        reached = gamma <= 0.0
        xe = x[elite]
        we = np.exp(logw[elite] - logw[elite].max())
        k = min(n_components, xe.shape[0])
        if k > 1:
            labels = KMeans(n_clusters=k, n_init=4, random_state=seed % (2**31)).fit_predict(xe)
        else:
            labels = np.zeros(xe.shape[0], dtype=int)
        means, sigmas, mass = [], [], []
        for j in range(k):
            sel = labels == j
            if sel.sum() < 2:
                continue
            mu, sig = _weighted_fit(xe[sel], we[sel], sigma_floor)
            means.append(mu)
            sigmas.append(sig)
            mass.append(float(we[sel].sum()))
        if not means:
            mu, sig = _weighted_fit(xe, we, sigma_floor)
            means, sigmas, mass = [mu], [sig], [1.0]
        means, sigmas, mass = _merge(means, sigmas, mass, merge_cos)
        proposal = GaussianMixture(np.array(means), np.array(sigmas), np.array(mass))
        history.append({"iter": it, "level": gamma, "components": proposal.k})
        if reached:
            break
    if not reached:
        warnings.append("cross-entropy did not reach the failure level within max_iters")
    return proposal, used, warnings, history


def run_ais(limit: LimitState, stop: StoppingRule = StoppingRule(), seed: int = 0, *,
            n_per_iter: int = 1000, elite_fraction: float = 0.1, max_iters: int = 20,
            n_components: int = 2, sigma_floor: float = 0.75, batch_size: int = 200,
            jobs: int = 1) -> YieldEstimate:
    proposal, used, warnings, history = cross_entropy(
        limit, seed, n_per_iter=n_per_iter, elite_fraction=elite_fraction, max_iters=max_iters,
        n_components=n_components, sigma_floor=sigma_floor, jobs=jobs)
    est = importance_loop(limit, proposal, stop, seed, used, batch_size=batch_size, jobs=jobs,
                          method="ais")
    est.warnings.extend(warnings)
    est.diagnostics["ce_history"] = history
    return est
