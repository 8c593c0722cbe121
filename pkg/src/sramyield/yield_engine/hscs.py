"""Hyperspherical clustering importance sampling.

Presample uniform directions on spheres of growing radius until enough
failures are seen, cluster the failing directions with k-means, sparsify each
centroid (coordinates below the noise level of an average of random unit
vectors are zeroed), walk each centroid ray to the failure boundary and, with
a continuous margin, polish with HL-RF on the centroid's support only.  The
proposal is an equal-weight mixture of unit Gaussians at those points.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.cluster import KMeans

from .. import rng
from .core import (
    STREAM_PRESAMPLE,
    GaussianMixture,
    RegionNotFoundError,
    StoppingRule,
    YieldEstimate,
    hlrf,
    importance_loop,
    ray_boundary,
)
from .limit_states import LimitState, evaluate_margin


def default_radii(dim: int, growth: float = 1.25) -> np.ndarray:
    """Geometric schedule from ``0.5 sqrt(d)`` (at least 1) up to ``4 sqrt(d)`` (at least 8)."""
    r0 = max(1.0, 0.5 * math.sqrt(dim))
    r_max = max(8.0, 4.0 * math.sqrt(dim))
    n = int(math.floor(math.log(r_max / r0) / math.log(growth))) + 1
    return r0 * growth ** np.arange(n)


def sparsify(centroid: np.ndarray, n_members: int, n_sigma: float = 4.0) -> np.ndarray:
    d = centroid.shape[0]
    noise = 1.0 / math.sqrt(d * max(n_members, 1))
    thr = max(n_sigma * noise, 0.1 * float(np.max(np.abs(centroid))))
    out = np.where(np.abs(centroid) >= thr, centroid, 0.0)
    if not out.any():
        out[np.argmax(np.abs(centroid))] = centroid[np.argmax(np.abs(centroid))]
    return out


def _walk(limit, c: np.ndarray, radii: np.ndarray, jobs: int) -> tuple[np.ndarray | None, int]:
    """Walk out along ray ``c`` until it fails, then bracket the boundary."""
    used = 0
    for r in radii:
        used += 1
        if evaluate_margin(limit, (r * c)[None, :], jobs)[0] < 0.0:
            xb, nu = ray_boundary(limit, r * c, jobs=jobs)
            return xb, used + nu
    return None, used


def run_hscs(limit: LimitState, stop: StoppingRule = StoppingRule(), seed: int = 0, *,
             n_sphere_samples: int = 200, radii_schedule=None, n_clusters: int = 2,
             min_sphere_failures: int = 10, merge_cos: float = 0.9, batch_size: int = 200,
             jobs: int = 1) -> YieldEstimate:
    d = limit.dim
    radii = default_radii(d) if radii_schedule is None else np.asarray(radii_schedule, dtype=float)
    dirs_fail: list[np.ndarray] = []
    used = 0
    n_fail = 0
    for i, r in enumerate(radii):
        z = rng.normal_rows(seed, STREAM_PRESAMPLE, i * n_sphere_samples, n_sphere_samples, d)
        u = z / np.linalg.norm(z, axis=1, keepdims=True)
        m = evaluate_margin(limit, r * u, jobs)
        used += n_sphere_samples
        f = m < 0.0
        if f.any():
            dirs_fail.append(u[f])
            n_fail += int(f.sum())
        if n_fail >= min_sphere_failures:
            break
    if n_fail == 0:
        raise RegionNotFoundError(used, float(radii[-1]))
    dirs = np.concatenate(dirs_fail)
    k = min(n_clusters, dirs.shape[0])
    if k > 1:
        labels = KMeans(n_clusters=k, n_init=4, random_state=seed % (2**31)).fit_predict(dirs)
    else:
        labels = np.zeros(dirs.shape[0], dtype=int)
    centres: list[np.ndarray] = []
    supports: list[list[int]] = []
    for j in range(k):
        members = dirs[labels == j]
        if members.shape[0] == 0:
            continue
        raw = members.mean(axis=0)
        raw = raw / np.linalg.norm(raw)
        sp = sparsify(raw, members.shape[0])
        sp = sp / np.linalg.norm(sp)
        if any(float(np.dot(raw, e / np.linalg.norm(e))) > merge_cos for e in centres):
            continue
        # keep the sparse direction unless its boundary is clearly farther out
        # than the dense one (a genuinely dense failure direction)
        best = None
        for c in ((sp, raw) if np.count_nonzero(sp) < d else (raw,)):
            xb, nu = _walk(limit, c, radii, jobs)
            used += nu
            if xb is not None and (best is None or np.linalg.norm(xb) < 0.9 * np.linalg.norm(best[1])):
                best = (c, xb)
        if best is None:
            continue
        c, xb = best
        support = np.flatnonzero(c)
        if getattr(limit, "has_margin", False):
            xr, nu = hlrf(limit, xb, support=support, jobs=jobs)
            used += nu
            ok = np.all(np.isfinite(xr)) and evaluate_margin(limit, xr[None, :] * (1 + 1e-6), jobs)[0] <= 1e-6
            used += 1
            if ok and np.linalg.norm(xr) <= np.linalg.norm(xb) + 1e-9:
                xb = xr
        if any(np.linalg.norm(xb - e) < 0.25 for e in centres):
            continue
        centres.append(xb)
        supports.append(support.tolist())
    if not centres:
        raise RegionNotFoundError(used, float(radii[-1]))
    proposal = GaussianMixture.shifted(np.array(centres), 1.0)
    est = importance_loop(limit, proposal, stop, seed, used, batch_size=batch_size, jobs=jobs,
                          method="hscs")
    est.diagnostics.update({"centroids": [c.tolist() for c in centres], "supports": supports,
                            "sphere_failures": n_fail})
    return est
