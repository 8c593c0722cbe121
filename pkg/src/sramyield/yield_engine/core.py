"""Shared estimator machinery: results, stopping rule, proposals, IS loop, boundary search."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .. import rng
from .limit_states import LimitState, evaluate_margin

# Random stream ids (stream 0 is the plain variation stream used by MC).
STREAM_MC = 0
STREAM_PRESAMPLE = 1
STREAM_PROPOSAL = 2
STREAM_COMPONENT = 3
STREAM_PROBE = 4
STREAM_CE = 5
STREAM_CE_COMPONENT = 6
STREAM_MISC = 7

METHODS = ("mc", "mnis", "ais", "acs", "hscs")


class YieldEngineError(RuntimeError):
    pass


class ShiftNotFoundError(YieldEngineError):
    """Presampling produced no failing point, so no mean shift exists."""

    def __init__(self, n_presample: int):
        super().__init__(f"shift-not-found: no failing sample among {n_presample} presamples")
        self.n_presample = n_presample


class RegionNotFoundError(YieldEngineError):
    """No failing point on any presampling sphere."""

    def __init__(self, n_evaluated: int, max_radius: float):
        super().__init__(f"region-not-found: no failure up to radius {max_radius:.3g} "
                         f"({n_evaluated} sphere samples)")
        self.n_evaluated = n_evaluated
        self.max_radius = max_radius


@dataclass(frozen=True)
class StoppingRule:
    fom_target: float = 0.1
    max_sims: int = 1_000_000
    min_failures: int = 10

    def __post_init__(self):
        if not self.fom_target > 0:
            raise ValueError("fom_target must be > 0")
        if self.max_sims < 1:
            raise ValueError("max_sims must be >= 1")
        if self.min_failures < 0:
            raise ValueError("min_failures must be >= 0")

    def satisfied(self, p: float, fom: float, n_fail: int) -> bool:
        return p > 0 and n_fail >= self.min_failures and fom <= self.fom_target


@dataclass
class YieldEstimate:
    p_fail: float
    std_p_fail: float
    estimator_fom: float
    n_sims: int
    trace: list[tuple[int, float, float]]
    method: str
    status: str = "converged"  # converged | max_sims | unresolved
    n_failures: int = 0
    warnings: list[str] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "method": self.method,
            "status": self.status,
            "p_fail": self.p_fail,
            "std_p_fail": self.std_p_fail,
            "estimator_fom": self.estimator_fom,
            "n_sims": self.n_sims,
            "n_failures": self.n_failures,
            "warnings": list(self.warnings),
        }


def estimator_fom(estimate_or_p, std: float | None = None) -> float:
    """Relative accuracy ``std / p``; ``inf`` when ``p == 0``."""
    if std is None:
        p, std = estimate_or_p.p_fail, estimate_or_p.std_p_fail
    else:
        p = estimate_or_p
    if p <= 0:
        return math.inf
    return std / p


def yield_from_pfail(p_fail: float, n_cells: int) -> dict[str, float]:
    """Array yield for ``n_cells`` independent cells: exact power law and exponential approximation."""
    if not 0.0 <= p_fail <= 1.0:
        raise ValueError("p_fail must lie in [0, 1]")
    if n_cells < 1:
        raise ValueError("n_cells must be >= 1")
    exact = math.exp(n_cells * math.log1p(-p_fail)) if p_fail < 1 else 0.0
    return {"exact": exact, "approx": math.exp(-n_cells * p_fail)}


# ---------------------------------------------------------------------------
# proposals

@dataclass
class GaussianMixture:
    """Diagonal-covariance Gaussian mixture in standardized space."""

    means: np.ndarray  # (k, d)
    sigmas: np.ndarray  # (k, d)
    weights: np.ndarray  # (k,)

    def __post_init__(self):
        self.means = np.atleast_2d(np.asarray(self.means, dtype=np.float64))
        k, d = self.means.shape
        s = np.asarray(self.sigmas, dtype=np.float64)
        self.sigmas = np.broadcast_to(s if s.ndim == 2 else np.full(d, 1.0) * s, (k, d)).copy()
        w = np.asarray(self.weights, dtype=np.float64)
        self.weights = w / w.sum()

    @classmethod
    def shifted(cls, means, sigma: float = 1.0) -> "GaussianMixture":
        means = np.atleast_2d(means)
        return cls(means, np.full(means.shape, sigma), np.ones(means.shape[0]))

    @property
    def k(self) -> int:
        return self.means.shape[0]

    def sample(self, seed: int, start: int, n: int, stream: int = STREAM_PROPOSAL,
               comp_stream: int = STREAM_COMPONENT) -> np.ndarray:
        d = self.means.shape[1]
        z = rng.normal_rows(seed, stream, start, n, d)
        if self.k == 1:
            comp = np.zeros(n, dtype=int)
        else:
            u = rng.uniform_rows(seed, comp_stream, start, n, 1)[:, 0]
            comp = np.minimum(np.searchsorted(np.cumsum(self.weights), u), self.k - 1)
        return self.means[comp] + self.sigmas[comp] * z

    def log_ratio(self, x: np.ndarray) -> np.ndarray:
        """``log(phi(x) / q(x))`` with the shared normalising constants cancelled."""
        log_phi = -0.5 * np.einsum("ij,ij->i", x, x)
        comps = []
        for j in range(self.k):
            r = (x - self.means[j]) / self.sigmas[j]
            comps.append(math.log(self.weights[j]) - 0.5 * np.einsum("ij,ij->i", r, r)
                         - np.log(self.sigmas[j]).sum())
        return log_phi - logsumexp(np.stack(comps), axis=0)

    def to_dict(self) -> dict:
        return {"means": self.means.tolist(), "sigmas": self.sigmas.tolist(),
                "weights": self.weights.tolist()}


class WeightedAccumulator:
    """Running mean and variance of ``w * 1_fail`` plus weight diagnostics."""

    def __init__(self):
        self.n = 0
        self.s1 = 0.0
        self.s2 = 0.0
        self.n_fail = 0
        self.w1 = 0.0
        self.w2 = 0.0

    def add(self, w: np.ndarray, fail: np.ndarray) -> None:
        v = np.where(fail, w, 0.0)
        self.n += v.shape[0]
        self.s1 += float(v.sum())
        self.s2 += float(np.dot(v, v))
        self.n_fail += int(fail.sum())
        self.w1 += float(w.sum())
        self.w2 += float(np.dot(w, w))

    @property
    def p(self) -> float:
        return self.s1 / self.n if self.n else 0.0

    @property
    def std(self) -> float:
        if self.n < 2:
            return 0.0
        var = (self.s2 - self.n * self.p**2) / (self.n - 1)
        return math.sqrt(max(var, 0.0) / self.n)

    def weight_stats(self) -> dict[str, float]:
        if self.n < 2:
            return {"mean_weight": float("nan"), "mean_weight_std": float("nan")}
        m = self.w1 / self.n
        var = (self.w2 - self.n * m * m) / (self.n - 1)
        return {"mean_weight": m, "mean_weight_std": math.sqrt(max(var, 0.0) / self.n)}


def importance_loop(limit: LimitState, proposal: GaussianMixture, stop: StoppingRule, seed: int,
                    n_used: int, *, batch_size: int = 200, jobs: int = 1,
                    stream: int = STREAM_PROPOSAL, comp_stream: int = STREAM_COMPONENT,
                    method: str = "is") -> YieldEstimate:
    """Mixture importance sampling against N(0, I) until the stopping rule fires.

    ``n_used`` is the number of evaluations already spent (presampling etc.)
    and is included in ``n_sims`` and the trace.
    """
    acc = WeightedAccumulator()
    trace: list[tuple[int, float, float]] = []
    status = "max_sims"
    pos = 0
    while n_used < stop.max_sims:
        b = min(batch_size, stop.max_sims - n_used)
        x = proposal.sample(seed, pos, b, stream, comp_stream)
        pos += b
        fail = evaluate_margin(limit, x, jobs) < 0.0
        w = np.exp(proposal.log_ratio(x))
        acc.add(w, fail)
        n_used += b
        fom = estimator_fom(acc.p, acc.std)
        trace.append((n_used, acc.p, fom))
        if stop.satisfied(acc.p, fom, acc.n_fail):
            status = "converged"
            break
    if acc.n_fail == 0:
        status = "unresolved"
    est = YieldEstimate(acc.p, acc.std, estimator_fom(acc.p, acc.std), n_used, trace, method,
                        status, acc.n_fail)
    est.diagnostics.update(acc.weight_stats())
    est.diagnostics["proposal"] = proposal.to_dict()
    est.diagnostics["n_is_samples"] = acc.n
    return est


# ---------------------------------------------------------------------------
# boundary search

def ray_boundary(limit: LimitState, x_fail: np.ndarray, *, n_grid: int = 32, jobs: int = 1,
                 rounds: int = 2) -> tuple[np.ndarray, int]:
    """First crossing of the failure boundary on the segment from 0 to ``x_fail``.

    Each round evaluates ``n_grid`` equally spaced points of the current
    bracket in one batch.  Returns the failing-side end of the final bracket
    and the number of evaluations used.
    """
    lo, hi = 0.0, 1.0
    used = 0
    for _ in range(rounds):
        t = np.linspace(lo, hi, n_grid + 1)[1:]
        m = evaluate_margin(limit, t[:, None] * x_fail[None, :], jobs)
        used += n_grid
        idx = np.flatnonzero(m < 0.0)
        if idx.size == 0:
            break
        k = int(idx[0])
        lo, hi = (t[k - 1] if k > 0 else lo), t[k]
    return hi * x_fail, used


def hlrf(limit: LimitState, x0: np.ndarray, *, support: np.ndarray | None = None,
         max_iter: int = 10, step: float = 1e-3, tol: float = 1e-4,
         jobs: int = 1) -> tuple[np.ndarray, int]:
    """Hasofer-Lind / Rackwitz-Fiessler iteration toward the most probable failure point.

    Gradients are forward differences; with ``support`` only those coordinates
    are differenced and moved (the rest are set to 0).
    """
    d = x0.shape[0]
    coords = np.arange(d) if support is None else np.asarray(support, dtype=int)
    x = np.zeros(d)
    x[coords] = x0[coords]
    used = 0
    for _ in range(max_iter):
        pts = np.repeat(x[None, :], coords.size + 1, axis=0)
        pts[np.arange(1, coords.size + 1), coords] += step
        g_all = evaluate_margin(limit, pts, jobs)
        used += coords.size + 1
        g = g_all[0]
        grad = np.zeros(d)
        grad[coords] = (g_all[1:] - g) / step
        gn = float(np.dot(grad, grad))
        if not (np.isfinite(gn) and gn > 0):
            break
        x_new = ((np.dot(grad, x) - g) / gn) * grad
        done = np.linalg.norm(x_new - x) < tol
        x = x_new
        if done:
            break
    return x, used


def prune_coordinates(limit: LimitState, x: np.ndarray, *, jobs: int = 1) -> tuple[np.ndarray, int]:
    """Zero the smallest coordinates of a failing point while it keeps failing.

    Candidate ``k`` zeroes the ``k`` smallest-magnitude coordinates; the
    sparsest candidate that still fails is returned.  Every candidate has a
    smaller norm than ``x``, so this only ever moves the shift inward.  Used
    when no continuous margin is available for HL-RF.
    """
    order = np.argsort(np.abs(x), kind="stable")
    cands = np.repeat(x[None, :], x.shape[0], axis=0)
    for k in range(1, x.shape[0]):
        cands[k:, order[k - 1]] = 0.0
    m = evaluate_margin(limit, cands, jobs)
    failing = np.flatnonzero(m < 0.0)
    best = cands[failing[-1]] if failing.size else x
    return best, x.shape[0]


def explained_by(points: list[np.ndarray], y: np.ndarray) -> np.ndarray:
    """Rows of ``y`` lying beyond the tangent half-space of any found design point."""
    out = np.zeros(y.shape[0], dtype=bool)
    for p in points:
        n = np.linalg.norm(p)
        if n > 0:
            out |= (y @ (p / n)) >= 0.9 * n
    return out


def find_design_points(limit: LimitState, failing: np.ndarray, *, max_modes: int = 4,
                       refine: bool = True, jobs: int = 1,
                       beta_slack: float = 2.0) -> tuple[list[np.ndarray], int]:
    """Most probable failure points of the distinct modes seen among ``failing`` rows.

    Starting from the smallest-norm failing point: walk the ray to the
    boundary, polish with HL-RF when the limit state has a continuous margin,
    then discard failing rows explained by that point and repeat.  Modes more
    than ``beta_slack`` farther than the best one are dropped.
    """
    order = np.argsort(np.einsum("ij,ij->i", failing, failing))
    remaining = failing[order]
    points: list[np.ndarray] = []
    used = 0
    attempts = 0
    while remaining.shape[0] and attempts < max_modes:
        attempts += 1
        xb, u = ray_boundary(limit, remaining[0], jobs=jobs)
        used += u
        if refine and not getattr(limit, "has_margin", False):
            xs, u = prune_coordinates(limit, xb, jobs=jobs)
            used += u
            if not np.array_equal(xs, xb):
                xb, u = ray_boundary(limit, xs, jobs=jobs)
                used += u
        elif refine:
            xr, u = hlrf(limit, xb, jobs=jobs)
            used += u
            m = evaluate_margin(limit, xr[None, :] * (1.0 + 1e-6), jobs)
            used += 1
            if np.all(np.isfinite(xr)) and m[0] <= 1e-6 and np.linalg.norm(xr) <= np.linalg.norm(xb) + 1e-9:
                xb = xr
        if not any(np.linalg.norm(xb - p) < 0.25 for p in points):
            points.append(xb)
        keep = ~explained_by([xb], remaining)
        keep[0] = False
        remaining = remaining[keep]
    if points:
        best = min(np.linalg.norm(p) for p in points)
        points = [p for p in points if np.linalg.norm(p) <= best + beta_slack]
    return points, used


def wide_presample(limit: LimitState, seed: int, n: int, sigma: float,
                   jobs: int = 1) -> tuple[np.ndarray, np.ndarray]:
    x = sigma * rng.normal_rows(seed, STREAM_PRESAMPLE, 0, n, limit.dim)
    return x, evaluate_margin(limit, x, jobs)
