"""Pareto filtering of optimization histories."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .objective import EvalRecord

# name -> (metric getter, sense); sense +1 minimise, -1 maximise
OBJECTIVES = {
    "power": (lambda r: r.metrics.max_power, 1.0),
    "area": (lambda r: r.metrics.area, 1.0),
    "snm": (lambda r: r.metrics.min_snm, -1.0),
}
PAIRS = {
    "power-snm": ("power", "snm"),
    "area-snm": ("area", "snm"),
    "area-power": ("area", "power"),
}


@dataclass
class ParetoSet:
    objectives: tuple[str, str]
    members: list[EvalRecord]

    def __len__(self) -> int:
        return len(self.members)

    def values(self) -> np.ndarray:
        return np.array([[OBJECTIVES[o][0](r) for o in self.objectives] for r in self.members])


def objective_matrix(records, objectives) -> np.ndarray:
    """Values in minimisation form (maximised objectives negated)."""
    return np.array([[OBJECTIVES[o][1] * OBJECTIVES[o][0](r) for o in objectives] for r in records],
                    dtype=float).reshape(len(records), len(objectives))


def dominates(a: np.ndarray, b: np.ndarray) -> bool:
    return bool(np.all(a <= b) and np.any(a < b))


def nondominated_mask(f: np.ndarray) -> np.ndarray:
    """Rows not dominated by any other row; of identical rows only the first survives."""
    n = f.shape[0]
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        le = np.all(f <= f[i], axis=1)
        lt = np.any(f < f[i], axis=1)
        if np.any(le & lt):
            keep[i] = False
            continue
        same = np.all(f == f[i], axis=1)
        if np.any(same[:i]):
            keep[i] = False
    return keep


def pareto_extract(history: list[EvalRecord], objectives="power-snm",
                   feasible_only: bool = True) -> ParetoSet:
    """Non-dominated subset of ``history``, sorted by the first objective.

    ``objectives`` is a pair name from :data:`PAIRS` or a tuple of two names
    from :data:`OBJECTIVES`.  Power and area are minimised, SNM maximised.
    """
    if not history:
        raise ValueError("history is empty")
    pair = PAIRS[objectives] if isinstance(objectives, str) else tuple(objectives)
    recs = [r for r in history if math.isfinite(r.fom) and (r.feasible or not feasible_only)]
    if not recs:
        return ParetoSet(pair, [])
    f = objective_matrix(recs, pair)
    keep = nondominated_mask(f)
    members = [r for r, k in zip(recs, keep) if k]
    members.sort(key=lambda r: (OBJECTIVES[pair[0]][1] * OBJECTIVES[pair[0]][0](r), r.index))
    return ParetoSet(pair, members)


def hypervolume_2d(front: np.ndarray, ref: np.ndarray) -> float:
    """Area dominated by ``front`` (minimisation) and bounded by ``ref``."""
    pts = front[np.all(front < ref, axis=1)]
    if pts.size == 0:
        return 0.0
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
    stair = []
    for p in pts:
        if not stair or p[1] < stair[-1][1]:
            stair.append(p)
    hv = 0.0
    for i, p in enumerate(stair):
        nxt = stair[i + 1][0] if i + 1 < len(stair) else ref[0]
        hv += (nxt - p[0]) * (ref[1] - p[1])
    return float(hv)


def hv_improvement(front: np.ndarray, ref: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Hypervolume gained by adding each row of ``y`` (shape ``(..., 2)``) to ``front``.

    The region not yet dominated is a staircase; the gain is the area of the
    box ``[y, ref]`` above that staircase, summed over its steps.
    """
    pts = front[np.all(front < ref, axis=1)] if front.size else np.zeros((0, 2))
    pts = pts[np.argsort(pts[:, 0], kind="stable")]
    # step function g(f1) = min f2 over front points with p.f1 <= f1
    xs = [-np.inf]
    gs = [ref[1]]
    cur = ref[1]
    for p in pts:
        if p[1] < cur:
            cur = p[1]
            xs.append(p[0])
            gs.append(cur)
    xs.append(ref[0])
    a = np.array(xs[:-1])
    b = np.array(xs[1:])
    g = np.array(gs)
    y1 = y[..., 0:1]
    y2 = y[..., 1:2]
    width = np.clip(np.minimum(b, ref[0]) - np.maximum(a, y1), 0.0, None)
    height = np.clip(np.minimum(g, ref[1]) - y2, 0.0, None)
    return np.sum(width * height, axis=-1)
