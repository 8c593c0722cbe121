"""Limit states: maps from standardized variation vectors to a failure margin.

A limit state exposes ``dim`` and ``margin(X)`` for an ``(n, dim)`` array;
a sample fails iff its margin is negative.  ``has_margin`` tells the
estimators whether the margin is a continuous score (usable for gradients
and cross-entropy levels) or only a +/-1 indicator.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np
from scipy.stats import norm

from ..circuit_model import SramArrayConfig

MARGIN_CLIP = 10.0


class LimitState(Protocol):
    dim: int
    has_margin: bool

    def margin(self, x: np.ndarray) -> np.ndarray: ...


def fails(limit: LimitState, x: np.ndarray, jobs: int = 1) -> np.ndarray:
    return evaluate_margin(limit, x, jobs) < 0.0


def evaluate_margin(limit: LimitState, x: np.ndarray, jobs: int = 1) -> np.ndarray:
    """Margins of every row, optionally split across ``jobs`` threads.

    Chunks are contiguous and reassembled in order, so the result does not
    depend on ``jobs``.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != limit.dim:
        raise ValueError(f"expected dimension {limit.dim}, got {x.shape[1]}")
    n = x.shape[0]
    if jobs <= 1 or n < 2 * jobs:
        return np.asarray(limit.margin(x), dtype=np.float64)
    bounds = np.linspace(0, n, jobs + 1).astype(int)
    chunks = [x[a:b] for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(limit.margin, chunks))
    return np.concatenate([np.asarray(p, dtype=np.float64) for p in parts])


@dataclass(frozen=True)
class FunctionLimitState:
    """Wraps a vectorized margin function."""

    dim: int
    fn: Callable[[np.ndarray], np.ndarray]
    name: str = "function"
    p_true: float | None = None
    has_margin: bool = True

    def margin(self, x):
        return self.fn(np.atleast_2d(x))


@dataclass(frozen=True)
class IndicatorLimitState:
    """Hides a continuous margin behind a pass/fail indicator (+1 / -1)."""

    base: LimitState
    has_margin: bool = False

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def p_true(self):
        return getattr(self.base, "p_true", None)

    def margin(self, x):
        return np.where(self.base.margin(x) < 0.0, -1.0, 1.0)


# ---------------------------------------------------------------------------
# analytic oracles with known failure probability

def _linear(beta: float, coords: tuple[int, ...]):
    w = 1.0 / math.sqrt(len(coords))
    idx = list(coords)

    def fn(x):
        return beta - w * x[:, idx].sum(axis=1)

    return fn


def linear_oracle(dim: int = 18, beta: float = 3.0, coords: tuple[int, ...] = (0,),
                  name: str = "linear") -> FunctionLimitState:
    """Half-space ``sum(x[coords]) / sqrt(k) > beta``; P_f = Phi(-beta)."""
    return FunctionLimitState(dim, _linear(beta, coords), name, float(norm.sf(beta)))


def twotail_oracle(dim: int = 18, beta: float = 3.5) -> FunctionLimitState:
    """``|x_1| > beta``; P_f = 2 Phi(-beta)."""

    def fn(x):
        return beta - np.abs(x[:, 0])

    return FunctionLimitState(dim, fn, "twotail", float(2.0 * norm.sf(beta)))


def planted_sparse_oracle(dim: int = 108, threshold: float = 4.0, k: int = 2) -> FunctionLimitState:
    """``x_1 + ... + x_k > threshold``; P_f = Phi(-threshold / sqrt(k))."""

    def fn(x):
        return threshold - x[:, :k].sum(axis=1)

    return FunctionLimitState(dim, fn, "planted_sparse", float(norm.sf(threshold / math.sqrt(k))))


def dense_oracle(dim: int = 18, beta: float = 3.0) -> FunctionLimitState:
    """Equal weight on every coordinate; P_f = Phi(-beta)."""
    return linear_oracle(dim, beta, tuple(range(dim)), "dense")


ORACLES: dict[str, Callable[..., FunctionLimitState]] = {
    "linear3": lambda dim=18: linear_oracle(dim, 3.0, (0,), "linear3"),
    "twotail35": lambda dim=18: twotail_oracle(dim, 3.5),
    "planted2sparse": lambda dim=108: planted_sparse_oracle(dim, 4.0, 2),
    "dense": lambda dim=18: dense_oracle(dim, 3.0),
}


def make_oracle(name: str, dim: int | None = None) -> FunctionLimitState:
    if name not in ORACLES:
        raise KeyError(f"unknown oracle {name!r}; choose from {sorted(ORACLES)}")
    lim = ORACLES[name]() if dim is None else ORACLES[name](dim)
    return FunctionLimitState(lim.dim, lim.fn, name, lim.p_true)


# ---------------------------------------------------------------------------
# circuit limit state

class SurrogateLimitState:
    """Margin of a circuit metric against its spec, evaluated on the surrogate.

    ``metric`` is ``"t_write"`` or ``"t_read"`` (margin ``(spec - t) / spec``,
    threshold defaults to the config's timing spec), one of the SNM names
    (margin ``(snm - floor) / floor``), or ``"pass_fail"`` (smallest slack of
    all checks).  Margins are clipped to ``[-10, 10]`` so infinite delays stay
    finite for gradient steps.
    """

    has_margin = True

    def __init__(self, config: SramArrayConfig, metric: str = "t_write", threshold: float | None = None):
        from ..surrogate.evaluate import SnmFloors

        self.config = config
        self.metric = metric
        self.dim = config.variation_dim
        floors = SnmFloors()
        spec = config.timing_spec
        defaults = {"t_write": spec.t_write_max, "t_read": spec.t_read_max,
                    "hsnm": floors.hsnm, "rsnm": floors.rsnm, "wsnm": floors.wsnm}
        if metric != "pass_fail" and metric not in defaults:
            raise ValueError(f"unsupported metric {metric!r}")
        self.threshold = threshold if threshold is not None else defaults.get(metric)
        self.name = f"surrogate:{metric}"
        self.p_true = None

    def margin(self, x):
        from ..surrogate.evaluate import METRIC_NAMES, evaluate_batch, slacks

        x = np.atleast_2d(x)
        if self.metric == "pass_fail":
            vals = evaluate_batch(self.config, x, METRIC_NAMES)
            out = np.array([min(slacks({k: vals[k][i] for k in vals}, self.config).values())
                            for i in range(x.shape[0])])
        else:
            v = evaluate_batch(self.config, x, (self.metric,))[self.metric]
            thr = self.threshold
            with np.errstate(invalid="ignore"):
                out = (thr - v) / thr if self.metric.startswith("t_") else (v - thr) / thr
        out = np.nan_to_num(out, nan=-MARGIN_CLIP, neginf=-MARGIN_CLIP, posinf=MARGIN_CLIP)
        return np.clip(out, -MARGIN_CLIP, MARGIN_CLIP)
