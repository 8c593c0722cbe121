"""Budgeted sizing optimizers: PSO, simulated annealing, constrained BO and RF-based SMBO.

All four share the conventions below.

* The nominal design is evaluated first, so every history starts from the
  baseline and the reported best is never worse than it.
* The objective is the design FoM; a point is feasible when both delays meet
  the timing spec and the FoM is finite.
* PSO and SA use a death penalty (infeasible -> ``-inf``).  CBO and SMBO
  weight their acquisition by a modelled probability of feasibility.
* Only differences and orderings of FoM values drive decisions, so adding a
  constant to every FoM leaves the selected points unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm, qmc
from sklearn.ensemble import RandomForestRegressor

from .. import rng
from ..circuit_model import SramArrayConfig
from .gp import GaussianProcess, GPFitError
from .objective import BudgetExhausted, DesignEvaluator, EvalBudget, EvalRecord
from .pareto import OBJECTIVES, PAIRS, ParetoSet, hv_improvement, objective_matrix, pareto_extract
from .space import DesignSpace

STREAM_OPT = 8
ALGORITHMS = ("cbo", "pso", "sa", "smbo")
OUT_OF_SCOPE = {"rose-opt": "the reinforcement-learning optimizer is not part of this package; "
                            "use cbo, pso, sa or smbo"}


@dataclass
class OptResult:
    algorithm: str
    seed: int
    best: EvalRecord | None
    history: list[EvalRecord]
    baseline: EvalRecord
    status: str
    warnings: list[str] = field(default_factory=list)
    pareto: ParetoSet | None = None

    @property
    def n_evals(self) -> int:
        return len(self.history)

    def summary(self) -> dict:
        b = self.best
        return {
            "algorithm": self.algorithm,
            "seed": self.seed,
            "status": self.status,
            "n_evals": self.n_evals,
            "baseline_fom": self.baseline.fom,
            "best_fom": None if b is None else b.fom,
            "best_eval": None if b is None else b.index,
            "best_point": None if b is None else b.point.to_dict(),
            "best_metrics": None if b is None else b.metrics.to_dict(),
            "warnings": list(self.warnings),
        }


def _penalised(r: EvalRecord) -> float:
    return r.fom if r.feasible else -math.inf


def _finish(name: str, seed: int, ev: DesignEvaluator, warnings: list[str],
            pareto: ParetoSet | None = None) -> OptResult:
    best = ev.best()
    return OptResult(name, seed, best, list(ev.history), ev.history[0],
                     "ok" if best is not None else "unresolved", warnings, pareto)


def _start(ev: DesignEvaluator) -> EvalRecord:
    return ev.evaluate(ev.space.point(ev.space.nominal_index()), "nominal")


# ---------------------------------------------------------------------------
# particle swarm

def run_pso(ev: DesignEvaluator, seed: int = 0, *, population: int = 20, w_start: float = 0.8,
            w_end: float = 0.4, c1: float = 0.5, c2: float = 0.5, v_max: float = 0.5) -> OptResult:
    """Global-best PSO on the unit-cube relaxation, snapped to the grid for evaluation.

    Runs ``ceil(max_evals / population)`` swarm iterations; points already in
    the cache cost nothing, so the run may finish under budget.

    The inertia weight falls linearly from ``w_start`` to ``w_end`` over the
    expected number of swarm iterations.
    """
    sp = ev.space
    gen = rng.Stream(seed, STREAM_OPT).generator()
    warnings: list[str] = []
    _start(ev)
    x = gen.uniform(0.0, 1.0, (population, sp.dim))
    x[0] = sp.encode(sp.nominal_index())[0]
    v = gen.uniform(-0.1, 0.1, (population, sp.dim))
    pbest = x.copy()
    pval = np.full(population, -math.inf)
    gbest, gval = x[0].copy(), -math.inf
    n_iter = max(1, math.ceil(ev.budget.max_evals / population))
    try:
        for it in range(n_iter):
            if ev.remaining <= 0:
                break
            pts = [sp.point(i) for i in sp.snap(x)]
            recs = ev.evaluate_many(pts, f"pso:{it}")
            vals = np.array([_penalised(r) for r in recs])
            better = vals > pval
            pbest[better] = x[better]
            pval[better] = vals[better]
            j = int(np.argmax(pval))
            if pval[j] > gval:
                gval, gbest = pval[j], pbest[j].copy()
            w = w_start + (w_end - w_start) * min(it / max(n_iter - 1, 1), 1.0)
            r1 = gen.uniform(size=x.shape)
            r2 = gen.uniform(size=x.shape)
            v = w * v + c1 * r1 * (pbest - x) + c2 * r2 * (gbest - x)
            v = np.clip(v, -v_max, v_max)
            x = np.clip(x + v, 0.0, 1.0)
    except BudgetExhausted:
        pass
    return _finish("pso", seed, ev, warnings)


# ---------------------------------------------------------------------------
# simulated annealing

def acceptance_probability(delta: float, temperature: float) -> float:
    """Metropolis rule for maximisation."""
    if delta >= 0:
        return 1.0
    if temperature <= 0 or delta == -math.inf:
        return 0.0
    return math.exp(delta / temperature)


def run_sa(ev: DesignEvaluator, seed: int = 0, *, t0: float = 1000.0, t_min: float = 1e-7,
           alpha: float = 0.98) -> OptResult:
    """Single-chain annealing over grid neighbours; ``T <- alpha T`` after each accepted move."""
    sp = ev.space
    gen = rng.Stream(seed, STREAM_OPT).generator()
    warnings: list[str] = []
    cur_idx = sp.nominal_index()
    cur = _start(ev)
    t = t0
    max_steps = 50 * ev.budget.max_evals
    try:
        for _ in range(max_steps):
            if ev.remaining <= 0 or t < t_min:
                break
            nb = sp.neighbors(cur_idx)
            cand_idx = nb[gen.integers(len(nb))]
            cand = ev.evaluate(sp.point(cand_idx), "sa")
            fc, fn = _penalised(cur), _penalised(cand)
            delta = 0.0 if (fc == -math.inf and fn == -math.inf) else fn - fc
            if gen.uniform() < acceptance_probability(delta, t):
                cur_idx, cur = cand_idx, cand
                t *= alpha
    except BudgetExhausted:
        pass
    if t < t_min:
        warnings.append("temperature reached t_min before the budget was used")
    return _finish("sa", seed, ev, warnings)


# ---------------------------------------------------------------------------
# model-based helpers

def expected_improvement(mean, std, best, xi: float = 0.0) -> np.ndarray:
    std = np.maximum(std, 1e-12)
    z = (mean - best - xi) / std
    return std * (z * norm.cdf(z) + norm.pdf(z))


def _candidate_pool(ev: DesignEvaluator, gen: np.random.Generator, n_random: int,
                    n_local: int = 3) -> np.ndarray:
    sp = ev.space
    pool = [sp.random_indices(gen, n_random)]
    feas = sorted((r for r in ev.history if r.feasible), key=lambda r: (-r.fom, r.index))[:n_local]
    for r in feas:
        pool.append(sp.neighbors(sp.index(r.point)))
    idx = np.concatenate(pool)
    # drop duplicates and evaluated points, keep first-seen order
    _, first = np.unique(idx, axis=0, return_index=True)
    idx = idx[np.sort(first)]
    keep = np.array([not ev.known(sp.point(i)) for i in idx], dtype=bool)
    return idx[keep]


def _initial_design(ev: DesignEvaluator, seed: int, n_init: int) -> None:
    sp = ev.space
    lhs = qmc.LatinHypercube(d=sp.dim, seed=np.random.default_rng(seed)).random(n_init - 1)
    idx = np.minimum((lhs * sp.sizes).astype(int), sp.sizes - 1)
    ev.evaluate_many([sp.point(i) for i in idx], "init")


def _train_sets(ev: DesignEvaluator):
    sp = ev.space
    x = sp.encode(np.array([sp.index(r.point) for r in ev.history]))
    fom = np.array([r.fom for r in ev.history])
    slack = np.array([r.slack for r in ev.history])
    return x, fom, slack


# ---------------------------------------------------------------------------
# constrained Bayesian optimisation

def run_cbo(ev: DesignEvaluator, seed: int = 0, *, n_init: int = 20, n_candidates: int = 2000,
            refit_every: int = 20, multi_objective: str | None = None,
            mc_samples: int = 64) -> OptResult:
    """GP-based BO with EI x probability-of-feasibility.

    With ``multi_objective`` set to a pair name (``"power-snm"``, ...), two
    GPs model the objectives and candidates are scored by Monte Carlo
    expected hypervolume improvement times probability of feasibility.
    """
    sp = ev.space
    gen = rng.Stream(seed, STREAM_OPT).generator()
    warnings: list[str] = []
    gp_f = GaussianProcess()
    gp_c = GaussianProcess()
    gp_o = [GaussianProcess(), GaussianProcess()]
    pair = PAIRS[multi_objective] if multi_objective else None
    try:
        _start(ev)
        _initial_design(ev, seed, n_init)
        step = 0
        while ev.remaining > 0:
            pool = _candidate_pool(ev, gen, n_candidates)
            if len(pool) == 0:
                break
            xq = sp.encode(pool)
            x, fom, slack = _train_sets(ev)
            refit = step % refit_every == 0
            step += 1
            try:
                gp_c.fit(x, slack, optimize=refit)
                mc, sc = gp_c.predict(xq)
                pof = norm.cdf(mc / np.maximum(sc, 1e-12))
                fin = np.isfinite(fom)
                if pair is None:
                    gp_f.fit(x[fin], fom[fin], optimize=refit)
                    mf, sf = gp_f.predict(xq)
                    feas = np.array([r.feasible for r in ev.history])
                    if feas.any():
                        acq = expected_improvement(mf, sf, float(np.max(fom[feas]))) * pof
                    else:
                        acq = pof
                else:
                    recs = [r for r, ok in zip(ev.history, fin) if ok]
                    f = objective_matrix(recs, pair)
                    fl = _mo_transform(f, pair)
                    for k in range(2):
                        gp_o[k].fit(x[fin], fl[:, k], optimize=refit)
                    draws = np.stack([gp_o[k].sample(xq, mc_samples, gen) for k in range(2)], axis=-1)
                    front_recs = [r for r in recs if r.feasible]
                    front = (_mo_transform(objective_matrix(front_recs, pair), pair)
                             if front_recs else np.zeros((0, 2)))
                    ref = np.max(fl, axis=0) + 0.1 * (np.ptp(fl, axis=0) + 1e-12)
                    acq = hv_improvement(front, ref, draws).mean(axis=0) * pof
                    if not np.any(acq > 0):
                        acq = pof
            except GPFitError as exc:
                if "random acquisition fallback" not in warnings:
                    warnings.append(f"random acquisition fallback: {exc}")
                acq = gen.uniform(size=len(pool))
            j = int(np.argmax(acq))
            ev.evaluate(sp.point(pool[j]), "cbo")
    except BudgetExhausted:
        pass
    pareto = pareto_extract(ev.history, multi_objective) if multi_objective else None
    return _finish("cbo", seed, ev, warnings, pareto)


def _mo_transform(f: np.ndarray, pair) -> np.ndarray:
    # power and area span orders of magnitude; model their logs
    out = f.copy()
    for k, name in enumerate(pair):
        if OBJECTIVES[name][1] > 0:
            out[:, k] = np.log10(np.maximum(f[:, k], 1e-300))
    return out


# ---------------------------------------------------------------------------
# random-forest SMBO

class ForestModel:
    """Random forest with a per-tree spread used as predictive std."""

    def __init__(self, n_trees: int = 30, seed: int = 0, min_std: float = 1e-6):
        self.rf = RandomForestRegressor(n_estimators=n_trees, random_state=seed % (2**31),
                                        min_samples_leaf=1, n_jobs=1)
        self.min_std = min_std

    def fit(self, x, y) -> "ForestModel":
        self.shift = float(np.mean(y))
        self.rf.fit(x, np.asarray(y) - self.shift)
        return self

    def predict(self, xq) -> tuple[np.ndarray, np.ndarray]:
        per_tree = np.stack([t.predict(xq) for t in self.rf.estimators_])
        return self.shift + per_tree.mean(axis=0), np.maximum(per_tree.std(axis=0), self.min_std)


def run_smbo(ev: DesignEvaluator, seed: int = 0, *, n_init: int = 10, n_candidates: int = 2000,
             random_every: int = 5, n_trees: int = 30) -> OptResult:
    """Sequential model-based optimisation with random-forest surrogates.

    The vt class coordinates enter the forest as ordinal indices, which trees
    split on like categories.  Every ``random_every``-th evaluation is a
    uniformly random point.
    """
    sp = ev.space
    gen = rng.Stream(seed, STREAM_OPT).generator()
    warnings: list[str] = []
    try:
        _start(ev)
        ev.evaluate_many([sp.point(i) for i in sp.random_indices(gen, n_init - 1)], "init")
        while ev.remaining > 0:
            pool = _candidate_pool(ev, gen, n_candidates)
            if len(pool) == 0:
                break
            if (ev.n_evals + 1) % random_every == 0:
                ev.evaluate(sp.point(pool[int(gen.integers(len(pool)))]), "random")
                continue
            xq = sp.encode(pool)
            x, fom, slack = _train_sets(ev)
            fin = np.isfinite(fom)
            mc, sc = ForestModel(n_trees, seed).fit(x, slack).predict(xq)
            pof = norm.cdf(mc / sc)
            feas = np.array([r.feasible for r in ev.history])
            if feas.any() and fin.sum() >= 2:
                mf, sf = ForestModel(n_trees, seed + 1).fit(x[fin], fom[fin]).predict(xq)
                acq = expected_improvement(mf, sf, float(np.max(fom[feas]))) * pof
            else:
                acq = pof
            ev.evaluate(sp.point(pool[int(np.argmax(acq))]), "smbo")
    except BudgetExhausted:
        pass
    return _finish("smbo", seed, ev, warnings)


def run_random(ev: DesignEvaluator, seed: int = 0) -> OptResult:
    """Uniform random search; the reference for the model-based methods."""
    sp = ev.space
    gen = rng.Stream(seed, STREAM_OPT).generator()
    try:
        _start(ev)
        while ev.remaining > 0:
            ev.evaluate_many([sp.point(i) for i in sp.random_indices(gen, ev.remaining)], "random")
    except BudgetExhausted:
        pass
    return _finish("random", seed, ev, [])


_RUNNERS = {"cbo": run_cbo, "pso": run_pso, "sa": run_sa, "smbo": run_smbo, "random": run_random}


def optimize(config: SramArrayConfig, algorithm: str, budget: EvalBudget = EvalBudget(),
             seed: int = 0, *, jobs: int = 1, backend=None, memo=None, fom_offset: float = 0.0,
             **kwargs) -> OptResult:
    """Run one optimizer on ``config`` and return its result."""
    name = algorithm.lower()
    if name in OUT_OF_SCOPE:
        raise ValueError(f"{algorithm}: out of scope; {OUT_OF_SCOPE[name]}")
    if name not in _RUNNERS:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")
    extra = {} if backend is None else {"backend": backend}
    ev = DesignEvaluator(config, budget, jobs=jobs, memo=memo, fom_offset=fom_offset, **extra)
    return _RUNNERS[name](ev, seed, **kwargs)


def simplified(config: SramArrayConfig) -> SramArrayConfig:
    """Same array without interconnect parasitics or peripheral circuits."""
    from dataclasses import replace

    return replace(config, parasitics=replace(config.parasitics, enabled=False), peripherals=None)


@dataclass
class ControlReport:
    result: OptResult
    full_baseline: EvalRecord
    reevaluated: EvalRecord | None
    checks: dict[str, bool]

    def summary(self) -> dict:
        r = self.reevaluated
        return {
            "simplified_best_fom": None if self.result.best is None else self.result.best.fom,
            "full_model_fom": None if r is None else r.fom,
            "full_model_baseline_fom": self.full_baseline.fom,
            "full_model_metrics": None if r is None else r.metrics.to_dict(),
            "constraints": {k: ("pass" if v else "fail") for k, v in self.checks.items()},
        }


def control_study(config: SramArrayConfig, algorithm: str, budget: EvalBudget = EvalBudget(),
                  seed: int = 0, *, jobs: int = 1, backend=None, memo=None) -> ControlReport:
    """Optimise on the simplified model, then re-evaluate the winner on the full one."""
    res = optimize(simplified(config), algorithm, budget, seed, jobs=jobs, backend=backend, memo=memo)
    extra = {} if backend is None else {"backend": backend}
    full = DesignEvaluator(config, EvalBudget(2, budget.robust_samples, budget.robust_seed),
                           memo=memo, **extra)
    base = _start(full)
    re = None
    checks: dict[str, bool] = {}
    if res.best is not None:
        re = full.evaluate(res.best.point, "reevaluate")
        spec = config.timing_spec
        checks = {
            "t_read": re.metrics.t_read <= spec.t_read_max,
            "t_write": re.metrics.t_write <= spec.t_write_max,
            "snm_positive": re.metrics.min_snm > 0,
            "fom_not_below_baseline": re.fom >= base.fom,
        }
    return ControlReport(res, base, re, checks)


__all__ = ["ALGORITHMS", "ControlReport", "ForestModel", "OptResult", "acceptance_probability",
           "control_study", "expected_improvement", "optimize", "run_cbo", "run_pso", "run_random",
           "run_sa", "run_smbo", "simplified"]
