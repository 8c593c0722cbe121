"""Design figure of merit, evaluation budget and the cached design evaluator."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..circuit_model import SramArrayConfig, sample_matrix
from ..surrogate import evaluate
from ..surrogate.evaluate import MetricsRecord, evaluate_batch, pass_fail, records_from_batch
from .space import DesignPoint, DesignSpace

SLACK_CLIP = 10.0


class FomDomainError(ValueError):
    """Zero or negative power/area passed to :func:`fom`."""


class BudgetExhausted(RuntimeError):
    pass


class DesignEvaluationError(RuntimeError):
    def __init__(self, point: DesignPoint, cause: Exception):
        super().__init__(f"evaluation failed at {point.to_dict()}: {cause}")
        self.point = point


def fom(metrics: MetricsRecord | dict) -> float:
    """``log10(min SNM / (max power * sqrt(area)))`` in SI units.

    Returns ``-inf`` when the smallest SNM is not positive.

    Raises
    ------
    FomDomainError
        If the larger power or the area is not positive.
    """
    m = metrics.to_dict() if isinstance(metrics, MetricsRecord) else metrics
    s = min(m["hsnm"], m["rsnm"], m["wsnm"])
    p = max(m["p_read"], m["p_write"])
    a = m["area"]
    if not (p > 0 and a > 0):
        raise FomDomainError(f"power ({p}) and area ({a}) must be positive")
    if not s > 0:
        return -math.inf
    return math.log10(s / (p * math.sqrt(a)))


@dataclass(frozen=True)
class EvalBudget:
    """``max_evals`` distinct design evaluations; ``robust_samples`` adds an MC check per design."""

    max_evals: int = 400
    robust_samples: int = 0
    robust_seed: int = 0

    def __post_init__(self):
        if self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")
        if self.robust_samples < 0:
            raise ValueError("robust_samples must be >= 0")


@dataclass
class EvalRecord:
    index: int
    point: DesignPoint
    metrics: MetricsRecord
    fom: float
    feasible: bool
    slack: float
    source: str = ""
    robust_pass_rate: float | None = None

    def row(self) -> dict:
        d = {"eval": self.index, **self.point.to_dict(), **self.metrics.to_dict(),
             "fom": self.fom, "feasible": int(self.feasible), "slack": self.slack, "source": self.source}
        if self.robust_pass_rate is not None:
            d["robust_pass_rate"] = self.robust_pass_rate
        return d


def surrogate_backend(config: SramArrayConfig) -> MetricsRecord:
    return evaluate(config, None)


@dataclass
class DesignEvaluator:
    """Budgeted, memoised evaluation of design points.

    A repeated query returns the stored record without touching the budget.
    ``fom_offset`` is added to every FoM (used to check that optimizers only
    look at FoM differences).
    """

    config: SramArrayConfig
    budget: EvalBudget = field(default_factory=EvalBudget)
    backend: Callable[[SramArrayConfig], MetricsRecord] = surrogate_backend
    jobs: int = 1
    fom_offset: float = 0.0
    memo: dict | None = None

    def __post_init__(self):
        self.cache: dict[tuple, EvalRecord] = {}
        self.history: list[EvalRecord] = []
        self.space = DesignSpace(self.config.cell)

    @property
    def n_evals(self) -> int:
        return len(self.history)

    @property
    def remaining(self) -> int:
        return self.budget.max_evals - self.n_evals

    def known(self, p: DesignPoint) -> bool:
        return p.key() in self.cache

    def _raw(self, p: DesignPoint) -> tuple[MetricsRecord, float | None]:
        key = (self.config.hash(), p.key(), self.budget.robust_samples, self.budget.robust_seed)
        if self.memo is not None and key in self.memo:
            return self.memo[key]
        cfg = p.apply(self.config)
        try:
            m = self.backend(cfg)
            rate = None
            if self.budget.robust_samples:
                z = sample_matrix(cfg, self.budget.robust_seed, 0, self.budget.robust_samples)
                recs = records_from_batch(evaluate_batch(cfg, z))
                rate = sum(pass_fail(r, cfg) for r in recs) / len(recs)
        except Exception as exc:  # noqa: BLE001 - re-raised with the point attached
            raise DesignEvaluationError(p, exc) from exc
        if self.memo is not None:
            self.memo[key] = (m, rate)
        return m, rate

    def _record(self, p: DesignPoint, m: MetricsRecord, rate, source: str) -> EvalRecord:
        f = fom(m)
        spec = self.config.timing_spec
        slack = min((spec.t_read_max - m.t_read) / spec.t_read_max,
                    (spec.t_write_max - m.t_write) / spec.t_write_max)
        slack = float(np.clip(slack, -SLACK_CLIP, SLACK_CLIP)) if not math.isnan(slack) else -SLACK_CLIP
        feasible = slack >= 0.0 and math.isfinite(f)
        if rate is not None:
            feasible = feasible and rate >= 1.0
        if not math.isfinite(f):
            slack = min(slack, -1.0)
        return EvalRecord(self.n_evals, p, m, f + self.fom_offset, feasible, slack, source, rate)

    def evaluate_many(self, points: list[DesignPoint], source: str = "") -> list[EvalRecord]:
        """Evaluate in order; raises :class:`BudgetExhausted` after using the last slot.

        New points beyond the remaining budget are dropped, the ones that fit
        are still evaluated and recorded before the exception.
        """
        fresh: list[DesignPoint] = []
        seen = set()
        for p in points:
            k = p.key()
            if k not in self.cache and k not in seen:
                seen.add(k)
                fresh.append(p)
        over = len(fresh) > self.remaining
        fresh = fresh[: max(self.remaining, 0)]
        if self.jobs > 1 and len(fresh) > 1:
            with ThreadPoolExecutor(self.jobs) as ex:
                raws = list(ex.map(self._raw, fresh))
        else:
            raws = [self._raw(p) for p in fresh]
        for p, (m, rate) in zip(fresh, raws):
            rec = self._record(p, m, rate, source)
            self.cache[p.key()] = rec
            self.history.append(rec)
        if over:
            raise BudgetExhausted()
        out = []
        for p in points:
            rec = self.cache.get(p.key())
            if rec is None:
                raise BudgetExhausted()
            out.append(rec)
        return out

    def evaluate(self, p: DesignPoint, source: str = "") -> EvalRecord:
        return self.evaluate_many([p], source)[0]

    def best(self) -> EvalRecord | None:
        feas = [r for r in self.history if r.feasible]
        if not feas:
            return None
        # earliest wins ties so the choice does not depend on FoM offsets
        return max(feas, key=lambda r: (r.fom, -r.index))
