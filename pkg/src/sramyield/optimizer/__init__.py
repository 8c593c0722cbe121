"""Constrained cell-sizing optimization on the discrete design grid."""

from .algorithms import (
    ALGORITHMS,
    ControlReport,
    OptResult,
    acceptance_probability,
    control_study,
    expected_improvement,
    optimize,
    run_cbo,
    run_pso,
    run_random,
    run_sa,
    run_smbo,
    simplified,
)
from .gp import GaussianProcess, GPFitError
from .objective import (
    BudgetExhausted,
    DesignEvaluationError,
    DesignEvaluator,
    EvalBudget,
    EvalRecord,
    FomDomainError,
    fom,
)
from .pareto import PAIRS, ParetoSet, hv_improvement, hypervolume_2d, nondominated_mask, pareto_extract
from .space import DesignPoint, DesignSpace

__all__ = [
    "ALGORITHMS", "BudgetExhausted", "ControlReport", "DesignEvaluationError", "DesignEvaluator",
    "DesignPoint", "DesignSpace", "EvalBudget", "EvalRecord", "FomDomainError", "GPFitError",
    "GaussianProcess", "OptResult", "PAIRS", "ParetoSet", "acceptance_probability",
    "control_study", "expected_improvement", "fom", "hv_improvement", "hypervolume_2d",
    "nondominated_mask", "optimize", "pareto_extract", "run_cbo", "run_pso", "run_random",
    "run_sa", "run_smbo", "simplified",
]
