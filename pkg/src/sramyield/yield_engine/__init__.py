"""Rare-event failure-probability estimators and their shared machinery."""

from .acs import run_acs, sparse_fit
from .ais import cross_entropy, run_ais
from .core import (
    METHODS,
    GaussianMixture,
    RegionNotFoundError,
    ShiftNotFoundError,
    StoppingRule,
    WeightedAccumulator,
    YieldEngineError,
    YieldEstimate,
    estimator_fom,
    yield_from_pfail,
)
from .hscs import run_hscs
from .limit_states import (
    ORACLES,
    FunctionLimitState,
    IndicatorLimitState,
    LimitState,
    SurrogateLimitState,
    evaluate_margin,
    make_oracle,
)
from .mc import ControlVariate, halfspace_control, run_mc
from .mnis import mean_shift, run_mnis

_RUNNERS = {"mc": run_mc, "mnis": run_mnis, "ais": run_ais, "acs": run_acs, "hscs": run_hscs}


def run(method: str, limit: LimitState, stop: StoppingRule = StoppingRule(), seed: int = 0,
        **kwargs) -> YieldEstimate:
    """Dispatch to one of :data:`METHODS` by name."""
    try:
        fn = _RUNNERS[method.lower()]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}") from None
    return fn(limit, stop, seed, **kwargs)


__all__ = [
    "METHODS", "ORACLES", "ControlVariate", "FunctionLimitState", "GaussianMixture",
    "IndicatorLimitState", "LimitState", "RegionNotFoundError", "ShiftNotFoundError",
    "StoppingRule", "SurrogateLimitState", "WeightedAccumulator", "YieldEngineError",
    "YieldEstimate", "cross_entropy", "estimator_fom", "evaluate_margin", "halfspace_control",
    "make_oracle", "mean_shift", "run", "run_acs", "run_ais", "run_hscs", "run_mc", "run_mnis",
    "sparse_fit", "yield_from_pfail",
]
