"""Mean-shift (norm-minimisation) importance sampling.

Phase 1 draws a wide Gaussian presample (sigma ``presample_sigma``) and takes
the minimum-norm failing point; it is moved onto the failure boundary along
its ray and, when the limit state has a continuous margin, polished by HL-RF
into the most probable failure point.  If failing presamples remain that the
first design point does not explain (e.g. a second tail), further design
points are added and the proposal becomes an equal-weight mixture of unit
Gaussians centred on them.  Phase 2 samples the proposal and weights by
``phi(x) / q(x)``.
"""

from __future__ import annotations

import numpy as np

from .core import (
    GaussianMixture,
    ShiftNotFoundError,
    StoppingRule,
    YieldEstimate,
    find_design_points,
    importance_loop,
    wide_presample,
)
from .limit_states import LimitState


def mean_shift(limit: LimitState, seed: int, *, n_presample: int = 500, presample_sigma: float = 3.0,
               max_modes: int = 4, refine: bool = True, jobs: int = 1) -> tuple[list[np.ndarray], int]:
    """Design points from presampling; returns ``(points, evaluations used)``."""
    x, m = wide_presample(limit, seed, n_presample, presample_sigma, jobs)
    failing = x[m < 0.0]
    if failing.shape[0] == 0:
        raise ShiftNotFoundError(n_presample)
    points, used = find_design_points(limit, failing, max_modes=max_modes, refine=refine, jobs=jobs)
    return points, n_presample + used


def run_mnis(limit: LimitState, stop: StoppingRule = StoppingRule(), seed: int = 0, *,
             n_presample: int = 500, presample_sigma: float = 3.0, max_modes: int = 4,
             refine: bool = True, batch_size: int = 200, jobs: int = 1) -> YieldEstimate:
    points, used = mean_shift(limit, seed, n_presample=n_presample, presample_sigma=presample_sigma,
                              max_modes=max_modes, refine=refine, jobs=jobs)
    proposal = GaussianMixture.shifted(np.array(points), 1.0)
    est = importance_loop(limit, proposal, stop, seed, used, batch_size=batch_size, jobs=jobs,
                          method="mnis")
    est.diagnostics["mu_shift"] = [p.tolist() for p in points]
    est.diagnostics["n_presample"] = n_presample
    return est
