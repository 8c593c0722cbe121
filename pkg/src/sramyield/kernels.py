"""Kernel backend selection.

The compiled extension is used when importable; set ``SRAMYIELD_PURE_PYTHON=1``
to force the numpy fallback.  ``BACKEND`` names the active implementation.
"""

import os

import numpy as np

from . import _kernels_py

if os.environ.get("SRAMYIELD_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

drain_current = _impl.drain_current
solve_node = _impl.solve_node
vtc_batch = _impl.vtc_batch

# A lost lobe still "touches" at the rail corners, leaving a sub-microvolt
# positive gap; anything this small is reported as no lobe at all.
LOBE_EPS = 1e-6


def rotated_gaps(lobe1, lobe2, grid):
    ul, lr, wm = _impl.rotated_gaps(lobe1, lobe2, grid)
    ul = np.where(ul < LOBE_EPS, np.minimum(ul, 0.0), ul)
    lr = np.where(lr < LOBE_EPS, np.minimum(lr, 0.0), lr)
    return ul, lr, wm


PHI_T = _kernels_py.PHI_T
N_SLOPE = _kernels_py.N_SLOPE
THETA = _kernels_py.THETA
