"""Compiled-vs-numpy kernel benchmark.

Both implementations are imported directly (not through the backend switch)
so one process can time them side by side.  Results split into a
deterministic part (sizes, agreement between backends, output checksums)
and wall-clock timings.
"""

from __future__ import annotations

import hashlib
import time

import numpy as np

from . import _kernels_py, rng

try:
    from . import _kernels as _kernels_c  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on the build
    _kernels_c = None


# voltages agree to the node solver tolerance; currents to rounding
TOLERANCES = {"drain_current": 1e-9, "vtc_batch": _kernels_py.NODE_TOL}


def _inputs(size: int, seed: int):
    u = rng.uniform_rows(seed, 7, 0, size, 4)
    vdd = 1.0
    grid = np.linspace(0.0, vdd, 1001)
    m = max(1, size // 1000)
    params = np.column_stack([
        np.full(m, 6e-4), 0.42 + 0.03 * (u[:m, 0] - 0.5), np.zeros(m),
        np.full(m, 2e-4), 0.40 + 0.03 * (u[:m, 1] - 0.5), np.zeros(m),
        np.full(m, 4e-4), np.full(m, 0.42), np.zeros(m),
        np.full(m, vdd), np.full(m, vdd),
    ])
    return {
        "drain_current": (u[:, 0] * vdd, u[:, 1] * vdd, np.full(size, 6e-4),
                          0.42 + 0.05 * (u[:, 2] - 0.5), np.zeros(size)),
        "vtc_batch": (grid, params, vdd),
    }


def _digest(a) -> str:
    arrs = a if isinstance(a, tuple) else (a,)
    h = hashlib.sha256()
    for x in arrs:
        h.update(np.round(np.asarray(x, dtype=np.float64), 12).tobytes())
    return h.hexdigest()[:16]


def _time(fn, args, repeats: int) -> tuple[float, object]:
    out = fn(*args)
    best = float("inf")
    for _ in range(repeats):
        t = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t)
    return best, out


def run_bench(size: int = 100_000, repeats: int = 5, seed: int = 0) -> tuple[dict, dict]:
    """Returns ``(report, timings)``; only ``timings`` varies between runs."""
    inputs = _inputs(size, seed)
    report: dict = {"size": size, "repeats": repeats, "compiled_available": _kernels_c is not None,
                    "kernels": {}}
    timings: dict = {}
    for name, args in inputs.items():
        t_py, out_py = _time(getattr(_kernels_py, name), args, repeats)
        entry = {"python_digest": _digest(out_py)}
        tim = {"python_s": t_py}
        if _kernels_c is not None:
            t_c, out_c = _time(getattr(_kernels_c, name), args, repeats)
            diff = float(np.max(np.abs(np.asarray(out_py) - np.asarray(out_c))))
            tol = TOLERANCES[name] * (1.0 if name == "vtc_batch" else
                                      float(np.max(np.abs(np.asarray(out_py)))) or 1.0)
            entry["backends_agree"] = diff <= tol
            entry["tolerance"] = tol
            tim["cython_s"] = t_c
            tim["speedup"] = t_py / t_c if t_c > 0 else float("inf")
        report["kernels"][name] = entry
        timings[name] = tim
    return report, timings
