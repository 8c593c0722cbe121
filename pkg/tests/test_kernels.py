import os
import subprocess
import sys

import numpy as np
import pytest

from sramyield import _kernels_py, kernels
from sramyield.bench import run_bench

try:
    from sramyield import _kernels as _kernels_c
except ImportError:
    _kernels_c = None

needs_ext = pytest.mark.skipif(_kernels_c is None, reason="compiled extension not built")


def _params(m, seed=0):
    g = np.random.default_rng(seed)
    return np.column_stack([
        np.full(m, 6e-4), 0.42 + 0.05 * g.standard_normal(m), np.zeros(m),
        np.full(m, 2e-4), 0.40 + 0.05 * g.standard_normal(m), 0.01 * g.standard_normal(m),
        np.full(m, 4e-4), np.full(m, 0.42), np.zeros(m),
        g.choice([0.0, 1.0], m), np.full(m, 1.0),
    ])


def test_drain_current_regions():
    i_off = _kernels_py.drain_current(np.array([0.0]), np.array([1.0]), 1e-4, 0.4, 0.0)[0]
    i_on = _kernels_py.drain_current(np.array([1.0]), np.array([1.0]), 1e-4, 0.4, 0.0)[0]
    assert 0 < i_off < 1e-6 * i_on
    assert _kernels_py.drain_current(np.array([1.0]), np.array([0.0]), 1e-4, 0.4, 0.0)[0] == 0.0


def test_solver_residual_small():
    p = _params(3)
    grid = np.linspace(0, 1, 11)
    v = _kernels_py.vtc_batch(grid, p, 1.0)
    assert v.shape == (3, 11)
    assert np.all((v >= 0) & (v <= 1.0))


@needs_ext
def test_drain_current_backends_agree():
    g = np.random.default_rng(1)
    args = (g.random(5000), g.random(5000), np.full(5000, 5e-4), 0.4 + 0.05 * g.standard_normal(5000),
            0.02 * g.standard_normal(5000))
    np.testing.assert_allclose(_kernels_c.drain_current(*args), _kernels_py.drain_current(*args),
                               rtol=1e-9, atol=1e-18)


@needs_ext
def test_vtc_backends_agree():
    grid = np.linspace(0, 1.0, 201)
    p = _params(25, 2)
    diff = np.abs(_kernels_c.vtc_batch(grid, p, 1.0) - _kernels_py.vtc_batch(grid, p, 1.0))
    assert diff.max() <= _kernels_py.NODE_TOL


@needs_ext
def test_rotated_gaps_backends_agree():
    grid = np.linspace(0, 1.0, 201)
    p = _params(6, 3)
    p[:, 9] = 0.0
    l1 = _kernels_py.vtc_batch(grid, p, 1.0)
    l2 = _kernels_py.vtc_batch(grid, p[::-1], 1.0)
    for a, b in zip(_kernels_c.rotated_gaps(l1, l2, grid), _kernels_py.rotated_gaps(l1, l2, grid)):
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_bench_report_is_deterministic():
    a, ta = run_bench(size=2000, repeats=1)
    b, _ = run_bench(size=2000, repeats=1)
    assert a == b
    if a["compiled_available"]:
        assert all(k["backends_agree"] for k in a["kernels"].values())
        assert all(t["cython_s"] > 0 for t in ta.values())


def test_pure_python_switch():
    env = dict(os.environ, SRAMYIELD_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from sramyield import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    assert kernels.BACKEND in ("python", "cython")


def test_surrogate_same_under_both_backends():
    code = ("from sramyield.circuit_model import default_config; from sramyield.surrogate import evaluate;"
            "m = evaluate(default_config(4, 1)); print(repr(m.hsnm), repr(m.rsnm), repr(m.t_read))")
    res = []
    for flag in ("0", "1"):
        env = dict(os.environ, SRAMYIELD_PURE_PYTHON=flag)
        res.append([float(x) for x in subprocess.run([sys.executable, "-c", code], env=env,
                                                     capture_output=True, text=True, check=True).stdout.split()])
    np.testing.assert_allclose(res[0], res[1], rtol=1e-5)
