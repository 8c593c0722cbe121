import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import multivariate_normal, norm

from sramyield.circuit_model import default_config
from sramyield.surrogate import evaluate, pass_fail
from sramyield.yield_engine import (
    METHODS,
    FunctionLimitState,
    GaussianMixture,
    IndicatorLimitState,
    RegionNotFoundError,
    ShiftNotFoundError,
    StoppingRule,
    SurrogateLimitState,
    WeightedAccumulator,
    estimator_fom,
    evaluate_margin,
    make_oracle,
    run,
    run_acs,
    run_hscs,
    run_mnis,
    yield_from_pfail,
)

QUICK = StoppingRule(0.1, 400_000, 10)


# -- closed forms ---------------------------------------------------------------

def test_yield_one_megabit():
    y = yield_from_pfail(1.05e-7, 10**6)
    assert y["approx"] == pytest.approx(0.9003, abs=1e-4)
    assert y["exact"] == pytest.approx(y["approx"], abs=1e-4)


@given(st.integers(200, 10**9), st.floats(0.0, 0.999))
def test_yield_approximation_error(n, frac):
    # error ~ n p^2 / 2 < 0.02 / n once n p < 0.2, so arrays of >= 200 cells are covered
    p = 0.2 * frac / n
    y = yield_from_pfail(p, n)
    assert abs(y["exact"] - y["approx"]) < 1e-4


def test_yield_approximation_breaks_for_tiny_arrays():
    y = yield_from_pfail(0.0078125, 4)   # n p = 0.03 but p is large
    assert abs(y["exact"] - y["approx"]) > 1e-4


@pytest.mark.parametrize("p,n", [(-0.1, 1), (1.1, 1), (0.1, 0)])
def test_yield_domain(p, n):
    with pytest.raises(ValueError):
        yield_from_pfail(p, n)


def test_estimator_fom():
    assert estimator_fom(0.01, 0.001) == pytest.approx(0.1)
    assert estimator_fom(0.0, 0.0) == math.inf


@pytest.mark.parametrize("kw", [{"fom_target": 0}, {"max_sims": 0}, {"min_failures": -1}])
def test_stopping_rule_validation(kw):
    with pytest.raises(ValueError):
        StoppingRule(**kw)


def test_mixture_log_ratio_matches_scipy():
    mix = GaussianMixture(np.array([[1.0, -0.5], [0.0, 2.0]]), np.array([[0.8, 1.2], [1.0, 1.0]]),
                          np.array([0.3, 0.7]))
    x = np.array([[0.1, 0.2], [2.0, -1.0], [-1.0, 3.0]])
    q = sum(w * multivariate_normal(m, np.diag(s**2)).pdf(x)
            for w, m, s in zip(mix.weights, mix.means, mix.sigmas))
    phi = multivariate_normal(np.zeros(2), np.eye(2)).pdf(x)
    np.testing.assert_allclose(mix.log_ratio(x), np.log(phi / q), rtol=1e-10)


def test_accumulator_matches_numpy():
    rng = np.random.default_rng(0)
    w = rng.exponential(size=1000)
    f = rng.random(1000) < 0.2
    acc = WeightedAccumulator()
    acc.add(w[:300], f[:300])
    acc.add(w[300:], f[300:])
    v = np.where(f, w, 0.0)
    assert acc.p == pytest.approx(v.mean())
    assert acc.std == pytest.approx(v.std(ddof=1) / math.sqrt(1000))
    assert acc.n_fail == f.sum()


def test_oracles_report_true_probability():
    assert make_oracle("linear3").p_true == pytest.approx(norm.sf(3.0))
    assert make_oracle("twotail35").p_true == pytest.approx(2 * norm.sf(3.5))
    sparse = make_oracle("planted2sparse")
    assert sparse.dim == 108
    assert sparse.p_true == pytest.approx(norm.sf(4 / math.sqrt(2)))


def test_margin_parallel_split_is_exact():
    lim = make_oracle("twotail35")
    x = np.random.default_rng(1).normal(size=(501, 18))
    assert evaluate_margin(lim, x, jobs=1).tobytes() == evaluate_margin(lim, x, jobs=7).tobytes()


# -- estimators -----------------------------------------------------------------

@pytest.mark.parametrize("method", METHODS)
def test_estimators_cover_halfspace(method):
    lim = make_oracle("linear3")
    est = run(method, lim, QUICK, seed=3)
    assert est.status == "converged"
    assert abs(est.p_fail - lim.p_true) <= 3 * est.std_p_fail
    assert est.estimator_fom <= 0.1
    ns = [t[0] for t in est.trace]
    assert ns == sorted(ns) and ns[-1] == est.n_sims


@pytest.mark.parametrize("method", METHODS)
def test_estimators_deterministic_across_jobs(method):
    lim = make_oracle("linear3")
    a = run(method, lim, QUICK, seed=5, jobs=1)
    b = run(method, lim, QUICK, seed=5, jobs=4)
    assert (a.p_fail, a.std_p_fail, a.n_sims, a.trace) == (b.p_fail, b.std_p_fail, b.n_sims, b.trace)


def test_unknown_method_lists_choices():
    with pytest.raises(ValueError, match="mc, mnis, ais, acs, hscs"):
        run("bogus", make_oracle("linear3"))


def test_max_sims_flags_unconverged():
    est = run("mc", make_oracle("linear3"), StoppingRule(0.01, 5000, 10), seed=0)
    assert est.status != "converged"
    assert est.n_sims <= 5000


def test_mnis_without_failures_raises():
    safe = FunctionLimitState(18, lambda x: np.full(x.shape[0], 1.0), "safe", 0.0)
    with pytest.raises(ShiftNotFoundError):
        run_mnis(safe, QUICK, 0)


def test_hscs_without_failures_raises():
    safe = FunctionLimitState(18, lambda x: np.full(x.shape[0], 1.0), "safe", 0.0)
    with pytest.raises(RegionNotFoundError):
        run_hscs(safe, QUICK, 0)


def test_acs_recovers_planted_support():
    lim = make_oracle("planted2sparse")
    est = run_acs(lim, QUICK, 2)
    assert any(set(s) >= {0, 1} for s in est.diagnostics["support"])   # one support per mode
    assert abs(est.p_fail - lim.p_true) <= 3 * est.std_p_fail


def test_acs_falls_back_on_dense_failure_region():
    lim = make_oracle("dense")
    est = run_acs(lim, QUICK, 0)
    assert est.diagnostics.get("fallback") is True
    assert any("fell back" in w for w in est.warnings)
    assert abs(est.p_fail - lim.p_true) <= 3 * est.std_p_fail


def test_indicator_only_limit_state():
    lim = IndicatorLimitState(make_oracle("linear3"))
    est = run("mnis", lim, QUICK, seed=1)
    assert abs(est.p_fail - lim.p_true) <= 3 * est.std_p_fail


# -- circuit limit state ----------------------------------------------------------

def test_surrogate_margin_sign_matches_pass_fail():
    cfg = default_config(1, 1)
    lim = SurrogateLimitState(cfg, "pass_fail")
    x = np.random.default_rng(2).normal(scale=4.0, size=(40, cfg.variation_dim))
    m = lim.margin(x)
    for row, mi in zip(x, m):
        assert (mi >= 0) == pass_fail(evaluate(cfg, row), cfg)


def test_surrogate_write_delay_margin():
    cfg = default_config(1, 1)
    lim = SurrogateLimitState(cfg, "t_write", 1e-10)
    t = evaluate(cfg).t_write
    assert lim.margin(np.zeros((1, 18)))[0] == pytest.approx((1e-10 - t) / 1e-10)


def test_surrogate_unknown_metric():
    with pytest.raises(ValueError):
        SurrogateLimitState(default_config(1, 1), "p_read")
