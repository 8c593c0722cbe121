"""Acceptance checks, one PASS/FAIL line per criterion.

Run under pytest (lines are printed in the terminal summary) or directly:
``python3 tests/test_acceptance.py [numbers...]``.
"""

from __future__ import annotations

import dataclasses
import math
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sramyield.circuit_model import default_config  # noqa: E402
from sramyield.optimizer import EvalBudget, control_study, optimize, pareto_extract  # noqa: E402
from sramyield.optimizer.pareto import PAIRS, dominates, objective_matrix  # noqa: E402
from sramyield.surrogate import MetricsRecord, evaluate, read_delay  # noqa: E402
from sramyield.yield_engine import StoppingRule, make_oracle, run, yield_from_pfail  # noqa: E402

LINES: dict[int, str] = {}
JOBS = 8


def _record(n: int, ok: bool, detail: str) -> bool:
    LINES[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    return ok


# -- 1 -------------------------------------------------------------------------------

def criterion_1() -> bool:
    from sramyield.optimizer import fom

    base = MetricsRecord(hsnm=0.33, rsnm=0.17, wsnm=0.79, t_read=0.4533e-9, t_write=0.0903e-9,
                         p_read=13.74e-6, p_write=0.86e-6, area=0.61e-12)
    opt = dataclasses.replace(base, rsnm=0.28, wsnm=1.10, p_read=14.37e-6, p_write=1.14e-6, area=0.52e-12)
    a, b = fom(base), fom(opt)
    ok = abs(a - 10.20) <= 0.01 and abs(b - 10.43) <= 0.01
    return _record(1, ok, f"fom w/o opt {a:.4f} (10.20), w/ opt {b:.4f} (10.43), tol 0.01")


# -- 2 -------------------------------------------------------------------------------

def _max_gap(ns) -> tuple[float, int, float]:
    worst = (0.0, 0, 0.0)
    for n in ns:
        for frac in np.linspace(0.0, 0.999, 60):
            p = 0.2 * frac / n
            y = yield_from_pfail(p, n)
            d = abs(y["exact"] - y["approx"])
            if d > worst[0]:
                worst = (d, n, p)
    return worst


def criterion_2() -> tuple[bool, bool]:
    """Returns ``(literal, large_arrays)``; the literal statement includes n = 1."""
    y = yield_from_pfail(1.05e-7, 10**6)
    value_ok = abs(y["approx"] - 0.9003) <= 1e-4
    small = _max_gap([1, 2, 4, 10, 50, 100, 199])
    large = _max_gap([200, 256, 1024, 10**4, 10**6, 10**9])
    literal = value_ok and small[0] < 1e-4 and large[0] < 1e-4
    _record(2, literal,
            f"approx {y['approx']:.6f} (0.9003); n>=200: max |exact-approx| {large[0]:.2e} < 1e-4; "
            f"n<200: max {small[0]:.2e} at n={small[1]}, p={small[2]:.3g} (error ~ n p^2 / 2, "
            f"so n p < 0.2 alone does not bound it)")
    return literal, value_ok and large[0] < 1e-4


# -- 3 -------------------------------------------------------------------------------

ORACLES = ("linear3", "twotail35", "planted2sparse")
METHODS = ("mc", "mnis", "ais", "acs", "hscs")
SEEDS = 100


def criterion_3() -> bool:
    stop = StoppingRule(0.1, 2_000_000, 10)
    cover: dict[tuple[str, str], int] = {}
    sims: dict[str, list[int]] = {m: [] for m in METHODS}
    foms: dict[str, list[float]] = {m: [] for m in METHODS}
    for o in ORACLES:
        lim = make_oracle(o)
        for m in METHODS:
            hit = 0
            for s in range(SEEDS):
                e = run(m, lim, stop, seed=s, jobs=JOBS)
                hit += abs(e.p_fail - lim.p_true) <= 3 * e.std_p_fail
                if o == "linear3":
                    sims[m].append(e.n_sims)
                    foms[m].append(e.estimator_fom)
            cover[(o, m)] = hit
    cov_ok = all(v >= 95 for v in cover.values())
    mc_n = float(np.mean(sims["mc"]))
    eff = {m: float(np.mean(sims[m])) for m in ("mnis", "ais", "acs")}
    eff_ok = all(n <= mc_n / 5 for n in eff.values()) and all(
        max(foms[m]) <= 0.1 for m in ("mnis", "ais", "acs"))
    worst = min(cover, key=cover.get)
    detail = (f"coverage min {cover[worst]}/{SEEDS} ({worst[1]} on {worst[0]}), need 95; "
              f"half-space mean sims mc {mc_n:.0f} vs " +
              ", ".join(f"{m} {n:.0f}" for m, n in eff.items()) + " (need <= mc/5, fom <= 0.1)")
    return _record(3, cov_ok and eff_ok, detail)


# -- 4 -------------------------------------------------------------------------------

def criterion_4() -> bool:
    dims = [default_config(r, c).variation_dim for r, c in ((1, 1), (3, 2), (32, 2))]
    return _record(4, dims == [18, 108, 1152], f"dims {dims} (18, 108, 1152)")


# -- 5 -------------------------------------------------------------------------------

def _pattern(cfg, pat):
    return dataclasses.replace(cfg, leakage=dataclasses.replace(cfg.leakage, idle_pattern=pat))


def criterion_5() -> bool:
    rows = (8, 16, 32, 64, 128, 256)
    ms = [evaluate(default_config(r, 1)) for r in rows]
    off = [evaluate(default_config(r, 1, parasitics=False)).t_read for r in rows]
    t = [m.t_read for m in ms]
    p = [m.p_read for m in ms]
    tw = [m.t_write for m in ms]
    ratio = [a / b for a, b in zip(t, off)]
    inc = all(b > a for a, b in zip(t, t[1:])) and all(b > a for a, b in zip(p, p[1:]))
    tw_var = (max(tw) - min(tw)) / min(tw)
    rat_ok = all(r > 1 for r in ratio) and ratio[rows.index(256)] > ratio[rows.index(64)]
    base = default_config(32, 1)
    gap = {}
    for v in (0.45, 1.0):
        c = dataclasses.replace(base, vdd=v)
        gap[v] = read_delay(_pattern(c, "all_zero")) - read_delay(_pattern(c, "all_one"))
    gap_ok = gap[0.45] > 0 and gap[1.0] < 0.1 * gap[0.45]
    ok = inc and tw_var < 0.05 and rat_ok and gap_ok
    return _record(5, ok, f"t_read/p_read increasing {inc}; t_write spread {tw_var:.2%}; parasitic ratio "
                          f"{ratio[0]:.2f}..{ratio[-1]:.2f} (64: {ratio[3]:.2f}, 256: {ratio[5]:.2f}); "
                          f"idle gap {gap[0.45]:.3e} s at 0.45 V, {gap[1.0]:.3e} s at 1.0 V")


# -- 6 -------------------------------------------------------------------------------

def criterion_6() -> bool:
    from conftest import real_simulator
    from make_golden import GOLDEN, golden_set
    from test_netlist import _check_structure

    from sramyield.circuit_model import sample_matrix

    gen = np.random.default_rng(20240611)
    bad = 0
    for _ in range(200):
        cfg = default_config(int(gen.integers(1, 65)), int(gen.integers(1, 9)),
                             parasitics=bool(gen.integers(2)), peripherals=bool(gen.integers(2)))
        z = None if gen.integers(2) else sample_matrix(cfg, int(gen.integers(2**31)), 0, 1)[0]
        try:
            _check_structure(cfg, z)
        except AssertionError:
            bad += 1
    golden = golden_set()
    mismatched = [n for n, text in golden.items() if (GOLDEN / n).read_bytes() != text.encode("utf-8")]
    spice = "no simulator on PATH, optional run skipped"
    spice_ok = True
    exe = real_simulator()
    if exe:
        from sramyield.netlist import DeckKind, emit_deck
        from sramyield.spice_adapter import SimulatorHandle, SpiceError, run_deck

        h = SimulatorHandle(exe, timeout=600)
        failed = []
        for kind in DeckKind:
            try:
                run_deck(h, emit_deck(default_config(32, 1), kind), kind.value)
            except SpiceError as exc:
                failed.append(f"{kind.value}: {exc}")
        spice_ok = not failed
        spice = f"{exe}: {len(DeckKind) - len(failed)}/{len(DeckKind)} decks ran"
    ok = bad == 0 and not mismatched and spice_ok
    return _record(6, ok, f"{200 - bad}/200 random configs; golden {len(golden) - len(mismatched)}/"
                          f"{len(golden)} byte-equal; {spice}")


# -- 7 -------------------------------------------------------------------------------

OPT_ALGOS = ("cbo", "pso", "sa", "smbo")


def _front_ok(members, pair) -> bool:
    f = objective_matrix(members, pair)
    return all(i == j or not dominates(f[j], f[i]) for i in range(len(f)) for j in range(len(f)))


def criterion_7() -> bool:
    cfg = default_config(32, 1)
    memo: dict = {}
    wins: dict[str, int] = {}
    pareto_ok = True
    for algo in OPT_ALGOS:
        wins[algo] = 0
        for seed in range(10):
            res = optimize(cfg, algo, EvalBudget(400), seed, jobs=JOBS, memo=memo)
            b = res.best
            wins[algo] += b is not None and b.feasible and b.fom >= res.baseline.fom
            for pair in PAIRS:
                pareto_ok &= _front_ok(pareto_extract(res.history, pair).members, PAIRS[pair])
    mo = optimize(cfg, "cbo", EvalBudget(400), 0, jobs=JOBS, memo=memo, multi_objective="power-snm")
    pareto_ok &= _front_ok(mo.pareto.members, mo.pareto.objectives)
    rep = control_study(cfg, "pso", EvalBudget(400), 0, jobs=JOBS).summary()
    control_ok = rep["full_model_fom"] is not None and set(rep["constraints"]) >= {"t_read", "t_write"}
    ok = all(v >= 9 for v in wins.values()) and pareto_ok and control_ok
    cons = ", ".join(f"{k} {v}" for k, v in rep["constraints"].items())
    return _record(7, ok, "seeds with feasible FoM >= default: " +
                   ", ".join(f"{a} {n}/10" for a, n in wins.items()) +
                   f"; pareto non-dominated {pareto_ok}; control report: full-model FoM "
                   f"{rep['full_model_fom']:.3f} vs baseline {rep['full_model_baseline_fom']:.3f} ({cons})")


# -- 8 -------------------------------------------------------------------------------

CLI_RUNS = [
    ["generate", "--rows", "32", "--cols", "2", "--mc-samples", "20"],
    ["generate", "--rows", "4", "--sample", "7", "--seed", "3", "--peripherals"],
    ["characterize", "--sweep", "rows=8,16,32,64,128,256", "--curves"],
    ["characterize", "--sweep", "vdd=0.45,0.55,0.7,0.85,1.0"],
    *[["yield", "--method", m, "--oracle", o] for m in METHODS for o in ORACLES],
    ["yield", "--method", "mnis", "--rows", "1", "--metric", "t_write", "--threshold", "8e-11",
     "--array-cells", "1048576"],
    ["yield", "--method", "mc", "--rows", "1", "--metric", "pass_fail", "--max-sims", "20000"],
    *[["optimize", "--algo", a, "--budget", "60", "--seed", "2"] for a in OPT_ALGOS],
    ["optimize", "--algo", "sa", "--budget", "60", "--control"],
    ["optimize", "--algo", "cbo", "--budget", "40", "--multi-objective", "area-snm"],
    ["bench", "--size", "5000", "--repeats", "1"],
]


def criterion_8() -> bool:
    import os

    from click.testing import CliRunner

    from sramyield.cli import main

    os.environ.setdefault("SOURCE_DATE_EPOCH", "1700000000")
    diffs = []
    n_files = 0
    with tempfile.TemporaryDirectory() as tmp:
        for i, args in enumerate(CLI_RUNS):
            outs = []
            codes = []
            for jobs in (1, 8):
                d = Path(tmp) / f"{i}_{jobs}"
                res = CliRunner().invoke(main, args + ["--jobs", str(jobs), "--out", str(d)])
                codes.append(res.exit_code)
                outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())
                             if not p.name.endswith(".timing.json")} if d.exists() else {})
            # 3 (unresolved) still writes its reports and must be reproducible too
            if codes[0] != codes[1] or codes[0] not in (0, 3):
                diffs.append(f"{' '.join(args)} exited {codes}")
            n_files += len(outs[0])
            if outs[0] != outs[1] or not outs[0]:
                diffs.append(" ".join(args))
    return _record(8, not diffs, f"{len(CLI_RUNS)} runs, {n_files} report files byte-identical at jobs 1/8"
                   if not diffs else "differences: " + "; ".join(diffs))


# -- pytest wrappers ------------------------------------------------------------------

def test_criterion_1_fom_reproduction():
    assert criterion_1(), LINES[1]


@pytest.mark.xfail(strict=True, reason="n p < 0.2 does not bound the error for small arrays; "
                                       "see the line printed for criterion 2")
def test_criterion_2_literal_statement():
    literal, _ = criterion_2()
    assert literal, LINES[2]


def test_criterion_2_large_arrays():
    _, large = criterion_2()
    assert large, LINES[2]


@pytest.mark.slow
def test_criterion_3_estimator_coverage():
    assert criterion_3(), LINES[3]


def test_criterion_4_dimensions():
    assert criterion_4(), LINES[4]


def test_criterion_5_trends():
    assert criterion_5(), LINES[5]


def test_criterion_6_netlist_suite():
    assert criterion_6(), LINES[6]


@pytest.mark.slow
def test_criterion_7_optimizers():
    assert criterion_7(), LINES[7]


@pytest.mark.slow
def test_criterion_8_determinism():
    assert criterion_8(), LINES[8]


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8}

if __name__ == "__main__":
    picks = [int(a) for a in sys.argv[1:]] or sorted(CRITERIA)
    for k in picks:
        CRITERIA[k]()
        print(LINES[k], flush=True)
