import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sramyield.circuit_model import default_config, sample_matrix
from sramyield.surrogate import (
    ButterflyCurve,
    MetricsRecord,
    cell_area,
    cell_butterfly,
    discharge_time,
    evaluate,
    evaluate_batch,
    inverter_vtc,
    pass_fail,
    read_delay,
    records_from_batch,
    snm,
    trip_point,
    write_delay,
)
from sramyield.surrogate.snm import sweep_grid


def _with_pattern(cfg, pat):
    return dataclasses.replace(cfg, leakage=dataclasses.replace(cfg.leakage, idle_pattern=pat))


# -- transfer curves and SNM ------------------------------------------------

def test_symmetric_inverter_trips_at_midpoint():
    g = sweep_grid(1.0)
    v = inverter_vtc(1e-4, 1e-4, (0.0, 0.0), 1.0, g)
    assert v[500] == pytest.approx(0.5, abs=2e-3)
    assert trip_point(g, v) == pytest.approx(0.5, abs=1e-3)


def test_weaker_pulldown_raises_trip_point():
    g = sweep_grid(1.0)
    base = trip_point(g, inverter_vtc(1e-4, 1e-4, (0.0, 0.0), 1.0, g))
    shifted = trip_point(g, inverter_vtc(1e-4, 1e-4, (0.05, 0.0), 1.0, g))
    assert shifted > base


def test_vtc_rails_and_monotone():
    g = sweep_grid(1.0)
    v = inverter_vtc(2e-4, 1e-4, (0.0, 0.0), 1.0, g)
    assert v[0] == pytest.approx(1.0, abs=1e-5)   # vdd less subthreshold leakage
    assert v[-1] < 0.01
    assert np.all(np.diff(v) <= 1e-12)


def test_step_inverters_give_half_vdd():
    g = sweep_grid(1.0)
    step = np.where(g < 0.5, 1.0, 0.0)
    assert snm(ButterflyCurve(g, step, step)) == pytest.approx(0.5, abs=2e-3)


def test_monostable_cell_has_no_margin():
    cfg = default_config(1, 1)
    z = np.zeros(cfg.variation_dim)
    z[[0, 3, 12]] = (14.0, -14.0, -14.0)   # M0 weak, M1 and M4 strong: read flips the cell
    assert snm(cell_butterfly(cfg, "read", z)) <= 0
    assert evaluate(cfg, z).rsnm <= 0


def test_read_snm_below_hold_snm():
    m = evaluate(default_config(1, 1))
    assert m.rsnm < m.hsnm


def test_symmetric_cell_lobes_match():
    c = cell_butterfly(default_config(1, 1), "hold")
    from sramyield import kernels

    ul, lr, _ = kernels.rotated_gaps(c.lobe1[None, :], c.lobe2[None, :], c.grid)
    assert ul[0] == pytest.approx(lr[0], abs=1e-3)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_snm_invariant_under_inverter_swap(seed):
    cfg = default_config(1, 1)
    z = sample_matrix(cfg, seed, 0, 1)[0].reshape(6, 3)
    swapped = z[[1, 0, 3, 2, 5, 4]].ravel()   # exchange the two half cells
    a = evaluate_batch(cfg, z.ravel()[None, :], ("hsnm", "rsnm"))
    b = evaluate_batch(cfg, swapped[None, :], ("hsnm", "rsnm"))
    for k in a:
        assert a[k][0] == pytest.approx(b[k][0], abs=2e-3)


# -- delays -------------------------------------------------------------------

def test_linear_discharge():
    assert discharge_time(10e-15, 0.25, 50e-6) == pytest.approx(50e-12)
    assert discharge_time(10e-15, 0.25, 0.0) == math.inf


def test_write_faster_than_read():
    cfg = default_config(32, 1)
    assert write_delay(cfg) < read_delay(cfg)


def test_unwritable_cell_with_strong_pullup():
    cfg = default_config(1, 1)
    strong = cfg.with_cell(dataclasses.replace(cfg.cell, w_pu=cfg.cell.w_pu * 100))
    assert write_delay(strong) == math.inf


def test_stronger_pass_gate_writes_faster():
    cfg = default_config(32, 1)
    ts = [write_delay(cfg.with_cell(dataclasses.replace(cfg.cell, w_pg=cfg.cell.w_pg * k)))
          for k in (0.7, 0.85, 1.0, 1.15, 1.3)]
    assert all(b <= a for a, b in zip(ts, ts[1:]))


def test_read_delay_decreases_with_vdd():
    cfg = default_config(32, 1)
    ts = [read_delay(dataclasses.replace(cfg, vdd=v)) for v in np.linspace(0.45, 1.0, 12)]
    assert all(b <= a for a, b in zip(ts, ts[1:]))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([8, 32, 64]))
def test_parasitics_never_speed_up_reads(seed, rows):
    cfg = default_config(rows, 1)
    off = dataclasses.replace(cfg, parasitics=dataclasses.replace(cfg.parasitics, enabled=False))
    z = sample_matrix(cfg, seed, 0, 1)[0]
    assert read_delay(cfg, z) >= read_delay(off, z)


def test_idle_zero_slower_at_low_vdd():
    cfg = dataclasses.replace(default_config(32, 1), vdd=0.45)
    assert read_delay(_with_pattern(cfg, "all_zero")) > read_delay(_with_pattern(cfg, "all_one"))


def test_idle_gap_shrinks_with_vdd():
    base = default_config(32, 1)
    gaps = []
    for v in np.linspace(0.45, 1.0, 8):
        c = dataclasses.replace(base, vdd=v)
        gaps.append(read_delay(_with_pattern(c, "all_zero")) - read_delay(_with_pattern(c, "all_one")))
    assert all(g > 0 for g in gaps)
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_rows_doubling_trends():
    a, b = evaluate(default_config(32, 1)), evaluate(default_config(64, 1))
    assert b.t_read > a.t_read and b.p_read > a.p_read
    assert abs(b.t_write - a.t_write) / a.t_write < 0.05


def test_sense_amp_offset_costs_read_time():
    cfg = default_config(8, 1, peripherals=True)
    z = np.zeros(cfg.variation_dim)
    z[-4] = 2.0
    assert read_delay(cfg, z) > read_delay(cfg)


# -- evaluate -----------------------------------------------------------------

def test_default_area_calibration():
    assert cell_area(default_config(1, 1).cell) == pytest.approx(0.61e-12, rel=1e-12)


def test_evaluate_deterministic_and_batch_consistent():
    cfg = default_config(3, 2)
    z = sample_matrix(cfg, 4, 0, 5)
    recs = records_from_batch(evaluate_batch(cfg, z))
    for i in range(5):
        assert evaluate(cfg, z[i]) == recs[i]
    assert evaluate(cfg) == evaluate(cfg)


def test_evaluate_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension"):
        evaluate(default_config(1, 1), np.zeros(5))


def test_metric_invariants():
    m = evaluate(default_config(16, 2))
    assert m.t_read > 0 and m.t_write > 0
    assert m.p_read >= 0 and m.p_write >= 0 and m.area > 0


def _rec(**kw):
    base = dict(hsnm=0.3, rsnm=0.2, wsnm=0.4, t_read=0.2e-9, t_write=0.1e-9,
                p_read=1e-5, p_write=1e-6, area=0.61e-12)
    base.update(kw)
    return MetricsRecord(**base)


def test_pass_fail_rules():
    cfg = default_config(32, 1)
    assert pass_fail(_rec(), cfg)
    assert pass_fail(_rec(t_read=0.5e-9, t_write=0.5e-9), cfg)   # inclusive
    assert not pass_fail(_rec(t_read=math.inf), cfg)
    assert not pass_fail(_rec(rsnm=0.04), cfg)
    assert not pass_fail(_rec(hsnm=0.09), cfg)
