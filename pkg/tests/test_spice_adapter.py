import math

import numpy as np
import pytest

from conftest import real_simulator
from sramyield.circuit_model import default_config
from sramyield.netlist import DeckKind, emit_deck
from sramyield.spice_adapter import (
    MissingMeasurement,
    SimulatorFailed,
    SimulatorHandle,
    SimulatorTimeout,
    SimulatorUnavailable,
    SpiceLimitState,
    evaluate_via_spice,
    handle_from_env,
    parse_measurements,
    parse_table,
    probe,
    run_deck,
)
from sramyield.surrogate.timing import read_power, write_power

DECK = """* test deck
V1 a 0 1
.TRAN 1p 1n
.MEAS TRAN t_read TRIG v(a) VAL=0.5 RISE=1 TARG v(a) VAL=0.6 RISE=1
.END
"""


@pytest.fixture(params=["ngspice", "Xyce"])
def handle(request, fake_spice, tmp_path):
    return SimulatorHandle(fake_spice[request.param], timeout=10, workdir=str(tmp_path))


def test_probe_reports_version(fake_spice):
    ng = SimulatorHandle(fake_spice["ngspice"])
    assert probe(ng).version == "ngspice-42"
    xy = SimulatorHandle(fake_spice["Xyce"])
    assert xy.dialect == "xyce"
    assert probe(xy).version.startswith("Xyce Release 7.8.0")


def test_probe_missing_executable(tmp_path):
    res = probe(SimulatorHandle(str(tmp_path / "nope")))
    assert not res.available and "not found" in res.diagnostic
    assert not probe(None).available


def test_probe_rejects_unrelated_program():
    res = probe(SimulatorHandle("true"))
    assert not res.available


def test_run_deck_without_simulator(tmp_path):
    with pytest.raises(SimulatorUnavailable):
        run_deck(SimulatorHandle(str(tmp_path / "nope")), DECK)


def test_handle_from_env(monkeypatch, fake_spice):
    monkeypatch.setenv("SRAMYIELD_SPICE", fake_spice["Xyce"])
    assert handle_from_env().dialect == "xyce"


def test_bad_dialect():
    with pytest.raises(ValueError):
        SimulatorHandle("ngspice", dialect="spectre")


def test_measurement_roundtrip(handle):
    res = run_deck(handle, DECK.replace("* test deck", "* test deck\n* fake-meas t_read 2.5e-10"))
    assert res["t_read"] == pytest.approx(2.5e-10)


def test_syntax_error_is_reported(handle):
    with pytest.raises(SimulatorFailed, match="exit status 1") as info:
        run_deck(handle, DECK.replace("V1", "BADCARD\nV1"))
    assert info.value.log_path is not None and info.value.log_path.exists()


def test_timeout(fake_spice, tmp_path):
    h = SimulatorHandle(fake_spice["ngspice"], timeout=0.5, workdir=str(tmp_path))
    with pytest.raises(SimulatorTimeout):
        run_deck(h, DECK.replace("* test deck", "* test deck\n* fake: sleep 5"))


def test_missing_measurement(handle):
    with pytest.raises(MissingMeasurement, match="t_read"):
        run_deck(handle, DECK.replace("* test deck", "* test deck\n* fake: drop t_read"))


def test_parse_measurements_dialects():
    text = "t_read              =  1.234000e-10 targ=  2e-10 trig=  5e-11\nT_WRITE = 3e-11\nnoise\n"
    assert parse_measurements(text) == {"t_read": 1.234e-10, "t_write": 3e-11}


def test_parse_table_skips_headers_and_duplicates():
    text = ("Index v-sweep v(q)\n--------\n0 0.0 1.0\n1 0.5 0.4\n"
            "Index v-sweep v(q)\n1 0.5 0.4\n2 1.0 0.0\nEnd\n")
    np.testing.assert_array_equal(parse_table(text), [[0, 0.0, 1.0], [1, 0.5, 0.4], [2, 1.0, 0.0]])
    assert parse_table("nothing here").size == 0


def test_evaluate_via_fake_simulator(handle):
    cfg = default_config(2, 1)
    m = evaluate_via_spice(cfg, None, handle, jobs=2)
    assert m.t_read == pytest.approx(1.5e-10) and m.t_write == pytest.approx(1.5e-10)
    assert m.hsnm > 0 and m.rsnm > 0
    assert m.wsnm == pytest.approx(-m.hsnm)   # the fake's write sweep stays bistable
    assert m.p_read == read_power(cfg) and m.p_write == write_power(cfg)


def test_spice_limit_state(handle):
    cfg = default_config(1, 1)
    lim = SpiceLimitState(cfg, handle, "t_write")
    m = lim.margin(np.zeros((2, cfg.variation_dim)))
    np.testing.assert_allclose(m, (0.5e-9 - 1.5e-10) / 0.5e-9)
    with pytest.raises(ValueError):
        SpiceLimitState(cfg, handle, "hsnm")


@pytest.mark.spice
@pytest.mark.skipif(real_simulator() is None, reason="no ngspice or Xyce on PATH")
@pytest.mark.parametrize("kind", [DeckKind.TRAN_READ, DeckKind.TRAN_WRITE])
def test_real_simulator_runs_transient_decks(kind, tmp_path):
    h = SimulatorHandle(real_simulator(), timeout=300, workdir=str(tmp_path))
    assert probe(h).available
    res = run_deck(h, emit_deck(default_config(4, 1), kind), kind.value)
    metric = "t_read" if kind is DeckKind.TRAN_READ else "t_write"
    assert 0 < res[metric] < 1e-8 and math.isfinite(res[metric])
