from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from sramyield.circuit_model import default_config, sample_matrix, sample_variations
from sramyield.netlist import (
    DeckKind,
    emit_array,
    emit_cell_subckt,
    emit_deck,
    emit_mc_tables,
    parse_netlist,
    read_mc_tables,
)
from sramyield.netlist.emit import relative_deviations

from make_golden import GOLDEN, golden_set

CASES = 200


def _check_structure(cfg, z) -> None:
    doc = emit_array(cfg, z)
    parsed = parse_netlist(doc.text)
    n = cfg.rows * cfg.cols
    # self-consistency: manifest equals what parsing recovers
    assert doc.manifest == parsed.manifest()
    assert doc.manifest["n_core_transistors"] == 6 * n
    if cfg.peripherals is None:
        assert doc.manifest["n_transistors"] == 6 * n
    else:
        assert doc.manifest["n_transistors"] > 6 * n
    expected_rc = 3 * n if cfg.parasitics.enabled else 0
    assert doc.manifest["n_rc_segments"] == expected_rc
    # every cell carries its own deviation values, row-major
    inst = parsed.instance_params("SRAM_6T_CELL")
    assert len(inst) == n
    rel, _ = relative_deviations(cfg, np.zeros(cfg.variation_dim) if z is None else z)
    got = np.array([[float(v) for v in p.values()] for p in inst])
    np.testing.assert_array_equal(got, rel.reshape(n, -1))


@settings(max_examples=CASES, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(rows=st.integers(1, 64), cols=st.integers(1, 8), parasitics=st.booleans(),
       peripherals=st.booleans(), seed=st.integers(0, 2**31 - 1), nominal=st.booleans())
def test_structural_invariants(rows, cols, parasitics, peripherals, seed, nominal):
    cfg = default_config(rows, cols, parasitics=parasitics, peripherals=peripherals)
    z = None if nominal else sample_matrix(cfg, seed, 0, 1)[0]
    _check_structure(cfg, z)


@pytest.mark.parametrize("name", sorted(golden_set()))
def test_golden_default_deck_set(name):
    expected = (GOLDEN / name).read_bytes()
    assert golden_set()[name].encode("utf-8") == expected


def test_default_cell_has_six_transistors():
    doc = emit_cell_subckt(default_config(1, 1).cell)
    assert doc.manifest["n_transistors"] == 6


def test_pass_gates_driven_by_wordline():
    parsed = parse_netlist(emit_cell_subckt(default_config(1, 1).cell).text)
    sub = parsed.subckts["SRAM_6T_CELL"]
    gates = {el[0]: el[2] for el in sub.elements if el[0].startswith("M")}
    assert gates["M2"] == gates["M3"] == "WL"
    assert sorted(gates) == ["M0", "M1", "M2", "M3", "M4", "M5"]


def test_zero_width_rejected():
    from sramyield.circuit_model import CellGeometry, ConfigError

    with pytest.raises(ConfigError, match="w_pd"):
        CellGeometry(w_pd=0)


def test_core_count_32x4():
    assert emit_array(default_config(32, 4)).manifest["n_core_transistors"] == 768


def test_no_parasitics_means_no_rc():
    assert emit_array(default_config(32, 1, parasitics=False)).manifest["n_rc_segments"] == 0


def test_idle_pattern_changes_only_initial_conditions():
    import dataclasses

    base = default_config(8, 2)
    one = dataclasses.replace(base, leakage=dataclasses.replace(base.leakage, idle_pattern="all_one"))
    a, b = emit_array(base), emit_array(one)
    assert a.manifest == b.manifest
    diff = [(x, y) for x, y in zip(a.text.splitlines(), b.text.splitlines()) if x != y]
    assert diff and all(x.startswith((".IC", "* config_hash")) for x, _ in diff)
    assert any(x.startswith(".IC") for x, _ in diff)


def test_sample_dimension_mismatch():
    cfg = default_config(2, 2)
    with pytest.raises(ValueError, match="dimension"):
        emit_array(cfg, np.zeros(cfg.variation_dim + 1))


@pytest.mark.parametrize("kind", list(DeckKind))
def test_decks_parse_and_measure(kind):
    cfg = default_config(4, 2)
    doc = emit_deck(cfg, kind, sample_matrix(cfg, 3, 0, 1)[0])
    parsed = parse_netlist(doc.text)
    cards = {d[0].upper() for d in parsed.directives}
    if kind.value.startswith("dc"):
        assert ".DC" in cards
    else:
        assert ".TRAN" in cards and ".MEAS" in cards


def test_mc_table_roundtrip():
    cfg = default_config(2, 1, peripherals=True)
    samples = sample_variations(cfg, 11, 5, start=7)
    names, back = read_mc_tables(emit_mc_tables(cfg, samples))
    assert len(names) == cfg.variation_dim
    assert back == samples


def test_emitted_text_is_lf_and_ascii(tmp_path):
    text = emit_deck(default_config(2, 1), "tran_write").text
    assert "\r" not in text
    text.encode("ascii")


def test_golden_dir_is_complete():
    assert {p.name for p in Path(GOLDEN).glob("*.sp")} == set(golden_set())
