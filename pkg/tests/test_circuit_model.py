import dataclasses

import numpy as np
import pytest
import yaml
from hypothesis import given, settings
from hypothesis import strategies as st

from sramyield import rng
from sramyield.circuit_model import (
    ConfigError,
    SramArrayConfig,
    VariationSpec,
    config_from_dict,
    default_config,
    dump_config,
    load_config,
    pelgrom_sigma,
    physical_deviations,
    sample_matrix,
    sample_variations,
    variation_dimension,
    vth0_sigmas,
)


@pytest.mark.parametrize("shape,dim", [((1, 1), 18), ((3, 2), 108), ((32, 2), 1152)])
def test_variation_dimension(shape, dim):
    cfg = default_config(*shape)
    assert cfg.variation_dim == dim
    assert sample_variations(cfg, 0, 1)[0].values.shape == (dim,)


def test_default_config_values():
    cfg = default_config(32, 1)
    assert cfg.vdd == 1.0
    assert cfg.timing_spec.t_read_max == 0.5e-9
    assert cfg.timing_spec.t_write_max == 0.5e-9
    assert cfg.sense_differential == 0.25
    assert cfg.write_flip_fraction == 0.9
    assert cfg.peripherals is None
    assert default_config(1, 1, peripherals=True).peripherals.sa_offset_sigma == pytest.approx(0.02)


@given(st.integers(1, 40), st.integers(1, 10), st.booleans())
def test_dimension_formula(rows, cols, periph):
    cfg = default_config(rows, cols, peripherals=periph)
    assert cfg.variation_dim == variation_dimension(rows, cols, periph) == 18 * rows * cols + 4 * periph


@pytest.mark.parametrize("a_vt,w,l,expected", [(2, 1e-6, 1e-6, 2e-3), (4, 1e-6, 1e-6, 4e-3),
                                              (2, 4e-6, 1e-6, 1e-3)])
def test_pelgrom(a_vt, w, l, expected):
    assert pelgrom_sigma(a_vt, w, l) == pytest.approx(expected, rel=1e-12)


@given(st.floats(0.1, 10), st.floats(1e-8, 1e-5), st.floats(1e-8, 1e-5))
def test_pelgrom_homogeneous(a, w, l):
    assert pelgrom_sigma(a, 2 * w, 2 * l) == pytest.approx(pelgrom_sigma(a, w, l) / 2, rel=1e-12)


@pytest.mark.parametrize("w,l", [(0, 1e-6), (1e-6, -1e-6)])
def test_pelgrom_domain(w, l):
    with pytest.raises(ValueError):
        pelgrom_sigma(2, w, l)


def test_pelgrom_overrides_relative_sigma():
    base = default_config(1, 1)
    cfg = dataclasses.replace(base, variation=VariationSpec(a_vt=3.0))
    s = vth0_sigmas(cfg)
    assert s[0] == pytest.approx(pelgrom_sigma(3.0, base.cell.w_pd, base.cell.l))
    assert not np.allclose(s, vth0_sigmas(base))


def test_samples_deterministic():
    cfg = default_config(1, 1)
    a = sample_variations(cfg, 7, 2)
    b = sample_variations(cfg, 7, 2)
    assert all(x.values.tobytes() == y.values.tobytes() for x, y in zip(a, b))


def test_samples_mean_near_zero():
    cfg = default_config(1, 1)
    n = 100_000
    z = sample_matrix(cfg, 3, 0, n)
    assert np.all(np.abs(z.mean(axis=0)) < 4 / np.sqrt(n))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**40), st.integers(1, 60), st.integers(1, 59))
def test_batch_partition_invariance(seed, n, cut):
    cut = min(cut, n)
    whole = rng.normal_rows(seed, 0, 0, n, 19)
    parts = np.vstack([rng.normal_rows(seed, 0, 0, cut, 19), rng.normal_rows(seed, 0, cut, n - cut, 19)])
    assert whole.tobytes() == parts.tobytes()


def test_streams_are_independent():
    assert not np.array_equal(rng.normal_rows(1, 0, 0, 4, 5), rng.normal_rows(1, 1, 0, 4, 5))


def test_stream_cursor_matches_rows():
    s = rng.Stream(5, 2)
    a = np.vstack([s.normal(3, 4), s.normal(2, 4)])
    assert a.tobytes() == rng.normal_rows(5, 2, 0, 5, 4).tobytes()


def test_physical_deviation_scaling():
    cfg = default_config(1, 1, peripherals=True)
    z = np.zeros(cfg.variation_dim)
    z[0] = 1.0      # M0 vth0
    z[1] = -2.0     # M0 u0
    z[-4] = 1.0     # sense amp offset
    dev = physical_deviations(cfg, z)
    assert dev.dvth[0, 0, 0] == pytest.approx(0.05 * 0.42)
    assert dev.u0_factor[0, 0, 0] == pytest.approx(0.9)
    assert dev.periph[0, 0] == pytest.approx(0.02)
    with pytest.raises(ValueError, match="dimension"):
        physical_deviations(cfg, np.zeros(cfg.variation_dim - 1))


def test_config_file_roundtrip(tmp_path):
    cfg = dataclasses.replace(default_config(4, 2, peripherals=True), vdd=0.8)
    p = tmp_path / "c.yaml"
    p.write_text(dump_config(cfg))
    back = load_config(p)
    assert back == cfg
    assert back.hash() == cfg.hash()


@pytest.mark.parametrize("patch,field", [({"rows": 0}, "rows"), ({"vdd": -1.0}, "vdd"),
                                         ({"cell": {"w_pd": 0.0}}, "w_pd"),
                                         ({"bogus": 1}, "<root>")])
def test_config_errors_name_the_field(patch, field):
    data = {"rows": 2, "cols": 1, **patch}
    with pytest.raises(ConfigError, match=field):
        config_from_dict(data)


def test_explicit_idle_pattern_length_checked():
    from sramyield.circuit_model import LeakagePolicy

    with pytest.raises(ConfigError, match="idle_pattern"):
        SramArrayConfig(rows=4, cols=1, leakage=LeakagePolicy((0, 1)))


def test_dump_is_yaml():
    assert yaml.safe_load(dump_config(default_config(2, 2)))["rows"] == 2
