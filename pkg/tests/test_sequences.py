import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdistlab.averaging import prepare_battery, residual_battery, weak_residual
from hdistlab.grid import GridSpec, ScalarField, inner, lp_norm
from hdistlab.profiles import bump, step
from hdistlab.sequences import (
    SequenceFamily,
    band,
    concentration,
    heat_wave,
    oscillation,
    step_tail_closed_form,
    tail_report,
    transport_wave,
    truncate,
)
from hdistlab.symbols import Anisotropy, PrincipalSymbol, Term

LINE = GridSpec.box((512,))


def chi(x):
    return np.sin(np.pi * x) ** 8


def random_field(shape, seed, scale=3.0):
    rng = np.random.default_rng(seed)
    spec = GridSpec.box(shape)
    return ScalarField(spec, scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)))


def test_family_needs_two_indices():
    with pytest.raises(ValueError):
        SequenceFamily(lambda n: None, 2.0, (4,))


def test_oscillation_zero_profile():
    fam = oscillation(LINE, (1,), lambda x: 0 * x, (4, 8))
    assert all(np.all(u.values == 0) for _, u in fam.items())


def test_oscillation_norm_and_weak_null():
    fam = oscillation(GridSpec.box((256, 256)), (1, 2), lambda x, y: chi(x) * chi(y), (4, 8, 16, 32))
    norms = fam.norms(2.0)
    assert np.allclose(norms, norms[0], rtol=1e-12)
    assert fam.bounded_check()[0]
    ok, rows = fam.weak_null_check()
    assert ok and rows.shape == (10, 4)


def test_oscillation_pairing_is_fourier_coefficient():
    prof = np.exp(-((LINE.coords(0) - 0.5) ** 2) / 0.02)
    fam = oscillation(LINE, (1,), lambda x: prof, (2, 4, 8))
    f = ScalarField(LINE, prof.astype(complex))
    sq = np.fft.fft(prof ** 2) / 512
    for n, u in fam.items():
        assert inner(u, f) == pytest.approx(sq[-n], abs=1e-14)


def test_oscillation_nyquist_guard():
    with pytest.raises(ValueError, match="Nyquist"):
        oscillation(GridSpec.box((64,)), (1,), chi, (8, 32))
    with pytest.raises(ValueError):
        oscillation(LINE, (0,), chi)


def test_concentration_norm_is_constant():
    fam = concentration(LINE, bump, 2.0, (0.5,), 1.0, (4, 8, 16, 32))
    norms = fam.norms()
    assert np.allclose(norms, norms[0], rtol=1e-6)
    ok, _ = fam.weak_null_check()
    assert ok


def test_concentration_rejects_wrapping_support():
    with pytest.raises(ValueError, match="wraps"):
        concentration(LINE, bump, 2.0, (0.1,), 1.0, (4, 8))


@pytest.mark.parametrize("l", [1.5, 2.5, 4.5, 7.0])
def test_concentration_step_tail_closed_form(l):
    spec = GridSpec.box((4096,))
    fam = concentration(spec, lambda s: step(s), 2.0, (0.25,), 1.0, (4, 8, 16, 32, 64))
    rep = tail_report(fam, [l])
    expected = max(step_tail_closed_form(n, l, 2.0) for n in fam.indices)
    assert rep.sup_tail[0] == pytest.approx(expected, rel=0.02, abs=1e-15)
    assert rep.dominated


def test_tail_report_bounded_family_and_monotone():
    fam = oscillation(LINE, (1,), chi, (4, 8))
    rep = tail_report(fam, [0.5, 1.0, 2.0], p=2.0)
    assert rep.monotone and rep.dominated
    assert rep.sup_tail[1] == 0 and rep.sup_tail[2] == 0
    with pytest.raises(ValueError):
        tail_report(fam, [1.0], p=1.0)


def test_truncate_examples():
    f = random_field((16,), 0, scale=0.1)
    assert np.array_equal(truncate(f, 10.0).values, f.values)
    three = ScalarField(GridSpec.box((8,)), np.full(8, 3.0 + 0j))
    assert np.all(truncate(three, 2.0).values == 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.1, 5.0), st.floats(0.1, 5.0))
def test_truncation_properties(seed, l1, l2):
    l1, l2 = sorted((l1, l2))
    f = random_field((32,), seed)
    t = truncate(f, l1)
    assert np.all(np.abs(t.values) <= np.abs(f.values))
    assert np.all(np.abs(truncate(truncate(f, l2), l1).values) <= np.abs(t.values))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_bands_partition_field(seed):
    f = random_field((64,), seed)
    top = int(np.ceil(np.abs(f.values).max()))
    parts = [band(f, l).values for l in range(top + 1)]
    assert np.array_equal(np.sum(parts, axis=0), f.values)
    support = np.array([p != 0 for p in parts])
    assert np.all(support.sum(axis=0) <= 1)
    for l, p in enumerate(parts):
        assert np.abs(p).max() <= l + 1


def test_band_small_field_and_ties():
    spec = GridSpec.box((4,))
    f = ScalarField(spec, np.array([0.5, 1.0, 2.0, 0.0], dtype=complex))
    assert np.array_equal(band(f, 0).values, np.array([0.5, 1.0, 0, 0]))
    assert np.array_equal(band(f, 1).values, np.array([0, 0, 2.0, 0]))
    with pytest.raises(ValueError):
        band(f, -1)


def transport_spec():
    return GridSpec.box((64, 48, 16), dim_y=1)


def transport_operator(a, spec):
    return PrincipalSymbol((Term((1, 0)), Term((0, 1), np.asarray(a).reshape(1, 1, -1))), Anisotropy((1, 1)))


def test_transport_wave_static_coefficient():
    spec = transport_spec()
    fam = transport_wave(spec, np.zeros(16), indices=(2, 4))
    t, x, _ = spec.mesh()
    u = fam(4).values
    expected = np.exp(2j * np.pi * 4 * x) * np.sin(np.pi * t) ** 8
    assert np.allclose(u, np.broadcast_to(expected, spec.shape), atol=1e-13)


def matched_test_function(spec, n, a):
    t, x, y = spec.mesh()
    phase = np.exp(2j * np.pi * n * (x - a.reshape(1, 1, -1) * t))
    return np.sin(np.pi * t) ** 6 * phase * np.exp(-((y - 0.5) ** 2) / 0.02)


def test_transport_wave_solves_equation():
    spec = transport_spec()
    a = 2 * spec.coords(2) - 1
    P = transport_operator(a, spec)
    prepared = prepare_battery(spec, P, residual_battery(spec, seed=1))
    plain = transport_wave(spec, a, indices=(2, 4), windowed=False)
    windowed = transport_wave(spec, a, indices=(2, 4))
    for n in (2, 4):
        assert weak_residual(plain(n), P, None, prepared=prepared) < 1e-10
        assert weak_residual(windowed(n), P, windowed.source(n).field, prepared=prepared) < 1e-10
        assert weak_residual(windowed(n), transport_operator(a + 0.5, spec), windowed.source(n).field, battery=[matched_test_function(spec, n, a)]) > 0.1


def test_transport_wave_norm_is_stable():
    spec = transport_spec()
    a = spec.coords(2)
    norms = transport_wave(spec, a, indices=(2, 4, 6)).norms(2.0)
    assert np.ptp(norms) / norms.max() < 0.01


def test_transport_wave_guards():
    spec = transport_spec()
    with pytest.raises(ValueError, match="Nyquist"):
        transport_wave(spec, np.ones(16), indices=(4, 30))
    with pytest.raises(ValueError):
        transport_wave(GridSpec.box((16, 16)), np.ones(1))


def test_heat_wave_is_l2_family():
    spec = GridSpec.box((64, 64))
    fam = heat_wave(spec, kappa=1e-3, indices=(2, 4, 8))
    assert fam.p_bound == 2.0
    assert np.all(np.diff(fam.norms()) < 0)
    with pytest.raises(ValueError):
        heat_wave(spec, indices=(40,))
