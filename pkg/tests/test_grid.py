import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdistlab.grid import (
    GridSpec,
    PhaseSpaceField,
    ScalarField,
    SpectralField,
    forward_transform,
    inner,
    inverse_transform,
    lp_norm,
    mixed_norm,
    translate,
)

shapes = st.sampled_from([(16,), (64,), (8, 12), (16, 16), (4, 6, 8)])


def random_field(spec, seed):
    rng = np.random.default_rng(seed)
    return ScalarField(spec, rng.standard_normal(spec.x_shape) + 1j * rng.standard_normal(spec.x_shape))


def test_gridspec_rejects_odd_and_tiny_counts():
    with pytest.raises(ValueError):
        GridSpec.box((33,))
    with pytest.raises(ValueError):
        GridSpec.box((2,))
    with pytest.raises(ValueError):
        GridSpec.box((16,), (-1.0,))


def test_gridspec_split_axes():
    spec = GridSpec.box((8, 16, 4), (1.0, 2.0, 3.0), dim_y=1)
    assert spec.x_shape == (8, 16) and spec.y_shape == (4,)
    assert spec.x_cell == pytest.approx(1 / 8 * 2 / 16)
    assert spec.y_cell == pytest.approx(3 / 4)
    assert spec.x_spec().shape == (8, 16)
    assert spec.y_spec().shape == (4,)
    with pytest.raises(ValueError):
        spec.x_spec().y_spec()


def test_constant_field_has_only_dc():
    spec = GridSpec.box((16,))
    F = forward_transform(ScalarField(spec, np.ones(16, dtype=complex)))
    assert F.coeffs[0] == pytest.approx(1.0)
    assert np.allclose(F.coeffs[1:], 0.0, atol=1e-15)


def test_pure_mode_single_coefficient():
    spec = GridSpec.box((16,))
    f = ScalarField.from_function(spec, lambda x: np.exp(2j * np.pi * 3 * x))
    c = forward_transform(f).coeffs
    assert c[3] == pytest.approx(1.0)
    c[3] = 0
    assert np.abs(c).max() < 1e-14


def test_forward_matches_direct_sum():
    spec = GridSpec.box((64,), (2.0,))
    f = random_field(spec, 3)
    x = spec.coords(0)
    k = np.fft.fftfreq(64, 1 / 64)
    direct = np.exp(-2j * np.pi * np.outer(k, x) / 2.0) @ f.values / 64
    assert np.allclose(forward_transform(f).coeffs, direct, rtol=0, atol=1e-13)


def test_zero_spectrum_and_single_coefficient_inverse():
    spec = GridSpec.box((8, 8), (1.0, 2.0))
    zero = inverse_transform(SpectralField(spec, np.zeros((8, 8), dtype=complex)))
    assert np.all(zero.values == 0)
    c = np.zeros((8, 8), dtype=complex)
    c[2, 1] = 1.0
    wave = inverse_transform(SpectralField(spec, c)).values
    X, Y = spec.x_mesh()
    assert np.allclose(wave, np.exp(2j * np.pi * (2 * X + Y / 2.0)), atol=1e-13)


@settings(max_examples=25, deadline=None)
@given(shapes, st.integers(0, 2**31 - 1))
def test_round_trip_and_plancherel(shape, seed):
    spec = GridSpec.box(shape, tuple(1.0 + 0.5 * i for i in range(len(shape))))
    f = random_field(spec, seed)
    F = forward_transform(f)
    back = inverse_transform(F)
    assert np.max(np.abs(back.values - f.values)) <= 1e-12 * np.max(np.abs(f.values))
    assert abs(F.l2_norm() - lp_norm(f, 2)) <= 1e-12 * lp_norm(f, 2)


def test_lp_norm_trivial_values():
    spec = GridSpec.box((16, 16), (2.0, 3.0))
    one = ScalarField(spec, np.ones((16, 16), dtype=complex))
    assert lp_norm(one, 2) == pytest.approx(np.sqrt(6.0))
    wave = ScalarField.from_function(GridSpec.box((32,)), lambda x: np.exp(2j * np.pi * x))
    assert lp_norm(wave, 2) == pytest.approx(1.0)
    assert lp_norm(wave, np.inf) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        lp_norm(wave, 0.5)


def test_lp_norm_region():
    spec = GridSpec.box((16,))
    one = ScalarField(spec, np.ones(16, dtype=complex))
    assert lp_norm(one, 1, [(0.25, 0.75)]) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        lp_norm(one, 1, [(0.5, 1.5)])


@settings(max_examples=25, deadline=None)
@given(
    st.integers(0, 2**31 - 1),
    st.sampled_from([1.0, 1.5, 2.0, 3.0, np.inf]),
    st.floats(-5, 5, allow_nan=False).filter(lambda c: abs(c) > 1e-3),
)
def test_lp_norm_homogeneous_and_subadditive(seed, p, c):
    spec = GridSpec.box((12, 10))
    f, g = random_field(spec, seed), random_field(spec, seed + 1)
    assert lp_norm(f * c, p) == pytest.approx(abs(c) * lp_norm(f, p), rel=1e-12)
    assert lp_norm(f + g, p) <= (lp_norm(f, p) + lp_norm(g, p)) * (1 + 1e-12)


def test_mixed_norm_separable():
    spec = GridSpec.box((32, 16), (1.0, 2.0), dim_y=1)
    x = spec.coords(0)
    y = spec.coords(1)
    f = 1 + 0.5 * np.cos(2 * np.pi * x)
    g = np.exp(np.sin(np.pi * y))
    u = PhaseSpaceField.tensor(ScalarField(spec, f.astype(complex)), g)
    fx = (np.sum(np.abs(f) ** 4) / 32) ** 0.25
    gy = np.sqrt(np.sum(g ** 2) * 2 / 16)
    assert mixed_norm(u, 4, 2) == pytest.approx(fx * gy, rel=1e-10)


def test_inner_matches_quadrature():
    spec = GridSpec.box((16,), (2.0,))
    f, g = random_field(spec, 1), random_field(spec, 2)
    assert inner(f, g) == pytest.approx(np.sum(f.values * np.conj(g.values)) * 2 / 16)


def test_translate_trivial_cases():
    spec = GridSpec.box((32, 16), (1.0, 2.0))
    f = random_field(spec, 5)
    assert np.allclose(translate(f, (0.0, 0.0)).values, f.values, atol=1e-13)
    assert np.allclose(translate(f, (1.0, 2.0)).values, f.values, atol=1e-12)
    X, Y = spec.x_mesh()
    wave = ScalarField(spec, np.exp(2j * np.pi * (3 * X + Y)))
    h = np.array([0.013, 0.31])
    shifted = translate(wave, h).values
    assert np.allclose(shifted, np.exp(-2j * np.pi * (3 * h[0] + h[1])) * wave.values, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(-2, 2, allow_nan=False), st.floats(-2, 2, allow_nan=False))
def test_translate_composes_additively(seed, h1, h2):
    spec = GridSpec.box((32,))
    f = random_field(spec, seed)
    two = translate(translate(f, h1), h2).values
    one = translate(f, h1 + h2).values
    assert np.max(np.abs(two - one)) <= 1e-12 * np.max(np.abs(f.values)) * 10


def test_phase_space_translate_and_norm():
    spec = GridSpec.box((16, 8), dim_y=1)
    rng = np.random.default_rng(0)
    u = PhaseSpaceField(spec, rng.standard_normal(spec.shape).astype(complex))
    assert lp_norm(translate(u, 1.0), 2) == pytest.approx(lp_norm(u, 2), rel=1e-12)
    assert np.allclose(translate(u, 0.0).values, u.values, atol=1e-13)
