import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdistlab.grid import GridSpec, ScalarField, fft_x, ifft_x, lp_norm
from hdistlab.multipliers import (
    MultiplierOp,
    apply,
    bessel_table,
    chain_tables,
    commutator,
    derivative_table,
    fractional_derivative,
    smoothing_T,
    sobolev_norm,
    symbol_op,
    t_gamma_op,
)
from hdistlab.symbols import Anisotropy, SymbolOnManifold, quasi_norm

SPEC1 = GridSpec.box((64,))
SPEC2 = GridSpec.box((32, 32), (1.0, 2.0))


def random_field(spec, rng, band=None):
    vals = rng.standard_normal(spec.x_shape) + 1j * rng.standard_normal(spec.x_shape)
    if band is not None:
        c = fft_x(vals, spec)
        for j, N in enumerate(spec.x_shape):
            k = np.abs(np.fft.fftfreq(N, 1 / N))
            shape = [1] * spec.dim_x
            shape[j] = N
            c = c * (k <= band).reshape(shape)
        vals = ifft_x(c, spec)
    return ScalarField(spec, vals)


def test_table_must_be_finite():
    with pytest.raises(ValueError):
        MultiplierOp(np.array([1.0, np.inf]))


def test_identity_and_shape_mismatch():
    rng = np.random.default_rng(0)
    f = random_field(SPEC2, rng)
    assert np.allclose(apply(MultiplierOp(np.ones((32, 32))), f).values, f.values, atol=1e-13)
    with pytest.raises(ValueError):
        apply(MultiplierOp(np.ones(8)), f)


def test_plane_waves_are_eigenfunctions():
    rng = np.random.default_rng(1)
    op = MultiplierOp(rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32)))
    X, Y = SPEC2.x_mesh()
    for k in [(1, 2), (-3, 5), (0, -7)]:
        wave = ScalarField(SPEC2, np.exp(2j * np.pi * (k[0] * X + k[1] * Y / 2.0)))
        out = apply(op, wave).values
        assert np.allclose(out, op.table[k] * wave.values, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_l2_contraction_and_linearity(seed):
    rng = np.random.default_rng(seed)
    op = MultiplierOp(np.exp(1j * rng.uniform(0, 6, (32, 32))) * rng.uniform(0, 2, (32, 32)))
    f, g = random_field(SPEC2, rng), random_field(SPEC2, rng)
    assert lp_norm(apply(op, f), 2) <= op.sup * lp_norm(f, 2) * (1 + 1e-12)
    a, b = 0.3 - 1.2j, 2.5
    lhs = apply(op, f * a + g * b).values
    rhs = a * apply(op, f).values + b * apply(op, g).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(rhs))


def test_multipliers_commute():
    rng = np.random.default_rng(2)
    A = MultiplierOp(rng.standard_normal((32, 32)))
    B = MultiplierOp(rng.standard_normal((32, 32)) * 1j)
    f = random_field(SPEC2, rng)
    ab = apply(A, apply(B, f)).values
    ba = apply(B, apply(A, f)).values
    assert np.allclose(ab, ba, atol=1e-12)
    assert np.allclose(apply(A @ B, f).values, ab, atol=1e-12)


def test_first_derivative_of_mode():
    f = ScalarField.from_function(SPEC1, lambda x: np.exp(2j * np.pi * x))
    out = fractional_derivative(f, (1,)).values
    assert np.allclose(out, 2j * np.pi * f.values, atol=1e-11)


def test_derivative_semigroup_on_band_limited_fields():
    rng = np.random.default_rng(3)
    f = random_field(SPEC1, rng, band=20)
    d2 = fractional_derivative(f, (2,)).values
    d11 = fractional_derivative(fractional_derivative(f, (1,)), (1,)).values
    assert np.max(np.abs(d2 - d11)) <= 1e-10 * np.max(np.abs(d2))
    f0 = f - complex(np.mean(f.values))
    half = fractional_derivative(fractional_derivative(f0, (0.5,)), (0.5,)).values
    one = fractional_derivative(f0, (1,)).values
    assert np.max(np.abs(half - one)) <= 1e-10 * np.max(np.abs(one))


def test_mixed_integer_derivative_matches_repeated_first_derivatives():
    rng = np.random.default_rng(4)
    f = random_field(SPEC2, rng, band=10)
    d = fractional_derivative(f, (2, 1)).values
    g = f
    for alpha in [(1, 0), (1, 0), (0, 1)]:
        g = fractional_derivative(g, alpha)
    assert np.max(np.abs(d - g.values)) <= 1e-10 * np.max(np.abs(d))


def test_nyquist_row_dropped_for_odd_orders():
    t = derivative_table(SPEC1, (1,))
    assert t[32] == 0
    assert derivative_table(SPEC1, (2,))[32] != 0
    with pytest.raises(ValueError):
        derivative_table(SPEC1, (-1,))


def test_smoothing_T_low_and_high_modes():
    aniso = Anisotropy((1,))
    low = ScalarField.from_function(SPEC1, lambda x: np.exp(2j * np.pi * x))
    assert np.max(np.abs(smoothing_T(low, 1.0, aniso).values)) < 1e-14
    high = ScalarField.from_function(SPEC1, lambda x: np.exp(2j * np.pi * 5 * x))
    assert np.allclose(smoothing_T(high, 1.5, aniso).values, 5 ** -1.5 * high.values, atol=1e-13)
    with pytest.raises(ValueError):
        t_gamma_op(SPEC1, 0.0, aniso)


@pytest.mark.parametrize("beta", [(1, 1), (1, 2), (2, 3)])
@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
def test_chain_identity_two_paths(beta, gamma):
    aniso = Anisotropy(beta)
    spec = GridSpec.box((32, 32), (1.0, 0.5))
    rng = np.random.default_rng(5)
    for j in range(2):
        composed, direct = chain_tables(spec, gamma, aniso, j)
        assert np.allclose(composed, direct, rtol=0, atol=1e-10 * max(np.abs(direct).max(), 1.0))
        f = random_field(spec, rng)
        a = MultiplierOp(composed).apply_array(f.values, spec)
        b = MultiplierOp(direct).apply_array(f.values, spec)
        assert np.max(np.abs(a - b)) <= 1e-10 * max(np.max(np.abs(b)), 1e-300)


def test_sobolev_norm_examples():
    aniso = Anisotropy((1, 2))
    rng = np.random.default_rng(6)
    f = random_field(SPEC2, rng)
    for p in (1.5, 2.0, 3.0):
        assert sobolev_norm(f, 0.0, aniso, p) == pytest.approx(lp_norm(f, p), rel=1e-12)
    X, Y = SPEC2.x_mesh()
    wave = ScalarField(SPEC2, np.exp(2j * np.pi * (3 * X + 4 * Y / 2.0)))
    r = quasi_norm(np.array([3.0, 2.0]), aniso)
    expected = (1 + r ** aniso.ell) ** (1 / aniso.ell) * lp_norm(wave, 2)
    assert sobolev_norm(wave, 1.0, aniso) == pytest.approx(expected, rel=1e-12)
    assert bessel_table(SPEC2, 0.0, aniso) == pytest.approx(np.ones((32, 32)))


def test_t_gamma_is_bounded_into_sobolev_space():
    aniso = Anisotropy((1, 2))
    rng = np.random.default_rng(7)
    for p in (1.5, 2.0, 3.0):
        ratios = []
        for _ in range(50):
            f = random_field(SPEC2, rng)
            ratios.append(sobolev_norm(smoothing_T(f, 1.0, aniso), 1.0, aniso, p) / lp_norm(f, p))
        assert max(ratios) < 5.0


def test_projected_symbol_lp_ratio_is_bounded():
    aniso = Anisotropy((1, 1))
    psi = SymbolOnManifold(lambda e: e[..., 0] ** 2, "eta1^2")
    op = symbol_op(psi, aniso, SPEC2)
    rng = np.random.default_rng(8)
    for p in (1.5, 2.0, 4.0):
        worst = max(lp_norm(apply(op, f), p) / lp_norm(f, p) for f in (random_field(SPEC2, rng) for _ in range(100)))
        assert worst < 3.0


def test_commutator_trivial_cases():
    aniso = Anisotropy((1, 1))
    rng = np.random.default_rng(9)
    f = random_field(SPEC2, rng)
    psi = SymbolOnManifold(lambda e: e[..., 0], "eta1")
    assert np.max(np.abs(commutator(2.5, psi, f, aniso).values)) < 1e-12
    X, Y = SPEC2.x_mesh()
    b = np.sin(np.pi * X) ** 2 * np.sin(np.pi * Y / 2) ** 2
    const = SymbolOnManifold.constant(1.0)
    f0 = ScalarField(SPEC2, np.exp(2j * np.pi * (4 * X + Y)))
    assert np.max(np.abs(commutator(b, const, f0, aniso).values)) < 1e-12
    assert np.max(np.abs(commutator(b, psi, f0, aniso).values)) > 1e-3


def test_commutator_decays_for_oscillations():
    spec = GridSpec.box((256,))
    aniso = Anisotropy((1,))
    x = spec.coords(0)
    b = np.sin(np.pi * x) ** 4
    chi = np.sin(np.pi * x) ** 8
    psi = SymbolOnManifold(lambda e: np.sign(e[..., 0]), "sign")
    norms = [lp_norm(commutator(b, psi, ScalarField(spec, np.exp(2j * np.pi * n * x) * chi), aniso), 2) for n in (2, 4, 8, 16)]
    # b * chi spans 6 harmonics, so for n > 6 sign(xi) is constant on the spectrum
    assert norms[0] > norms[1] > 1e-6
    assert max(norms[2:]) < 1e-12 * norms[0]
