"""
Fourier multipliers on the x lattice.

A multiplier is stored as its table of values over the frequency lattice in
FFT order, so composition is table multiplication and application is one
transform round trip.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridSpec, PhaseSpaceField, ScalarField, fft_x, ifft_x, lp_norm
from .symbols import (
    Anisotropy,
    SymbolOnManifold,
    _is_integer,
    _project_or_zero,
    cutoff_theta,
    extend_symbol,
    fourier_power,
    quasi_norm,
    t_gamma_symbol,
)


@dataclass(frozen=True, eq=False)
class MultiplierOp:
    """Diagonal operator in Fourier space with values ``table`` (shape x_shape)."""

    table: np.ndarray
    label: str = "multiplier"

    def __post_init__(self):
        t = np.asarray(self.table, dtype=complex)
        if not np.all(np.isfinite(t)):
            raise ValueError(f"{self.label}: multiplier table must be finite")
        t = t.copy()
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @property
    def sup(self) -> float:
        return float(np.abs(self.table).max())

    def __matmul__(self, other: "MultiplierOp") -> "MultiplierOp":
        return MultiplierOp(self.table * other.table, f"{self.label}@{other.label}")

    def apply_array(self, values: np.ndarray, spec: GridSpec) -> np.ndarray:
        table = self.table
        if values.ndim > spec.dim_x:
            table = table.reshape(table.shape + (1,) * (values.ndim - spec.dim_x))
        return ifft_x(fft_x(values, spec) * table, spec)

    def __call__(self, f):
        return apply(self, f)


def apply(op: MultiplierOp, f):
    """F^-1(table * F f) over the x axes; phase-space fields are treated per y."""
    spec = f.spec
    if op.table.shape != spec.x_shape:
        raise ValueError(f"table shape {op.table.shape} does not match grid {spec.x_shape}")
    return f.with_values(op.apply_array(f.values, spec))


def _nyquist_guard(table: np.ndarray, spec: GridSpec, axes) -> np.ndarray:
    table = table.copy()
    for j in axes:
        table[spec.nyquist_mask(j)] = 0.0
    return table


def _non_even_axes(alpha) -> list[int]:
    return [j for j, a in enumerate(alpha) if not (_is_integer(a) and round(a) % 2 == 0)]


def derivative_table(spec: GridSpec, alpha) -> np.ndarray:
    """(2 pi i xi)^alpha over the lattice, Nyquist rows zeroed on non-even axes."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    if alpha.size != spec.dim_x:
        raise ValueError("alpha needs one entry per x axis")
    if np.any(alpha < 0):
        raise ValueError("orders must be non-negative")
    table = fourier_power(spec.freq_grid(), alpha)
    return _nyquist_guard(table, spec, _non_even_axes(alpha))


def fractional_derivative(f: ScalarField, alpha) -> ScalarField:
    op = MultiplierOp(derivative_table(f.spec.x_spec(), alpha), f"d^{tuple(alpha)}")
    return apply(op, f)


def t_gamma_op(spec: GridSpec, gamma: float, aniso: Anisotropy) -> MultiplierOp:
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return MultiplierOp(t_gamma_symbol(spec.freq_grid(), gamma, aniso), f"T^{gamma}")


def smoothing_T(f: ScalarField, gamma: float, aniso: Anisotropy) -> ScalarField:
    """Apply the symbol (1 - theta) |xi|_beta^-gamma."""
    return apply(t_gamma_op(f.spec.x_spec(), gamma, aniso), f)


def chain_tables(spec: GridSpec, gamma: float, aniso: Anisotropy, j: int):
    """Both sides of d_j^(gamma beta_j) o T^gamma = (1 - theta)(2 pi i pi_j)^(gamma beta_j).

    Returns (composed, direct).  The direct side keeps the (2 pi i)^(gamma beta_j)
    factor so the two tables agree exactly; the same Nyquist rule is applied.
    """
    order = np.zeros(aniso.d)
    order[j] = gamma * aniso.beta[j]
    xi = spec.freq_grid()
    composed = derivative_table(spec, order) * t_gamma_symbol(xi, gamma, aniso)
    eta, origin = _project_or_zero(xi, aniso)
    direct = (1.0 - cutoff_theta(xi, aniso)) * fourier_power(eta, order)
    direct[origin] = 0.0
    direct = _nyquist_guard(direct, spec, _non_even_axes(order))
    return composed, direct


def bessel_table(spec: GridSpec, s: float, aniso: Anisotropy) -> np.ndarray:
    """(1 + |xi|_beta^l)^(s/l)."""
    r = quasi_norm(spec.freq_grid(), aniso)
    return (1.0 + r ** aniso.ell) ** (s / aniso.ell)


def sobolev_norm(f, s: float, aniso: Anisotropy, p: float = 2.0) -> float:
    """L^p norm of the anisotropic Bessel potential of order s."""
    op = MultiplierOp(bessel_table(f.spec.x_spec(), s, aniso), f"bessel^{s}")
    return lp_norm(apply(op, f), p)


def symbol_op(psi: SymbolOnManifold, aniso: Anisotropy, spec: GridSpec) -> MultiplierOp:
    return MultiplierOp(extend_symbol(psi, aniso, spec.x_spec()), psi.label)


def _dealias(values: np.ndarray, spec: GridSpec) -> np.ndarray:
    c = fft_x(values, spec)
    for j in range(spec.dim_x):
        k = np.abs(np.fft.fftfreq(spec.samples[j]) * spec.samples[j])
        keep = k <= spec.samples[j] // 3
        shape = [1] * c.ndim
        shape[j] = keep.size
        c = c * keep.reshape(shape)
    return ifft_x(c, spec)


def commutator(b, psi: SymbolOnManifold, f, aniso: Anisotropy, dealias: bool = False):
    """A(b f) - b A(f) for the multiplier A with symbol psi o pi."""
    spec = f.spec.x_spec()
    op = symbol_op(psi, aniso, spec)
    bv = np.asarray(getattr(b, "values", b))
    if f.values.ndim > spec.dim_x and bv.ndim == spec.dim_x:
        bv = bv.reshape(bv.shape + (1,) * (f.values.ndim - spec.dim_x))
    prod = bv * f.values
    if dealias:
        prod = _dealias(prod, spec)
    return f.with_values(op.apply_array(prod, spec) - bv * op.apply_array(f.values, spec))
