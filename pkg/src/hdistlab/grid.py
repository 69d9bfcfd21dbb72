"""
Periodic sampled fields on a box and their discrete Fourier transforms.

The box is ``[0, L_1) x ... x [0, L_{d+m})``: the first ``dim_x`` axes are
the physical variable ``x`` (time counts as an ``x`` axis), the remaining
``dim_y`` axes are the velocity variable ``y``.

Conventions
-----------
    forward:  c_k = (1/prod N) * sum_x f(x) exp(-2 pi i k.x / L)
    inverse:  f(x) = sum_k c_k exp(2 pi i k.x / L)
    frequencies are physical, xi_i = k_i / L_i

With these, ``integral |f|^2 dx`` (uniform trapezoid weight prod L/N) equals
``prod L * sum |c_k|^2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Sampling of the periodic box for ``d`` x-axes and ``m`` y-axes."""

    dim_x: int
    dim_y: int
    extent: tuple[float, ...]
    samples: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "extent", tuple(float(v) for v in self.extent))
        object.__setattr__(self, "samples", tuple(int(v) for v in self.samples))
        if self.dim_x < 1 or self.dim_y < 0:
            raise ValueError("need dim_x >= 1 and dim_y >= 0")
        if len(self.extent) != self.ndim or len(self.samples) != self.ndim:
            raise ValueError("extent and samples must have dim_x + dim_y entries")
        if any(L <= 0 for L in self.extent):
            raise ValueError("extents must be positive")
        if any(N < 4 or N % 2 for N in self.samples):
            raise ValueError("sample counts must be even and >= 4")

    @classmethod
    def box(cls, samples, extent=None, dim_y=0) -> "GridSpec":
        samples = tuple(samples)
        if extent is None:
            extent = (1.0,) * len(samples)
        return cls(len(samples) - dim_y, dim_y, tuple(extent), samples)

    @property
    def ndim(self) -> int:
        return self.dim_x + self.dim_y

    @property
    def shape(self) -> tuple[int, ...]:
        return self.samples

    @property
    def x_shape(self) -> tuple[int, ...]:
        return self.samples[: self.dim_x]

    @property
    def y_shape(self) -> tuple[int, ...]:
        return self.samples[self.dim_x:]

    @property
    def x_extent(self) -> tuple[float, ...]:
        return self.extent[: self.dim_x]

    @property
    def y_extent(self) -> tuple[float, ...]:
        return self.extent[self.dim_x:]

    @property
    def x_cell(self) -> float:
        return float(np.prod([L / N for L, N in zip(self.x_extent, self.x_shape)]))

    @property
    def y_cell(self) -> float:
        return float(np.prod([L / N for L, N in zip(self.y_extent, self.y_shape)]))

    def x_spec(self) -> "GridSpec":
        """The same grid with the velocity axes dropped."""
        return GridSpec(self.dim_x, 0, self.x_extent, self.x_shape)

    def y_spec(self) -> "GridSpec":
        if self.dim_y == 0:
            raise ValueError("grid has no y axes")
        return GridSpec(self.dim_y, 0, self.y_extent, self.y_shape)

    def coords(self, axis: int) -> np.ndarray:
        L, N = self.extent[axis], self.samples[axis]
        return np.arange(N) * (L / N)

    def mesh(self, axes: Sequence[int] | None = None) -> list[np.ndarray]:
        """Sparse (broadcastable) coordinate arrays over ``axes`` (default all)."""
        axes = range(self.ndim) if axes is None else axes
        axes = list(axes)
        out = []
        for pos, ax in enumerate(axes):
            shape = [1] * len(axes)
            shape[pos] = self.samples[ax]
            out.append(self.coords(ax).reshape(shape))
        return out

    def x_mesh(self) -> list[np.ndarray]:
        return self.mesh(range(self.dim_x))

    def phase_mesh(self) -> list[np.ndarray]:
        return self.mesh()

    def frequencies(self, axis: int) -> np.ndarray:
        """Physical frequencies k/L in FFT order, k in [-N/2, N/2)."""
        L, N = self.extent[axis], self.samples[axis]
        return np.fft.fftfreq(N, d=L / N)

    def freq_grid(self) -> np.ndarray:
        """Dense array of shape ``x_shape + (d,)`` holding xi = k/L."""
        ks = np.meshgrid(*[self.frequencies(i) for i in range(self.dim_x)], indexing="ij")
        return np.stack(ks, axis=-1)

    def nyquist_mask(self, axis: int) -> np.ndarray:
        """Boolean mask over the x lattice, true on the Nyquist row of ``axis``."""
        N = self.samples[axis]
        idx = np.zeros(N, dtype=bool)
        idx[N // 2] = True
        shape = [1] * self.dim_x
        shape[axis] = N
        return np.broadcast_to(idx.reshape(shape), self.x_shape)


class _Field:
    spec: GridSpec
    values: np.ndarray

    def _check(self, shape):
        vals = np.asarray(self.values, dtype=complex)
        vals = np.broadcast_to(vals, shape).copy() if vals.shape != tuple(shape) else vals
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def with_values(self, values):
        return type(self)(self.spec, values)

    def conj(self):
        return self.with_values(np.conj(self.values))

    def __add__(self, other):
        return self.with_values(self.values + _raw(other))

    def __sub__(self, other):
        return self.with_values(self.values - _raw(other))

    def __mul__(self, other):
        return self.with_values(self.values * _raw(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    def __abs__(self):
        return np.abs(self.values)


def _raw(obj):
    return obj.values if isinstance(obj, _Field) else obj


@dataclass(frozen=True, eq=False)
class ScalarField(_Field):
    """Complex samples on the x grid."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self._check(self.spec.x_shape)

    @classmethod
    def from_function(cls, spec: GridSpec, func: Callable) -> "ScalarField":
        return cls(spec, func(*spec.x_mesh()))

    @classmethod
    def zeros(cls, spec: GridSpec) -> "ScalarField":
        return cls(spec, np.zeros(spec.x_shape, dtype=complex))


@dataclass(frozen=True, eq=False)
class PhaseSpaceField(_Field):
    """Complex samples on the full (x, y) grid."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self._check(self.spec.shape)

    @classmethod
    def from_function(cls, spec: GridSpec, func: Callable) -> "PhaseSpaceField":
        return cls(spec, func(*spec.phase_mesh()))

    @classmethod
    def zeros(cls, spec: GridSpec) -> "PhaseSpaceField":
        return cls(spec, np.zeros(spec.shape, dtype=complex))

    @classmethod
    def tensor(cls, f: ScalarField, g: np.ndarray | ScalarField) -> "PhaseSpaceField":
        """f(x) g(y); ``g`` is sampled on the y grid."""
        spec = f.spec
        gv = np.asarray(_raw(g)).reshape((1,) * spec.dim_x + spec.y_shape)
        fv = f.values.reshape(spec.x_shape + (1,) * spec.dim_y)
        return cls(spec, fv * gv)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients on the x lattice, FFT ordering."""

    spec: GridSpec
    coeffs: np.ndarray

    def l2_norm(self) -> float:
        return float(np.sqrt(np.prod(self.spec.x_extent) * np.sum(np.abs(self.coeffs) ** 2)))


def _x_axes(spec: GridSpec) -> tuple[int, ...]:
    return tuple(range(spec.dim_x))


def fft_x(values: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Normalized forward transform over the x axes of a (possibly phase-space) array."""
    return np.fft.fftn(values, axes=_x_axes(spec)) / np.prod(spec.x_shape)


def ifft_x(coeffs: np.ndarray, spec: GridSpec) -> np.ndarray:
    return np.fft.ifftn(coeffs, axes=_x_axes(spec)) * np.prod(spec.x_shape)


def forward_transform(f: ScalarField) -> SpectralField:
    spec = f.spec.x_spec()
    return SpectralField(f.spec, fft_x(f.values, spec))


def inverse_transform(F: SpectralField) -> ScalarField:
    return ScalarField(F.spec, ifft_x(F.coeffs, F.spec.x_spec()))


def _cell_and_axes(f) -> float:
    if isinstance(f, PhaseSpaceField):
        return f.spec.x_cell * (f.spec.y_cell if f.spec.dim_y else 1.0)
    return f.spec.x_cell


def _region_mask(f, region) -> np.ndarray | None:
    if region is None:
        return None
    spec = f.spec
    naxes = f.values.ndim
    if len(region) != naxes:
        raise ValueError("region needs one (lo, hi) pair per field axis")
    mask = np.ones(f.values.shape, dtype=bool)
    for ax, bounds in enumerate(region):
        if bounds is None:
            continue
        lo, hi = bounds
        if lo < 0 or hi > spec.extent[ax] or lo >= hi:
            raise ValueError("region must lie inside the box")
        c = spec.coords(ax)
        sel = (c >= lo) & (c < hi)
        shape = [1] * naxes
        shape[ax] = c.size
        mask &= sel.reshape(shape)
    return mask


def lp_norm(f, p: float, region=None) -> float:
    """L^p norm by uniform-weight periodic quadrature; ``p = np.inf`` gives the max."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    a = np.abs(f.values)
    mask = _region_mask(f, region)
    if mask is not None:
        a = a[mask]
    if a.size == 0:
        return 0.0
    if np.isinf(p):
        return float(a.max())
    return float((_cell_and_axes(f) * np.sum(a ** p)) ** (1.0 / p))


def mixed_norm(f: PhaseSpaceField, p_x: float, p_y: float) -> float:
    """The L^{p_y}_y L^{p_x}_x norm: inner norm over x for each y."""
    for p in (p_x, p_y):
        if not p >= 1:
            raise ValueError(f"exponents must be >= 1, got {p}")
    spec = f.spec
    a = np.abs(f.values)
    xa = _x_axes(spec)
    if np.isinf(p_x):
        inner = a.max(axis=xa)
    else:
        inner = (spec.x_cell * np.sum(a ** p_x, axis=xa)) ** (1.0 / p_x)
    if spec.dim_y == 0:
        return float(inner)
    if np.isinf(p_y):
        return float(inner.max())
    return float((spec.y_cell * np.sum(inner ** p_y)) ** (1.0 / p_y))


def inner(f, g) -> complex:
    """Quadrature of f * conj(g) over the field's axes."""
    return complex(_cell_and_axes(f) * np.sum(f.values * np.conj(_raw(g))))


def translate(f, h) -> ScalarField:
    """Spectral shift f(x - h) along the x axes; exact for band-limited fields."""
    spec = f.spec
    h = np.atleast_1d(np.asarray(h, dtype=float))
    if h.size != spec.dim_x:
        raise ValueError("shift needs one entry per x axis")
    xi = spec.freq_grid()
    phase = np.exp(-2j * np.pi * (xi @ h))
    if isinstance(f, PhaseSpaceField):
        phase = phase.reshape(spec.x_shape + (1,) * spec.dim_y)
    out = ifft_x(fft_x(f.values, spec) * phase, spec)
    return f.with_values(out)
