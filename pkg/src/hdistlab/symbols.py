"""
Anisotropic frequency geometry and symbols.

For a homogeneity vector ``beta`` the quasi-norm is

    |xi|_beta = (sum_i |xi_i|^(l beta_i))^(1/l)

and the projection onto the level set ``P = {|xi|_beta = 1}`` is
``pi(xi)_i = xi_i |xi|_beta^(-1/beta_i)``.  Under the anisotropic dilation
``xi_i -> lam^(1/beta_i) xi_i`` the quasi-norm scales by ``lam`` and ``pi`` is
invariant.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Sequence

import numpy as np

from .grid import GridSpec
from .profiles import smooth_step

_TOL = 1e-12


class InvalidAnisotropy(ValueError):
    """A term's weighted order exceeds 1, so beta is not a homogeneity of the operator."""


def _is_even_integer(v: float) -> bool:
    r = round(v)
    return abs(v - r) < 1e-12 and r % 2 == 0


def _is_integer(v: float) -> bool:
    return abs(v - round(v)) < 1e-12


@dataclass(frozen=True)
class Anisotropy:
    beta: tuple[float, ...]
    ell: int = field(init=False)

    def __post_init__(self):
        beta = tuple(float(b) for b in np.atleast_1d(self.beta))
        if not beta or any(b <= 0 for b in beta):
            raise ValueError("beta must be a non-empty vector of positive reals")
        object.__setattr__(self, "beta", beta)
        d = len(beta)
        ell = 1
        while not all(ell * b > d or _is_even_integer(ell * b) for b in beta):
            ell += 1
        object.__setattr__(self, "ell", ell)

    @classmethod
    def isotropic(cls, d: int) -> "Anisotropy":
        return cls((1.0,) * d)

    @property
    def d(self) -> int:
        return len(self.beta)

    @property
    def powers(self) -> np.ndarray:
        """The exponents l * beta_i."""
        return self.ell * np.asarray(self.beta)


def _as_xi(xi, aniso: Anisotropy) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != aniso.d:
        raise ValueError(f"last axis of xi must have length {aniso.d}")
    return xi


def quasi_norm(xi, aniso: Anisotropy) -> np.ndarray:
    xi = _as_xi(xi, aniso)
    return np.sum(np.abs(xi) ** aniso.powers, axis=-1) ** (1.0 / aniso.ell)


def dilate(xi, lam, aniso: Anisotropy) -> np.ndarray:
    """Anisotropic dilation xi_i -> lam^(1/beta_i) xi_i."""
    xi = _as_xi(xi, aniso)
    lam = np.asarray(lam, dtype=float)[..., None]
    return xi * lam ** (1.0 / np.asarray(aniso.beta))


def project(xi, aniso: Anisotropy) -> np.ndarray:
    xi = _as_xi(xi, aniso)
    r = quasi_norm(xi, aniso)
    if np.any(r == 0):
        raise ValueError("cannot project xi = 0 onto the manifold")
    return xi * r[..., None] ** (-1.0 / np.asarray(aniso.beta))


def _project_or_zero(xi, aniso):
    """Projection with the origin mapped to the origin (table conventions)."""
    r = quasi_norm(xi, aniso)
    safe = np.where(r == 0, 1.0, r)
    return xi * safe[..., None] ** (-1.0 / np.asarray(aniso.beta)), r == 0


def cutoff_theta(xi, aniso: Anisotropy) -> np.ndarray:
    """Smooth cutoff equal to 1 on |xi|_beta <= 1 and 0 on |xi|_beta >= 2."""
    return smooth_step(quasi_norm(xi, aniso))


def fourier_power(xi, alpha) -> np.ndarray:
    """(2 pi i xi)^alpha, componentwise over the last axis and multiplied.

    Fractional powers use |2 pi xi|^a exp(i a pi/2 sgn xi); integer powers are
    evaluated exactly.
    """
    xi = np.asarray(xi, dtype=float)
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    out = np.ones(xi.shape[:-1], dtype=complex)
    for j, a in enumerate(alpha):
        if a == 0:
            continue
        x = xi[..., j]
        if _is_integer(a):
            out = out * (2j * np.pi * x) ** int(round(a))
        else:
            out = out * np.abs(2 * np.pi * x) ** a * np.exp(0.5j * np.pi * a * np.sign(x))
    return out


def t_gamma_symbol(xi, gamma: float, aniso: Anisotropy) -> np.ndarray:
    """(1 - theta(xi)) / |xi|_beta^gamma, zero on the unit quasi-ball."""
    r = quasi_norm(xi, aniso)
    out = np.zeros(r.shape)
    far = r > 1
    out[far] = (1.0 - smooth_step(r[far])) / r[far] ** gamma
    return out


def manifold_samples(aniso: Anisotropy, count: int = 256) -> np.ndarray:
    """Points of P obtained by projecting a uniform lattice on the unit sphere."""
    d = aniso.d
    if d == 1:
        pts = np.array([[-1.0], [1.0]])
    elif d == 2:
        th = 2 * np.pi * np.arange(count) / count
        pts = np.stack([np.cos(th), np.sin(th)], axis=-1)
    elif d == 3:
        i = np.arange(count) + 0.5
        z = 1 - 2 * i / count
        phi = np.pi * (1 + 5 ** 0.5) * i
        rr = np.sqrt(1 - z ** 2)
        pts = np.stack([rr * np.cos(phi), rr * np.sin(phi), z], axis=-1)
    else:
        from scipy.stats import norm, qmc

        u = qmc.Halton(d, scramble=False).random(count + 1)[1:]
        pts = norm.ppf(u)
        pts /= np.linalg.norm(pts, axis=-1, keepdims=True)
    return project(pts, aniso)


@dataclass(frozen=True)
class SymbolOnManifold:
    """A function on P, evaluated on points of shape (..., d)."""

    func: Callable[[np.ndarray], np.ndarray]
    label: str = "psi"

    def __call__(self, eta) -> np.ndarray:
        eta = np.asarray(eta, dtype=float)
        return np.array(np.broadcast_to(self.func(eta), eta.shape[:-1]), dtype=complex)

    @classmethod
    def constant(cls, value: complex = 1.0) -> "SymbolOnManifold":
        return cls(lambda eta: np.full(eta.shape[:-1], value, dtype=complex), f"const({value})")

    def extended(self, aniso: Anisotropy) -> Callable[[np.ndarray], np.ndarray]:
        """The 0-homogeneous extension psi o pi to R^d minus the origin."""
        return lambda xi: self(project(xi, aniso))

    def cd_norm_estimate(self, aniso: Anisotropy, samples: int = 256, step: float = 1e-3) -> float:
        """Sampled sup over P of |d^a (psi o pi)| for |a| <= d (ambient derivatives)."""
        pts = manifold_samples(aniso, samples)
        ext = self.extended(aniso)
        h = np.full(aniso.d, step)
        best = 0.0
        for a in _multi_indices(aniso.d, aniso.d):
            deriv = _central_difference(ext, pts, a, h[None, :])
            best = max(best, float(np.max(np.abs(deriv))))
        return best

    def __add__(self, other: "SymbolOnManifold") -> "SymbolOnManifold":
        return SymbolOnManifold(lambda eta: self(eta) + other(eta), f"{self.label}+{other.label}")

    def __sub__(self, other: "SymbolOnManifold") -> "SymbolOnManifold":
        return SymbolOnManifold(lambda eta: self(eta) - other(eta), f"{self.label}-{other.label}")

    def scaled(self, c: complex) -> "SymbolOnManifold":
        return SymbolOnManifold(lambda eta: c * self(eta), f"{c}*{self.label}")

    def times(self, func: Callable[[np.ndarray], np.ndarray], label: str = "") -> "SymbolOnManifold":
        return SymbolOnManifold(lambda eta: self(eta) * func(eta), label or self.label)


def extend_symbol(psi: SymbolOnManifold, aniso: Anisotropy, spec: GridSpec) -> np.ndarray:
    """Table of psi(pi(k/L)) over the x lattice (FFT order), 0 at k = 0."""
    xi = spec.freq_grid()
    eta, origin = _project_or_zero(xi, aniso)
    table = psi(eta)
    table[origin] = 0.0
    return table


def _multi_indices(d: int, order: int):
    for a in itertools.product(range(order + 1), repeat=d):
        if sum(a) <= order:
            yield a


def _stencil(k: int):
    """Offsets (in steps) and weights of the central k-th difference."""
    return [(k / 2.0 - j, (-1) ** j * comb(k, j)) for j in range(k + 1)]


def _central_difference(func, pts, alpha, h):
    """d^alpha func at pts with per-point, per-axis steps h (same shape as pts)."""
    stencils = [_stencil(k) for k in alpha]
    total = np.zeros(pts.shape[:-1], dtype=complex)
    for combo in itertools.product(*stencils):
        offs = np.array([c[0] for c in combo])
        w = np.prod([c[1] for c in combo])
        total = total + w * func(pts + offs * h)
    denom = np.prod(h ** np.asarray(alpha, dtype=float), axis=-1)
    return total / denom


@dataclass(frozen=True)
class MarcinkiewiczReport:
    constant: float
    level_sups: tuple[float, ...]
    certified: bool
    reason: str = ""


def dyadic_samples(
    aniso: Anisotropy,
    level: int = 0,
    lo: float = -8,
    hi: float = 8,
    radial_spacing: float = 1 / 32,
    angular: int = 128,
) -> np.ndarray:
    """Points xi = dilate(eta, r) with 2^lo <= r = |xi|_beta <= 2^hi.

    r is log-spaced (``radial_spacing * 2^-level`` in log2 r).  The directions
    eta in P are a uniform lattice of ``angular * 2^level`` points plus a
    sub-lattice pushed towards each coordinate hyperplane by factors
    2^-1 ... 2^-depth, depth = 12 + 4 * level, so finer levels probe closer
    to the hyperplanes.
    """
    depth = 12 + 4 * level
    ds = radial_spacing * 2.0 ** -level
    radii = 2.0 ** np.arange(lo, hi + ds / 2, ds)
    dirs = [manifold_samples(aniso, angular * 2 ** level)]
    if aniso.d > 1:
        sub = manifold_samples(aniso, 16)
        for i in range(aniso.d):
            for j in range(1, depth + 1):
                pushed = sub.copy()
                pushed[:, i] *= 2.0 ** -j
                dirs.append(project(pushed, aniso))
    eta = np.concatenate(dirs, axis=0)
    pts = dilate(eta[None, :, :], radii[:, None], aniso)
    pts = pts.reshape(-1, aniso.d)
    return pts[np.all(pts != 0, axis=-1)]


def marcinkiewicz_sup(
    symbol: Callable[[np.ndarray], np.ndarray],
    aniso: Anisotropy,
    order_cap: int | None = None,
    levels: int = 2,
    rel_step: float = 1e-3,
    tol: float = 0.05,
) -> MarcinkiewiczReport:
    """Sampled sup of |xi^a d^a m(xi)|, |a| <= order_cap, over dyadic annuli.

    ``symbol`` takes points of shape (..., d).  Derivatives are central
    differences with step ``rel_step * |xi_i|`` on axis i, halved per level.
    Certification requires all levels finite and agreeing within ``tol``.
    """
    order = aniso.d if order_cap is None else order_cap
    sups = []
    for lev in range(levels):
        pts = dyadic_samples(aniso, lev)
        eps = rel_step * 2.0 ** -lev
        h = eps * np.abs(pts)
        best = 0.0
        for a in _multi_indices(aniso.d, order):
            deriv = _central_difference(symbol, pts, a, h)
            val = np.abs(np.prod(pts ** np.asarray(a, dtype=float), axis=-1) * deriv)
            if not np.all(np.isfinite(val)):
                best = np.inf
                break
            best = max(best, float(val.max()))
        sups.append(best)
    if not np.all(np.isfinite(sups)):
        return MarcinkiewiczReport(np.inf, tuple(sups), False, "non-finite derivative samples")
    base = max(sups[0], 1e-300)
    drift = max(abs(s - sups[0]) for s in sups) / base
    if drift > tol:
        return MarcinkiewiczReport(max(sups), tuple(sups), False, f"sup grows under refinement ({drift:.3g})")
    return MarcinkiewiczReport(max(sups), tuple(sups), True)


@dataclass(frozen=True)
class Term:
    """a(x, y) * d^alpha; ``coeff`` is a scalar or an array broadcastable to the (x, y) grid."""

    alpha: tuple[float, ...]
    coeff: object = 1.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(a) for a in np.atleast_1d(self.alpha)))
        object.__setattr__(self, "coeff", np.asarray(self.coeff, dtype=complex))

    def weight(self, aniso: Anisotropy) -> float:
        return float(sum(a / b for a, b in zip(self.alpha, aniso.beta)))


def classify_leading(terms: Sequence[Term], aniso: Anisotropy) -> tuple[int, ...]:
    leading = []
    for k, t in enumerate(terms):
        if len(t.alpha) != aniso.d:
            raise ValueError(f"term {k}: alpha has length {len(t.alpha)}, expected {aniso.d}")
        w = t.weight(aniso)
        if w > 1 + _TOL:
            raise InvalidAnisotropy(f"invalid anisotropy: term {k} has weighted order {w:.6g} > 1")
        if abs(w - 1) <= _TOL:
            leading.append(k)
    return tuple(leading)


@dataclass(frozen=True)
class PrincipalSymbol:
    """An operator sum_k d^alpha_k (a_k u) and its leading part."""

    terms: tuple[Term, ...]
    aniso: Anisotropy
    leading: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        terms = tuple(self.terms)
        object.__setattr__(self, "terms", terms)
        lead = classify_leading(terms, self.aniso)
        if not lead:
            raise ValueError("operator has no leading term for this anisotropy")
        d = self.aniso.d
        for k in lead:
            for a in terms[k].alpha:
                if not (_is_integer(a) or a >= d):
                    raise ValueError(
                        f"term {k}: leading order {a} must be an integer or at least d = {d}"
                    )
        object.__setattr__(self, "leading", lead)

    @property
    def lower(self) -> tuple[int, ...]:
        return tuple(k for k in range(len(self.terms)) if k not in self.leading)

    def coeff_shape(self) -> tuple[int, ...]:
        return np.broadcast_shapes(*(self.terms[k].coeff.shape for k in range(len(self.terms))))

    def evaluate(self, xi, terms: Sequence[int] | None = None) -> np.ndarray:
        """Values over the (broadcast) coefficient grid; shape coeff_shape + xi.shape[:-1]."""
        xi = _as_xi(xi, self.aniso)
        idx = self.leading if terms is None else terms
        base = np.broadcast_shapes(*(self.terms[k].coeff.shape for k in idx))
        extra = xi.shape[:-1]
        out = np.zeros(base + extra, dtype=complex)
        for k in idx:
            t = self.terms[k]
            c = np.broadcast_to(t.coeff, base).reshape(base + (1,) * len(extra))
            out = out + c * fourier_power(xi, t.alpha)
        return out

    def with_terms(self, terms: Sequence[Term]) -> "PrincipalSymbol":
        return PrincipalSymbol(tuple(terms), self.aniso)


def evaluate_principal(A: PrincipalSymbol, xi, point: tuple[int, ...] | None = None):
    """A(x, y, xi) summed over leading terms; at one (x, y) grid index ``point`` if given."""
    vals = A.evaluate(xi)
    if point is None:
        return vals
    base = np.broadcast_shapes(*(A.terms[k].coeff.shape for k in A.leading))
    if base:
        if len(point) != len(base):
            raise ValueError("point must index every coefficient axis")
        vals = vals[tuple(0 if n == 1 else i for i, n in zip(point, base))]
    return complex(vals) if np.ndim(vals) == 0 else vals


@dataclass(frozen=True)
class DegeneracyReport:
    min_abs_rndc: float
    kingnl_violation_measure: float
    max_abs: float
    tol_zero: float
    kingnl_tol: float = 0.1

    @property
    def rndc_holds(self) -> bool:
        return self.min_abs_rndc > self.tol_zero

    @property
    def kingnl_holds(self) -> bool:
        return self.kingnl_violation_measure <= self.kingnl_tol

    def as_dict(self) -> dict:
        return {
            "min_abs_rndc": self.min_abs_rndc,
            "kingnl_violation_measure": self.kingnl_violation_measure,
            "max_abs": self.max_abs,
            "tol_zero": self.tol_zero,
            "rndc_holds": self.rndc_holds,
            "kingnl_holds": self.kingnl_holds,
        }


def _scan_points(A: PrincipalSymbol, manifold_count: int, xi_samples) -> np.ndarray:
    pts = manifold_samples(A.aniso, manifold_count)
    if xi_samples is not None:
        extra = project(np.atleast_2d(np.asarray(xi_samples, dtype=float)), A.aniso)
        pts = np.concatenate([pts, extra], axis=0)
    return pts


def degeneracy_scan(
    A: PrincipalSymbol,
    manifold_samples: int = 256,
    xi_samples=None,
    kingnl_tol: float = 0.1,
) -> DegeneracyReport:
    """Sampled check of both non-degeneracy conditions.

    ``xi_samples`` adds explicit directions (projected onto P) to the lattice.
    Coefficient axes beyond the first ``d`` are treated as y axes.
    """
    pts = _scan_points(A, manifold_samples, xi_samples)
    raw = A.evaluate(pts)
    vals = np.abs(raw)
    vmax = float(vals.max())
    tol = 1e-10 * vmax
    d = A.aniso.d
    nd = vals.ndim - 1
    y_axes = tuple(ax for ax in range(d, nd) if raw.shape[ax] > 1)
    zero = vals < tol
    if y_axes:
        frac = zero.mean(axis=y_axes)
    else:
        frac = zero.astype(float)
    vmin = float(vals.min())
    for ax in y_axes:
        vmin = min(vmin, _segment_min(raw, ax))
    return DegeneracyReport(vmin, float(frac.max()), vmax, tol, kingnl_tol)


def _segment_min(raw: np.ndarray, axis: int) -> float:
    """Smallest |A| on the segments joining neighbouring y samples.

    Coefficients are continuous in y, so a zero between two grid values is
    located by linear interpolation rather than missed.
    """
    a = np.moveaxis(raw, axis, 0)
    lo, hi = a[:-1], a[1:]
    step = hi - lo
    den = np.abs(step) ** 2
    s = np.clip(-np.real(np.conj(lo) * step) / np.where(den > 0, den, 1.0), 0.0, 1.0)
    return float(np.abs(lo + s * step).min())


def delta_regularizer_gap(A: PrincipalSymbol, delta: float, manifold_samples: int = 256, xi_samples=None) -> float:
    """sup |1 - |A|^2/(|A|^2 + delta)| = delta * max 1/(|A|^2 + delta) over the sampled set."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    pts = _scan_points(A, manifold_samples, xi_samples)
    a2 = np.abs(A.evaluate(pts)) ** 2
    return float(np.max(delta / (a2 + delta)))
