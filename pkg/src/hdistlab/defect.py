"""
Sampled bilinear forms along sequence families and their limits.

The basic quantity is

    B_n = int phi1(x, y) u_n(x, y) conj(A(phi2 v_n)(x)) dx dy

with A the multiplier of psi o pi.  Limits are extrapolated from the index
ladder by Richardson extrapolation in 1/n (see ``fit_limit``).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .grid import GridSpec, fft_x, ifft_x, lp_norm, mixed_norm
from .multipliers import MultiplierOp, _non_even_axes, _nyquist_guard, symbol_op
from .sequences import SequenceFamily, band
from .symbols import (
    Anisotropy,
    PrincipalSymbol,
    SymbolOnManifold,
    _project_or_zero,
    cutoff_theta,
    degeneracy_scan,
    delta_regularizer_gap,
    fourier_power,
    quasi_norm,
)


class NoConvergence(RuntimeError):
    """The extrapolated limit is not supported by the ladder."""


RATE_MODELS = (1.0, 2.0)


def _pair_limit(n, v, a) -> complex:
    """L with v_i = L + c n_i^-a exactly at two points."""
    x0, x1 = n[0] ** -a, n[1] ** -a
    return complex((v[1] * x0 - v[0] * x1) / (x0 - x1))


def fit_limit(ns: Sequence[int], values: Sequence[complex]) -> tuple[complex, float, str]:
    """Extrapolate B_n to n = inf from the top of the ladder.

    Candidate models are L + c n^-a for a in RATE_MODELS and the last value
    itself.  Each is scored by how well the two points before the largest n
    predict the value there.  The winner's limit comes from the last two
    points (Richardson extrapolation); the reported residual is the larger of
    that held-out error and the change relative to the extrapolation one step
    earlier, so model bias shows up in it.  Returns (limit, residual, method).
    """
    ns = np.asarray(ns, dtype=float)
    vals = np.asarray(values, dtype=complex)
    order = np.argsort(ns, kind="stable")
    ns, vals = ns[order], vals[order]
    if len(ns) < 3 or len(np.unique(ns[-3:])) < 3:
        res = float(abs(vals[-1] - vals[-2])) if len(ns) >= 2 else 0.0
        return complex(vals[-1]), res, "last-value"
    n3, v3 = ns[-3:], vals[-3:]
    scores = {"last-value": float(abs(v3[2] - v3[1]))}
    for a in RATE_MODELS:
        prev = _pair_limit(n3[:2], v3[:2], a)
        c = (v3[1] - prev) * n3[1] ** a
        scores[a] = float(abs(prev + c * n3[2] ** -a - v3[2]))
    best = min(scores, key=lambda m: (scores[m], m == "last-value"))
    if best == "last-value":
        return complex(v3[2]), scores[best], "last-value"
    lim = _pair_limit(n3[1:], v3[1:], best)
    drift = abs(lim - _pair_limit(n3[:2], v3[:2], best))
    return lim, max(scores[best], float(drift)), f"1/n^{best:g}-extrapolation"


@dataclass(frozen=True)
class DefectEstimate:
    samples: tuple[tuple[int, complex], ...]
    limit: complex
    fit_residual: float
    method: str
    scale: float = 1.0
    norm_bounds: tuple[float, ...] = ()
    extras: dict = field(default_factory=dict)

    @classmethod
    def from_samples(cls, ns, values, scale=1.0, norm_bounds=(), **extras) -> "DefectEstimate":
        lim, res, method = fit_limit(ns, values)
        samples = tuple((int(n), complex(v)) for n, v in zip(ns, values))
        return cls(samples, lim, res, method, float(scale), tuple(float(b) for b in norm_bounds), extras)

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.samples])

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(n for n, _ in self.samples)

    @property
    def abs_tol(self) -> float:
        return 1e-6 * self.scale

    @property
    def converged(self) -> bool:
        return self.fit_residual < 0.1 * abs(self.limit) or abs(self.limit) < self.abs_tol

    def is_zero(self, rel_tol: float | None = None) -> bool:
        thresh = max(self.abs_tol, 2 * self.fit_residual)
        if rel_tol is not None:
            thresh = max(thresh, rel_tol * self.scale)
        return abs(self.limit) < thresh

    @property
    def verdict(self) -> str:
        if self.is_zero():
            return "zero"
        return "nonzero" if self.converged else "no-convergence"

    def require_convergence(self) -> "DefectEstimate":
        if not self.converged:
            raise NoConvergence(f"no convergence: fit residual {self.fit_residual:.3g}, limit {abs(self.limit):.3g}")
        return self

    def csv_rows(self):
        bounds = self.norm_bounds or (float("nan"),) * len(self.samples)
        return [(n, v.real, v.imag, b) for (n, v), b in zip(self.samples, bounds)]

    def verdict_record(self) -> dict:
        return {
            "limit_re": self.limit.real,
            "limit_im": self.limit.imag,
            "fit_residual": self.fit_residual,
            "verdict": self.verdict,
        }


def _values(obj):
    return np.asarray(getattr(obj, "values", obj))


def _x_spec(u) -> GridSpec:
    return u.spec.x_spec()


def _expand_y(arr: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Append singleton y axes to an x-only array."""
    if arr.ndim == spec.dim_x and spec.dim_y:
        return arr.reshape(arr.shape + (1,) * spec.dim_y)
    return arr


def _cells(spec: GridSpec) -> float:
    return spec.x_cell * (spec.y_cell if spec.dim_y else 1.0)


def _l1y_l2x(values: np.ndarray, spec: GridSpec) -> float:
    a = np.abs(values) ** 2
    if a.ndim == spec.dim_x:
        return float(np.sqrt(spec.x_cell * a.sum()))
    inner = np.sqrt(spec.x_cell * a.sum(axis=tuple(range(spec.dim_x))))
    return float(spec.y_cell * inner.sum())


def _l2(values: np.ndarray, xs: GridSpec) -> float:
    return float(np.sqrt(xs.x_cell * np.sum(np.abs(values) ** 2)))


def _as_table(psi, aniso: Anisotropy, xs: GridSpec) -> tuple[np.ndarray, float]:
    """Multiplier table and a bound on its C^d size."""
    if isinstance(psi, MultiplierOp):
        return psi.table, psi.sup
    if isinstance(psi, SymbolOnManifold):
        table = symbol_op(psi, aniso, xs).table
        cd = max(psi.cd_norm_estimate(aniso), float(np.abs(table).max()))
        return table, cd
    table = np.asarray(psi, dtype=complex)
    return table, float(np.abs(table).max())


def _apply_table(table: np.ndarray, values: np.ndarray, xs: GridSpec) -> np.ndarray:
    """Apply a table of shape x_shape or x_shape + y_shape to an x-only array."""
    c = fft_x(values, xs)
    if table.ndim > xs.dim_x:
        c = c.reshape(c.shape + (1,) * (table.ndim - xs.dim_x))
    return ifft_x(c * table, xs)


def _pair(phi1, u: np.ndarray, w: np.ndarray, spec: GridSpec) -> complex:
    w = _expand_y(w, spec) if w.ndim == spec.dim_x else w
    return complex(_cells(spec) * np.sum(phi1 * u * np.conj(w)))


def bilinear_sample(u, v, phi1, phi2, psi, aniso: Anisotropy) -> complex:
    """Quadrature of phi1 u conj(A_psi(phi2 v)) over (x, y)."""
    spec = u.spec
    xs = spec.x_spec()
    table, _ = _as_table(psi, aniso, xs)
    w = _apply_table(table, _values(phi2) * _values(v), xs)
    return _pair(_expand_y(np.asarray(_values(phi1)), spec), _values(u), w, spec)


def _phi(phi, spec: GridSpec, xonly: bool = False) -> np.ndarray:
    arr = np.asarray(_values(phi) if phi is not None else 1.0, dtype=complex)
    return arr if xonly else _expand_y(arr, spec)


def estimate(
    family_u: SequenceFamily,
    family_v: SequenceFamily,
    phi1,
    phi2,
    psi,
    aniso: Anisotropy,
    strict: bool = False,
) -> DefectEstimate:
    """Sample B_n over the ladder and extrapolate.

    Also records the gap between placing phi2 inside or outside the
    multiplier, which must tend to zero.
    """
    if family_u.indices != family_v.indices:
        raise ValueError("families must share the index ladder")
    vals, gaps, bounds, scales = [], [], [], []
    table = cd = None
    for n in family_u.indices:
        u, v = family_u(n), family_v(n)
        spec = u.spec
        xs = spec.x_spec()
        if table is None:
            table, cd = _as_table(psi, aniso, xs)
        p1 = _phi(phi1, spec)
        p2 = _phi(phi2, xs, xonly=True)
        uv, vv = _values(u), _values(v)
        inside = _apply_table(table, p2 * vv, xs)
        b = _pair(p1, uv, inside, spec)
        outside = _pair(p1 * _expand_y(np.conj(p2), spec), uv, _apply_table(table, vv, xs), spec)
        vals.append(b)
        gaps.append(abs(b - outside))
        nu = _l1y_l2x(p1 * uv, spec)
        nv = _l2(p2 * vv, xs)
        bounds.append(cd * nu * nv)
        scales.append(float(np.abs(table).max()) * nu * nv)
    est = DefectEstimate.from_samples(
        family_u.indices, vals, max(scales), bounds, rev2_gap=np.array(gaps), cd_estimate=cd
    )
    return est.require_convergence() if strict else est


def hmeasure_sample(family_u, family_v, phi1, phi2, psi, aniso: Anisotropy) -> DefectEstimate:
    """The L^2 case of ``estimate`` with a positivity check on diagonal inputs.

    When u = v, phi1 = phi2 is real and psi >= 0 the limit must be real and
    non-negative up to the fit residual.
    """
    est = estimate(family_u, family_v, phi1, phi2, psi, aniso)
    first = family_u(family_u.indices[0])
    table, _ = _as_table(psi, aniso, first.spec.x_spec())
    diagonal = family_u is family_v and _same(phi1, phi2)
    nonneg = bool(np.all(np.abs(table.imag) < 1e-14) and np.all(table.real >= -1e-14))
    slack = est.fit_residual + 1e-8
    positive = (est.limit.real >= -slack) if (diagonal and nonneg) else None
    extras = dict(est.extras, diagonal=diagonal, nonneg_symbol=nonneg, positive=positive)
    return DefectEstimate(est.samples, est.limit, est.fit_residual, est.method, est.scale, est.norm_bounds, extras)


def _same(a, b) -> bool:
    if a is b:
        return True
    va, vb = np.asarray(_values(a)), np.asarray(_values(b))
    return va.shape == vb.shape and bool(np.all(va == vb)) and bool(np.all(np.isreal(va)))


@dataclass(frozen=True)
class CommutatorDecay:
    indices: tuple[int, ...]
    norms: np.ndarray
    slope: float
    q: float
    interpolation_ok: np.ndarray
    passed: bool

    def csv_rows(self):
        return [(n, float(v), bool(ok)) for n, v, ok in zip(self.indices, self.norms, self.interpolation_ok)]


def commutator_decay(b, psi: SymbolOnManifold, family_v: SequenceFamily, q: float, aniso: Anisotropy, r: float = 8.0) -> CommutatorDecay:
    """||C v_n||_q along the ladder, C = A_psi b - b A_psi.

    Also checks ||Cv||_q <= ||Cv||_2^t ||Cv||_r^(1-t) with 1/q = t/2 + (1-t)/r
    whenever q lies between 2 and r.
    """
    from .multipliers import commutator

    p = family_v.p_bound
    lo, hi = sorted((2.0, p))
    if not lo <= q <= hi:
        raise ValueError(f"q = {q} outside the admissible range [{lo}, {hi}] for a family bounded in L^{p}")
    norms, interp = [], []
    for n, v in family_v.items():
        c = commutator(b, psi, v, aniso)
        nq = lp_norm(c, q)
        norms.append(nq)
        if q == 2:
            interp.append(True)
            continue
        lo_e, hi_e = sorted((2.0, r))
        if not lo_e <= q <= hi_e:
            interp.append(True)
            continue
        t = (1 / q - 1 / r) / (0.5 - 1 / r)
        rhs = lp_norm(c, 2) ** t * lp_norm(c, r) ** (1 - t)
        interp.append(nq <= rhs * (1 + 1e-12) + 1e-300)
    norms = np.array(norms)
    ns = np.asarray(family_v.indices, dtype=float)
    if np.all(norms == 0):
        return CommutatorDecay(family_v.indices, norms, -np.inf, q, np.array(interp), True)
    slope = float(np.polyfit(np.log(ns), np.log(np.maximum(norms, 1e-300)), 1)[0])
    passed = bool(norms[-1] < 0.25 * norms[0] and slope < 0)
    return CommutatorDecay(family_v.indices, norms, slope, q, np.array(interp), passed)


def localization_tables(A: PrincipalSymbol, psi: SymbolOnManifold, xs: GridSpec, gamma: float = 1.0, terms=None):
    """Per-term multiplier tables of the localization test.

    Term k gets (1 - theta) psi(pi xi) (-2 pi i pi(xi))^alpha_k |xi|_beta^-(gamma - w_k),
    w_k its weighted order.  A single cutoff factor is used.
    """
    aniso = A.aniso
    xi = xs.freq_grid()
    eta, origin = _project_or_zero(xi, aniso)
    r = quasi_norm(xi, aniso)
    guard = 1.0 - cutoff_theta(xi, aniso)
    base = guard * psi(eta)
    idx = range(len(A.terms)) if terms is None else terms
    out = []
    for k in idx:
        t = A.terms[k]
        expo = gamma - t.weight(aniso)
        damp = np.where(r > 0, np.where(r > 0, r, 1.0) ** (-expo), 0.0)
        table = base * fourier_power(-eta, t.alpha) * damp
        table[origin] = 0.0
        out.append((k, _nyquist_guard(table, xs, _non_even_axes(t.alpha))))
    return out


def localization_residual(
    A: PrincipalSymbol,
    family_u: SequenceFamily,
    family_v: SequenceFamily,
    phi,
    psi: SymbolOnManifold,
    gamma: float = 1.0,
    rho1=None,
) -> DefectEstimate:
    """sum_k int a_k u_n conj(rho1) conj(S_k(phi v_n)) over the ladder; all terms of A enter.

    For solutions of the equation the limit is zero.  A warning is issued when
    the reported source norms do not decay.
    """
    vals, scales = [], []
    tables = None
    for n in family_u.indices:
        u, v = family_u(n), family_v(n)
        spec = u.spec
        xs = spec.x_spec()
        if tables is None:
            tables = localization_tables(A, psi, xs, gamma)
            sups = {k: float(np.abs(tb).max()) for k, tb in tables}
        uv = _values(u)
        r1 = np.ones(spec.y_shape) if rho1 is None else np.asarray(_values(rho1))
        r1 = np.conj(r1).reshape((1,) * spec.dim_x + spec.y_shape) if spec.dim_y else np.conj(r1)
        pv = _phi(phi, xs, xonly=True) * _values(v)
        total = 0j
        scale = 0.0
        nu = _l1y_l2x(uv * r1, spec)
        nv = _l2(pv, xs)
        for k, tb in tables:
            a = np.broadcast_to(A.terms[k].coeff, A.terms[k].coeff.shape)
            w = _apply_table(tb, pv, xs)
            total += _pair(a * r1, uv, w, spec)
            scale += float(np.abs(a).max()) * sups[k] * nu * nv
        vals.append(total)
        scales.append(scale)
    src = None
    if family_u.source is not None:
        src = np.array([family_u.source(n).neg_sobolev_norm for n in family_u.indices])
        if not src[-1] < src[0]:
            warnings.warn("source norms are not decaying; the localization limit need not vanish")
    return DefectEstimate.from_samples(family_u.indices, vals, max(scales), scales, source_norms=src)


def oscillation_localization_oracle(A: PrincipalSymbol, psi: SymbolOnManifold, direction, weight: complex) -> complex:
    """conj(psi(eta)) A(eta) * weight, eta = pi(direction): the limit for a single-mode family.

    ``weight`` is the remaining integral of the amplitudes against the test
    functions.  Coefficients must be constant.
    """
    eta = np.asarray(direction, dtype=float)
    from .symbols import project

    eta = project(eta, A.aniso)
    a_val = complex(np.asarray(A.evaluate(eta)).reshape(-1)[0])
    return complex(np.conj(psi(eta))) * a_val * weight


@dataclass(frozen=True)
class RegularizedZeroReport:
    applicable: bool
    reason: str
    deltas: tuple[float, ...] = ()
    values: tuple[complex, ...] = ()
    direct: complex = 0j
    gaps: tuple[float, ...] = ()
    bound: float = 0.0
    extrapolated: complex = 0j
    inequality_ok: bool = False
    concluded_zero: bool = False
    scale: float = 1.0

    def as_dict(self) -> dict:
        return {
            "applicable": self.applicable,
            "reason": self.reason,
            "deltas": list(self.deltas),
            "values_re": [v.real for v in self.values],
            "values_im": [v.imag for v in self.values],
            "direct_re": self.direct.real,
            "direct_im": self.direct.imag,
            "gaps": list(self.gaps),
            "bound": self.bound,
            "extrapolated_abs": abs(self.extrapolated),
            "inequality_ok": self.inequality_ok,
            "concluded_zero": self.concluded_zero,
            "scale": self.scale,
        }


def _y_only_symbol_table(A: PrincipalSymbol, xs: GridSpec, spec: GridSpec) -> np.ndarray:
    """|A(y, pi xi)| values arranged as x_shape + y_shape (or x_shape)."""
    cshape = A.coeff_shape()
    d = xs.dim_x
    if any(n != 1 for n in cshape[:d]):
        raise ValueError("the regularized test supports coefficients depending on y only")
    xi = xs.freq_grid()
    eta, origin = _project_or_zero(xi, A.aniso)
    vals = A.evaluate(eta)  # cshape + x_shape
    ny = len(cshape) - d if len(cshape) > d else 0
    vals = vals.reshape(cshape[d:] + xs.x_shape) if ny else vals.reshape(xs.x_shape)
    if ny:
        vals = np.moveaxis(vals, tuple(range(ny)), tuple(range(d, d + ny)))
        vals = np.broadcast_to(vals, xs.x_shape + spec.y_shape) if spec.dim_y else vals
    return vals, origin


def regularized_zero_test(
    A: PrincipalSymbol,
    family_u: SequenceFamily,
    family_v: SequenceFamily,
    phi,
    psi: SymbolOnManifold,
    delta_ladder: Sequence[float] = (1e-1, 1e-2, 1e-3, 1e-4),
    rel_tol: float = 0.03,
) -> RegularizedZeroReport:
    """Evaluate B on phi psi |A|^2/(|A|^2 + delta) along a delta ladder.

    Refuses when the sampled restrictive non-degeneracy check fails.
    """
    scan = degeneracy_scan(A)
    if not scan.rndc_holds:
        return RegularizedZeroReport(False, f"inapplicable: symbol degenerates on P (min |A| = {scan.min_abs_rndc:.3g})")
    aniso = A.aniso
    first = family_u(family_u.indices[0])
    spec = first.spec
    xs = spec.x_spec()
    avals, origin = _y_only_symbol_table(A, xs, spec)
    eta, _ = _project_or_zero(xs.freq_grid(), aniso)
    ptab = psi(eta)
    ptab[origin] = 0.0
    direct = _estimate_ytable(family_u, family_v, phi, ptab, xs)
    if avals.ndim > xs.dim_x:
        ptab = ptab.reshape(ptab.shape + (1,) * (avals.ndim - xs.dim_x))
    a2 = np.abs(avals) ** 2
    live = ~np.broadcast_to(origin.reshape(origin.shape + (1,) * (a2.ndim - origin.ndim)), a2.shape)
    bound = direct.scale
    values, fits, gaps = [], [], []
    ok = True
    for delta in delta_ladder:
        table = ptab * a2 / (a2 + delta)
        est = _estimate_ytable(family_u, family_v, phi, table, xs)
        values.append(est.limit)
        fits.append(est.fit_residual)
        gaps.append(delta_regularizer_gap(A, delta))
        lattice_gap = float(np.max((delta / (a2 + delta))[live]))
        per_n = np.abs(est.values - direct.values)
        ok &= bool(np.all(per_n <= lattice_gap * bound * (1 + 1e-9) + 1e-14 * max(bound, 1e-300)))
    dl = np.asarray(delta_ladder, dtype=float)
    if len(dl) >= 2:
        M = np.stack([np.ones_like(dl), dl], axis=1).astype(complex)
        coef, *_ = np.linalg.lstsq(M, np.asarray(values), rcond=None)
        extrap = complex(coef[0])
    else:
        extrap = complex(values[0])
    thresh = max(rel_tol * direct.scale, 2 * max(fits + [direct.fit_residual]), 1e-6 * direct.scale)
    return RegularizedZeroReport(
        True, "", tuple(float(d) for d in delta_ladder), tuple(values), direct.limit, tuple(gaps), bound,
        extrap, bool(ok), bool(abs(extrap) < thresh), direct.scale,
    )


def _estimate_ytable(family_u, family_v, phi, table, xs: GridSpec) -> DefectEstimate:
    vals, scales = [], []
    sup = float(np.abs(table).max())
    for n in family_u.indices:
        u, v = family_u(n), family_v(n)
        spec = u.spec
        p1 = _phi(phi, spec)
        w = _apply_table(table, _values(v), xs)
        vals.append(_pair(p1, _values(u), w, spec))
        scales.append(sup * _l1y_l2x(p1 * _values(u), spec) * _l2(_values(v), xs))
    return DefectEstimate.from_samples(family_u.indices, vals, max(scales), scales)


@dataclass(frozen=True)
class BandReport:
    levels: tuple[int, ...]
    indices: tuple[int, ...]
    direct: np.ndarray
    gaps: np.ndarray  # rows: levels, columns: indices
    tail_bounds: np.ndarray
    scale: float

    @property
    def max_gap(self) -> np.ndarray:
        return self.gaps.max(axis=1)

    @property
    def monotone(self) -> bool:
        g = self.max_gap
        return bool(np.all(np.diff(g) <= 1e-12 * max(self.scale, 1e-300)))

    @property
    def bounded(self) -> bool:
        return bool(np.all(self.gaps <= self.tail_bounds * (1 + 1e-9) + 1e-14 * self.scale))


def band_decomposition_check(family_u, family_v, phi1, phi2, psi, aniso: Anisotropy, levels: Sequence[int]) -> BandReport:
    """Compare B_n(u_n) with sum_{l <= L} B_n(band(u_n, l)) for each L in ``levels``.

    The tail bound is C ||phi1 u_n 1{|u_n| > L+1}||_{L1_y L2_x} ||phi2 v_n||_2.
    """
    levels = tuple(sorted(int(l) for l in levels))
    direct, gaps, bounds, scale = [], [], [], 0.0
    table = cd = None
    for n in family_u.indices:
        u, v = family_u(n), family_v(n)
        spec = u.spec
        xs = spec.x_spec()
        if table is None:
            table, cd = _as_table(psi, aniso, xs)
        p1 = _phi(phi1, spec)
        pv = _phi(phi2, xs, xonly=True) * _values(v)
        w = _apply_table(table, pv, xs)
        b = _pair(p1, _values(u), w, spec)
        direct.append(b)
        mag = np.abs(_values(u))
        top = int(np.ceil(mag.max())) if mag.size else 0
        parts = [_pair(p1, _values(band(u, l)), w, spec) for l in range(max(levels + (top,)) + 1)]
        csum = np.cumsum(parts)
        nv = _l2(pv, xs)
        colg, colb = [], []
        for L in levels:
            colg.append(abs(b - csum[min(L, len(csum) - 1)]))
            tail = np.where(mag > L + 1, _values(u), 0.0)
            colb.append(cd * _l1y_l2x(p1 * tail, spec) * nv)
        gaps.append(colg)
        bounds.append(colb)
        scale = max(scale, float(np.abs(table).max()) * _l1y_l2x(p1 * _values(u), spec) * nv)
    return BandReport(levels, family_u.indices, np.array(direct), np.array(gaps).T, np.array(bounds).T, scale)


def y_mode_order(spec: GridSpec) -> list[tuple[int, ...]]:
    """y Fourier modes ordered 0, +1, -1, +2, -2, ... (by max-norm, then lexicographically)."""
    ranges = [np.fft.fftfreq(N, 1.0 / N).astype(int) for N in spec.y_shape]
    import itertools

    modes = list(itertools.product(*ranges))
    return sorted(modes, key=lambda m: (max(abs(c) for c in m), tuple((abs(c), -np.sign(c)) for c in m)))


@dataclass(frozen=True)
class BasisReport:
    counts: tuple[int, ...]
    indices: tuple[int, ...]
    direct: np.ndarray
    gaps: np.ndarray  # rows: counts, columns: indices
    scale: float

    @property
    def max_gap(self) -> np.ndarray:
        return self.gaps.max(axis=1)

    @property
    def monotone(self) -> bool:
        g = self.max_gap
        return bool(np.all(np.diff(g) <= 1e-12 * max(self.scale, 1e-300)))


def basis_decomposition_check(family_u, family_v, phi1, phi2, psi, aniso: Anisotropy, counts: Sequence[int]) -> BasisReport:
    """Partial sums over the y Fourier basis of the per-mode estimates.

    With e_m(y) = exp(2 pi i m.y/L)/sqrt(|Y|) and c_m(x) = int phi1(x, y) conj(e_m(y)) dy,
    mode m contributes int c_m(x) (int e_m u_n dy)(x) conj(A(phi2 v_n)(x)) dx.
    """
    counts = tuple(sorted(int(c) for c in counts))
    direct, gaps, scale = [], [], 0.0
    table = None
    first = family_u(family_u.indices[0])
    spec = first.spec
    if spec.dim_y == 0:
        raise ValueError("basis decomposition needs y axes")
    xs = spec.x_spec()
    modes = y_mode_order(spec)[: max(counts)]
    ymesh = spec.mesh(range(spec.dim_x, spec.ndim))
    vol = float(np.prod(spec.y_extent))
    p1 = np.broadcast_to(_phi(phi1, spec), spec.shape)
    y_axes = tuple(range(spec.dim_x, spec.ndim))
    basis = []
    for m in modes:
        e = np.exp(2j * np.pi * sum(mj * c / L for mj, c, L in zip(m, ymesh, spec.y_extent))) / np.sqrt(vol)
        basis.append(e)
    coeffs = [spec.y_cell * np.sum(p1 * np.conj(_expand_like(e, spec)), axis=y_axes) for e in basis]
    for n in family_u.indices:
        u, v = family_u(n), family_v(n)
        if table is None:
            table, _ = _as_table(psi, aniso, xs)
        pv = _phi(phi2, xs, xonly=True) * _values(v)
        w = _apply_table(table, pv, xs)
        uv = _values(u)
        b = _pair(p1, uv, w, spec)
        direct.append(b)
        parts = []
        for e, c in zip(basis, coeffs):
            um = spec.y_cell * np.sum(_expand_like(e, spec) * uv, axis=y_axes)
            parts.append(complex(xs.x_cell * np.sum(c * um * np.conj(w))))
        csum = np.cumsum(parts)
        gaps.append([abs(b - csum[c - 1]) for c in counts])
        scale = max(scale, float(np.abs(table).max()) * _l1y_l2x(p1 * uv, spec) * _l2(pv, xs))
    return BasisReport(counts, family_u.indices, np.array(direct), np.array(gaps).T, scale)


def _expand_like(e: np.ndarray, spec: GridSpec) -> np.ndarray:
    return e.reshape((1,) * spec.dim_x + spec.y_shape)
