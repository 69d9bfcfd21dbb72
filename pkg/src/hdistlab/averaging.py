"""
Velocity averages, compactness diagnostics and weak-solution residuals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad

from .defect import localization_residual
from .grid import GridSpec, PhaseSpaceField, ScalarField, fft_x, ifft_x, lp_norm, translate
from .multipliers import MultiplierOp, _non_even_axes, _nyquist_guard, t_gamma_op, symbol_op
from .profiles import gaussian
from .sequences import SequenceFamily, sin_window, truncate
from .symbols import Anisotropy, PrincipalSymbol, SymbolOnManifold, Term, degeneracy_scan, fourier_power


def velocity_average(u: PhaseSpaceField, rho) -> ScalarField:
    """int rho(y) u(x, y) dy by uniform quadrature on the y grid."""
    spec = u.spec
    r = np.asarray(getattr(rho, "values", rho), dtype=complex)
    if r.shape != spec.y_shape:
        r = np.broadcast_to(r, spec.y_shape)
    r = r.reshape((1,) * spec.dim_x + spec.y_shape)
    y_axes = tuple(range(spec.dim_x, spec.ndim))
    return ScalarField(spec.x_spec(), spec.y_cell * np.sum(r * u.values, axis=y_axes))


def interior_box(spec: GridSpec, margin: float = 0.1) -> list[tuple[float, float]]:
    """The x sub-box with a relative margin removed on every side."""
    return [(margin * L, (1 - margin) * L) for L in spec.x_extent]


def shift_ladder(spec: GridSpec, lo: int = 256, hi: int = 16) -> list[np.ndarray]:
    """Per-axis shift vectors box/lo, box/(lo/2), ..., box/hi."""
    out = []
    div = lo
    while div >= hi:
        out.append(np.asarray(spec.x_extent) / div)
        div //= 2
    return out


@dataclass(frozen=True)
class CompactnessReport:
    indices: tuple[int, ...]
    cauchy_matrix: np.ndarray
    rk_modulus: np.ndarray  # rows: indices, columns: h ladder (plus h = 0 first)
    h_ladder: tuple[tuple[float, ...], ...]
    norms_l2: np.ndarray
    norms_l1: np.ndarray
    truncated_energy: np.ndarray  # rows: levels, columns: indices
    levels: tuple[float, ...]
    weak_null: bool
    decay_fit: float
    verdict: str

    def as_dict(self) -> dict:
        return {
            "indices": list(self.indices),
            "verdict": self.verdict,
            "decay_fit": self.decay_fit,
            "weak_null": self.weak_null,
            "norms_l2": self.norms_l2.tolist(),
            "norms_l1": self.norms_l1.tolist(),
            "max_cauchy_top_half": float(_top_half_max(self.cauchy_matrix)),
            "rk_sup": self.rk_modulus.max(axis=0).tolist(),
            "levels": list(self.levels),
            "truncated_energy": self.truncated_energy.tolist(),
        }


def _top_half_max(m: np.ndarray) -> float:
    k = m.shape[0] // 2
    return float(m[k:, k:].max()) if m.size else 0.0


def _region_l1(f: ScalarField, region) -> float:
    return lp_norm(f, 1, region)


def compactness_diagnostic(
    averages: dict[int, ScalarField] | Sequence[tuple[int, ScalarField]],
    K=None,
    h_ladder=None,
    tol: float = 0.1,
    levels: Sequence[float] = (0.25, 0.5, 1.0, 2.0),
    weight=None,
    seed: int = 0,
) -> CompactnessReport:
    """Finite-ladder evidence for strong compactness of averages in L^1(K).

    Verdict "compact" needs the top-half pairwise distances below
    ``tol * max ||avg||_1`` and decaying norms; "non-compact" needs norms
    staying above half their initial value and a passing weak-null battery.
    """
    items = sorted(dict(averages).items())
    if len(items) < 4:
        raise ValueError("compactness diagnostic needs at least 4 indices")
    ns = tuple(n for n, _ in items)
    fields = [f for _, f in items]
    spec = fields[0].spec
    K = interior_box(spec) if K is None else list(K)
    hs = shift_ladder(spec) if h_ladder is None else [np.atleast_1d(np.asarray(h, dtype=float)) for h in h_ladder]
    m = len(fields)
    cauchy = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            cauchy[i, j] = cauchy[j, i] = _region_l1(fields[i] - fields[j], K)
    rk = np.zeros((m, len(hs) + 1))
    for i, f in enumerate(fields):
        for jh, h in enumerate(hs):
            best = 0.0
            for ax in range(spec.dim_x):
                e = np.zeros(spec.dim_x)
                e[ax] = h[ax] if h.size > 1 else h[0]
                best = max(best, _region_l1(translate(f, e) - f, K))
            rk[i, jh + 1] = best
    l2 = np.array([lp_norm(f, 2, K) for f in fields])
    l1 = np.array([_region_l1(f, K) for f in fields])
    wt = np.ones(spec.x_shape) if weight is None else np.asarray(getattr(weight, "values", weight))
    energy = np.zeros((len(levels), m))
    for il, lev in enumerate(levels):
        for i, f in enumerate(fields):
            g = truncate(f, lev)
            energy[il, i] = lp_norm(g.with_values(wt * g.values), 2, K) ** 2
    fam = SequenceFamily(dict(items).__getitem__, 2.0, ns)
    weak_ok, _ = fam.weak_null_check(seed=seed)
    slope = -np.inf
    if np.all(l2 > 0):
        slope = float(np.polyfit(np.log(ns), np.log(l2), 1)[0])
    ref = float(l1.max())
    if ref == 0 or l2.max() < 1e-300:
        verdict = "compact"
    elif _top_half_max(cauchy) < tol * ref and l2[-1] < 0.5 * l2[0] and slope < 0:
        verdict = "compact"
    elif l2.min() >= 0.5 * l2[0] and weak_ok:
        verdict = "non-compact"
    else:
        verdict = "inconclusive"
    h_tab = tuple(tuple(float(v) for v in h) for h in hs)
    return CompactnessReport(ns, cauchy, rk, h_tab, l2, l1, energy, tuple(levels), bool(weak_ok), slope, verdict)


def _terms_of(P) -> list[Term]:
    return list(P.terms) if isinstance(P, PrincipalSymbol) else list(P)


def adjoint_derivative(values: np.ndarray, spec: GridSpec, alpha) -> np.ndarray:
    """(-d)^alpha over the x axes, spectrally; symbol (-2 pi i xi)^alpha."""
    xs = spec.x_spec()
    table = fourier_power(-xs.freq_grid(), alpha)
    table = _nyquist_guard(table, xs, _non_even_axes(np.atleast_1d(alpha)))
    extra = values.ndim - xs.dim_x
    return ifft_x(fft_x(values, xs) * table.reshape(table.shape + (1,) * extra), xs)


def _y_derivative(values: np.ndarray, spec: GridSpec, kappa) -> np.ndarray:
    if not any(kappa):
        return values
    axes = tuple(range(spec.dim_x, spec.ndim))
    c = np.fft.fftn(values, axes=axes)
    for j, k in enumerate(kappa):
        if k:
            ax = spec.dim_x + j
            f = (2j * np.pi * spec.frequencies(ax)) ** k
            shape = [1] * values.ndim
            shape[ax] = f.size
            c = c * f.reshape(shape)
    return np.fft.ifftn(c, axes=axes)


def prepare_battery(spec: GridSpec, P, battery: Sequence[np.ndarray], kappas=((),)) -> list[dict]:
    """Precompute (-d)^alpha g and d_y^kappa g for every test field."""
    out = []
    for g in battery:
        g = np.broadcast_to(np.asarray(getattr(g, "values", g)), spec.shape)
        entry = {"adj": [adjoint_derivative(g, spec, t.alpha) for t in _terms_of(P)], "dy": {}}
        for kappa in kappas:
            kappa = tuple(kappa) or (0,) * spec.dim_y
            entry["dy"][kappa] = _y_derivative(g, spec, kappa)
        out.append(entry)
    return out


def weak_residual(u: PhaseSpaceField, P, G=None, battery: Sequence[np.ndarray] = (), prepared=None) -> float:
    """max over the battery of |LHS - RHS| / scale for the weak formulation.

    LHS = sum_k int a_k u conj((-d_x)^alpha_k g); RHS = (-1)^|kappa| int G conj(d_y^kappa g).
    ``G`` is None, a PhaseSpaceField (kappa = 0) or a list of (kappa, field).
    ``prepared`` (from ``prepare_battery``) skips recomputing the derivatives.
    """
    spec = u.spec
    cell = spec.x_cell * (spec.y_cell if spec.dim_y else 1.0)
    terms = _terms_of(P)
    if G is None:
        sources = []
    elif isinstance(G, PhaseSpaceField):
        sources = [((0,) * spec.dim_y, G)]
    else:
        sources = [(tuple(k) or (0,) * spec.dim_y, f) for k, f in G]
    if prepared is None:
        prepared = prepare_battery(spec, P, battery, [k for k, _ in sources] or [()])
    unorm = lp_norm(u, 2)
    worst = 0.0
    for entry in prepared:
        lhs, scale = 0j, 0.0
        for t, dg in zip(terms, entry["adj"]):
            a = np.broadcast_to(t.coeff, t.coeff.shape)
            lhs += cell * np.sum(a * u.values * np.conj(dg))
            scale += float(np.abs(a).max()) * unorm * np.sqrt(cell * np.sum(np.abs(dg) ** 2))
        rhs = 0j
        for kappa, src in sources:
            dyg = entry["dy"].get(kappa)
            if dyg is None:
                raise ValueError(f"battery was not prepared for kappa = {kappa}")
            sv = getattr(src, "values", src)
            rhs += (-1) ** sum(kappa) * cell * np.sum(sv * np.conj(dyg))
            scale += np.sqrt(cell * np.sum(np.abs(sv) ** 2)) * np.sqrt(cell * np.sum(np.abs(dyg) ** 2))
        if scale > 0:
            worst = max(worst, abs(lhs - rhs) / scale)
    return float(worst)


def residual_battery(spec: GridSpec, count: int = 4, seed: int = 0, power: int = 3) -> list[np.ndarray]:
    """Smooth tensors band-limited in (t, x): sin-window(t) exp(2 pi i m x / L) gaussian(y)."""
    rng = np.random.default_rng(seed)
    mesh = spec.mesh()
    T = spec.extent[0]
    out = []
    for _ in range(count):
        g = sin_window(mesh[0], T, power).astype(complex)
        for ax in range(1, spec.dim_x):
            m = int(rng.integers(-3, 4))
            g = g * np.exp(2j * np.pi * m * mesh[ax] / spec.extent[ax])
        for ax in range(spec.dim_x, spec.ndim):
            L = spec.extent[ax]
            g = g * gaussian(mesh[ax], rng.uniform(0.35, 0.65) * L, rng.uniform(0.08, 0.15) * L)
        out.append(np.broadcast_to(g, spec.shape))
    return out


def tmain_test_function(spec: GridSpec, rho1, psi: SymbolOnManifold, phi1, v: ScalarField, aniso: Anisotropy) -> np.ndarray:
    """g(x, y) = rho1(y) (T^1 o A_psi)(phi1 v)(x)."""
    xs = spec.x_spec()
    op = t_gamma_op(xs, 1.0, aniso) @ symbol_op(psi, aniso, xs)
    w = op.apply_array(np.asarray(getattr(phi1, "values", phi1)) * v.values, xs)
    r = np.asarray(getattr(rho1, "values", rho1)).reshape((1,) * spec.dim_x + spec.y_shape)
    return w.reshape(w.shape + (1,) * spec.dim_y) * r


def bump_fourier(rho: Callable, omega: float, lo: float, hi: float) -> complex:
    """int rho(y) exp(-2 pi i omega y) dy by adaptive quadrature on [lo, hi]."""
    lim = 200 + int(4 * abs(omega) * (hi - lo))
    re = quad(lambda y: rho(y) * np.cos(2 * np.pi * omega * y), lo, hi, limit=lim)[0]
    im = quad(lambda y: -rho(y) * np.sin(2 * np.pi * omega * y), lo, hi, limit=lim)[0]
    return complex(re, im)


@dataclass(frozen=True)
class EnvelopeCheck:
    rows: tuple[tuple[int, float, float, float], ...]  # n, t, measured, predicted

    @property
    def worst_rel(self) -> float:
        return max((abs(m / p - 1) for _, _, m, p in self.rows), default=0.0)


def transport_envelope(
    family: SequenceFamily,
    rho: Callable,
    rho_support: tuple[float, float],
    K=None,
    t_stride: int = 6,
    floor: float = 1e-4,
) -> EnvelopeCheck:
    """Compare ||avg_n(t, .)||_{L2(K_x)} with |rho_hat(n t / L_x)| chi(t) sqrt(|K_x|).

    Valid for transport waves with w = exp(2 pi i s), unit amplitude and a(y) = y.
    Points where the predicted envelope is below ``floor * |rho_hat(0)|`` are skipped.
    """
    first = family(family.indices[0])
    spec = first.spec
    K = interior_box(spec) if K is None else list(K)
    T, Lx = spec.extent[:2]
    t = spec.coords(0)
    x = spec.coords(1)
    rows = []
    ry = np.array([rho(y) for y in spec.coords(2)])
    xmask = (x >= K[1][0]) & (x < K[1][1])
    dx = spec.extent[1] / spec.samples[1]
    kx = dx * xmask.sum()
    zero = abs(bump_fourier(rho, 0.0, *rho_support))
    power = family.meta.get("window_power", 4)
    for n in family.indices:
        avg = velocity_average(family(n), ry).values
        for i in range(0, spec.samples[0], t_stride):
            if not K[0][0] <= t[i] < K[0][1]:
                continue
            pred = abs(bump_fourier(rho, n * t[i] / Lx, *rho_support)) * sin_window(t[i], T, power)
            if pred < floor * zero:
                continue
            meas = float(np.sqrt(dx * np.sum(np.abs(avg[i, xmask]) ** 2)))
            rows.append((int(n), float(t[i]), meas, float(pred * np.sqrt(kx))))
    return EnvelopeCheck(tuple(rows))


def averaging_experiment(
    family: SequenceFamily,
    symbol: PrincipalSymbol,
    rho: Callable,
    rho_support: tuple[float, float] | None = None,
    psi: SymbolOnManifold | None = None,
    K=None,
    truncation: float | None = None,
    envelope: bool = False,
    seed: int = 0,
) -> dict:
    """Run the degeneracy scan, residuals, localization and compactness diagnostics.

    Returns a JSON-ready report whose ``verdict`` is the compactness verdict of
    the velocity averages, juxtaposed with both non-degeneracy conditions.
    """
    first = family(family.indices[0])
    spec = first.spec
    ry = np.array([rho(y) for y in spec.coords(spec.dim_x)]) if spec.dim_y == 1 else np.asarray(rho(*spec.mesh(range(spec.dim_x, spec.ndim))))
    scan = degeneracy_scan(symbol)
    averages = {}
    residuals = []
    prepared = prepare_battery(spec, symbol, residual_battery(spec, seed=seed))
    for n, u in family.items():
        averages[n] = velocity_average(u, ry)
        src = family.source(n).field if family.source is not None else None
        residuals.append(weak_residual(u, symbol, src, prepared=prepared))
    comp = compactness_diagnostic(averages, K, seed=seed)
    psi = SymbolOnManifold.constant(1.0) if psi is None else psi
    level = truncation if truncation is not None else 2 * max(float(np.abs(a.values).max()) for a in averages.values())
    fam_v = SequenceFamily(lambda n: truncate(averages[n], level), 2.0, family.indices)
    xs = spec.x_spec()
    phi = np.ones(xs.x_shape)
    for ax, c in enumerate(xs.x_mesh()):
        phi = phi * sin_window(c, xs.extent[ax], 2)
    loc = localization_residual(symbol, family, fam_v, phi, psi)
    report = {
        "family": family.label,
        "indices": list(family.indices),
        "degeneracy": scan.as_dict(),
        "residuals": {"weak_residual": residuals, "max": max(residuals)},
        "localization": {
            "limit_abs": abs(loc.limit),
            "scale": loc.scale,
            "relative": abs(loc.limit) / loc.scale if loc.scale else 0.0,
            "fit_residual": loc.fit_residual,
        },
        "compactness": comp.as_dict(),
        "verdict": comp.verdict,
    }
    if family.source is not None:
        report["residuals"]["source_norms"] = [family.source(n).neg_sobolev_norm for n in family.indices]
    if envelope:
        if rho_support is None:
            raise ValueError("the envelope check needs the support of rho")
        env = transport_envelope(family, rho, rho_support, K)
        report["envelope"] = {"worst_rel": env.worst_rel, "points": len(env.rows)}
    return report
