"""
Invariant suite run by ``hdistlab verify``.

Each invariant is a function of a seed returning (ok, detail).  Raising
``Skip`` marks it skipped.  The summary counts passed, failed and skipped
entries and lists the failures by name.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from . import averaging, defect, grid, multipliers, sequences, symbols
from .grid import GridSpec, PhaseSpaceField, ScalarField
from .profiles import bump, gaussian, step
from .symbols import Anisotropy, PrincipalSymbol, SymbolOnManifold, Term

REGISTRY: list[tuple[str, Callable[[int], tuple[bool, str]]]] = []

BETAS = ((1.0, 1.0), (1.0, 2.0), (2.0, 3.0))


class Skip(Exception):
    pass


def invariant(name: str):
    def deco(fn):
        REGISTRY.append((name, fn))
        return fn

    return deco


def _rel(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


def _random_field(spec: GridSpec, rng) -> ScalarField:
    return ScalarField(spec, rng.standard_normal(spec.shape) + 1j * rng.standard_normal(spec.shape))


# -- grid --------------------------------------------------------------------


@invariant("grid.round_trip")
def _round_trip(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for shape in ((64,), (256, 256), (32, 16, 8)):
        f = _random_field(GridSpec.box(shape), rng)
        back = grid.inverse_transform(grid.forward_transform(f))
        worst = max(worst, _rel(back.values, f.values))
    return worst < 1e-12, f"max relative error {worst:.2e}"


@invariant("grid.plancherel")
def _plancherel(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for shape, ext in (((256, 256), (1.0, 2.0)), ((128,), (3.0,))):
        spec = GridSpec.box(shape, ext)
        f = _random_field(spec, rng)
        phys = grid.lp_norm(f, 2)
        spec_norm = grid.forward_transform(f).l2_norm()
        worst = max(worst, abs(phys - spec_norm) / phys)
    return worst < 1e-12, f"relative gap {worst:.2e}"


@invariant("grid.direct_dft")
def _direct_dft(seed):
    rng = np.random.default_rng(seed)
    spec = GridSpec.box((64,), (2.0,))
    f = _random_field(spec, rng)
    x = spec.coords(0)
    k = np.fft.fftfreq(64, 1 / 64)
    direct = np.exp(-2j * np.pi * np.outer(k, x) / 2.0) @ f.values / 64
    err = _rel(grid.forward_transform(f).coeffs, direct)
    return err < 1e-12, f"relative error {err:.2e}"


@invariant("grid.lp_norm_homogeneity_triangle")
def _lp_props(seed):
    rng = np.random.default_rng(seed)
    spec = GridSpec.box((32, 32))
    ok = True
    for p in (1.0, 1.5, 2.0, 4.0, np.inf):
        for _ in range(5):
            f, g = _random_field(spec, rng), _random_field(spec, rng)
            c = complex(rng.standard_normal(), rng.standard_normal())
            hom = abs(grid.lp_norm(f.with_values(c * f.values), p) - abs(c) * grid.lp_norm(f, p))
            ok &= hom <= 1e-12 * abs(c) * grid.lp_norm(f, p)
            ok &= grid.lp_norm(f + g, p) <= (grid.lp_norm(f, p) + grid.lp_norm(g, p)) * (1 + 1e-12)
    return bool(ok), "homogeneity and triangle inequality on random pairs"


@invariant("grid.mixed_norm_separable")
def _mixed(seed):
    spec = GridSpec.box((64, 32), dim_y=1)
    x, y = spec.mesh()
    fx = np.cos(2 * np.pi * x) + 2.0
    gy = np.exp(np.sin(2 * np.pi * y))
    u = PhaseSpaceField(spec, fx * gy)
    val = grid.mixed_norm(u, 4.0, 2.0)
    ref = grid.lp_norm(ScalarField(spec.x_spec(), fx[:, 0]), 4) * float(np.sqrt(np.mean(np.abs(gy) ** 2)))
    err = abs(val - ref) / ref
    return err < 1e-10, f"relative error {err:.2e}"


@invariant("grid.translate_additive")
def _translate(seed):
    rng = np.random.default_rng(seed)
    spec = GridSpec.box((64, 64), (1.0, 2.0))
    f = _random_field(spec, rng)
    h1, h2 = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2)
    a = grid.translate(grid.translate(f, h1), h2)
    b = grid.translate(f, h1 + h2)
    per = grid.translate(f, np.array(spec.extent))
    err = max(_rel(a.values, b.values), _rel(per.values, f.values))
    return err < 1e-12, f"relative error {err:.2e}"


# -- symbols -----------------------------------------------------------------


@invariant("symbols.projection_geometry")
def _projection(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for beta in BETAS:
        an = Anisotropy(beta)
        xi = rng.standard_normal((10_000, an.d)) * np.exp(rng.uniform(-4, 4, (10_000, 1)))
        eta = symbols.project(xi, an)
        lam = np.exp(rng.uniform(-3, 3, 10_000))
        worst = max(
            worst,
            float(np.max(np.abs(symbols.quasi_norm(eta, an) - 1))),
            _rel(symbols.project(eta, an), eta),
            _rel(symbols.project(symbols.dilate(xi, lam, an), an), eta),
        )
    return worst < 1e-12, f"max deviation {worst:.2e}"


@invariant("symbols.quasi_norm_scaling")
def _qn_scaling(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for beta in BETAS:
        an = Anisotropy(beta)
        xi = rng.standard_normal((2000, an.d))
        lam = np.exp(rng.uniform(-3, 3, 2000))
        worst = max(worst, _rel(symbols.quasi_norm(symbols.dilate(xi, lam, an), an), lam * symbols.quasi_norm(xi, an)))
    return worst < 1e-12, f"relative error {worst:.2e}"


@invariant("symbols.principal_homogeneity")
def _homog(seed):
    rng = np.random.default_rng(seed)
    cases = [
        ((1.0, 1.0), [Term((1, 0), 1.0), Term((0, 1), -0.7)]),
        ((1.0, 2.0), [Term((1, 0), 1.0), Term((0, 2), -0.3)]),
        ((2.0, 3.0), [Term((2, 0), 1.0), Term((0, 3), 2.0)]),
        ((1.0, 1.0, 1.0), [Term((1, 0, 0), 1.0), Term((0, 1, 0), 0.5), Term((0, 0, 1), -1.0)]),
    ]
    worst = 0.0
    for beta, terms in cases:
        A = PrincipalSymbol(tuple(terms), Anisotropy(beta))
        xi = rng.standard_normal((5000, len(beta)))
        lam = np.exp(rng.uniform(-2, 2, 5000))
        lhs = A.evaluate(symbols.dilate(xi, lam, A.aniso))
        rhs = lam * A.evaluate(xi)
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / np.maximum(np.abs(rhs), 1e-300))))
    return worst < 1e-12, f"relative error {worst:.2e}"


@invariant("symbols.t_gamma_marcinkiewicz")
def _tg_mz(seed):
    out = []
    for gamma in (0.5, 1.0, 2.0):
        an = Anisotropy((1.0, 2.0))
        r = symbols.marcinkiewicz_sup(lambda xi, g=gamma: symbols.t_gamma_symbol(xi, g, an), an)
        out.append((gamma, r.certified, r.constant))
    ok = all(c for _, c, _ in out)
    return ok, "; ".join(f"gamma={g}: C={c:.3g}" for g, _, c in out)


@invariant("symbols.delta_regularizer_monotone")
def _delta(seed):
    an = Anisotropy((1.0, 2.0))
    A = PrincipalSymbol((Term((1, 0), 1.0), Term((0, 2), -1.0)), an)
    gaps = [symbols.delta_regularizer_gap(A, d) for d in (1e-1, 1e-2, 1e-3, 1e-4)]
    ok = bool(np.all(np.diff(gaps) < 0) and gaps[-1] < 1e-3)
    return ok, f"gaps {', '.join(f'{g:.2e}' for g in gaps)}"


@invariant("symbols.degeneracy_dichotomy")
def _degeneracy(seed):
    spec = GridSpec.box((8, 8, 32), dim_y=1)
    y = spec.mesh()[2]
    an = Anisotropy((1.0, 1.0))
    moving = PrincipalSymbol((Term((1, 0), 1.0), Term((0, 1), y - 0.5)), an)
    heat = PrincipalSymbol((Term((1, 0), 1.0), Term((0, 2), -1e-2)), Anisotropy((1.0, 2.0)))
    r_mov, r_heat = symbols.degeneracy_scan(moving), symbols.degeneracy_scan(heat)
    ok = (not r_mov.rndc_holds) and r_mov.kingnl_holds and r_heat.rndc_holds
    return ok, f"transport min|A|={r_mov.min_abs_rndc:.2e}, heat min|A|={r_heat.min_abs_rndc:.2e}"


# -- multipliers -------------------------------------------------------------


@invariant("multipliers.eigenfunctions")
def _eigen(seed):
    spec = GridSpec.box((32, 32), (1.0, 2.0))
    an = Anisotropy((1.0, 2.0))
    x1, x2 = spec.mesh()
    k = (3, -5)
    e = ScalarField(spec, np.exp(2j * np.pi * (k[0] * x1 + k[1] * x2 / 2.0)))
    xi = np.array([[3.0, -2.5]])
    psi = SymbolOnManifold(lambda eta: 1 + eta[..., 0] ** 2 + 1j * eta[..., 1])
    out = multipliers.apply(multipliers.symbol_op(psi, an, spec), e)
    expect = psi(symbols.project(xi, an))[0] * e.values
    err = _rel(out.values, expect)
    return err < 1e-12, f"relative error {err:.2e}"


@invariant("multipliers.commute_and_compose")
def _commute(seed):
    rng = np.random.default_rng(seed)
    spec = GridSpec.box((32, 32))
    an = Anisotropy((1.0, 1.0))
    f = _random_field(spec, rng)
    a = multipliers.t_gamma_op(spec, 1.0, an)
    b = multipliers.MultiplierOp(multipliers.derivative_table(spec, (1, 0)))
    ab = multipliers.apply(a, multipliers.apply(b, f))
    ba = multipliers.apply(b, multipliers.apply(a, f))
    comp = multipliers.apply(a @ b, f)
    err = max(_rel(ab.values, ba.values), _rel(comp.values, ab.values))
    return err < 1e-12, f"relative error {err:.2e}"


@invariant("multipliers.integer_derivative")
def _int_deriv(seed):
    spec = GridSpec.box((64,), (2.0,))
    (x,) = spec.mesh()
    f = ScalarField(spec, np.sin(2 * np.pi * 3 * x / 2.0) + 0j)
    d2 = multipliers.fractional_derivative(f, (2,))
    expect = -((2 * np.pi * 1.5) ** 2) * f.values
    err = _rel(d2.values, expect)
    return err < 1e-10, f"relative error {err:.2e}"


@invariant("multipliers.chain_identity")
def _chain(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for beta in ((1.0, 2.0), (2.0, 3.0)):
        an = Anisotropy(beta)
        spec = GridSpec.box((64, 64))
        for gamma in (0.5, 1.0, 2.0):
            for j in range(2):
                comp, direct = multipliers.chain_tables(spec, gamma, an, j)
                for _ in range(5):
                    f = _random_field(spec, rng)
                    a = multipliers.MultiplierOp(comp).apply_array(f.values, spec)
                    b = multipliers.MultiplierOp(direct).apply_array(f.values, spec)
                    worst = max(worst, float(np.linalg.norm(a - b) / np.linalg.norm(b)))
    return worst < 1e-10, f"relative error {worst:.2e}"


@invariant("multipliers.t_gamma_grid_stable")
def _tg_stable(seed):
    an = Anisotropy((1.0, 2.0))
    rng = np.random.default_rng(seed)
    ratios = {}
    for N in (64, 128):
        spec = GridSpec.box((N, N), (8.0, 8.0))
        hp = 1.0 - symbols.cutoff_theta(spec.freq_grid(), an)
        vals = []
        for _ in range(20):
            f = _random_field(spec, rng)
            f = f.with_values(multipliers.MultiplierOp(hp).apply_array(f.values, spec))
            tf = multipliers.smoothing_T(f, 1.0, an)
            vals.append(multipliers.sobolev_norm(tf, 1.0, an, 2.0) / grid.lp_norm(f, 2.0))
        ratios[N] = max(vals)
    spread = max(ratios.values()) / min(ratios.values())
    return spread < 1.2, f"ratio spread {spread:.3f}"


# -- sequences ---------------------------------------------------------------


@invariant("sequences.oscillation_bounded_weak_null")
def _osc(seed):
    spec = GridSpec.box((256, 256))
    fam = sequences.oscillation(spec, (1, 1), lambda a, b: bump(np.hypot(a - 0.5, b - 0.5) / 0.35))
    b_ok, _ = fam.bounded_check()
    w_ok, _ = fam.weak_null_check(seed=seed)
    return b_ok and w_ok, f"bounded={b_ok}, weak_null={w_ok}"


@invariant("sequences.concentration_tails")
def _tails(seed):
    spec = GridSpec.box((4096,))
    ok = True
    worst = 0.0
    for p in (1.5, 2.0):
        fam = sequences.concentration(spec, step, p, (0.25,))
        levels = (0.5, 1.0, 2.0, 4.0, 8.0)
        rep = sequences.tail_report(fam, levels)
        ref = np.array([max(sequences.step_tail_closed_form(n, l, p) for n in fam.indices) for l in levels])
        mask = ref > 0
        worst = max(worst, float(np.max(np.abs(rep.sup_tail[mask] / ref[mask] - 1))))
        ok &= rep.monotone and rep.dominated and np.all(rep.sup_tail[~mask] == 0)
    return bool(ok and worst < 0.02), f"max relative error {worst:.2e}"


@invariant("sequences.truncation_band_partition")
def _bands(seed):
    rng = np.random.default_rng(seed)
    spec = GridSpec.box((64, 64))
    f = ScalarField(spec, 5 * rng.standard_normal(spec.shape) + 0j)
    top = int(np.ceil(np.abs(f.values).max()))
    total = sum(sequences.band(f, l).values for l in range(top + 1))
    part = np.abs(total - f.values).max()
    trunc = sequences.truncate(f, 2.0).values
    ok = part == 0 and np.all(np.abs(trunc) <= 2.0) and np.all((trunc == 0) | (trunc == f.values))
    return bool(ok), "bands partition the field; truncation zeroes values above the level"


@invariant("sequences.transport_solution")
def _transport_exact(seed):
    spec = GridSpec.box((64, 64, 16), dim_y=1)
    a = 0.5 + 0.25 * np.cos(2 * np.pi * spec.coords(2))
    fam = sequences.transport_wave(spec, a, indices=(2, 4, 8, 16))
    P = PrincipalSymbol((Term((1, 0), 1.0), Term((0, 1), a.reshape(1, 1, -1))), Anisotropy((1.0, 1.0)))
    battery = averaging.residual_battery(spec, seed=seed)
    prep = averaging.prepare_battery(spec, P, battery)
    res = [averaging.weak_residual(u, P, fam.source(n).field, prepared=prep) for n, u in fam.items()]
    return max(res) < 1e-10, f"max weak residual {max(res):.2e}"


# -- defect ------------------------------------------------------------------


@invariant("defect.hdist_oracle")
def _hdist(seed):
    spec = GridSpec.box((128, 128))
    an = Anisotropy((1.0, 1.0))
    x1, x2 = spec.mesh()
    chi = bump(np.hypot(x1 - 0.5, x2 - 0.5) / 0.35)
    phi1 = gaussian(x1, 0.5, 0.2) * gaussian(x2, 0.45, 0.25)
    phi2 = np.exp(-((x1 - 0.55) ** 2) / 0.05)
    psi = SymbolOnManifold(lambda e: 1 + e[..., 0] ** 2)
    fam = sequences.oscillation(spec, (1, 1), ScalarField(spec, chi + 0j), indices=(4, 8, 16, 32))
    est = defect.estimate(fam, fam, phi1, phi2, psi, an)
    eta = symbols.project(np.array([[1.0, 1.0]]), an)
    ref = np.conj(psi(eta)[0]) * spec.x_cell * np.sum(phi1 * np.conj(phi2) * chi ** 2)
    err = abs(est.limit - ref) / abs(ref)
    bounded = bool(np.all(np.abs(est.values) <= np.asarray(est.norm_bounds) * (1 + 1e-12)))
    return err < 0.02 and bounded, f"relative error {err:.2e}, bounded={bounded}"


@invariant("defect.positivity")
def _positivity(seed):
    spec = GridSpec.box((128, 128))
    an = Anisotropy((1.0, 1.0))
    x1, x2 = spec.mesh()
    chi = ScalarField(spec, bump(np.hypot(x1 - 0.5, x2 - 0.5) / 0.35) + 0j)
    phi = gaussian(x1, 0.5, 0.2) * gaussian(x2, 0.5, 0.2)
    fam = sequences.oscillation(spec, (2, 1), chi, indices=(4, 8, 16, 24))
    worst = np.inf
    for psi in (SymbolOnManifold.constant(1.0), SymbolOnManifold(lambda e: e[..., 1] ** 2)):
        est = defect.hmeasure_sample(fam, fam, phi, phi, psi, an)
        if est.extras["positive"] is not True:
            return False, "negative diagonal estimate"
        worst = min(worst, est.limit.real)
    return True, f"smallest diagonal limit {worst:.3e}"


@invariant("defect.commutator_decay")
def _comm(seed):
    spec = GridSpec.box((256, 256))
    an = Anisotropy((1.0, 1.0))
    x1, x2 = spec.mesh()
    fam = sequences.oscillation(spec, (1, 1), lambda a, b: bump(np.hypot(a - 0.5, b - 0.5) / 0.35))
    b = gaussian(x1, 0.5, 0.15) * gaussian(x2, 0.5, 0.15)
    psi = SymbolOnManifold(lambda e: e[..., 0] ** 2)
    res = [defect.commutator_decay(b, psi, fam, q, an) for q in (2.0, 4.0)]
    ok = all(r.passed and np.all(r.interpolation_ok) for r in res)
    return bool(ok), "slopes " + ", ".join(f"{r.slope:.2f}" for r in res)


@invariant("defect.band_and_basis")
def _decomp(seed):
    spec = GridSpec.box((64, 64, 16), dim_y=1)
    an = Anisotropy((1.0, 1.0))
    x1, x2, y = spec.mesh()
    chi = bump(np.hypot(x1 - 0.5, x2 - 0.5) / 0.35)
    gy = 1.5 + np.cos(2 * np.pi * y)
    fam = sequences.SequenceFamily(
        lambda n: PhaseSpaceField(spec, np.exp(2j * np.pi * n * (x1 + x2)) * chi * gy), np.inf, (2, 4, 8)
    )
    fam_v = sequences.oscillation(spec, (1, 1), ScalarField(spec.x_spec(), chi[..., 0] + 0j), (2, 4, 8))
    phi1 = np.exp(np.cos(2 * np.pi * y)) * gaussian(x1, 0.5, 0.2)
    psi = SymbolOnManifold(lambda e: 1 + e[..., 0] ** 2)
    br = defect.band_decomposition_check(fam, fam_v, phi1, None, psi, an, range(0, 4))
    kr = defect.basis_decomposition_check(fam, fam_v, phi1, None, psi, an, (1, 2, 4, 8, 16))
    ok = br.monotone and br.bounded and br.max_gap[-1] < 1e-3 * br.scale
    ok &= kr.max_gap[-1] < 1e-3 * kr.scale
    return bool(ok), f"band gap {br.max_gap[-1] / br.scale:.1e}, basis gap {kr.max_gap[-1] / kr.scale:.1e}"


@invariant("defect.localization_oracle")
def _loc(seed):
    spec = GridSpec.box((96, 96, 8), dim_y=1)
    xs = spec.x_spec()
    an = Anisotropy((1.0, 1.0))
    T, X = xs.x_mesh()
    amp = 1 + 0.5 * np.cos(2 * np.pi * spec.coords(2))
    phi = gaussian(X, 0.5, 0.16) * sequences.sin_window(T, 1.0, 2)
    psi = SymbolOnManifold(lambda e: 1 + e[..., 0] ** 2)
    P = PrincipalSymbol((Term((1, 0), 1.0), Term((0, 1), 0.5)), an)
    ladder = (4, 8, 16, 24)
    rel, oracle_err = [], 0.0
    for c in (0.5, -0.5):
        fu = sequences.transport_wave(spec, np.full(8, c), amplitude=amp, indices=ladder)
        chi = sequences.sin_window(T, 1.0, 4)
        fv = sequences.SequenceFamily(
            lambda n, c=c: ScalarField(xs, np.exp(2j * np.pi * n * (X - c * T)) * chi), np.inf, ladder
        )
        est = defect.localization_residual(P, fu, fv, phi, psi)
        rel.append(abs(est.limit) / est.scale)
        if c < 0:
            weight = spec.y_cell * amp.sum() * xs.x_cell * np.sum(chi ** 2 * np.conj(phi))
            ref = defect.oscillation_localization_oracle(P, psi, np.array([-c, 1.0]), weight)
            oracle_err = abs(est.limit - ref) / abs(ref)
    ok = rel[0] <= 0.03 and rel[1] > 0.1 and oracle_err < 0.02
    return ok, f"exact {rel[0]:.1e}, mismatched {rel[1]:.2f}, oracle error {oracle_err:.1e}"


@invariant("defect.regularized_zero")
def _reg(seed):
    spec = GridSpec.box((64, 96))
    an = Anisotropy((1.0, 2.0))
    kappa = 1e-3
    P = PrincipalSymbol((Term((1, 0), 1.0), Term((0, 2), -kappa)), an)
    fam = sequences.heat_wave(spec, kappa, (4, 8, 16, 32))
    t, x = spec.mesh()
    phi = gaussian(t, 0.5, 0.15) * sequences.sin_window(x, 1.0, 2)
    rep = defect.regularized_zero_test(P, fam, fam, phi, SymbolOnManifold.constant(1.0))
    return bool(rep.applicable and rep.concluded_zero), rep.reason or "concluded zero"


# -- averaging ---------------------------------------------------------------


@invariant("averaging.average_linear_and_bounded")
def _avg(seed):
    rng = np.random.default_rng(seed)
    spec = GridSpec.box((16, 16, 32), dim_y=1)
    u = PhaseSpaceField(spec, rng.standard_normal(spec.shape) + 0j)
    v = PhaseSpaceField(spec, rng.standard_normal(spec.shape) + 0j)
    rho = bump((spec.coords(2) - 0.5) / 0.4)
    lin = averaging.velocity_average(u + v, rho).values - averaging.velocity_average(u, rho).values - averaging.velocity_average(v, rho).values
    avg = averaging.velocity_average(u, rho)
    bound = grid.mixed_norm(u, 2.0, 2.0) * np.sqrt(spec.y_cell * np.sum(rho ** 2))
    ok = np.abs(lin).max() < 1e-12 and grid.lp_norm(avg, 2) <= bound * (1 + 1e-12)
    return bool(ok), "linear in u; bounded by Cauchy-Schwarz in y"


@invariant("averaging.transport_dichotomy")
def _dichotomy(seed):
    spec = GridSpec.box((96, 96, 64), dim_y=1)
    ys = spec.coords(2)
    rho = lambda y: bump((np.asarray(y) - 0.5) / 0.3)
    ladder = (4, 8, 12, 16, 24)
    verdicts = []
    for a in (ys, np.full(ys.shape, 1.0)):
        fam = sequences.transport_wave(spec, a, indices=ladder)
        avgs = {n: averaging.velocity_average(fam(n), rho(ys)) for n in fam.indices}
        verdicts.append(averaging.compactness_diagnostic(avgs, seed=seed).verdict)
    return verdicts == ["compact", "non-compact"], f"verdicts {verdicts}"


def run_suite(seed: int = 0, only=None) -> dict:
    from .cli import pmap

    selected = [(n, f) for n, f in REGISTRY if not only or any(n.startswith(o) for o in only)]

    def one(item):
        name, fn = item
        try:
            ok, detail = fn(seed)
            status = "passed" if ok else "failed"
        except Skip as exc:
            status, detail = "skipped", str(exc)
        except Exception as exc:  # an invariant that crashes has failed
            status, detail = "failed", f"{type(exc).__name__}: {exc}"
        return {"name": name, "status": status, "detail": detail}

    results = pmap(one, selected)
    summary = {
        "passed": sum(r["status"] == "passed" for r in results),
        "failed": sum(r["status"] == "failed" for r in results),
        "skipped": sum(r["status"] == "skipped" for r in results),
        "failures": [r["name"] for r in results if r["status"] == "failed"],
        "results": results,
    }
    return summary
