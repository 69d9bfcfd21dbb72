"""
Weakly null sequence families with known analytic behaviour, and the
pointwise truncation and band operators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .grid import GridSpec, PhaseSpaceField, ScalarField, inner, lp_norm
from .multipliers import bessel_table, MultiplierOp
from .profiles import gaussian
from .symbols import Anisotropy

DEFAULT_LADDER = (4, 8, 16, 32, 64)


@dataclass(frozen=True)
class TransportSource:
    """Right-hand side G_n of a windowed transport family."""

    field: PhaseSpaceField
    neg_sobolev_norm: float


@dataclass(frozen=True, eq=False)
class SequenceFamily:
    """n -> field, bounded in L^p; fields are generated on demand."""

    generator: Callable[[int], object]
    p_bound: float
    indices: tuple[int, ...] = DEFAULT_LADDER
    limit: object = None
    label: str = "family"
    source: Callable[[int], TransportSource] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(n) for n in self.indices))
        if len(self.indices) < 2:
            raise ValueError("a family needs at least two indices")

    def __call__(self, n: int):
        return self.generator(n)

    def items(self):
        for n in self.indices:
            yield n, self.generator(n)

    def with_indices(self, indices: Sequence[int]) -> "SequenceFamily":
        return SequenceFamily(
            self.generator, self.p_bound, tuple(indices), self.limit, self.label, self.source, self.meta
        )

    def norms(self, p: float | None = None) -> np.ndarray:
        p = self.p_bound if p is None else p
        return np.array([lp_norm(u, p) for _, u in self.items()])

    def bounded_check(self, tol: float = 0.05) -> tuple[bool, np.ndarray]:
        """Uniform bound: relative spread of the sampled L^p norms within ``tol``."""
        nrm = self.norms()
        ref = nrm.max()
        if ref == 0:
            return True, nrm
        return bool((ref - nrm.min()) / ref <= tol), nrm

    def weak_null_check(self, battery=None, seed: int = 0, floor: float = 1e-9) -> tuple[bool, np.ndarray]:
        """Pair against smooth test fields; each pairing must trend to zero.

        Returns the pass flag and the table of |<u_n, g>| (rows: test fields).
        """
        first = self.generator(self.indices[0])
        if battery is None:
            battery = test_battery(first.spec, first.values.ndim, seed=seed)
        rows = np.array([[abs(inner(u, g)) for _, u in self.items()] for g in battery])
        scale = max(self.norms(2.0).max(), 1e-300)
        nlog = np.log(np.asarray(self.indices, dtype=float))
        ok = True
        for row in rows:
            if row.max() < floor * scale * np.sqrt(2):
                continue
            slope = np.polyfit(nlog, np.log(np.maximum(row, 1e-300)), 1)[0]
            if not (slope < 0 and row[-1] < row[0]):
                ok = False
        return ok, rows


def test_battery(spec: GridSpec, ndim: int, count: int = 10, seed: int = 0):
    """Smooth, periodised Gaussian test fields with random centres and widths."""
    rng = np.random.default_rng(seed)
    axes = range(ndim)
    out = []
    for _ in range(count):
        vals = np.ones(())
        for ax, c in zip(axes, spec.mesh(axes)):
            L = spec.extent[ax]
            mu = rng.uniform(0.3, 0.7) * L
            sig = rng.uniform(0.08, 0.15) * L
            dist = (c - mu + L / 2) % L - L / 2
            vals = vals * gaussian(dist, 0.0, sig)
        out.append(vals * np.exp(1j * rng.uniform(0, 2 * np.pi)))
    return out


def _as_callable_profile(profile, spec: GridSpec):
    if isinstance(profile, ScalarField):
        vals = profile.values
        return lambda *mesh: vals
    if callable(profile):
        return profile
    raise TypeError("profile must be a ScalarField or a callable of the x mesh")


def oscillation(
    spec: GridSpec,
    k: Sequence[int],
    profile,
    indices: Sequence[int] = DEFAULT_LADDER,
) -> SequenceFamily:
    """u_n(x) = exp(2 pi i n k.x / L) profile(x)."""
    k = np.atleast_1d(np.asarray(k, dtype=int))
    xs = spec.x_spec()
    if k.size != xs.dim_x or not np.any(k):
        raise ValueError("k must be a non-zero integer vector with one entry per x axis")
    for n in indices:
        if np.any(np.abs(n * k) >= np.asarray(xs.samples) // 2):
            raise ValueError(f"mode n*k = {n * k} reaches the Nyquist limit of {xs.samples}")
    prof = ScalarField.from_function(xs, _as_callable_profile(profile, xs)).values
    mesh = xs.x_mesh()
    phase = sum(kj * m / L for kj, m, L in zip(k, mesh, xs.extent))

    def gen(n):
        return ScalarField(xs, np.exp(2j * np.pi * n * phase) * prof)

    return SequenceFamily(gen, np.inf, tuple(indices), None, f"oscillation{tuple(k)}", meta={"k": k.tolist()})


def concentration(
    spec: GridSpec,
    profile: Callable,
    p: float,
    x0: Sequence[float],
    support: float = 1.0,
    indices: Sequence[int] = DEFAULT_LADDER,
) -> SequenceFamily:
    """u_n(x) = n^(d/p) profile(n (x - x0)); ``profile`` vanishes outside [-support, support]^d."""
    xs = spec.x_spec()
    d = xs.dim_x
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.size != d:
        raise ValueError("x0 needs one entry per x axis")
    nmin = min(indices)
    for j in range(d):
        lo, hi = x0[j] - support / nmin, x0[j] + support / nmin
        if lo < 0 or hi > xs.extent[j]:
            raise ValueError(f"support of the n = {nmin} member wraps the box on axis {j}")
    mesh = xs.x_mesh()

    def gen(n):
        args = [n * (m - c) for m, c in zip(mesh, x0)]
        return ScalarField(xs, n ** (d / p) * profile(*args))

    return SequenceFamily(gen, p, tuple(indices), None, f"concentration(p={p})", meta={"x0": x0.tolist()})


def step_tail_closed_form(n: int, l: float, p: float) -> float:
    """||u_n - T_l u_n||_1 for u_n = n^(1/p) 1_[0, 1/n) on the line."""
    return n ** (1.0 / p - 1.0) if n ** (1.0 / p) > l else 0.0


def sin_window(t, period: float, power: int = 4):
    """sin(pi t / T)^(2 power): smooth, periodic, band-limited to ``power`` harmonics."""
    return np.sin(np.pi * np.asarray(t) / period) ** (2 * power)


def sin_window_derivative(t, period: float, power: int = 4):
    s = np.sin(np.pi * np.asarray(t) / period)
    c = np.cos(np.pi * np.asarray(t) / period)
    return 2 * power * (np.pi / period) * s ** (2 * power - 1) * c


def profile_bandwidth(w: Callable, samples: int = 512, rel: float = 1e-13) -> int:
    """Highest harmonic of a 1-periodic profile above ``rel`` of the largest one."""
    s = np.arange(samples) / samples
    c = np.abs(np.fft.fft(w(s))) / samples
    k = np.abs(np.fft.fftfreq(samples) * samples)
    sig = c > rel * c.max()
    return int(k[sig].max()) if np.any(sig) else 0


def transport_wave(
    spec: GridSpec,
    a: np.ndarray,
    w: Callable = lambda s: np.exp(2j * np.pi * s),
    amplitude: np.ndarray | None = None,
    indices: Sequence[int] = DEFAULT_LADDER,
    window_power: int = 4,
    windowed: bool = True,
    source_exponent: float = 2.0,
) -> SequenceFamily:
    """u_n(t, x, y) = amp(y) w(n (x - a(y) t) / L_x) chi(t) on a (t, x, y) grid.

    Without the window this solves u_t + a(y) u_x = 0 exactly.  With it the
    equation holds with source G_n = chi'(t) amp(y) w(...), which is exposed via
    ``family.source(n)`` together with its Bessel order -1 surrogate norm
    (L^1 in y of the L^q norm in (t, x), q = ``source_exponent``).
    """
    if spec.dim_x != 2 or spec.dim_y != 1:
        raise ValueError("transport_wave needs a (t, x, y) grid")
    a = np.asarray(a, dtype=float).reshape(-1)
    if a.size == 1:
        a = np.full(spec.y_shape, float(a[0]))
    if a.shape != spec.y_shape:
        raise ValueError("a must be sampled on the y grid")
    amp = np.ones(spec.y_shape) if amplitude is None else np.asarray(amplitude, dtype=complex).reshape(spec.y_shape)
    T, Lx, _ = spec.extent
    Nt, Nx, _ = spec.samples
    kw = profile_bandwidth(w)
    for n in indices:
        fx = n * kw / Lx
        ft = fx * np.abs(a).max() + (window_power / T if windowed else 0.0)
        if fx >= Nx / (2 * Lx) or ft >= Nt / (2 * T):
            raise ValueError(f"n = {n}: transport wave exceeds the Nyquist limit of the (t, x) grid")
    t, x, _ = spec.mesh()
    ay = a.reshape(1, 1, -1)
    ampy = amp.reshape(1, 1, -1)
    chi = sin_window(t, T, window_power) if windowed else np.ones_like(t)
    dchi = sin_window_derivative(t, T, window_power)
    aniso = Anisotropy((1.0, 1.0))
    xs = spec.x_spec()
    lam = MultiplierOp(bessel_table(xs, -1.0, aniso), "bessel^-1")

    def wave(n):
        return ampy * w(n * (x - ay * t) / Lx)

    @lru_cache(maxsize=2)
    def gen(n):
        return PhaseSpaceField(spec, wave(n) * chi)

    @lru_cache(maxsize=2)
    def source(n):
        g = PhaseSpaceField(spec, wave(n) * dchi) if windowed else PhaseSpaceField.zeros(spec)
        smooth = np.abs(lam.apply_array(g.values, xs))
        q = source_exponent
        per_y = (xs.x_cell * np.sum(smooth ** q, axis=(0, 1))) ** (1.0 / q)
        return TransportSource(g, float(spec.y_cell * per_y.sum()))

    meta = {"a": a, "amplitude": amp, "window_power": window_power, "windowed": windowed}
    return SequenceFamily(gen, np.inf, tuple(indices), None, "transport_wave", source, meta)


def heat_wave(
    spec: GridSpec,
    kappa: float = 1e-4,
    indices: Sequence[int] = DEFAULT_LADDER,
    window_power: int = 4,
) -> SequenceFamily:
    """u_n(t, x) = exp(2 pi i n x / L) exp(-4 pi^2 kappa n^2 t / L^2) chi(t): solves u_t = kappa u_xx up to chi'."""
    if spec.dim_x != 2:
        raise ValueError("heat_wave needs (t, x) axes")
    T, Lx = spec.extent[:2]
    t, x = spec.mesh((0, 1))
    shape = (1,) * spec.dim_y
    chi = sin_window(t, T, window_power).reshape(t.shape + shape)
    tt = t.reshape(t.shape + shape)
    xx = x.reshape(x.shape + shape)
    for n in indices:
        if n >= spec.samples[1] // 2:
            raise ValueError(f"n = {n} reaches the Nyquist limit in x")

    def gen(n):
        rate = 4 * np.pi ** 2 * kappa * n ** 2 / Lx ** 2
        vals = np.exp(2j * np.pi * n * xx / Lx - rate * tt) * chi
        return PhaseSpaceField(spec, np.broadcast_to(vals, spec.shape))

    return SequenceFamily(gen, 2.0, tuple(indices), None, "heat_wave", meta={"kappa": kappa})


def truncate(u, l: float):
    """T_l: keep values with |u| <= l, zero the rest (not clamped)."""
    v = u.values
    return u.with_values(np.where(np.abs(v) <= l, v, 0.0))


def band(u, l: int):
    """u on {l < |u| <= l + 1}, zero elsewhere."""
    if l < 0 or int(l) != l:
        raise ValueError("band index must be a non-negative integer")
    a = np.abs(u.values)
    return u.with_values(np.where((a > l) & (a <= l + 1), u.values, 0.0))


@dataclass(frozen=True)
class TailReport:
    levels: tuple[float, ...]
    tails: np.ndarray  # rows: levels, columns: family indices
    holder: np.ndarray
    indices: tuple[int, ...]

    @property
    def sup_tail(self) -> np.ndarray:
        return self.tails.max(axis=1)

    @property
    def sup_holder(self) -> np.ndarray:
        return self.holder.max(axis=1)

    @property
    def monotone(self) -> bool:
        s = self.sup_tail
        return bool(np.all(np.diff(s) <= 1e-14 * max(s.max(), 1.0)))

    @property
    def dominated(self) -> bool:
        return bool(np.all(self.tails <= self.holder * (1 + 1e-12) + 1e-300))


def tail_report(family: SequenceFamily, l_values: Sequence[float], p: float | None = None) -> TailReport:
    """sup_n ||u_n - T_l u_n||_1 per level l, with meas(|u_n| > l)^(1/p') ||u_n||_p."""
    p = family.p_bound if p is None else p
    if not p > 1:
        raise ValueError("tail report needs p > 1")
    levels = tuple(sorted(float(l) for l in l_values))
    tails = np.zeros((len(levels), len(family.indices)))
    holder = np.zeros_like(tails)
    for j, (n, u) in enumerate(family.items()):
        a = np.abs(u.values)
        cell = u.spec.x_cell * (u.spec.y_cell if isinstance(u, PhaseSpaceField) and u.spec.dim_y else 1.0)
        unorm = lp_norm(u, p) if np.isfinite(p) else float(a.max())
        for i, l in enumerate(levels):
            over = a > l
            tails[i, j] = cell * a[over].sum()
            meas = cell * over.sum()
            expo = 1.0 - 1.0 / p if np.isfinite(p) else 1.0
            holder[i, j] = meas ** expo * unorm
    return TailReport(levels, tails, holder, family.indices)
