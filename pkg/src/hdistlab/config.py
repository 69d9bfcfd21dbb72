"""
Experiment configuration: JSON documents validated against the shipped
schema, a small whitelist of coefficient expressions, and the binary
sampled-field layout.

Field file layout (all little-endian):

    magic   8 bytes  b"HDFIELD1"
    ndim    uint32
    extents ndim x float64
    counts  ndim x uint32
    data    prod(counts) x complex128, row-major (C order)
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .grid import GridSpec
from .profiles import bump, gaussian, step
from .symbols import Anisotropy, SymbolOnManifold, Term

MAGIC = b"HDFIELD1"
EXPERIMENTS = ("commutator", "hdist", "localization", "averaging", "bands", "basis")


class ConfigError(ValueError):
    """Malformed or unresolvable configuration."""


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("hdistlab").joinpath("schemas", f"{name}.schema.json").read_text("utf-8")
    return json.loads(text)


def validate(doc: Any, schema: str) -> None:
    try:
        jsonschema.validate(doc, load_schema(schema))
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"{schema}: {exc.message}") from None


# -- binary field files ----------------------------------------------------


def write_field(path, values: np.ndarray, extents) -> None:
    values = np.ascontiguousarray(values, dtype="<c16")
    extents = tuple(float(e) for e in extents)
    if len(extents) != values.ndim:
        raise ValueError("one extent per array axis")
    header = MAGIC + struct.pack(f"<I{values.ndim}d{values.ndim}I", values.ndim, *extents, *values.shape)
    Path(path).write_bytes(header + values.tobytes())


def read_field(path) -> tuple[np.ndarray, tuple[float, ...]]:
    raw = Path(path).read_bytes()
    if raw[:8] != MAGIC:
        raise ConfigError(f"{path}: not a field file")
    (ndim,) = struct.unpack_from("<I", raw, 8)
    off = 12
    extents = struct.unpack_from(f"<{ndim}d", raw, off)
    off += 8 * ndim
    counts = struct.unpack_from(f"<{ndim}I", raw, off)
    off += 4 * ndim
    expected = int(np.prod(counts)) * 16
    if len(raw) - off != expected:
        raise ConfigError(f"{path}: body has {len(raw) - off} bytes, header implies {expected}")
    data = np.frombuffer(raw, dtype="<c16", offset=off).reshape(counts).astype(complex)
    return data, tuple(extents)


# -- expressions -----------------------------------------------------------


def _number(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    return complex(v) if isinstance(v, complex) else float(v)


def _axis(expr: dict, spec: GridSpec) -> int:
    ax = int(expr.get("axis", 0))
    if not 0 <= ax < spec.ndim:
        raise ConfigError(f"axis {ax} outside the {spec.ndim}-axis grid")
    return ax


def evaluate_expr(expr: dict, spec: GridSpec, base: Path | None = None, mesh=None) -> np.ndarray:
    """Sample a whitelisted expression on the grid of ``spec``.

    Kinds: constant, polynomial, trig, bump, gaussian, sum, product, file.
    Results broadcast against ``spec.shape``.  ``mesh`` replaces the grid
    coordinates (one broadcastable array per axis) to evaluate off the grid;
    file expressions only exist on the grid.
    """
    kind = expr.get("kind")
    on_grid = mesh is None
    mesh = spec.mesh() if on_grid else mesh
    if kind == "constant":
        return np.full((1,) * len(mesh), _number(expr.get("value", 1.0)))
    if kind == "polynomial":
        s = mesh[_axis(expr, spec)]
        return np.polynomial.polynomial.polyval(s, np.array([_number(c) for c in expr["coeffs"]]))
    if kind == "trig":
        s = mesh[_axis(expr, spec)]
        freq = float(expr.get("frequency", 1.0))
        fn = {"cos": np.cos, "sin": np.sin, "exp": lambda z: np.exp(1j * z)}[expr.get("function", "cos")]
        arg = 2 * np.pi * freq * s / spec.extent[_axis(expr, spec)] + float(expr.get("phase", 0.0))
        return _number(expr.get("amplitude", 1.0)) * fn(arg)
    if kind in ("bump", "gaussian"):
        axes = expr.get("axes", [expr.get("axis", 0)])
        centers = np.broadcast_to(np.asarray(expr.get("center", 0.5), dtype=float), (len(axes),))
        width = float(expr.get("width", 0.25))
        r2 = sum((mesh[int(a)] - c) ** 2 for a, c in zip(axes, centers))
        out = bump(np.sqrt(r2) / width) if kind == "bump" else gaussian(np.sqrt(r2), 0.0, width)
        return _number(expr.get("amplitude", 1.0)) * out
    if kind == "sum":
        return sum(evaluate_expr(e, spec, base, mesh) for e in expr["terms"])
    if kind == "product":
        out = np.ones((1,) * len(mesh))
        for e in expr["factors"]:
            out = out * evaluate_expr(e, spec, base, mesh)
        return out
    if kind == "file":
        if not on_grid:
            raise ConfigError("file expressions cannot be evaluated off the grid")
        path = Path(expr["path"])
        if base is not None and not path.is_absolute():
            path = base / path
        data, extents = read_field(path)
        axes = [int(a) for a in expr.get("axes", range(spec.ndim))]
        if data.ndim != len(axes):
            raise ConfigError(f"{path}: {data.ndim} axes in file, {len(axes)} declared")
        for a, n, e in zip(axes, data.shape, extents):
            if n != spec.samples[a] or not np.isclose(e, spec.extent[a]):
                raise ConfigError(f"{path}: axis {a} does not match the grid")
        shape = [1] * spec.ndim
        for a, n in zip(axes, data.shape):
            shape[a] = n
        order = np.argsort(axes)
        return np.transpose(data, order).reshape(shape)
    raise ConfigError(f"unknown expression kind {kind!r}")


def restrict(values: np.ndarray, spec: GridSpec, axes) -> np.ndarray:
    """Drop broadcast axes outside ``axes``; fail if the expression varies along them."""
    values = np.broadcast_to(values, spec.shape)
    for ax in range(spec.ndim):
        if ax not in axes:
            first = np.take(values, [0], axis=ax)
            if not np.allclose(values, first, rtol=0, atol=1e-14 * max(1.0, np.abs(values).max())):
                raise ConfigError(f"expression varies along axis {ax} where it must be constant")
    idx = tuple(slice(None) if ax in axes else 0 for ax in range(spec.ndim))
    return np.array(values[idx])


def build_psi(doc: dict | None) -> SymbolOnManifold:
    if doc is None:
        return SymbolOnManifold.constant(1.0)
    kind = doc["kind"]
    if kind == "constant":
        return SymbolOnManifold.constant(_number(doc.get("value", 1.0)))
    if kind == "monomials":
        terms = [(np.asarray(t["powers"], dtype=int), _number(t.get("coefficient", 1.0))) for t in doc["terms"]]

        def f(eta):
            out = np.zeros(eta.shape[:-1], dtype=complex)
            for pw, c in terms:
                out = out + c * np.prod(eta ** pw, axis=-1)
            return out

        return SymbolOnManifold(f, "monomials")
    raise ConfigError(f"unknown manifold symbol kind {kind!r}")


# -- the config object -----------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    doc: dict
    base: Path | None = field(default=None, compare=False)

    @classmethod
    def from_dict(cls, doc: dict, base: Path | None = None) -> "ExperimentConfig":
        validate(doc, "config")
        cfg = cls(json.loads(json.dumps(doc)), base)
        cfg.grid
        if "anisotropy" in doc:
            cfg.anisotropy
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            doc = json.loads(path.read_text("utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from None
        return cls.from_dict(doc, path.parent)

    def dumps(self) -> str:
        return json.dumps(self.doc, sort_keys=True, indent=2) + "\n"

    def get(self, key, default=None):
        return self.doc.get(key, default)

    @property
    def seed(self) -> int:
        return int(self.doc.get("seed", 0))

    @property
    def ladder(self) -> tuple[int, ...]:
        from .sequences import DEFAULT_LADDER

        return tuple(self.doc.get("ladder", DEFAULT_LADDER))

    @property
    def grid(self) -> GridSpec:
        g = self.doc["grid"]
        samples = tuple(g["samples"])
        dim_y = int(g.get("dim_y", 0))
        try:
            return GridSpec.box(samples, g.get("extent"), dim_y)
        except ValueError as exc:
            raise ConfigError(f"grid: {exc}") from None

    @property
    def anisotropy(self) -> Anisotropy:
        beta = self.doc.get("anisotropy")
        if beta is None:
            return Anisotropy.isotropic(self.grid.dim_x)
        try:
            return Anisotropy(tuple(float(b) for b in beta))
        except ValueError as exc:
            raise ConfigError(f"anisotropy: {exc}") from None

    def expr(self, key: str, default=None, axes=None):
        doc = self.doc.get(key)
        if doc is None:
            return default
        spec = self.grid
        vals = evaluate_expr(doc, spec, self.base)
        return vals if axes is None else restrict(vals, spec, axes)

    def terms(self) -> list[Term]:
        sym = self.doc.get("symbol")
        if sym is None:
            raise ConfigError("config has no symbol")
        spec = self.grid
        out = []
        for t in sym["terms"]:
            coeff = evaluate_expr(t.get("coefficient", {"kind": "constant", "value": 1}), spec, self.base)
            if np.all(coeff == coeff.flat[0]):
                coeff = np.asarray(coeff.flat[0])
            out.append(Term(tuple(t["alpha"]), coeff))
        return out

    @property
    def require(self) -> tuple[str, ...]:
        return tuple(self.doc.get("symbol", {}).get("require", ["kingnl"]))

    def y_function(self, key: str):
        """Callable y -> value for an expression over the single y axis."""
        doc = self.doc.get(key)
        if doc is None:
            return None
        spec = self.grid
        if spec.dim_y != 1:
            raise ConfigError(f"{key}: needs exactly one y axis")

        def f(y):
            y = np.asarray(y, dtype=float)
            mesh = [np.zeros((1,) * y.ndim)] * spec.dim_x + [y]
            val = np.asarray(evaluate_expr(doc, spec, self.base, mesh))
            val = np.broadcast_to(val, np.broadcast_shapes(val.shape, y.shape)).reshape(y.shape)
            return val.real[()]

        return f

    def psi(self) -> SymbolOnManifold:
        return build_psi(self.doc.get("psi"))

    def family(self, key: str = "family", ladder=None):
        from . import sequences

        doc = self.doc.get(key)
        if doc is None:
            raise ConfigError(f"config has no {key}")
        spec = self.grid
        params = dict(doc.get("params", {}))
        indices = tuple(ladder or self.ladder)
        name = doc["name"]
        try:
            if name == "oscillation":
                prof = params.get("profile", {"kind": "constant", "value": 1})
                vals = restrict(evaluate_expr(prof, spec, self.base), spec, range(spec.dim_x))
                return sequences.oscillation(spec, params["k"], lambda *m: vals, indices)
            if name == "concentration":
                base_fn = {"step": step, "bump": bump}[params.get("profile", "step")]

                def shape(*args):
                    return np.prod([base_fn(a) for a in args], axis=0)

                return sequences.concentration(spec, shape, float(params["p"]), params["x0"], 1.0, indices)
            if name == "transport_wave":
                a = restrict(evaluate_expr(params.get("a", {"kind": "constant", "value": 1}), spec, self.base), spec, (2,))
                amp = params.get("amplitude")
                amp = None if amp is None else restrict(evaluate_expr(amp, spec, self.base), spec, (2,))
                return sequences.transport_wave(
                    spec,
                    a.real,
                    amplitude=amp,
                    indices=indices,
                    window_power=int(params.get("window_power", 4)),
                    windowed=bool(params.get("windowed", True)),
                )
            if name == "heat_wave":
                return sequences.heat_wave(
                    spec, float(params.get("kappa", 1e-4)), indices, int(params.get("window_power", 4))
                )
        except KeyError as exc:
            raise ConfigError(f"{key}: missing parameter {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from None
        raise ConfigError(f"unknown family {name!r}")

    def test(self, name: str) -> dict:
        for t in self.doc.get("tests", []):
            if t["name"] == name:
                return t
        return {}
