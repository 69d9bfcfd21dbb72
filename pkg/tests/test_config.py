import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from hdistlab.config import (
    MAGIC,
    ConfigError,
    ExperimentConfig,
    build_psi,
    evaluate_expr,
    load_schema,
    read_field,
    restrict,
    validate,
    write_field,
)
from hdistlab.grid import GridSpec

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
SPEC = GridSpec.box((8, 6, 4), (1.0, 2.0, 0.5), dim_y=1)

complex_arrays = hnp.arrays(
    np.complex128,
    hnp.array_shapes(min_dims=1, max_dims=3, min_side=1, max_side=5),
    elements=st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False),
)


@settings(max_examples=30, deadline=None)
@given(complex_arrays)
def test_field_file_round_trip(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("fields") / "f.bin"
    extents = tuple(float(i + 1) for i in range(values.ndim))
    write_field(path, values, extents)
    back, ext = read_field(path)
    assert np.array_equal(back, values) and ext == extents


def test_field_file_layout(tmp_path):
    path = tmp_path / "f.bin"
    vals = np.array([[1 + 2j, 3.0], [0, -1j], [5, 6]])
    write_field(path, vals, (1.0, 2.0))
    raw = path.read_bytes()
    assert raw[:8] == MAGIC
    assert int.from_bytes(raw[8:12], "little") == 2
    assert np.frombuffer(raw[12:28], "<f8").tolist() == [1.0, 2.0]
    assert np.frombuffer(raw[28:36], "<u4").tolist() == [3, 2]
    assert np.array_equal(np.frombuffer(raw[36:], "<c16").reshape(3, 2), vals)


def test_field_file_rejects_corruption(tmp_path):
    path = tmp_path / "f.bin"
    write_field(path, np.ones(4), (1.0,))
    path.write_bytes(path.read_bytes()[:-3])
    with pytest.raises(ConfigError, match="bytes"):
        read_field(path)
    path.write_bytes(b"NOTFIELD" + b"\0" * 16)
    with pytest.raises(ConfigError):
        read_field(path)
    with pytest.raises(ValueError):
        write_field(path, np.ones((2, 2)), (1.0,))


def test_expression_kinds():
    t, x, y = SPEC.mesh()
    assert evaluate_expr({"kind": "constant", "value": [1, 2]}, SPEC).item() == 1 + 2j
    poly = evaluate_expr({"kind": "polynomial", "axis": 2, "coeffs": [1, 0, 3]}, SPEC)
    assert np.allclose(poly, 1 + 3 * y ** 2)
    trig = evaluate_expr({"kind": "trig", "axis": 1, "function": "sin", "frequency": 2, "amplitude": 0.5}, SPEC)
    assert np.allclose(trig, 0.5 * np.sin(2 * np.pi * 2 * x / 2.0))
    total = evaluate_expr(
        {"kind": "product", "factors": [{"kind": "constant", "value": 2}, {"kind": "sum", "terms": [
            {"kind": "polynomial", "axis": 0, "coeffs": [0, 1]}, {"kind": "constant", "value": 1}]}]},
        SPEC,
    )
    assert np.allclose(total, 2 * (t + 1))
    g = evaluate_expr({"kind": "gaussian", "axes": [0, 1], "center": [0.5, 1.0], "width": 0.2}, SPEC)
    assert g.shape == (8, 6, 1) and np.isclose(g.max(), g[4, 3, 0])
    with pytest.raises(ConfigError, match="unknown"):
        evaluate_expr({"kind": "python", "code": "1"}, SPEC)
    with pytest.raises(ConfigError, match="axis"):
        evaluate_expr({"kind": "polynomial", "axis": 5, "coeffs": [1]}, SPEC)


def test_file_expression(tmp_path):
    a = np.arange(4) + 0.5j
    write_field(tmp_path / "a.bin", a, (0.5,))
    vals = evaluate_expr({"kind": "file", "path": "a.bin", "axes": [2]}, SPEC, tmp_path)
    assert vals.shape == (1, 1, 4) and np.array_equal(vals.ravel(), a)
    with pytest.raises(ConfigError, match="does not match"):
        evaluate_expr({"kind": "file", "path": "a.bin", "axes": [1]}, SPEC, tmp_path)
    with pytest.raises(ConfigError, match="off the grid"):
        evaluate_expr({"kind": "file", "path": "a.bin", "axes": [2]}, SPEC, tmp_path, mesh=SPEC.mesh())


def test_restrict():
    y_only = evaluate_expr({"kind": "polynomial", "axis": 2, "coeffs": [0, 1]}, SPEC)
    assert restrict(y_only, SPEC, (2,)).shape == (4,)
    with pytest.raises(ConfigError, match="varies"):
        restrict(y_only, SPEC, (0, 1))


def test_build_psi():
    eta = np.array([[0.6, 0.8], [1.0, 0.0]])
    assert np.allclose(build_psi(None)(eta), 1.0)
    assert np.allclose(build_psi({"kind": "constant", "value": 2.5})(eta), 2.5)
    psi = build_psi({"kind": "monomials", "terms": [{"powers": [2, 0]}, {"powers": [1, 1], "coefficient": [0, 1]}]})
    assert np.allclose(psi(eta), eta[:, 0] ** 2 + 1j * eta[:, 0] * eta[:, 1])


def test_schema_rejects_unknown_keys_and_bad_values():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"grid": {"samples": [16]}, "surprise": 1})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"grid": {"samples": [16]}, "expected": "maybe"})
    with pytest.raises(ConfigError, match="grid"):
        ExperimentConfig.from_dict({"grid": {"samples": [15]}})
    with pytest.raises(ConfigError, match="minimum"):
        ExperimentConfig.from_dict({"grid": {"samples": [16, 16]}, "anisotropy": [1, -1]})


def test_load_reports_unreadable_files(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="cannot read"):
        ExperimentConfig.load(bad)
    with pytest.raises(ConfigError):
        ExperimentConfig.load(tmp_path / "missing.json")


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.json")), ids=lambda p: p.stem)
def test_shipped_configs_round_trip(path):
    cfg = ExperimentConfig.load(path)
    again = ExperimentConfig.from_dict(json.loads(cfg.dumps()), cfg.base)
    assert again == cfg and again.dumps() == cfg.dumps()
    if cfg.get("family"):
        fam = cfg.family("family", cfg.ladder[:2])
        assert fam.indices == cfg.ladder[:2]
    if cfg.get("symbol"):
        assert len(cfg.terms()) == len(cfg.doc["symbol"]["terms"])


def test_family_errors():
    base = {"grid": {"samples": [32, 32]}}
    with pytest.raises(ConfigError, match="missing parameter"):
        ExperimentConfig.from_dict(dict(base, family={"name": "oscillation", "params": {}})).family()
    with pytest.raises(ConfigError, match="Nyquist"):
        ExperimentConfig.from_dict(dict(base, family={"name": "oscillation", "params": {"k": [1, 0]}})).family(ladder=(4, 32))
    with pytest.raises(ConfigError, match="no family_v"):
        ExperimentConfig.from_dict(base).family("family_v")


def test_y_function_and_defaults():
    doc = {"grid": {"samples": [8, 8, 16], "dim_y": 1}, "rho": {"kind": "bump", "axis": 2, "center": 0.5, "width": 0.3}}
    cfg = ExperimentConfig.from_dict(doc)
    rho = cfg.y_function("rho")
    assert rho(0.5) == pytest.approx(1.0) and rho(0.9) == 0.0
    assert rho(np.array([0.5, 0.1])).shape == (2,)
    assert cfg.require == ("kingnl",) and cfg.seed == 0 and cfg.test("missing") == {}
    assert cfg.anisotropy.beta == (1.0, 1.0)


@pytest.mark.parametrize("name", ["config", "verdict", "summary", "check_symbol"])
def test_shipped_schemas_are_valid(name):
    import jsonschema

    jsonschema.Draft7Validator.check_schema(load_schema(name))


def test_validate_wraps_errors():
    with pytest.raises(ConfigError, match="summary"):
        validate({"passed": 1}, "summary")
