"""
Command line runner.

    hdistlab check-symbol --config heat.json
    hdistlab run averaging --config transport.json --out results/
    hdistlab verify [--out dir]

Exit codes: 0 pass, 1 verdict or invariant failure, 2 usage or config error.
The worker count for independent computations is read from HDISTLAB_WORKERS.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import EXPERIMENTS, ConfigError, ExperimentConfig, validate
from .sequences import SequenceFamily, sin_window, truncate
from .symbols import (
    InvalidAnisotropy,
    PrincipalSymbol,
    classify_leading,
    cutoff_theta,
    degeneracy_scan,
    dilate,
    fourier_power,
    marcinkiewicz_sup,
    project,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def workers() -> int:
    try:
        return max(1, int(os.environ.get("HDISTLAB_WORKERS", "1")))
    except ValueError:
        return 1


def pmap(func, items):
    """Ordered map, threaded when more than one worker is configured."""
    items = list(items)
    n = workers()
    if n == 1 or len(items) < 2:
        return [func(i) for i in items]
    with ThreadPoolExecutor(n) as ex:
        return list(ex.map(func, items))


# -- deterministic artifacts -----------------------------------------------


def _clean(obj):
    """JSON-ready copy: numpy scalars and arrays to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(obj.real), _clean(obj.imag)]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isfinite(v):
            return v
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


# -- check-symbol ----------------------------------------------------------


def _homogeneity_error(A: PrincipalSymbol, seed: int, count: int = 500) -> float:
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal((count, A.aniso.d))
    lam = np.exp(rng.uniform(np.log(0.1), np.log(10.0), count))
    lhs = A.evaluate(dilate(xi, lam, A.aniso))
    rhs = lam * A.evaluate(xi)
    den = np.maximum(np.abs(rhs), 1e-300)
    err = np.abs(lhs - rhs) / den
    return float(err[np.abs(rhs) > 1e-12 * np.abs(rhs).max()].max(initial=0.0))


def _term_symbol(alpha, aniso):
    def m(xi):
        return (1.0 - cutoff_theta(xi, aniso)) * fourier_power(project(xi, aniso), alpha)

    return m


def check_symbol(cfg: ExperimentConfig) -> tuple[dict, bool]:
    aniso = cfg.anisotropy
    terms = cfg.terms()
    report = {"leading": [], "homogeneity_error": None, "marcinkiewicz": [], "degeneracy": {}, "passed": False}
    try:
        lead = classify_leading(terms, aniso)
        A = PrincipalSymbol(tuple(terms), aniso)
    except InvalidAnisotropy as exc:
        report["error"] = str(exc)
        return report, False
    except ValueError as exc:
        report["error"] = f"invalid anisotropy: {exc}"
        return report, False
    report["leading"] = list(lead)
    report["homogeneity_error"] = _homogeneity_error(A, cfg.seed)
    homog_ok = report["homogeneity_error"] <= 1e-10

    def certify(k):
        r = marcinkiewicz_sup(_term_symbol(terms[k].alpha, aniso), aniso)
        return {"term": k, "alpha": list(terms[k].alpha), "constant": r.constant, "certified": r.certified, "reason": r.reason}

    report["marcinkiewicz"] = pmap(certify, lead)
    mz_ok = all(m["certified"] for m in report["marcinkiewicz"])
    scan = degeneracy_scan(A)
    report["degeneracy"] = dict(scan.as_dict(), required=list(cfg.require))
    deg_ok = all(scan.rndc_holds if c == "rndc" else scan.kingnl_holds for c in cfg.require)
    report["passed"] = bool(homog_ok and mz_ok and deg_ok)
    return report, report["passed"]


# -- experiments -----------------------------------------------------------


def _x_axes(spec):
    return tuple(range(spec.dim_x))


def _default_phi(xs) -> np.ndarray:
    phi = np.ones(xs.x_shape)
    for ax, c in enumerate(xs.x_mesh()):
        phi = phi * sin_window(c, xs.extent[ax], 2)
    return phi


def _second_family(cfg: ExperimentConfig, fam, ladder):
    if cfg.get("family_v") is not None:
        return cfg.family("family_v", ladder)
    return fam


def _test_functions(cfg, fu):
    """phi1 over the axes of the family's fields, phi2 over x; phi2 defaults to phi1 on x-only fields."""
    spec = cfg.grid
    phase = fu(fu.indices[0]).values.ndim > spec.dim_x
    phi1 = cfg.expr("phi1", None, tuple(range(spec.ndim)) if phase else _x_axes(spec))
    phi2 = cfg.expr("phi2", None, _x_axes(spec))
    if phi2 is None and not phase and cfg.get("phi2") is None:
        phi2 = phi1
    return phi1, phi2


def _limit_record(values, ns) -> tuple[complex, float]:
    from .defect import fit_limit

    lim, res, _ = fit_limit(ns, values)
    return lim, res


def run_commutator(cfg, ladder):
    from . import defect

    spec, aniso = cfg.grid, cfg.anisotropy
    fam = cfg.family("family", ladder)
    b = cfg.expr("b", None, _x_axes(spec))
    if b is None:
        raise ConfigError("commutator experiment needs a coefficient b")
    qs = cfg.test("commutator").get("values", [2, 4])
    results = [defect.commutator_decay(b, cfg.psi(), fam, float(q), aniso) for q in qs]
    rows = [(r.q, n, v, ok) for r in results for n, v, ok in r.csv_rows()]
    lims = [_limit_record(r.norms, r.indices) for r in results]
    worst = max(range(len(results)), key=lambda i: abs(lims[i][0]))
    passed = all(r.passed and bool(np.all(r.interpolation_ok)) for r in results)
    details = {"slopes": [r.slope for r in results], "q": list(qs), "passed": [r.passed for r in results]}
    record = {
        "verdict": "zero" if passed else "nonzero",
        "limit_re": lims[worst][0].real,
        "limit_im": 0.0,
        "fit_residual": lims[worst][1],
        "details": details,
    }
    return ("q", "n", "norm", "interpolation_ok"), rows, record


def _estimate_record(est, rel_tol, **details):
    verdict = "zero" if est.is_zero(rel_tol) else est.verdict
    rec = dict(est.verdict_record(), verdict=verdict)
    rec["details"] = dict(details, scale=est.scale, method=est.method)
    return rec


def run_hdist(cfg, ladder):
    from . import defect

    aniso = cfg.anisotropy
    fu = cfg.family("family", ladder)
    fv = _second_family(cfg, fu, ladder)
    phi1, phi2 = _test_functions(cfg, fu)
    est = defect.hmeasure_sample(fu, fv, phi1, phi2, cfg.psi(), aniso)
    tol = cfg.test("hdist").get("tolerance")
    rec = _estimate_record(est, tol, positive=est.extras.get("positive"), rev2_gap_last=float(est.extras["rev2_gap"][-1]))
    return ("n", "re", "im", "norm_bound"), est.csv_rows(), rec


def _averages_family(cfg, fam):
    from .averaging import velocity_average

    spec = fam(fam.indices[0]).spec
    rho = cfg.y_function("rho")
    if rho is None:
        raise ConfigError("velocity averages need rho")
    ry = np.asarray(rho(spec.coords(spec.dim_x)), dtype=float)
    cache = {}

    def gen(n):
        if n not in cache:
            cache.clear()
            cache[n] = velocity_average(fam(n), ry)
        return cache[n]

    level = 2 * max(float(np.abs(gen(n).values).max()) for n in fam.indices)
    return SequenceFamily(lambda n: truncate(gen(n), level), 2.0, fam.indices)


def run_localization(cfg, ladder):
    from . import defect

    spec = cfg.grid
    A = PrincipalSymbol(tuple(cfg.terms()), cfg.anisotropy)
    fu = cfg.family("family", ladder)
    fv = cfg.family("family_v", ladder) if cfg.get("family_v") else _averages_family(cfg, fu)
    phi = cfg.expr("phi1", None, _x_axes(spec))
    phi = _default_phi(spec.x_spec()) if phi is None else phi
    est = defect.localization_residual(A, fu, fv, phi, cfg.psi())
    tol = cfg.test("localization").get("tolerance", 0.03)
    src = est.extras.get("source_norms")
    rec = _estimate_record(est, tol, relative=abs(est.limit) / est.scale if est.scale else 0.0, source_norms=src)
    return ("n", "re", "im", "norm_bound"), est.csv_rows(), rec


def run_averaging(cfg, ladder, seed):
    from .averaging import averaging_experiment

    A = PrincipalSymbol(tuple(cfg.terms()), cfg.anisotropy)
    fam = cfg.family("family", ladder)
    rho = cfg.y_function("rho")
    if rho is None:
        raise ConfigError("averaging experiment needs rho")
    support = cfg.get("rho_support")
    env = bool(cfg.test("envelope")) and support is not None
    rep = averaging_experiment(fam, A, rho, tuple(support) if support else None, cfg.psi(), envelope=env, seed=seed)
    comp = rep["compactness"]
    res = rep["residuals"]["weak_residual"]
    rows = [(n, comp["norms_l2"][i], comp["norms_l1"][i], res[i]) for i, n in enumerate(rep["indices"])]
    lim, fres = _limit_record(np.asarray(comp["norms_l2"], dtype=complex), rep["indices"])
    rec = {"verdict": rep["verdict"], "limit_re": lim.real, "limit_im": lim.imag, "fit_residual": fres, "details": rep}
    return ("n", "avg_l2", "avg_l1", "weak_residual"), rows, rec


def _decomp_inputs(cfg, ladder):
    fu = cfg.family("family", ladder)
    fv = _second_family(cfg, fu, ladder)
    if fv(fv.indices[0]).values.ndim > cfg.grid.dim_x:
        raise ConfigError("the second family must live on the x grid; set family_v")
    phi1, phi2 = _test_functions(cfg, fu)
    return fu, fv, phi1, phi2


def run_bands(cfg, ladder):
    from . import defect

    fu, fv, phi1, phi2 = _decomp_inputs(cfg, ladder)
    top = int(np.ceil(max(np.abs(u.values).max() for _, u in fu.items())))
    levels = cfg.test("bands").get("values") or list(range(top + 1))
    r = defect.band_decomposition_check(fu, fv, phi1, phi2, cfg.psi(), cfg.anisotropy, levels)
    rows = [(L, n, float(r.gaps[i, j]), float(r.tail_bounds[i, j])) for i, L in enumerate(r.levels) for j, n in enumerate(r.indices)]
    final = float(r.max_gap[-1])
    ok = r.monotone and r.bounded and final < 1e-3 * r.scale
    lim, fres = _limit_record(r.direct, r.indices)
    rec = {
        "verdict": "zero" if ok else "nonzero",
        "limit_re": lim.real,
        "limit_im": lim.imag,
        "fit_residual": fres,
        "details": {"monotone": r.monotone, "bounded": r.bounded, "max_gap": r.max_gap, "scale": r.scale},
    }
    return ("level", "n", "gap", "tail_bound"), rows, rec


def run_basis(cfg, ladder):
    from . import defect

    fu, fv, phi1, phi2 = _decomp_inputs(cfg, ladder)
    counts = cfg.test("basis").get("values") or [1, 2, 4, 8, 16]
    r = defect.basis_decomposition_check(fu, fv, phi1, phi2, cfg.psi(), cfg.anisotropy, counts)
    rows = [(c, n, float(r.gaps[i, j])) for i, c in enumerate(r.counts) for j, n in enumerate(r.indices)]
    ok = float(r.max_gap[-1]) < 1e-3 * r.scale
    lim, fres = _limit_record(r.direct, r.indices)
    rec = {
        "verdict": "zero" if ok else "nonzero",
        "limit_re": lim.real,
        "limit_im": lim.imag,
        "fit_residual": fres,
        "details": {"monotone": r.monotone, "max_gap": r.max_gap, "scale": r.scale},
    }
    return ("count", "n", "gap"), rows, rec


def run_experiment(name: str, cfg: ExperimentConfig, ladder=None, seed=None):
    ladder = tuple(ladder or cfg.ladder)
    seed = cfg.seed if seed is None else seed
    runners = {
        "commutator": lambda: run_commutator(cfg, ladder),
        "hdist": lambda: run_hdist(cfg, ladder),
        "localization": lambda: run_localization(cfg, ladder),
        "averaging": lambda: run_averaging(cfg, ladder, seed),
        "bands": lambda: run_bands(cfg, ladder),
        "basis": lambda: run_basis(cfg, ladder),
    }
    if name not in runners:
        raise UsageError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}")
    header, rows, rec = runners[name]()
    expected = cfg.get("expected")
    rec = dict(rec, experiment=name, expected=expected, match=expected is None or rec["verdict"] == expected)
    rec = _clean(rec)
    validate(rec, "verdict")
    return header, rows, rec


def write_artifacts(out: Path, name: str, header, rows, rec) -> None:
    atomic_write(out / f"{name}.csv", csv_text(header, rows))
    atomic_write(out / "verdict.json", dumps(rec))


# -- argument handling -----------------------------------------------------


def _ladder(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad ladder {text!r}") from None
    if len(vals) < 2 or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("ladder needs at least two positive integers")
    return vals


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hdistlab", description="Defect functional experiments on periodic grids.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    cs = sub.add_parser("check-symbol", help="certify a principal symbol")
    cs.add_argument("--config", required=True)
    cs.add_argument("--out")
    cs.add_argument("--seed", type=int)
    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("experiment")
    run.add_argument("--config", required=True)
    run.add_argument("--out")
    run.add_argument("--seed", type=int)
    run.add_argument("--ladder", type=_ladder)
    ver = sub.add_parser("verify", help="run the invariant suite")
    ver.add_argument("--out")
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--only", action="append", default=None, help="run only invariants whose name starts with this")
    return p


def _load(path, seed) -> ExperimentConfig:
    cfg = ExperimentConfig.load(path)
    if seed is not None:
        cfg = ExperimentConfig.from_dict(dict(cfg.doc, seed=seed), cfg.base)
    return cfg


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"hdistlab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "check-symbol":
            cfg = _load(args.config, args.seed)
            report, ok = check_symbol(cfg)
            report = _clean(report)
            validate(report, "check_symbol")
            text = dumps(report)
            if args.out:
                atomic_write(Path(args.out) / "check_symbol.json", text)
            sys.stdout.write(text)
            if "error" in report:
                print(report["error"], file=sys.stderr)
            return EXIT_OK if ok else EXIT_FAIL
        if args.command == "run":
            if args.experiment not in EXPERIMENTS:
                raise UsageError(f"unknown experiment {args.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
            cfg = _load(args.config, args.seed)
            header, rows, rec = run_experiment(args.experiment, cfg, args.ladder, args.seed)
            out = Path(args.out or cfg.get("output_dir") or ".")
            write_artifacts(out, args.experiment, header, rows, rec)
            print(f"{args.experiment}: verdict {rec['verdict']} (expected {rec['expected']})")
            return EXIT_OK if rec["match"] else EXIT_FAIL
        if args.command == "verify":
            from .verify import run_suite

            summary = run_suite(seed=args.seed, only=args.only)
            text = dumps(summary)
            if args.out:
                atomic_write(Path(args.out) / "verify.json", text)
            sys.stdout.write(text)
            if summary["failed"]:
                print("failed invariants: " + ", ".join(summary["failures"]), file=sys.stderr)
                return EXIT_FAIL
            return EXIT_OK
    except (UsageError, ConfigError) as exc:
        print(f"hdistlab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
