"""Command-line front end: parse a TOML job config, dispatch the
computation, and emit JSON and CSV reports.

Job kinds: curvature | certify | variation-scan | warp-shift |
soliton-check | dw-root | catalog-verify.

Exit codes: 0 verdict Positive / success, 1 verdict Violated / not found,
2 config error (unknown or missing keys, schema violations), 3 numeric or
IO error.  A report is written for codes 0, 1 and 3; a config error (2)
aborts before any computation.

Determinism: the JSON report contains only data determined by the config
and seed (wall time goes to stderr, not into the file), so identical
configs yield byte-identical reports regardless of thread count.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Optional

import numpy as np

try:
    import tomllib as tomli
except ModuleNotFoundError:  # Python < 3.11
    import tomli

from . import __version__
from . import catalog
from .certifier import certify_positivity, find_certifying_t
from .dsl import parse as parse_expr
from .errors import (
    ConfigError, CurvCertError, HypothesisViolated, NoSignChange, NotFound,
)
from .geometry import ChartManifold, min_ricci_eig, sample_points
from .soliton import (
    DWIntegralSpec, SolitonData, classify, dw_find_roots, dw_integral,
    soliton_residual,
)
from .warped import WarpedProduct, find_shift, mixed_block_residual

JOB_KINDS = (
    "curvature", "certify", "variation-scan", "warp-shift",
    "soliton-check", "dw-root", "catalog-verify",
)

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


# ---------------------------------------------------------------------------
# Config schema
# ---------------------------------------------------------------------------

_MANIFOLD_KEYS = {"builtin", "params", "dim", "domain", "metric", "name"}
_SAMPLER_KEYS = {"grid", "seed", "margin"}
_OUTPUT_KEYS = {"dir", "formats", "name"}
_SCAN_KEYS = {"t_start", "step", "max_iters", "count_h", "count_v"}
_WARP_KEYS = {"f", "a_start", "step", "max_steps"}
_SOLITON_KEYS = {"rho", "f", "field", "tol"}
_DW_KEYS = {"r", "n", "p", "q", "kappa_lo", "kappa_hi", "sweep", "tol",
            "flag_tol"}
_CATALOG_KEYS = {"samples", "seed", "m", "tol"}

_SECTIONS: dict[str, dict[str, set]] = {
    "curvature": {"manifold": _MANIFOLD_KEYS, "sampler": _SAMPLER_KEYS},
    "certify": {"manifold": _MANIFOLD_KEYS, "sampler": _SAMPLER_KEYS},
    "variation-scan": {"submersion": {"builtin"}, "scan": _SCAN_KEYS,
                       "sampler": _SAMPLER_KEYS},
    "warp-shift": {"base": _MANIFOLD_KEYS, "fiber": _MANIFOLD_KEYS,
                   "warp": _WARP_KEYS, "sampler": _SAMPLER_KEYS},
    "soliton-check": {"manifold": _MANIFOLD_KEYS, "soliton": _SOLITON_KEYS,
                      "sampler": _SAMPLER_KEYS},
    "dw-root": {"dw": _DW_KEYS},
    "catalog-verify": {"catalog": _CATALOG_KEYS},
}
_TOP_KEYS = {"job", "output"}


def _check_keys(table: dict, allowed: set, path: str) -> None:
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key {path}{key!r}")


def load_config(path: str, job: str) -> dict:
    """Parse and schema-validate the TOML config for the given job kind."""
    try:
        with open(path, "rb") as fh:
            cfg = tomli.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    if job not in _SECTIONS:
        raise ConfigError(f"unknown job kind {job!r}")
    sections = _SECTIONS[job]
    _check_keys(cfg, _TOP_KEYS | set(sections), f"{path}: ")
    cfg_job = cfg.get("job")
    if cfg_job is not None and cfg_job != job:
        raise ConfigError(
            f"{path}: config declares job {cfg_job!r} but {job!r} was requested"
        )
    for name, keys in sections.items():
        if name not in cfg:
            raise ConfigError(f"{path}: missing section {name!r}")
        if not isinstance(cfg[name], dict):
            raise ConfigError(f"{path}: section {name!r} must be a table")
        _check_keys(cfg[name], keys, f"{path}: {name}.")
    if "output" in cfg:
        _check_keys(cfg["output"], _OUTPUT_KEYS, f"{path}: output.")
    return cfg


def build_manifold(spec: dict):
    """A manifold from a config table: catalog builtin or inline chart."""
    if "builtin" in spec:
        if any(k in spec for k in ("dim", "domain", "metric")):
            raise ConfigError("manifold: give either builtin or dim/domain/"
                              "metric, not both")
        obj = catalog.builtin(spec["builtin"], *spec.get("params", []))
        if isinstance(obj, tuple):
            raise ConfigError(
                f"builtin {spec['builtin']!r} is a submersion, not a manifold"
            )
        return obj
    for key in ("dim", "domain", "metric"):
        if key not in spec:
            raise ConfigError(f"manifold: missing key {key!r}")
    dim = spec["dim"]
    variables = [f"x{i}" for i in range(dim)]
    grid = spec["metric"]
    if len(grid) != dim or any(len(row) != dim for row in grid):
        raise ConfigError("manifold: metric must be a dim x dim grid of "
                          "expressions")
    exprs = [[parse_expr(src, variables) for src in row] for row in grid]
    domain = np.asarray(spec["domain"], dtype=float)
    if domain.shape != (dim, 2):
        raise ConfigError("manifold: domain must be dim rows of [lo, hi]")
    return ChartManifold(dim=dim, domain=domain, exprs=exprs,
                         name=spec.get("name", "chart"))


def _sampler(cfg: dict, args: argparse.Namespace) -> tuple[int, int, float]:
    s = cfg.get("sampler", {})
    grid = args.grid if args.grid is not None else s.get("grid", 3)
    seed = args.seed if args.seed is not None else s.get("seed", 0)
    margin = args.margin if args.margin is not None else s.get("margin", 1e-6)
    return int(grid), int(seed), float(margin)


# ---------------------------------------------------------------------------
# Job runners: each returns (payload, csv_rows, exit_code).
# csv_rows are (point coords, direction coords, value) triples.
# ---------------------------------------------------------------------------

def _point_table(m, grid: int, seed: int, threads: int,
                 value_fn: Callable[[Any], tuple[float, list]]):
    """value_fn at every sampled point, evaluated in index order regardless
    of thread count (the executor map preserves input order)."""
    points = [np.asarray(p, dtype=float) for p in sample_points(
        m, grid=grid, seed=seed)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(value_fn, points))
    else:
        results = [value_fn(p) for p in points]
    return points, results


def _min_eig_with_direction(m):
    def fn(p):
        g = m.metric(p)
        ric = m.curvature(p).ricci
        import scipy.linalg
        w, v = scipy.linalg.eigh(ric, g)
        return float(w[0]), v[:, 0].tolist()
    return fn


def run_curvature(cfg, args):
    m = build_manifold(cfg["manifold"])
    grid, seed, margin = _sampler(cfg, args)
    points, results = _point_table(m, grid, seed, args.threads,
                                   _min_eig_with_direction(m))
    rows = [(p.tolist(), d, val) for p, (val, d) in zip(points, results)]
    min_eig = min(val for val, _ in results)
    payload = {
        "min_ricci_eig": min_eig,
        "points": len(points),
        "verdict": "success",
    }
    return payload, rows, EXIT_OK


def run_certify(cfg, args):
    m = build_manifold(cfg["manifold"])
    grid, seed, margin = _sampler(cfg, args)
    points, results = _point_table(m, grid, seed, args.threads,
                                   _min_eig_with_direction(m))
    rows = [(p.tolist(), d, val) for p, (val, d) in zip(points, results)]
    best = min(range(len(results)), key=lambda i: results[i][0])
    min_eig = results[best][0]
    verdict = "Positive" if min_eig > margin else "Violated"
    payload = {
        "min_ricci_eig": min_eig,
        "witness_point": points[best].tolist(),
        "witness_direction": results[best][1],
        "margin": margin,
        "verdict": verdict,
    }
    return payload, rows, EXIT_OK if verdict == "Positive" else EXIT_VIOLATED


def run_variation_scan(cfg, args):
    name = cfg["submersion"]["builtin"]
    obj = catalog.builtin(name)
    if not isinstance(obj, tuple):
        raise ConfigError(f"builtin {name!r} is not a submersion")
    _, data = obj
    scan = cfg["scan"] if "scan" in cfg else {}
    _, seed, margin = _sampler(cfg, args)
    try:
        t_star, report = find_certifying_t(
            data,
            t_start=float(scan.get("t_start", 0.0)),
            step=float(scan.get("step", 0.5)),
            max_iters=int(scan.get("max_iters", 60)),
            margin=margin,
            count_h=int(scan.get("count_h", 64)),
            count_v=int(scan.get("count_v", 32)),
            seed=seed,
        )
    except (NotFound, HypothesisViolated) as exc:
        payload = {"verdict": "NotFound", "detail": str(exc),
                   "t_star": None}
        return payload, [], EXIT_VIOLATED
    rows = [([report.t], x.tolist() + v.tolist(), delta)
            for x, v, delta in report.samples]
    payload = {
        "t_star": t_star,
        "max_delta": report.max_delta,
        "verdict": report.verdict,
        "samples": len(report.samples),
    }
    return payload, rows, EXIT_OK


def run_warp_shift(cfg, args):
    base = build_manifold(cfg["base"])
    fiber = build_manifold(cfg["fiber"])
    warp = cfg["warp"]
    if "f" not in warp:
        raise ConfigError("warp: missing key 'f'")
    grid, seed, margin = _sampler(cfg, args)
    f = parse_expr(str(warp["f"]), [f"x{i}" for i in range(base.dim)])
    try:
        a_star, report = find_shift(
            base, fiber, f,
            a_start=float(warp.get("a_start", 0.0)),
            step=float(warp.get("step", 1.0)),
            max_steps=int(warp.get("max_steps", 60)),
            grid=grid, margin=margin, seed=seed,
        )
    except (NotFound, HypothesisViolated) as exc:
        payload = {"verdict": "NotFound", "detail": str(exc), "a_star": None}
        return payload, [], EXIT_VIOLATED
    w = WarpedProduct(base=base, fiber=fiber, f=f, a=a_star)
    m = w.manifold()
    points, results = _point_table(m, grid, seed, args.threads,
                                   _min_eig_with_direction(m))
    rows = [(p.tolist(), d, val) for p, (val, d) in zip(points, results)]
    mixed = max(mixed_block_residual(w, p) for p in points)
    payload = {
        "a_star": a_star,
        "min_ricci_eig": report.min_eig,
        "mixed_block_residual": mixed,
        "verdict": report.verdict,
    }
    return payload, rows, EXIT_OK


def run_soliton_check(cfg, args):
    m = build_manifold(cfg["manifold"])
    sol = cfg["soliton"]
    if "rho" not in sol:
        raise ConfigError("soliton: missing key 'rho'")
    rho = float(sol["rho"])
    tol = float(sol.get("tol", 1e-8))
    variables = [f"x{i}" for i in range(m.dim)]
    if ("f" in sol) == ("field" in sol):
        raise ConfigError("soliton: give exactly one of 'f' and 'field'")
    if "f" in sol:
        data = SolitonData(manifold=m, rho=rho,
                           f=parse_expr(str(sol["f"]), variables))
    else:
        field = [parse_expr(str(src), variables) for src in sol["field"]]
        if len(field) != m.dim:
            raise ConfigError("soliton: 'field' needs one expression per "
                              "coordinate")
        data = SolitonData(manifold=m, rho=rho, X=field)
    grid, seed, _ = _sampler(cfg, args)
    points = [np.asarray(p, dtype=float) for p in sample_points(
        m, grid=grid, seed=seed)]

    def fn(p):
        return soliton_residual(data, [p]), []
    points, results = points, [fn(p) for p in points]
    rows = [(p.tolist(), [], val) for p, (val, _) in zip(points, results)]
    worst = max(val for val, _ in results)
    verdict = "Positive" if worst <= tol else "Violated"
    payload = {
        "max_residual": worst,
        "classification": classify(rho),
        "rho": rho,
        "tol": tol,
        "verdict": verdict,
    }
    return payload, rows, EXIT_OK if verdict == "Positive" else EXIT_VIOLATED


def run_dw_root(cfg, args):
    dw = cfg["dw"]
    for key in ("r", "n", "p", "q"):
        if key not in dw:
            raise ConfigError(f"dw: missing key {key!r}")
    spec = DWIntegralSpec(r=int(dw["r"]), n=[int(v) for v in dw["n"]],
                          p=[float(v) for v in dw["p"]],
                          q=[float(v) for v in dw["q"]])
    lo = float(dw.get("kappa_lo", -3.0))
    hi = float(dw.get("kappa_hi", 3.0))
    sweep = int(dw.get("sweep", 200))
    flag_tol = float(dw.get("flag_tol", 1e-8))
    quad_tol = float(dw.get("tol", 1e-12))
    kappas = np.linspace(lo, hi, sweep)
    rows = [([float(k)], [], dw_integral(spec.with_kappa(float(k)),
                                         tol=quad_tol)) for k in kappas]
    try:
        roots = dw_find_roots(spec, lo, hi, sweep=sweep, flag_tol=flag_tol,
                              quad_tol=quad_tol)
    except NoSignChange as exc:
        payload = {"verdict": "NotFound", "detail": str(exc), "roots": [],
                   "admissible": spec.admissible}
        return payload, rows, EXIT_VIOLATED
    payload = {
        "roots": [{"kappa1": r.kappa1, "value": r.value,
                   "non_einstein": r.non_einstein} for r in roots],
        "admissible": spec.admissible,
        "verdict": "success",
    }
    return payload, rows, EXIT_OK


def run_catalog_verify(cfg, args):
    cat = cfg.get("catalog", {})
    samples = int(cat.get("samples", 1000))
    seed = int(cat.get("seed", 0))
    m = int(cat.get("m", 3))
    tol = float(cat.get("tol", 1e-12))
    rng = np.random.default_rng(seed)
    checks = []

    worst = 0.0
    for _ in range(samples):
        e = catalog.random_sp2(rng)
        q1 = catalog.random_unit_quat(rng)
        q2 = catalog.random_unit_quat(rng)
        worst = max(worst,
                    catalog.bullet_action(q1, e).constraint_residual(),
                    catalog.star_action(q1, e).constraint_residual())
        lhs = catalog.star_action(q1, catalog.bullet_action(q2, e))
        rhs = catalog.bullet_action(q2, catalog.star_action(q1, e))
        for n in ("a", "b", "c", "d"):
            u, v = getattr(lhs, n), getattr(rhs, n)
            worst = max(worst, abs(u.w - v.w), abs(u.x - v.x),
                        abs(u.y - v.y), abs(u.z - v.z))
    checks.append(("sp2_actions", worst))

    worst = 0.0
    for _ in range(samples):
        e = catalog.random_sp2m(m, rng)
        qs = [catalog.random_unit_quat(rng) for _ in range(m)]
        worst = max(worst, catalog.sp2m_constraint(
            catalog.wilhelm_action(qs, e)))
    checks.append(("wilhelm_action", worst))

    worst = 0.0
    for _ in range(samples):
        e = catalog.random_sp2(rng)
        for pt in (catalog.h_map(e.a, e.b), catalog.h_tilde_map(e.a, e.b)):
            worst = max(worst, abs(float(np.dot(pt, pt)) - 1.0))
    checks.append(("hopf_maps_on_sphere", worst))

    rows = [([float(i)], [], residual) for i, (_, residual) in
            enumerate(checks)]
    worst = max(residual for _, residual in checks)
    verdict = "Positive" if worst <= tol else "Violated"
    payload = {
        "checks": {name: residual for name, residual in checks},
        "samples": samples,
        "max_residual": worst,
        "tol": tol,
        "verdict": verdict,
    }
    return payload, rows, EXIT_OK if verdict == "Positive" else EXIT_VIOLATED


_RUNNERS = {
    "curvature": run_curvature,
    "certify": run_certify,
    "variation-scan": run_variation_scan,
    "warp-shift": run_warp_shift,
    "soliton-check": run_soliton_check,
    "dw-root": run_dw_root,
    "catalog-verify": run_catalog_verify,
}


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def emit_report(report: dict, rows, out_dir: str, name: str,
                formats: list[str]) -> dict[str, str]:
    """JSON (UTF-8, sorted keys, shortest round-trip floats) and CSV
    (header row; point coords, direction coords, value)."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    if "csv" in formats:
        csv_path = os.path.join(out_dir, f"{name}.csv")
        npoint = max((len(p) for p, _, _ in rows), default=0)
        ndir = max((len(d) for _, d, _ in rows), default=0)
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"p{i}" for i in range(npoint)]
                            + [f"d{i}" for i in range(ndir)] + ["value"])
            for p, d, val in rows:
                pad_p = list(p) + [""] * (npoint - len(p))
                pad_d = list(d) + [""] * (ndir - len(d))
                writer.writerow([repr(float(v)) if v != "" else ""
                                 for v in pad_p + pad_d] + [repr(float(val))])
        paths["csv"] = csv_path
        report = dict(report, csv_path=os.path.basename(csv_path))
    if "json" in formats:
        json_path = os.path.join(out_dir, f"{name}.json")
        text = json.dumps(_jsonable(report), sort_keys=True,
                          ensure_ascii=False, indent=2, allow_nan=False)
        with open(json_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        paths["json"] = json_path
    return paths


def _diag(msg: str) -> None:
    color = sys.stderr.isatty() and not os.environ.get("NO_COLOR")
    prefix = "\x1b[31merror:\x1b[0m" if color else "error:"
    print(f"{prefix} {msg}", file=sys.stderr)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curvcert",
        description="curvature computation and positivity certification",
    )
    parser.add_argument("--version", action="version",
                        version=f"curvcert {__version__}")
    sub = parser.add_subparsers(dest="job", required=True)
    for kind in JOB_KINDS:
        p = sub.add_parser(kind)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--grid", type=int, default=None)
        p.add_argument("--margin", type=float, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--format", default="json,csv")
        p.add_argument("--threads", type=int, default=1)
    return parser


def run(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        cfg = load_config(args.config, args.job)
    except ConfigError as exc:
        _diag(str(exc))
        return EXIT_CONFIG

    output = cfg.get("output", {})
    out_dir = args.out if args.out is not None else output.get("dir", ".")
    formats = [f.strip() for f in args.format.split(",") if f.strip()]
    if args.out is None and "formats" in output:
        formats = list(output["formats"])
    bad = [f for f in formats if f not in ("json", "csv")]
    if bad:
        _diag(f"unknown format {bad[0]!r}")
        return EXIT_CONFIG
    name = output.get("name", args.job.replace("-", "_"))

    try:
        payload, rows, code = _RUNNERS[args.job](cfg, args)
    except ConfigError as exc:
        _diag(str(exc))
        return EXIT_CONFIG
    except CurvCertError as exc:
        payload = {"verdict": "Error", "detail": str(exc),
                   "error_kind": type(exc).__name__}
        rows, code = [], EXIT_NUMERIC

    grid, seed, margin = _sampler(cfg, args)
    report = {
        "config": _jsonable(cfg),
        "job": args.job,
        "version": __version__,
        "seed": seed,
        "result": payload,
    }
    try:
        paths = emit_report(report, rows, out_dir, name, formats)
    except OSError as exc:
        _diag(f"cannot write report: {exc}")
        return EXIT_NUMERIC
    elapsed = time.perf_counter() - start
    verdict = payload.get("verdict", "success")
    written = ", ".join(sorted(paths.values()))
    print(f"{args.job}: {verdict} ({elapsed:.2f}s) -> {written}",
          file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
