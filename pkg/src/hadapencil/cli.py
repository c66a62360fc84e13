"""Command-line front door.

    hadapencil predict <config.json>    pencil assembly and slope predictions
    hadapencil validate <config.json>   the same plus FEM branch validation
    hadapencil dift <example-name>      degenerate IFT demo on a catalog example
    hadapencil catalog                  list built-in names

Exit codes: 0 all gates pass, 1 validation failure, 2 schema error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import config, dift, pipeline

EXIT_OK, EXIT_VALIDATION, EXIT_SCHEMA, EXIT_NUMERICAL = 0, 1, 2, 3

log = logging.getLogger("hadapencil")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    return obj


def write_json(path: Path, data) -> None:
    path.write_text(json.dumps(_jsonable(data), sort_keys=True, indent=2) + "\n")


def _error(kind: str, message: str, **extra) -> dict:
    return {"error": {"type": kind, "message": message, **extra}}


def _emit_error(obj: dict) -> None:
    print(json.dumps(obj, sort_keys=True), file=sys.stderr)


def _run_one(args):
    sc, validate, seed, out_dir = args
    csv_path = Path(out_dir) / f"{sc['id']}.branches.csv" if validate and sc["pipelines"]["fem_validate"] else None
    try:
        report = pipeline.run_scenario(sc, validate=validate, seed=seed, csv_path=csv_path)
    except pipeline.NumericalFailure as exc:
        return sc["id"], None, str(exc)
    write_json(Path(out_dir) / f"{sc['id']}.report.json", report)
    return sc["id"], report["passed"], None


def run_config(path, validate: bool, out_dir, workers: int = 1, quick: bool = False, seed: int = 0) -> int:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        _emit_error(_error("schema_error", f"cannot read config: {exc}", path="$"))
        return EXIT_SCHEMA
    try:
        resolved = config.resolve(raw)
    except config.ConfigError as exc:
        _emit_error({"error": exc.to_dict()})
        return EXIT_SCHEMA
    scenarios = resolved["scenarios"]
    if quick:
        scenarios = [pipeline.quicken(sc) for sc in scenarios]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(sc, validate, seed, str(out)) for sc in scenarios]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]

    status = EXIT_OK
    for sid, passed, err in results:
        if err is not None:
            _emit_error(_error("numerical_failure", err, scenario=sid))
            status = EXIT_NUMERICAL
        else:
            print(f"{sid}: {'PASS' if passed else 'FAIL'}")
            if not passed and status == EXIT_OK:
                status = EXIT_VALIDATION
    return status


def run_dift(name: str, out_dir, t_max: float = 0.1, n_t: int = 21) -> int:
    try:
        ex = dift.example(name)
    except KeyError as exc:
        _emit_error(_error("schema_error", str(exc), path="example"))
        return EXIT_SCHEMA
    problem = ex.problem if isinstance(ex, dift.EigenChart) else ex
    rep = dift.check_conditions(problem)
    report = {"example": name, "conditions": rep.to_dict(), "conditions_passed": rep.passed}
    status = EXIT_OK
    if rep.passed:
        t = np.linspace(-t_max, t_max, n_t)
        try:
            branch = dift.solve_branch(problem, t, check=False)
        except dift.DiftError as exc:
            _emit_error(_error("numerical_failure", str(exc), scenario=name))
            return EXIT_NUMERICAL
        report["branch"] = branch.to_dict()
        if isinstance(ex, dift.EigenChart):
            lam = ex.lam(branch.x)
            dense = [float(np.min(np.abs(np.linalg.eigvalsh(ex.A0 + s * ex.A1 + s * s * ex.A2) - v)))
                     for s, v in zip(branch.t, lam)]
            report["lambda"] = lam.tolist()
            report["max_dense_eig_error"] = max(dense)
            report["predicted_slope"] = ex.predicted_slope
        ok = branch.residuals.max() <= 1e-10 and branch.tangency <= 1e-6
        report["passed"] = bool(ok)
        if not ok:
            status = EXIT_VALIDATION
    else:
        report["passed"] = False
        status = EXIT_VALIDATION
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / f"dift.{name.removeprefix('dift.')}.report.json", report)
    print(f"{name}: {'PASS' if report['passed'] else 'FAIL'}" + ("" if rep.passed else " (" + "; ".join(rep.failures()) + ")"))
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hadapencil", description="Eigenvalue branch slopes under domain perturbation.")
    p.add_argument("--out-dir", default="out", help="directory for reports (default: out)")
    p.add_argument("--workers", type=int, default=1, help="scenarios run concurrently")
    p.add_argument("--quick", action="store_true", help="halve all resolutions (smoke runs)")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized solver starts")
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (("predict", "assemble pencils and predict slopes"),
                           ("validate", "predict and validate against FEM branches")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("config")
    sp = sub.add_parser("dift", help="run a degenerate IFT example")
    sp.add_argument("example")
    sub.add_parser("catalog", help="list built-in domains, families, eigenspaces, dift examples")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "catalog":
        for name in config.list_catalog():
            print(name)
        return EXIT_OK
    if args.command == "dift":
        return run_dift(args.example, args.out_dir)
    return run_config(args.config, args.command == "validate", args.out_dir, args.workers, args.quick, args.seed)


if __name__ == "__main__":
    sys.exit(main())
