"""Run one resolved scenario: pencil assembly, slope prediction, FEM validation."""
from __future__ import annotations

import numpy as np

from . import branches as br
from . import config
from . import geometry as geo
from . import hadamard as hd


class NumericalFailure(RuntimeError):
    pass


def quicken(sc: dict) -> dict:
    """Halve every resolution: quadrature nodes and mesh density."""
    sc = {**sc, "resolution": dict(sc["resolution"])}
    res = sc["resolution"]
    res["periodic_nodes"] = max(16, res["periodic_nodes"] // 2)
    res["panels"] = max(4, res["panels"] // 2)
    res["sphere"] = [max(8, v // 2) for v in res["sphere"]]
    sc["mesh_levels"] = [max(1, lv - 1) for lv in sc["mesh_levels"]]
    return sc


def _closed_form(domain, space, speed, res) -> tuple[hd.PencilMatrices | None, dict]:
    extra: dict = {}
    if isinstance(domain, geo.UnitDisk):
        cf = hd.disk_closed_form(space.k, speed, space.m)
        extra = {"discriminant": cf.discriminant, "mean_coeff": cf.mean_coeff}
        return cf.matrices, extra
    if isinstance(domain, geo.Square):
        sigma = space.sigma
        eta, mu = hd.square_fourier_tables(speed, sigma, res["panels"])
        cf = hd.square_closed_form(sigma, eta, mu)
        extra = {"offdiag_condition": cf.offdiag_condition, "diagonal_condition": cf.diagonal_condition}
        return cf.matrices, extra
    if isinstance(domain, geo.UnitBall3D):
        cf = hd.ball3d_closed_form(speed)
        extra = {"a": cf.a, "F": cf.F.tolist(), "C": cf.C.tolist(), "trace_constant": cf.trace_constant}
        return cf.matrices, extra
    if isinstance(domain, geo.DisjointPair):
        return hd.pair_closed_form(speed), extra
    return None, extra


def run_scenario(sc: dict, validate: bool = True, seed: int = 0, csv_path=None) -> dict:
    """Execute the requested pipelines; returns the report dict.

    Raises NumericalFailure on solver or assembly errors.
    """
    res = sc["resolution"]
    pipes = sc["pipelines"]
    tol = sc["tolerances"]
    report: dict = {"scenario": sc["id"], "config": sc, "gates": {}}
    try:
        domain = config.build_domain(sc["domain"])
        family = config.build_family(domain, sc["family"])
        space = config.build_eigenspace(domain, sc["eigenspace"])
        speed = geo.normal_speed(domain, family, res["periodic_nodes"], res["panels"], tuple(res["sphere"]))

        mats = {}
        if pipes["quadrature"]:
            mats["quadrature"] = hd.assemble_quadrature(space, speed)
        if pipes["closed_form"]:
            cf, extra = _closed_form(domain, space, speed, res)
            if cf is not None:
                mats["closed_form"] = cf
                report["closed_form_details"] = extra
        if not mats:
            mats["quadrature"] = hd.assemble_quadrature(space, speed)
        report["pencil"] = {k: v.to_dict() for k, v in mats.items()}
        if len(mats) == 2:
            diff = float(np.max(np.abs(mats["quadrature"].A - mats["closed_form"].A)))
            report["gates"]["closed_vs_quadrature"] = {
                "max_abs_diff": diff,
                "tolerance": tol["closed_vs_quadrature"],
                "passed": diff <= tol["closed_vs_quadrature"],
            }
        primary = mats.get("quadrature", mats.get("closed_form"))
        pred = hd.predict_slopes(primary)
        report["prediction"] = pred.to_dict()

        if validate and pipes["fem_validate"]:
            table = br.sample_branches(
                domain, family, space.eigenvalue, sc["window"], sc["t_steps"], sc["mesh_levels"],
                multiplicity=space.size, seed=seed,
            )
            est = br.estimate_slopes(table)
            val = br.compare(pred, est, tol["abs"], tol["rel"], sc["id"])
            rule = br.sum_rule(est, primary.A, primary.B)
            report["measured"] = [e.to_dict() for e in est]
            report["validation"] = val.to_dict()
            report["sum_rule"] = rule.to_dict()
            report["gates"]["validation"] = {"passed": val.passed}
            report["gates"]["sum_rule"] = {"passed": rule.passed}
            if csv_path is not None:
                table.write_csv(csv_path)
    except config.ConfigError:
        raise
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        raise NumericalFailure(f"{type(exc).__name__}: {exc}") from exc
    report["passed"] = all(g["passed"] for g in report["gates"].values())
    return report
