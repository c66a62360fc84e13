"""Scenario configuration: JSON schema, defaults, catalog and object builders."""
from __future__ import annotations

import copy
import re

import jsonschema

from . import dift
from . import geometry as geo
from . import modes

DOMAIN_KINDS = ("ball3d", "disk", "pair", "square")

# family name -> domain kinds it applies to
FAMILIES = {
    "dilation": ("ball3d", "disk", "square"),
    "dilations": ("pair",),
    "edge_bump": ("square",),
    "holomorphic_poly": ("disk",),
    "quadratic_field": ("ball3d",),
    "translation": ("ball3d", "disk", "pair", "square"),
}

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["scenarios"],
    "additionalProperties": False,
    "properties": {
        "scenarios": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id", "domain", "family", "eigenspace"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
                    "domain": {
                        "type": "object",
                        "required": ["kind"],
                        "additionalProperties": False,
                        "properties": {
                            "kind": {"enum": list(DOMAIN_KINDS)},
                            "offset": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
                            "margin": _POS,
                        },
                    },
                    "family": {
                        "type": "object",
                        "required": ["name"],
                        "additionalProperties": False,
                        "properties": {
                            "name": {"enum": sorted(FAMILIES)},
                            "params": {"type": "object"},
                        },
                    },
                    "eigenspace": {
                        "type": "object",
                        "required": ["kind"],
                        "additionalProperties": False,
                        "properties": {
                            "kind": {"enum": list(DOMAIN_KINDS)},
                            "k": {"type": "integer", "minimum": 1, "maximum": 20},
                            "m": {"type": "integer", "minimum": 1, "maximum": 20},
                            "sigma": {
                                "type": "array",
                                "items": {"type": "integer", "minimum": 1},
                                "minItems": 2,
                                "maxItems": 2,
                            },
                        },
                    },
                    "pipelines": {
                        "type": "object",
                        "additionalProperties": False,
                        "properties": {
                            "closed_form": {"type": "boolean"},
                            "quadrature": {"type": "boolean"},
                            "fem_validate": {"type": "boolean"},
                        },
                    },
                    "tolerances": {
                        "type": "object",
                        "additionalProperties": False,
                        "properties": {"abs": _POS, "rel": _POS, "closed_vs_quadrature": _POS},
                    },
                    "t_steps": {"type": "array", "items": _POS, "minItems": 2},
                    "mesh_levels": {
                        "type": "array",
                        "items": {"type": "integer", "minimum": 1, "maximum": 9},
                        "minItems": 1,
                    },
                    "window": _POS,
                    "resolution": {
                        "type": "object",
                        "additionalProperties": False,
                        "properties": {
                            "periodic_nodes": {"type": "integer", "minimum": 8},
                            "panels": {"type": "integer", "minimum": 1},
                            "sphere": {"type": "array", "items": {"type": "integer", "minimum": 4},
                                       "minItems": 2, "maxItems": 2},
                        },
                    },
                },
            },
        }
    },
}

DEFAULTS = {
    "pipelines": {"closed_form": True, "quadrature": True, "fem_validate": False},
    "tolerances": {"abs": 1e-4, "rel": 2e-2, "closed_vs_quadrature": 1e-8},
    "t_steps": [1e-3, 2e-3],
    "mesh_levels": [4, 5, 6],
    "window": None,
    "resolution": {"periodic_nodes": 1024, "panels": 64, "sphere": [64, 128]},
    "family": {"params": {}},
}


class ConfigError(ValueError):
    """Schema or semantic violation; ``path`` locates the offending entry."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")

    def to_dict(self) -> dict:
        return {"type": "schema_error", "path": self.path, "message": str(self)}


def _format_path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "$"


def validate_config(cfg: dict) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        err = errors[0]
        parts = list(err.absolute_path)
        if err.validator == "required":
            m = re.match(r"'([^']+)' is a required property", err.message)
            if m:
                parts.append(m.group(1))
        raise ConfigError(_format_path(parts), err.message)
    for i, sc in enumerate(cfg["scenarios"]):
        _check_semantics(i, sc)
    ids = [sc["id"] for sc in cfg["scenarios"]]
    dup = sorted({i for i in ids if ids.count(i) > 1})
    if dup:
        raise ConfigError("scenarios", f"duplicate scenario ids {dup}")


def _check_semantics(i: int, sc: dict) -> None:
    kind = sc["domain"]["kind"]
    fam = sc["family"]["name"]
    if kind not in FAMILIES[fam]:
        raise ConfigError(f"scenarios[{i}].family.name", f"family {fam!r} is not defined on a {kind} domain")
    if sc["eigenspace"]["kind"] != kind:
        raise ConfigError(f"scenarios[{i}].eigenspace.kind", "eigenspace kind must match the domain kind")
    if sc.get("pipelines", {}).get("fem_validate") and kind == "ball3d":
        raise ConfigError(f"scenarios[{i}].pipelines.fem_validate", "FEM validation needs a 2D domain")


def resolve(cfg: dict) -> dict:
    """Validated config with every default filled in."""
    validate_config(cfg)
    out = {"scenarios": []}
    for sc in cfg["scenarios"]:
        r = copy.deepcopy(sc)
        for key, val in DEFAULTS.items():
            if isinstance(val, dict):
                r[key] = {**copy.deepcopy(val), **r.get(key, {})}
            else:
                r.setdefault(key, copy.deepcopy(val))
        es = r["eigenspace"]
        if es["kind"] == "disk":
            es.setdefault("k", 1)
            es.setdefault("m", 1)
        elif es["kind"] == "square":
            es.setdefault("sigma", [1, 2])
        if r["domain"]["kind"] == "pair":
            r["domain"].setdefault("offset", [3.0, 0.0])
            r["domain"].setdefault("margin", 0.1)
        out["scenarios"].append(r)
    return out


# ----------------------------------------------------------------------------
# builders


def build_domain(spec: dict):
    kw = {k: (tuple(v) if isinstance(v, list) else v) for k, v in spec.items() if k != "kind"}
    return geo.make_domain(spec["kind"], **kw)


def build_family(domain, spec: dict) -> geo.PerturbFamily:
    name, params = spec["name"], dict(spec.get("params", {}))
    kind = domain.kind
    if name == "translation":
        direction = params.get("direction", [1.0] + [0.0] * (domain.dim - 1))
        if kind == "pair":
            return geo.pair_translation(domain, direction)
        return geo.translation(direction)
    if name == "dilation":
        return geo.dilation(params.get("center", list(domain.center)), params.get("rate", 1.0), domain.dim)
    if name == "dilations":
        return geo.pair_dilations(domain, tuple(params.get("rates", [1.0, 2.0])))
    if name == "holomorphic_poly":
        return geo.holomorphic_poly(params.get("coeffs", {"3": 1.0}))
    if name == "edge_bump":
        return geo.edge_bump(params.get("edges", {}))
    if name == "quadratic_field":
        return geo.quadratic_field(params.get("matrix", [[0, 0.5, 0], [0.5, 0, 0], [0, 0, 0]]))
    raise ConfigError("family.name", f"unknown family {name!r}")


def build_eigenspace(domain, spec: dict) -> modes.Eigenspace:
    kind = spec["kind"]
    if kind == "disk":
        return modes.disk_eigenspace(spec.get("k", 1), spec.get("m", 1))
    if kind == "square":
        s1, s2 = spec.get("sigma", [1, 2])
        return modes.square_eigenspace(s1, s2)
    if kind == "ball3d":
        return modes.ball3d_second_eigenspace()
    if kind == "pair":
        return modes.disjoint_pair_eigenspace(domain)
    raise ConfigError("eigenspace.kind", f"unknown eigenspace {kind!r}")


def list_catalog() -> list[str]:
    """Alphabetized names of built-in domains, families, eigenspaces and dift examples."""
    names = [f"domain.{k}" for k in DOMAIN_KINDS]
    names += [f"{k}.{fam}" for fam, kinds in FAMILIES.items() for k in kinds]
    names += [f"eigenspace.{k}" for k in DOMAIN_KINDS]
    names += [f"dift.{n}" for n in dift.EXAMPLES]
    return sorted(names)
