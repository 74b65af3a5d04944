"""Strict JSON descriptors for gauges, sets, instances and results.

Unknown fields are rejected so fixture typos fail loudly.  Instances
round-trip exactly (full float precision); computed results are printed
with 12 significant digits.
"""

from __future__ import annotations

import json

import numpy as np

from . import ftcore as F
from . import gauge as G
from . import sets as S
from .errors import InputError


def _require(obj: dict, keys: set[str], kind: str) -> None:
    if not isinstance(obj, dict):
        raise InputError(f"{kind} descriptor must be an object")
    extra = set(obj) - keys
    if extra:
        raise InputError(f"unknown fields {sorted(extra)} in {kind} descriptor")
    missing = keys - set(obj)
    if missing:
        raise InputError(f"missing fields {sorted(missing)} in {kind} descriptor")


def _floats(value, kind: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"non-numeric data in {kind}") from exc
    return arr


def parse_gauge(obj) -> G.Gauge:
    if not isinstance(obj, dict) or "type" not in obj:
        raise InputError("gauge descriptor needs a 'type' field")
    kind = obj["type"]
    if kind == "hpolytope":
        _require(obj, {"type", "functionals"}, "gauge")
        return G.HPolytope(_floats(obj["functionals"], "gauge functionals"))
    if kind == "vpolytope":
        _require(obj, {"type", "vertices"}, "gauge")
        return G.VPolytope(_floats(obj["vertices"], "gauge vertices"))
    if kind == "ellipsoid":
        _require(obj, {"type", "matrix", "center"}, "gauge")
        return G.ShiftedEllipsoid(
            _floats(obj["matrix"], "gauge matrix"), _floats(obj["center"], "gauge center")
        )
    if kind in ("euclidean", "l1", "linf"):
        _require(obj, {"type", "dim"}, "gauge")
        dim = int(obj["dim"])
        maker = {"euclidean": G.euclidean_gauge, "l1": G.l1_gauge, "linf": G.linf_gauge}
        return maker[kind](dim)
    raise InputError(f"unknown gauge type {kind!r}")


def gauge_to_json(g: G.Gauge) -> dict:
    if isinstance(g, G.HPolytope):
        return {"type": "hpolytope", "functionals": g.functionals.tolist()}
    if isinstance(g, G.VPolytope):
        return {"type": "vpolytope", "vertices": g.vertices.tolist()}
    return {
        "type": "ellipsoid",
        "matrix": g.matrix.tolist(),
        "center": g.center.tolist(),
    }


def parse_set(obj) -> S.ConvexSet:
    if not isinstance(obj, dict) or "type" not in obj:
        raise InputError("set descriptor needs a 'type' field")
    kind = obj["type"]
    if kind == "point":
        _require(obj, {"type", "p"}, "set")
        return S.Singleton(_floats(obj["p"], "point"))
    if kind == "vpolytope":
        _require(obj, {"type", "vertices"}, "set")
        return S.VPolytopeSet(_floats(obj["vertices"], "set vertices"))
    if kind == "segment":
        _require(obj, {"type", "a", "b"}, "set")
        return S.segment(_floats(obj["a"], "segment"), _floats(obj["b"], "segment"))
    if kind == "flat":
        _require(obj, {"type", "base", "directions"}, "set")
        return S.AffineFlat(
            _floats(obj["base"], "flat base"), _floats(obj["directions"], "flat directions")
        )
    if kind == "ball":
        _require(obj, {"type", "center", "radius"}, "set")
        return S.EuclideanBall(_floats(obj["center"], "ball center"), float(obj["radius"]))
    raise InputError(f"unknown set type {kind!r}")


def set_to_json(k: S.ConvexSet) -> dict:
    if isinstance(k, S.Singleton):
        return {"type": "point", "p": k.p.tolist()}
    if isinstance(k, S.VPolytopeSet):
        return {"type": "vpolytope", "vertices": k.vertices.tolist()}
    if isinstance(k, S.AffineFlat):
        return {
            "type": "flat",
            "base": k.base.tolist(),
            "directions": k.directions.tolist(),
        }
    return {"type": "ball", "center": k.center.tolist(), "radius": k.radius}


def parse_instance(obj) -> F.Instance:
    _require(
        obj,
        {"dimension", "sites"} | ({"constraint"} if "constraint" in obj else set()),
        "instance",
    )
    dim = int(obj["dimension"])
    sites = []
    if not isinstance(obj["sites"], list) or not obj["sites"]:
        raise InputError("instance needs a non-empty site list")
    for site in obj["sites"]:
        _require(site, {"set", "gauge", "weight"}, "site")
        sites.append(
            F.SiteSpec(parse_set(site["set"]), parse_gauge(site["gauge"]), float(site["weight"]))
        )
    constraint = parse_set(obj["constraint"]) if "constraint" in obj else None
    return F.Instance(dim, tuple(sites), constraint)


def instance_to_json(inst: F.Instance) -> dict:
    out = {
        "dimension": inst.dimension,
        "sites": [
            {
                "set": set_to_json(s.set),
                "gauge": gauge_to_json(s.gauge),
                "weight": s.weight,
            }
            for s in inst.sites
        ],
    }
    if inst.constraint is not None:
        out["constraint"] = set_to_json(inst.constraint)
    return out


def solution_to_json(sol: F.Solution) -> dict:
    cert = None
    if sol.certificate is not None:
        cert = {
            "phis": [phi.tolist() for phi in sol.certificate.phis],
            "phi0": None
            if sol.certificate.phi0 is None
            else sol.certificate.phi0.tolist(),
        }
    return {
        "point": sol.point.tolist(),
        "value": sol.value,
        "certificate": cert,
        "method": sol.method,
        "residual": sol.residual,
    }


def polygon_to_json(poly) -> dict:
    return {
        "vertices": np.atleast_2d(poly.vertices).tolist() if len(poly.vertices) else [],
        "rays": [np.asarray(r).tolist() for r in poly.rays],
    }


def round_floats(obj, digits: int = 12):
    """Round every float to `digits` significant digits (for printing)."""
    if isinstance(obj, float):
        return float(f"{obj:.{digits}g}")
    if isinstance(obj, dict):
        return {k: round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, digits) for v in obj]
    return obj


def dumps(payload: dict, exact: bool = False) -> str:
    """Deterministic JSON encoding; 12 significant digits unless exact."""
    if not exact:
        payload = round_floats(payload)
    return json.dumps(payload, separators=(", ", ": "))
