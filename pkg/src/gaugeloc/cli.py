"""Command-line surface: solve, certify, geometry queries, oracle, plots.

All results are printed as JSON with 12 significant digits.  Exit codes:
0 on success, 2 when a verification verdict is negative, 1 on input
errors or unsupported combinations.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import ftcore as F
from . import gauge as G
from . import geometry2d as geo
from . import jsonio
from . import oracle as O
from . import sets as S
from .errors import (
    CertificateError,
    InputError,
    NonattainmentSuspected,
    PreconditionError,
)
from .euclid import (
    EuclidInstance,
    euclid_optimal_report,
    flat_case_test,
    flat_point_absorbed_test,
    multiplicity_classify,
)
from .plotting import PlotSpec, render_svg


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from exc


def _load_instance(path: str) -> F.Instance:
    return jsonio.parse_instance(_load_json(path))


def _load_gauge_like(path: str) -> G.Gauge:
    """Accept a gauge descriptor file, or an instance file (first gauge)."""
    obj = _load_json(path)
    if isinstance(obj, dict) and "type" in obj:
        return jsonio.parse_gauge(obj)
    inst = jsonio.parse_instance(obj)
    return inst.sites[0].gauge


def _emit(payload: dict) -> None:
    sys.stdout.write(jsonio.dumps(payload) + "\n")


def _euclid_instance(inst: F.Instance) -> EuclidInstance:
    for s in inst.sites:
        if not isinstance(s.gauge, G.ShiftedEllipsoid):
            raise InputError("euclid commands need the euclidean gauge on every site")
        d = s.gauge.dim
        if (
            np.max(np.abs(s.gauge.matrix - np.eye(d))) > 1e-12
            or np.linalg.norm(s.gauge.center) > 1e-12
        ):
            raise InputError("euclid commands need the euclidean gauge on every site")
    return EuclidInstance(inst.dimension, tuple((s.set, s.weight) for s in inst.sites))


def _parse_cert(arg: str, dim: int) -> F.Certificate:
    obj = json.loads(arg) if arg.lstrip().startswith(("{", "[")) else _load_json(arg)
    if isinstance(obj, list):
        obj = {"phis": obj, "phi0": None}
    if set(obj) - {"phis", "phi0"}:
        raise InputError("certificate JSON carries unknown fields")
    phis = tuple(np.asarray(p, dtype=float) for p in obj["phis"])
    phi0 = obj.get("phi0")
    phi0 = None if phi0 is None else np.asarray(phi0, dtype=float)
    for p in phis + ((phi0,) if phi0 is not None else ()):
        if p.shape != (dim,):
            raise InputError("certificate functionals have the wrong dimension")
    return F.Certificate(phis, phi0)


def cmd_solve(args) -> int:
    inst = _load_instance(args.file)
    sol = F.solve(inst)
    _emit(jsonio.solution_to_json(sol))
    return 0


def cmd_certify(args) -> int:
    inst = _load_instance(args.file)
    x = np.asarray(args.point, dtype=float)
    if x.shape != (inst.dimension,):
        raise InputError("--point has the wrong dimension")
    if args.cert is not None:
        cert = _parse_cert(args.cert, inst.dimension)
    else:
        cert = F.find_certificate(inst, x, tol=args.tol)
        if cert is None:
            _emit({"accepted": False, "failures": ["no certificate within tolerance"]})
            return 2
    report = (
        F.certify_heron(inst, x, cert, args.tol)
        if inst.is_heron
        else F.certify_sets(inst, x, cert, args.tol)
    )
    _emit(
        {
            "accepted": report.ok,
            "failures": list(report.failures),
            "certificate": {
                "phis": [p.tolist() for p in cert.phis],
                "phi0": None if cert.phi0 is None else cert.phi0.tolist(),
            },
        }
    )
    return 0 if report.ok else 2


def cmd_dseg(args) -> int:
    g = _load_gauge_like(args.file)
    poly = geo.dseg_polygon(g, np.asarray(args.x, float), np.asarray(args.y, float))
    _emit(jsonio.polygon_to_json(poly))
    return 0


def cmd_locus(args) -> int:
    inst = _load_instance(args.file)
    if inst.dimension != 2:
        raise InputError("locus construction is only available in dimension 2")
    sol = F.solve(inst)
    xbar = sol.point
    sites = [s.set.p for s in inst.sites if isinstance(s.set, S.Singleton)]
    if len(sites) != len(inst.sites):
        raise InputError("locus construction needs singleton sites")
    if any(np.linalg.norm(xbar - p) <= 1e-9 for p in sites):
        # optimum sits on a site: the locus is that singleton
        _emit(jsonio.polygon_to_json(geo.Polygon("point", xbar[None, :])))
        return 0
    cert = sol.certificate or F.find_certificate(inst, xbar)
    if cert is None:
        raise CertificateError("no certificate found at the computed optimum")
    poly = geo.ft_locus_polygon(inst, xbar, cert)
    _emit(jsonio.polygon_to_json(poly))
    return 0


def cmd_sublevel(args) -> int:
    inst = _load_instance(args.file)
    poly = geo.sublevel_polygon(inst, args.alpha)
    _emit(jsonio.polygon_to_json(poly))
    return 0


def cmd_euclid(args) -> int:
    inst = _load_instance(args.file)
    einst = _euclid_instance(inst)
    x = np.asarray(args.point, dtype=float)
    payload = {"optimal": None, "v": None, "alpha": None, "bound": None, "residual": None}
    if args.test == "optimal":
        rep = euclid_optimal_report(einst, x)
        payload.update(optimal=rep.optimal, v=rep.pull.tolist(), residual=rep.residual)
    elif args.test == "flat-point":
        verdict = flat_point_absorbed_test(einst, x)
        payload.update(
            optimal=verdict.optimal,
            v=verdict.pull.tolist(),
            alpha=verdict.alpha,
            bound=verdict.bound,
        )
    else:
        case = args.test.replace("-", "_")
        payload.update(optimal=flat_case_test(einst, x, case))
    _emit(payload)
    return 0 if payload["optimal"] else 2


def cmd_classify(args) -> int:
    inst = _load_instance(args.file)
    _euclid_instance(inst)
    flats = [s.set for s in inst.sites if isinstance(s.set, S.AffineFlat)]
    points = [s.set.p for s in inst.sites if isinstance(s.set, S.Singleton)]
    if len(flats) != 1 or len(points) != len(inst.sites) - 1:
        raise InputError("classification needs exactly one flat site plus point sites")
    if any(abs(s.weight - 1.0) > 1e-12 for s in inst.sites):
        raise InputError("classification is defined for unit weights")
    verdict = multiplicity_classify(flats[0], points, tol=1e-9)
    _emit(
        {
            "multiple": verdict.multiple,
            "case": verdict.case,
            "flags": list(verdict.flags),
        }
    )
    return 0


def cmd_oracle(args) -> int:
    inst = _load_instance(args.file)
    if args.box is not None:
        vals = np.asarray(args.box, dtype=float)
        if vals.size != 2 * inst.dimension:
            raise InputError("--box needs low and high corners (2*d numbers)")
        spec = O.GridSpec(
            (vals[: inst.dimension], vals[inst.dimension :]), args.res, args.levels
        )
    else:
        spec = O.default_grid_spec(inst, args.res, args.levels)
    out = O.grid_minimize(inst, spec)
    _emit(
        {
            "value": out.value,
            "cells": out.argmin_cells.tolist(),
            "cell_size": out.cell_size,
        }
    )
    return 0


def cmd_plot(args) -> int:
    inst = _load_instance(args.file)
    if args.view is not None:
        x0, y0, x1, y1 = (float(v) for v in args.view)
        view = ((x0, y0), (x1, y1))
    else:
        pts = np.array([S.representative_point(s.set) for s in inst.sites])
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        pad = 0.35 * float(np.max(hi - lo)) + 1.5
        view = ((lo[0] - pad, lo[1] - pad), (hi[0] + pad, hi[1] + pad))
    spec = PlotSpec(view, tuple(args.levels), resolution=args.res)
    svg = render_svg(inst, spec)
    if args.out is not None:
        with open(args.out, "wb") as fh:
            fh.write(svg)
    else:
        sys.stdout.buffer.write(svg)
    return 0


def cmd_asymmetry(args) -> int:
    g = _load_gauge_like(args.file)
    x0, ratio = G.asymmetry_witness(g)
    _emit({"x0": x0.tolist(), "ratio": ratio})
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gaugeloc",
        description="Solve and certify minsum location problems with gauge distances.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="minimize the weighted gauge-distance sum")
    p.add_argument("file")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("certify", help="check or construct an optimality certificate")
    p.add_argument("file")
    p.add_argument("--point", nargs="+", type=float, required=True)
    p.add_argument("--cert", help="certificate JSON (inline or a file path)")
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(fn=cmd_certify)

    p = sub.add_parser("dseg", help="metric-betweenness polygon of two points")
    p.add_argument("file", help="gauge descriptor (or instance; first gauge is used)")
    p.add_argument("--x", nargs="+", type=float, required=True)
    p.add_argument("--y", nargs="+", type=float, required=True)
    p.set_defaults(fn=cmd_dseg)

    p = sub.add_parser("locus", help="minimizer polygon via cone intersection (2-D)")
    p.add_argument("file")
    p.set_defaults(fn=cmd_locus)

    p = sub.add_parser("sublevel", help="objective sublevel polygon (2-D, polytopal)")
    p.add_argument("file")
    p.add_argument("--alpha", type=float, required=True)
    p.set_defaults(fn=cmd_sublevel)

    p = sub.add_parser("euclid", help="Euclidean optimality tests at a point")
    p.add_argument("file")
    p.add_argument(
        "--test",
        required=True,
        choices=["optimal", "floating", "point-absorbed", "flat-absorbed", "flat-point"],
    )
    p.add_argument("--point", nargs="+", type=float, required=True)
    p.set_defaults(fn=cmd_euclid)

    p = sub.add_parser("classify", help="multiplicity classification: one flat plus points")
    p.add_argument("file")
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("oracle", help="brute-force grid minimization")
    p.add_argument("file")
    p.add_argument("--box", nargs="+", type=float, help="low corner then high corner")
    p.add_argument("--res", type=int, default=33)
    p.add_argument("--levels", type=int, default=4)
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("plot", help="render objective level curves to SVG")
    p.add_argument("file")
    p.add_argument("--levels", nargs="+", type=float, required=True)
    p.add_argument("--out", help="output path (default: SVG on stdout)")
    p.add_argument("--view", nargs=4, type=float, help="xmin ymin xmax ymax")
    p.add_argument("--res", type=int, default=400)
    p.set_defaults(fn=cmd_plot)

    p = sub.add_parser("asymmetry", help="maximal reversal ratio of a gauge")
    p.add_argument("file", help="gauge descriptor (or instance; first gauge is used)")
    p.set_defaults(fn=cmd_asymmetry)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (InputError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NonattainmentSuspected as exc:
        print(f"error: possible nonattainment: {exc}", file=sys.stderr)
        return 1
    except CertificateError as exc:
        print(f"certificate error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
