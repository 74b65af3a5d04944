"""Constructive 2-D geometry: d-segments, solution loci, sublevel polygons.

All region constructions reduce to halfplane intersections.  A sum of
facet maxima stays below a level iff every combination of one facet per
term stays below it, so d-segments and sublevel sets of polytopal-gauge
objectives are exact halfplane intersections; the locus construction
intersects the translated cones spanned by exposed unit-ball faces.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from . import ftcore as F
from . import gauge as G
from . import oracle as O
from . import sets as S
from .errors import CertificateError, InputError, PreconditionError
from .projections import _project_segment

CLIP_EPS = 1e-9
RANK_TOL = 1e-9
FACE_TOL = 1e-8  # exposed-face membership: 1 - <phi, v> <= FACE_TOL


@dataclass(frozen=True)
class Polygon:
    """Convex region with explicit degeneracy tags.

    kind is one of "empty", "point", "segment", "polygon"; vertices are
    counterclockwise.  `rays` carries recession directions for cones
    (populated only by intermediate constructions)."""

    kind: str
    vertices: np.ndarray
    rays: tuple = ()

    @property
    def is_empty(self) -> bool:
        return self.kind == "empty"


def _classify(points: list[np.ndarray]) -> Polygon:
    pts = []
    for p in points:
        if all(np.linalg.norm(p - q) > RANK_TOL for q in pts):
            pts.append(np.asarray(p, dtype=float))
    if not pts:
        return Polygon("empty", np.zeros((0, 2)))
    arr = np.array(pts)
    if len(arr) == 1:
        return Polygon("point", arr)
    centered = arr - arr.mean(axis=0)
    svals = np.linalg.svd(centered, compute_uv=False)
    if svals[0] <= RANK_TOL:
        return Polygon("point", arr[:1])
    if svals[1] <= RANK_TOL * max(1.0, svals[0]):
        direction = centered[np.argmax(np.linalg.norm(centered, axis=1))]
        direction = direction / np.linalg.norm(direction)
        proj = centered @ direction
        ends = arr[[int(np.argmin(proj)), int(np.argmax(proj))]]
        return Polygon("segment", ends)
    hull = _ccw_hull(arr)
    return Polygon("polygon", hull)


def _ccw_hull(arr: np.ndarray) -> np.ndarray:
    from .hulls import convex_hull_2d

    return convex_hull_2d(arr)


def clip_halfplanes(box: np.ndarray, normals: np.ndarray, offsets: np.ndarray) -> Polygon:
    """Intersect the box polygon with {z : n_i . z <= b_i} for all i."""
    poly = [np.asarray(v, dtype=float) for v in box]
    for n, b in zip(normals, offsets):
        if not poly:
            break
        nn = float(np.linalg.norm(n))
        if nn <= 1e-14:
            if b < -CLIP_EPS:  # constant row that can never hold
                poly = []
            continue
        tol = CLIP_EPS * (nn + abs(b) + 1.0)
        out = []
        prev = poly[-1]
        prev_in = float(n @ prev) <= b + tol
        for cur in poly:
            cur_in = float(n @ cur) <= b + tol
            if cur_in != prev_in:
                denom = float(n @ (cur - prev))
                t = (b - float(n @ prev)) / denom if abs(denom) > 1e-300 else 0.0
                t = min(max(t, 0.0), 1.0)
                out.append(prev + t * (cur - prev))
            if cur_in:
                out.append(cur)
            prev, prev_in = cur, cur_in
        poly = out
    return _classify(poly)


def _box_polygon(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    return np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])


def polygon_contains(poly: Polygon, z, tol: float = 1e-9) -> bool:
    z = np.asarray(z, dtype=float)
    if poly.kind == "empty":
        return False
    if poly.kind == "point":
        return bool(np.linalg.norm(z - poly.vertices[0]) <= tol)
    if poly.kind == "segment":
        return bool(
            np.linalg.norm(z - _project_segment(z, *poly.vertices)) <= tol
        )
    v = poly.vertices
    nxt = np.roll(v, -1, axis=0)
    edge = nxt - v
    rel = z - v
    cross = edge[:, 0] * rel[:, 1] - edge[:, 1] * rel[:, 0]
    return bool(np.all(cross >= -tol * (1.0 + np.linalg.norm(edge, axis=1))))


def point_to_polygon_distance(z, poly: Polygon) -> float:
    z = np.asarray(z, dtype=float)
    if poly.kind == "empty":
        return float("inf")
    if poly.kind == "point":
        return float(np.linalg.norm(z - poly.vertices[0]))
    if poly.kind == "segment":
        return float(np.linalg.norm(z - _project_segment(z, *poly.vertices)))
    if polygon_contains(poly, z, tol=1e-12):
        return 0.0
    v = poly.vertices
    nxt = np.roll(v, -1, axis=0)
    return float(
        min(np.linalg.norm(z - _project_segment(z, a, b)) for a, b in zip(v, nxt))
    )


def polygon_hausdorff(p: Polygon, q: Polygon) -> float:
    """Hausdorff distance; exact for convex polygons (extremes at vertices)."""
    if p.is_empty and q.is_empty:
        return 0.0
    if p.is_empty or q.is_empty:
        return float("inf")
    d_pq = max(point_to_polygon_distance(v, q) for v in p.vertices)
    d_qp = max(point_to_polygon_distance(v, p) for v in q.vertices)
    return max(d_pq, d_qp)


def polygon_boundary_samples(poly: Polygon, per_edge: int = 5) -> np.ndarray:
    if poly.kind in ("empty", "point"):
        return poly.vertices
    v = poly.vertices
    pairs = [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]
    if poly.kind == "segment":
        pairs = [tuple(v)]
    ts = np.linspace(0.0, 1.0, per_edge)
    return np.array([a + t * (b - a) for a, b in pairs for t in ts])


# ---------------------------------------------------------------------------
# d-segments


def dseg_contains(g: G.Gauge, x, y, z, tol: float) -> bool:
    """Metric betweenness: gauge(x-z) + gauge(z-y) <= gauge(x-y) + tol."""
    x, y, z = (np.asarray(v, dtype=float) for v in (x, y, z))
    total = G.gauge_eval(g, x - z) + G.gauge_eval(g, z - y)
    return bool(total <= G.gauge_eval(g, x - y) + tol)


def dseg_polygon(g: G.Gauge, x, y) -> Polygon:
    """The region {z : gauge(x-z) + gauge(z-y) = gauge(x-y)} (2-D polytopal)."""
    if g.dim != 2 or not G.is_polytopal(g):
        raise PreconditionError("d-segment polygons need a 2-D polytopal gauge")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rows = G.ball_facets(g)
    c = G.gauge_eval(g, x - y)
    normals, offsets = [], []
    for aj, ak in product(rows, rows):
        # max_j a_j.(x-z) + max_k a_k.(z-y) <= c  iff all pair sums stay below c
        normals.append(ak - aj)
        offsets.append(c - float(aj @ x) + float(ak @ y))
    reach = (c + 1.0) * G.ball_outer_radius(g) + 1.0
    lo = np.minimum(x, y) - reach
    hi = np.maximum(x, y) + reach
    return clip_halfplanes(_box_polygon(lo, hi), np.array(normals), np.array(offsets))


# ---------------------------------------------------------------------------
# Fermat--Torricelli locus by cone intersection


def _exposed_face(gauge_obj: G.Gauge, psi: np.ndarray) -> np.ndarray:
    if isinstance(gauge_obj, G.ShiftedEllipsoid):
        # strictly convex ball: the exposed face is the unique support point
        inv = np.linalg.inv(gauge_obj.matrix)
        u = inv @ psi
        y = gauge_obj.center + inv @ (u / np.linalg.norm(u))
        return y[None, :]
    verts = G.ball_vertices(gauge_obj)
    vals = verts @ psi
    face = verts[1.0 - vals <= FACE_TOL]
    if len(face) == 0:
        raise CertificateError("certificate functional exposes no ball face")
    if len(face) > 2:
        direction = face[-1] - face[0]
        proj = face @ direction
        face = face[[int(np.argmin(proj)), int(np.argmax(proj))]]
    return face


def _cone_rows(apex: np.ndarray, face: np.ndarray):
    """Halfplane rows for apex - cone(face) in 2-D."""
    rows, offs = [], []
    if len(face) == 1:
        v = face[0]
        perp = np.array([-v[1], v[0]])
        rows += [perp, -perp, v]
        offs += [float(perp @ apex), float(-perp @ apex), float(v @ apex)]
    else:
        v1, v2 = face
        n1 = np.array([-v1[1], v1[0]])
        if n1 @ v2 < 0:
            n1 = -n1
        n2 = np.array([-v2[1], v2[0]])
        if n2 @ v1 < 0:
            n2 = -n2
        rows += [n1, n2]
        offs += [float(n1 @ apex), float(n2 @ apex)]
    return rows, offs


def ft_locus_polygon(inst: F.Instance, xbar, cert: F.Certificate) -> Polygon:
    """Locus of minimizers as the intersection of exposed-face cones."""
    if inst.dimension != 2:
        raise PreconditionError("locus polygons are only constructed in 2-D")
    if any(not isinstance(s.set, S.Singleton) for s in inst.sites):
        raise PreconditionError("locus construction needs singleton sites")
    xbar = np.asarray(xbar, dtype=float)
    for s in inst.sites:
        if np.linalg.norm(xbar - s.set.p) <= 1e-12:
            raise PreconditionError("reference optimum must not be a site")
    report = F.certify_points(inst, xbar, cert, 1e-6)
    if not report.ok:
        raise CertificateError(f"certificate rejected: {report.failures}")
    normals, offsets = [], []
    for s, phi in zip(inst.sites, cert.phis):
        gw = F.weighted_gauge(s)
        psi = -np.asarray(phi, dtype=float)
        face = _exposed_face(gw, psi)
        rows, offs = _cone_rows(s.set.p, face)
        normals += rows
        offsets += offs
    value = F.objective_eval(inst, xbar)
    pts = np.array([s.set.p for s in inst.sites])
    reach = max(
        value / s.weight * G.ball_outer_radius(s.gauge) for s in inst.sites
    ) + 1.0
    lo = pts.min(axis=0) - reach
    hi = pts.max(axis=0) + reach
    return clip_halfplanes(_box_polygon(lo, hi), np.array(normals), np.array(offsets))


# ---------------------------------------------------------------------------
# sublevel sets


def sublevel_polygon(inst: F.Instance, alpha: float) -> Polygon:
    """{x : objective <= alpha} for 2-D singleton-site polytopal instances."""
    if inst.dimension != 2:
        raise PreconditionError("sublevel polygons are only constructed in 2-D")
    if any(
        not isinstance(s.set, S.Singleton) or not G.is_polytopal(s.gauge)
        for s in inst.sites
    ):
        raise PreconditionError("sublevel polygons need singleton sites and polytopal gauges")
    facet_lists = [G.ball_facets(s.gauge) * s.weight for s in inst.sites]
    count = int(np.prod([len(rows) for rows in facet_lists]))
    if count > 250_000:
        raise InputError("facet product too large for sublevel construction")
    pts = [s.set.p for s in inst.sites]
    normals, offsets = [], []
    for combo in product(*facet_lists):
        n = -np.sum(combo, axis=0)
        b = alpha - sum(float(a @ p) for a, p in zip(combo, pts))
        normals.append(n)
        offsets.append(b)
    arr = np.array(pts)
    reach = max(
        alpha / s.weight * G.ball_outer_radius(s.gauge) for s in inst.sites
    ) + 1.0
    lo, hi = arr.min(axis=0) - reach, arr.max(axis=0) + reach
    return clip_halfplanes(_box_polygon(lo, hi), np.array(normals), np.array(offsets))


class ExtremeWitness(tuple):
    """(site index, lambda, ball direction w) witness for an extreme point."""


def verify_extreme_point_form(inst: F.Instance, alpha: float, v) -> ExtremeWitness | None:
    """Search for a representation v = p_i + lambda * w, w an extreme point
    of the negated (weighted) unit ball, lambda in [0, alpha]."""
    if any(
        not isinstance(s.set, S.Singleton) or not G.is_polytopal(s.gauge)
        for s in inst.sites
    ):
        raise PreconditionError("extreme-point form needs singleton polytopal sites")
    if inst.dimension != 2:
        raise PreconditionError("extreme-point verification is 2-D only")
    v = np.asarray(v, dtype=float)
    tol = 1e-7
    for i, s in enumerate(inst.sites):
        rel = v - s.set.p
        ball = G.ball_vertices(F.weighted_gauge(s))
        if np.linalg.norm(rel) <= tol:
            return ExtremeWitness((i, 0.0, -ball[0]))
        for w in -ball:
            lam = float(rel @ w) / float(w @ w)
            if -tol <= lam <= alpha + tol and np.linalg.norm(rel - lam * w) <= tol * (
                1.0 + np.linalg.norm(rel)
            ):
                return ExtremeWitness((i, lam, w))
    return None


# ---------------------------------------------------------------------------
# norm characterizations


def triangle_equality_face(g: G.Gauge, x, y, tol: float = 1e-7) -> bool:
    """Whether gauge(x+y) = gauge(x) + gauge(y); cross-checked against the
    unit-sphere segment criterion on 21 sample points."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    gx, gy = G.gauge_eval(g, x), G.gauge_eval(g, y)
    if gx <= 0 or gy <= 0:
        raise PreconditionError("triangle_equality_face needs nonzero inputs")
    total = G.gauge_eval(g, x + y)
    equal = abs(total - gx - gy) <= tol * (1.0 + gx + gy)
    ts = np.linspace(0.0, 1.0, 21)
    seg = np.outer(1 - ts, x / gx) + np.outer(ts, y / gy)
    on_sphere = bool(np.all(np.abs(G.gauge_eval_many(g, seg) - 1.0) <= 1e-7))
    if not np.allclose(x / gx, -y / gy) and on_sphere != equal:
        raise RuntimeError("sphere-segment criterion disagrees with the equality test")
    return bool(equal)


@dataclass
class NormReport:
    is_norm: bool
    strictly_convex: bool
    trials: int
    segment_trials_passed: int | None = None
    witness_point: np.ndarray | None = None
    witness_ratio: float | None = None
    witness_locus_is_origin: bool | None = None
    straight_dsegments_confirmed: bool | None = None
    flat_edge_counterexample_ok: bool | None = None


def norm_characterization_report(g: G.Gauge, trials: int) -> NormReport:
    """Decide norm-ness and exercise the d-segment characterizations."""
    if g.dim != 2:
        raise PreconditionError("norm characterization works on 2-D gauges")
    rng = np.random.default_rng(0)
    is_norm = G.is_symmetric(g)
    strictly_convex = isinstance(g, G.ShiftedEllipsoid)
    report = NormReport(is_norm, strictly_convex, trials)

    if is_norm:
        passed = 0
        for _ in range(trials):
            x = rng.uniform(-2, 2, size=2)
            y = rng.uniform(-2, 2, size=2)
            if np.linalg.norm(x - y) < 1e-6:
                continue
            inst = F.point_instance([x, y], g)
            fvals = [
                F.objective_eval(inst, x),
                F.objective_eval(inst, 0.5 * (x + y)),
                F.objective_eval(inst, y),
            ]
            if max(fvals) - min(fvals) <= 1e-7 * (1.0 + max(fvals)):
                passed += 1
        report.segment_trials_passed = passed
    else:
        x0, ratio = G.asymmetry_witness(g)
        inst = F.point_instance([x0, np.zeros(2)], g)
        out = O.grid_minimize(inst, O.default_grid_spec(inst, resolution=41, levels=5))
        report.witness_point = x0
        report.witness_ratio = ratio
        report.witness_locus_is_origin = O.argmin_set_matches(
            out, [np.zeros(2)], tol=10 * out.cell_size * out.lipschitz
        )

    if strictly_convex:
        ok = True
        for _ in range(max(trials, 1)):
            x = rng.uniform(-2, 2, size=2)
            y = rng.uniform(-2, 2, size=2)
            if np.linalg.norm(x - y) < 1e-3:
                continue
            t = rng.uniform(0.1, 0.9)
            on = x + t * (y - x)
            perp = np.array([-(y - x)[1], (y - x)[0]])
            perp = perp / np.linalg.norm(perp)
            if not dseg_contains(g, x, y, on, 1e-9):
                ok = False
            if dseg_contains(g, x, y, on + 1e-3 * perp, 1e-9):
                ok = False
        report.straight_dsegments_confirmed = ok
    else:
        verts = G.ball_vertices(g)
        z1, z2 = verts[0], verts[1]
        x = z1 + z2
        y = np.zeros(2)
        z = z1
        off_segment = (
            np.linalg.norm(z - _project_segment(z, x, y)) > 1e-9
        )
        report.flat_edge_counterexample_ok = bool(
            off_segment and dseg_contains(g, x, y, z, 1e-9)
        )
    return report
