"""Gauges (convex distance functions) given by their unit balls.

A gauge is the Minkowski functional of a compact convex unit ball with the
origin in its interior; no symmetry is assumed.  Three ball representations
are supported: facet form (HPolytope), vertex form (VPolytope) and shifted
ellipsoids.  Dual objects (polar values, norming functionals) have closed
or LP-computable forms for each representation.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, GaugeDefinitionError
from .hulls import dedupe_points, hull_facets, hpoly_vertices
from .linprog import solve_lp

ACTIVE_TOL = 1e-8  # scale-invariant active-constraint tolerance
_CACHE_LOCK = threading.Lock()


def _vec(x, dim, name="point"):
    x = np.asarray(x, dtype=float)
    if x.shape != (dim,):
        raise DimensionMismatchError(f"{name} has shape {x.shape}, expected ({dim},)")
    return x


@dataclass(eq=False)
class HPolytope:
    """Ball {z : <a_j, z> <= 1 for all j}; functionals must positively span."""

    functionals: np.ndarray
    _vertices: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.functionals, dtype=float))
        if a.ndim != 2 or a.shape[0] < a.shape[1] + 1:
            raise GaugeDefinitionError("need at least d+1 facet functionals")
        if np.any(np.linalg.norm(a, axis=1) < 1e-12):
            raise GaugeDefinitionError("zero facet functional")
        a.setflags(write=False)
        self.functionals = a
        d = a.shape[1]
        # Bounded ball <=> every +-coordinate LP is bounded.
        for k in range(d):
            for sign in (1.0, -1.0):
                c = np.zeros(d)
                c[k] = -sign
                res = solve_lp(c, a_ub=a, b_ub=np.ones(len(a)), free=[True] * d)
                if res.status != "optimal":
                    raise GaugeDefinitionError(
                        "unit ball is unbounded: functionals do not positively span"
                    )

    @property
    def dim(self) -> int:
        return self.functionals.shape[1]


@dataclass(eq=False)
class VPolytope:
    """Ball = convex hull of `vertices`, with 0 strictly inside."""

    vertices: np.ndarray
    _facets: np.ndarray | None = field(default=None, repr=False, compare=False)
    _hull: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if len(v) < v.shape[1] + 1:
            raise GaugeDefinitionError("need at least d+1 ball vertices")
        v.setflags(write=False)
        self.vertices = v
        rows, offs = hull_facets(v)
        if np.any(offs < 1e-9):
            raise GaugeDefinitionError("origin is not interior to the ball")
        facets = rows / offs[:, None]  # normalized to <a, z> <= 1
        facets.setflags(write=False)
        self._facets = facets

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]


@dataclass(eq=False)
class ShiftedEllipsoid:
    """Ball {z : ||A (z - c)||_2 <= 1} with A symmetric positive definite."""

    matrix: np.ndarray
    center: np.ndarray
    _inv: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        a = np.asarray(self.matrix, dtype=float)
        c = np.asarray(self.center, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or c.shape != (a.shape[0],):
            raise GaugeDefinitionError("matrix/center shapes are inconsistent")
        if np.max(np.abs(a - a.T)) > 1e-9:
            raise GaugeDefinitionError("matrix must be symmetric")
        if np.min(np.linalg.eigvalsh(a)) <= 1e-12:
            raise GaugeDefinitionError("matrix must be positive definite")
        if np.linalg.norm(a @ c) >= 1.0 - 1e-12:
            raise GaugeDefinitionError("origin is not interior to the ball")
        a.setflags(write=False)
        c.setflags(write=False)
        self.matrix, self.center = a, c
        self._inv = np.linalg.inv(a)
        self._inv.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.center.shape[0]


Gauge = HPolytope | VPolytope | ShiftedEllipsoid


def euclidean_gauge(dim: int) -> ShiftedEllipsoid:
    return ShiftedEllipsoid(np.eye(dim), np.zeros(dim))


def l1_gauge(dim: int) -> VPolytope:
    eye = np.eye(dim)
    return VPolytope(np.vstack([eye, -eye]))


def linf_gauge(dim: int) -> HPolytope:
    eye = np.eye(dim)
    return HPolytope(np.vstack([eye, -eye]))


def is_polytopal(g: Gauge) -> bool:
    return isinstance(g, (HPolytope, VPolytope))


def ball_facets(g: Gauge) -> np.ndarray:
    """Rows a_j with ball = {z : <a_j, z> <= 1}; polytopal gauges only."""
    if isinstance(g, HPolytope):
        return g.functionals
    if isinstance(g, VPolytope):
        return g._facets
    raise GaugeDefinitionError("ellipsoid balls have no facet form")


def ball_vertices(g: Gauge) -> np.ndarray:
    """Extreme points of the unit ball; polytopal gauges only.

    Built lazily from the facet form; the cache is populated idempotently
    under a lock, so concurrent use is safe.
    """
    if isinstance(g, VPolytope):
        with _CACHE_LOCK:
            if g._hull is None:
                v = hpoly_vertices(g._facets, np.ones(len(g._facets)))
                v.setflags(write=False)
                g._hull = v
        return g._hull
    if isinstance(g, HPolytope):
        with _CACHE_LOCK:
            if g._vertices is None:
                v = hpoly_vertices(g.functionals, np.ones(len(g.functionals)))
                v.setflags(write=False)
                g._vertices = v
        return g._vertices
    raise GaugeDefinitionError("ellipsoid balls have no vertex form")


def gauge_eval(g: Gauge, x) -> float:
    """Minkowski functional of the unit ball at x."""
    x = _vec(x, g.dim)
    if isinstance(g, (HPolytope, VPolytope)):
        return float(max(np.max(ball_facets(g) @ x), 0.0))
    a, c = g.matrix, g.center
    ax = a @ x
    ac = a @ c
    q = float(ac @ ac) - 1.0  # < 0 by construction
    b = float(ax @ ac)
    s = float(ax @ ax)
    disc = max(b * b - q * s, 0.0)
    return max((b - np.sqrt(disc)) / q, 0.0)


def gauge_eval_many(g: Gauge, pts: np.ndarray) -> np.ndarray:
    """Vectorized gauge_eval over rows of `pts`."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if pts.shape[1] != g.dim:
        raise DimensionMismatchError("points have wrong dimension")
    if isinstance(g, (HPolytope, VPolytope)):
        return np.maximum(pts @ ball_facets(g).T, 0.0).max(axis=1)
    a, c = g.matrix, g.center
    az = pts @ a  # A symmetric
    w = a @ (a @ c)
    q = float((a @ c) @ (a @ c)) - 1.0
    b = pts @ w
    s = np.einsum("ij,ij->i", az, az)
    disc = np.maximum(b * b - q * s, 0.0)
    return np.maximum((b - np.sqrt(disc)) / q, 0.0)


def gauge_polar_eval(g: Gauge, phi) -> float:
    """Polar value = support of the unit ball at the functional phi."""
    phi = _vec(phi, g.dim, "functional")
    if isinstance(g, VPolytope):
        return float(np.max(g.vertices @ phi))
    if isinstance(g, HPolytope):
        if g.dim <= 3 or g._vertices is not None:
            return float(np.max(ball_vertices(g) @ phi))
        res = solve_lp(
            -phi,
            a_ub=g.functionals,
            b_ub=np.ones(len(g.functionals)),
            free=[True] * g.dim,
        )
        return float(-res.objective)
    return float(phi @ g.center + np.linalg.norm(g._inv @ phi))


@dataclass(frozen=True)
class NormingFunctionals:
    """Subdifferential of a gauge at x.

    For x != 0 this is the convex hull of `generators`; for x = 0 it is the
    whole polar ball (generators are its extreme points when polytopal, and
    None for ellipsoids, where membership is the test gamma_polar(phi)<=1).
    """

    gauge: Gauge
    x: np.ndarray
    generators: tuple[np.ndarray, ...] | None
    at_origin: bool

    def contains(self, phi, tol: float = 1e-9) -> bool:
        phi = _vec(phi, self.gauge.dim, "functional")
        polar = gauge_polar_eval(self.gauge, phi)
        if self.at_origin:
            return polar <= 1.0 + tol
        gx = gauge_eval(self.gauge, self.x)
        return abs(polar - 1.0) <= tol and abs(phi @ self.x - gx) <= tol * (1.0 + gx)


def norming_functionals(g: Gauge, x) -> NormingFunctionals:
    """Generators of the set {phi : polar(phi) = 1, <phi, x> = gauge(x)}."""
    x = _vec(x, g.dim)
    if np.linalg.norm(x) == 0.0:
        gens = None
        if isinstance(g, HPolytope):
            gens = tuple(dedupe_points(_polar_vertices(g)))
        elif isinstance(g, VPolytope):
            gens = tuple(_polar_vertices(g))
        return NormingFunctionals(g, x, gens, at_origin=True)
    if isinstance(g, (HPolytope, VPolytope)):
        rows = ball_facets(g)
        gx = gauge_eval(g, x)
        vals = rows @ x
        active = rows[gx - vals <= ACTIVE_TOL * (1.0 + gx)]
        return NormingFunctionals(g, x, tuple(active), at_origin=False)
    y = x / gauge_eval(g, x)
    n = g.matrix @ (g.matrix @ (y - g.center))
    phi = n / float(n @ y)
    return NormingFunctionals(g, x, (phi,), at_origin=False)


def _polar_vertices(g: Gauge) -> np.ndarray:
    """Extreme points of the polar ball {phi : polar(phi) <= 1}."""
    if isinstance(g, HPolytope):
        from .hulls import convex_hull_2d

        a = g.functionals
        if g.dim == 2:
            return convex_hull_2d(a)
        rows, offs = hull_facets(a)
        return hpoly_vertices(rows, offs)
    if isinstance(g, VPolytope):
        return hpoly_vertices(g.vertices, np.ones(len(g.vertices)))
    raise GaugeDefinitionError("ellipsoid polar balls have no vertex form")


def polar_ball_facets(g: Gauge) -> np.ndarray:
    """Rows c with polar ball = {phi : <c, phi> <= 1}; polytopal only."""
    if isinstance(g, VPolytope):
        return g.vertices
    if isinstance(g, HPolytope):
        rows, offs = hull_facets(g.functionals)
        if np.any(offs < 1e-12):
            raise GaugeDefinitionError("degenerate polar ball")
        return rows / offs[:, None]
    raise GaugeDefinitionError("ellipsoid polar balls have no facet form")


def gauge_opposite(g: Gauge) -> Gauge:
    """Gauge of the reflected ball -B, i.e. x -> gauge(-x)."""
    if isinstance(g, HPolytope):
        return HPolytope(-g.functionals)
    if isinstance(g, VPolytope):
        return VPolytope(-g.vertices)
    return ShiftedEllipsoid(g.matrix, -g.center)


def scale_gauge(g: Gauge, s: float) -> Gauge:
    """Gauge of the scaled ball s*B; realizes the weighted gauge w*gamma via s = 1/w."""
    if s <= 0:
        raise GaugeDefinitionError("scale must be positive")
    if isinstance(g, HPolytope):
        return HPolytope(g.functionals / s)
    if isinstance(g, VPolytope):
        return VPolytope(g.vertices * s)
    return ShiftedEllipsoid(g.matrix / s, g.center * s)


def is_symmetric(g: Gauge, tol: float = 1e-9) -> bool:
    """Whether the ball equals its negation (i.e. the gauge is a norm)."""
    if isinstance(g, ShiftedEllipsoid):
        return bool(np.linalg.norm(g.center) <= tol)
    v = ball_vertices(g)
    for p in v:
        if np.min(np.linalg.norm(v + p, axis=1)) > tol:
            return False
    return True


def asymmetry_witness(g: Gauge) -> tuple[np.ndarray, float]:
    """Unit vector x0 maximizing gauge(-x)/gauge(x), with the max ratio.

    gauge(-.) is convex, so over a polytopal ball the maximum sits at a
    vertex.  For shifted ellipsoids the maximal ratio has the closed form
    (1+||Ac||)/(1-||Ac||), attained at x0 = c (1 + 1/||Ac||).
    """
    if isinstance(g, (HPolytope, VPolytope)):
        verts = ball_vertices(g)
        ratios = gauge_eval_many(g, -verts)
        k = int(np.argmax(ratios))
        return verts[k].copy(), float(ratios[k])
    nc = float(np.linalg.norm(g.matrix @ g.center))
    if nc <= 1e-15:
        x0 = np.zeros(g.dim)
        x0[0] = 1.0
        return x0 / gauge_eval(g, x0), 1.0
    x0 = g.center * (1.0 + 1.0 / nc)
    return x0, (1.0 + nc) / (1.0 - nc)


def lipschitz_bound(g: Gauge) -> float:
    """L with gauge(z) <= L ||z||_2 for all z."""
    if isinstance(g, (HPolytope, VPolytope)):
        return float(np.max(np.linalg.norm(ball_facets(g), axis=1)))
    a, c = g.matrix, g.center
    sigma = float(np.max(np.linalg.eigvalsh(a)))
    return sigma / (1.0 - float(np.linalg.norm(a @ c)))


def ball_outer_radius(g: Gauge) -> float:
    """Euclidean radius of a ball containing the unit ball."""
    if isinstance(g, (HPolytope, VPolytope)):
        return float(np.max(np.linalg.norm(ball_vertices(g), axis=1)))
    lam_min = float(np.min(np.linalg.eigvalsh(g.matrix)))
    return float(np.linalg.norm(g.center)) + 1.0 / lam_min
