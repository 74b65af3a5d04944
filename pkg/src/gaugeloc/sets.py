"""Convex sites: support values, membership, gauge distance, normal cones.

Sites are singletons, bounded V-polytopes (covering segments and polygons),
affine flats and Euclidean balls.  Distances are exact LPs on the fully
polyhedral combinations; the remaining combinations are solved by bisection
on the radius t of the growing ball x + t*B against exact Euclidean
projections in transformed coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import gauge as G
from .errors import DimensionMismatchError, PreconditionError, SetDefinitionError
from .linprog import solve_lp
from .projections import (
    project_ball,
    project_ellipsoid,
    project_flat,
    project_hull,
)

FLAT_ORTH_TOL = 1e-9
_BISECT_TOL = 1e-12


def _vec(x, dim, name="point"):
    x = np.asarray(x, dtype=float)
    if x.shape != (dim,):
        raise DimensionMismatchError(f"{name} has shape {x.shape}, expected ({dim},)")
    return x


@dataclass(eq=False)
class Singleton:
    p: np.ndarray

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.p, dtype=float))
        p.setflags(write=False)
        self.p = p

    @property
    def dim(self) -> int:
        return self.p.shape[0]


@dataclass(eq=False)
class VPolytopeSet:
    vertices: np.ndarray
    _hull2d: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if len(v) == 0:
            raise SetDefinitionError("vertex list is empty")
        v.setflags(write=False)
        self.vertices = v

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def hull2d(self) -> np.ndarray:
        """CCW hull vertices (2-D only); built once, idempotently."""
        if self._hull2d is None:
            from .hulls import convex_hull_2d

            hull = convex_hull_2d(self.vertices)
            hull.setflags(write=False)
            self._hull2d = hull
        return self._hull2d


@dataclass(eq=False)
class AffineFlat:
    base: np.ndarray
    directions: np.ndarray
    _onb: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        r = np.atleast_1d(np.asarray(self.base, dtype=float))
        d_mat = np.atleast_2d(np.asarray(self.directions, dtype=float))
        if d_mat.shape[1] != r.shape[0]:
            raise SetDefinitionError("directions do not match the base dimension")
        if np.linalg.matrix_rank(d_mat, tol=1e-10) < len(d_mat):
            raise SetDefinitionError("flat directions are linearly dependent")
        q, _ = np.linalg.qr(d_mat.T)
        onb = q.T[: len(d_mat)]
        for arr in (r, d_mat, onb):
            arr.setflags(write=False)
        self.base, self.directions, self._onb = r, d_mat, onb

    @property
    def dim(self) -> int:
        return self.base.shape[0]

    @property
    def onb(self) -> np.ndarray:
        return self._onb


@dataclass(eq=False)
class EuclideanBall:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        c.setflags(write=False)
        self.center = c
        self.radius = float(self.radius)
        if self.radius <= 0:
            raise SetDefinitionError("ball radius must be positive")

    @property
    def dim(self) -> int:
        return self.center.shape[0]


ConvexSet = Singleton | VPolytopeSet | AffineFlat | EuclideanBall


def segment(a, b) -> VPolytopeSet:
    return VPolytopeSet(np.vstack([np.asarray(a, float), np.asarray(b, float)]))


def is_polyhedral(k: ConvexSet) -> bool:
    return isinstance(k, (Singleton, VPolytopeSet, AffineFlat))


def is_bounded(k: ConvexSet) -> bool:
    return not isinstance(k, AffineFlat)


def representative_point(k: ConvexSet) -> np.ndarray:
    if isinstance(k, Singleton):
        return k.p.copy()
    if isinstance(k, VPolytopeSet):
        return k.vertices.mean(axis=0)
    if isinstance(k, AffineFlat):
        return k.base.copy()
    return k.center.copy()


def generator_points(k: ConvexSet) -> np.ndarray:
    """Finitely many points whose hull is K (polyhedral sets only)."""
    if isinstance(k, Singleton):
        return k.p[None, :]
    if isinstance(k, VPolytopeSet):
        return k.vertices
    raise PreconditionError("set has no finite generator list")


class SupportValue(NamedTuple):
    """Support function value with an explicit finiteness flag."""

    finite: bool
    value: float

    @staticmethod
    def of(value: float) -> "SupportValue":
        return SupportValue(True, float(value))

    @staticmethod
    def infinite() -> "SupportValue":
        return SupportValue(False, float("nan"))


def support_value(k: ConvexSet, phi) -> SupportValue:
    """sup over K of <phi, .>; +infinity is carried as finite=False."""
    phi = _vec(phi, k.dim, "functional")
    if isinstance(k, Singleton):
        return SupportValue.of(phi @ k.p)
    if isinstance(k, VPolytopeSet):
        return SupportValue.of(np.max(k.vertices @ phi))
    if isinstance(k, AffineFlat):
        scale = 1.0 + float(np.linalg.norm(phi))
        if np.any(np.abs(k.onb @ phi) > FLAT_ORTH_TOL * scale):
            return SupportValue.infinite()
        return SupportValue.of(phi @ k.base)
    return SupportValue.of(phi @ k.center + k.radius * np.linalg.norm(phi))


def contains(k: ConvexSet, x, tol: float) -> bool:
    """Membership within tolerance."""
    if tol < 0:
        raise PreconditionError("tolerance must be nonnegative")
    x = _vec(x, k.dim)
    if isinstance(k, Singleton):
        return bool(np.linalg.norm(x - k.p) <= tol)
    if isinstance(k, VPolytopeSet):
        v = k.vertices
        m = len(v)
        if m == 1:
            return bool(np.linalg.norm(x - v[0]) <= tol)
        # LP feasibility of convex-combination weights, relaxed by slacks.
        d = k.dim
        n = m + 2 * d
        c = np.zeros(n)
        c[m:] = 1.0
        a_eq = np.zeros((d + 1, n))
        a_eq[:d, :m] = v.T
        a_eq[:d, m : m + d] = np.eye(d)
        a_eq[:d, m + d :] = -np.eye(d)
        a_eq[d, :m] = 1.0
        b_eq = np.concatenate([x, [1.0]])
        res = solve_lp(c, a_eq=a_eq, b_eq=b_eq)
        return res.ok and res.objective <= tol + 1e-12
    if isinstance(k, AffineFlat):
        return bool(np.linalg.norm(x - project_flat(x, k.base, k.onb)) <= tol)
    return bool(np.linalg.norm(x - k.center) <= k.radius + tol)


def euclidean_project(x, k: ConvexSet) -> np.ndarray:
    """Exact Euclidean metric projection onto K."""
    x = _vec(x, k.dim)
    if isinstance(k, Singleton):
        return k.p.copy()
    if isinstance(k, VPolytopeSet):
        if k.dim == 2:
            from .projections import project_polygon_ccw

            return project_polygon_ccw(x, k.hull2d)
        return project_hull(x, k.vertices)
    if isinstance(k, AffineFlat):
        return project_flat(x, k.base, k.onb)
    return project_ball(x, k.center, k.radius)


def _contains_fast(k: ConvexSet, x: np.ndarray, tol: float) -> bool:
    """Projection-based membership test (hot-path variant of `contains`)."""
    if isinstance(k, VPolytopeSet):
        return bool(np.linalg.norm(x - euclidean_project(x, k)) <= tol)
    return contains(k, x, tol)


class Distance(NamedTuple):
    value: float
    witness: np.ndarray


def set_distance(g: G.Gauge, x, k: ConvexSet) -> Distance:
    """Gauge distance inf{gauge(y - x) : y in K} with a minimizing witness."""
    if g.dim != k.dim:
        raise DimensionMismatchError("gauge and set dimensions differ")
    x = _vec(x, k.dim)
    if _contains_fast(k, x, 1e-12):
        return Distance(0.0, x.copy())
    if isinstance(k, Singleton):
        return Distance(G.gauge_eval(g, k.p - x), k.p.copy())
    if G.is_polytopal(g) and isinstance(k, (VPolytopeSet, AffineFlat)):
        return _distance_lp(g, x, k)
    if isinstance(g, G.ShiftedEllipsoid) and np.linalg.norm(g.center) <= 1e-15:
        # gauge(z) = ||A z||: one exact projection in transformed coordinates
        a = g.matrix
        y = _project_transformed(a @ x, a, k)
        y_back = np.linalg.solve(a, y)
        return Distance(G.gauge_eval(g, y_back - x), y_back)
    return _distance_bisect(g, x, k)


def _distance_lp(g, x, k) -> Distance:
    rows = G.ball_facets(g)
    j = len(rows)
    if isinstance(k, VPolytopeSet):
        v = k.vertices
        m = len(v)
        # vars: mu (m, >=0), t (>=0); rows: a.(V mu - x) <= t; sum mu = 1
        c = np.zeros(m + 1)
        c[-1] = 1.0
        a_ub = np.hstack([rows @ v.T, -np.ones((j, 1))])
        b_ub = rows @ x
        a_eq = np.zeros((1, m + 1))
        a_eq[0, :m] = 1.0
        res = solve_lp(c, a_ub=a_ub, b_ub=b_ub, a_eq=a_eq, b_eq=[1.0])
        mu = res.x[:m]
        return Distance(max(res.objective, 0.0), mu @ v)
    # flat: vars lam (free), t (>=0); rows: a.(r + D lam - x) <= t
    d_mat = k.directions
    kdim = len(d_mat)
    c = np.zeros(kdim + 1)
    c[-1] = 1.0
    a_ub = np.hstack([rows @ d_mat.T, -np.ones((j, 1))])
    b_ub = rows @ (x - k.base)
    free = [True] * kdim + [False]
    res = solve_lp(c, a_ub=a_ub, b_ub=b_ub, free=free)
    lam = res.x[:kdim]
    return Distance(max(res.objective, 0.0), k.base + lam @ d_mat)


def _transformed_projector(a: np.ndarray, k: ConvexSet):
    """Factory: Euclidean projector onto A*K with precomputed geometry."""
    if isinstance(k, VPolytopeSet):
        tv = k.vertices @ a.T
        if k.dim == 2:
            from .hulls import convex_hull_2d
            from .projections import project_polygon_ccw

            hull = convex_hull_2d(tv)
            return lambda p: project_polygon_ccw(p, hull)
        return lambda p: project_hull(p, tv)
    if isinstance(k, AffineFlat):
        dirs = k.directions @ a.T
        q, _ = np.linalg.qr(dirs.T)
        onb = q.T[: len(dirs)]
        base = a @ k.base
        return lambda p: project_flat(p, base, onb)
    if isinstance(k, EuclideanBall):
        # A*ball = {w : ||A^-1 w - center|| <= radius}
        inv = np.linalg.inv(a)
        return lambda p: project_ellipsoid(p, inv, k.center, k.radius)
    raise PreconditionError("unexpected set type")


def _project_transformed(p: np.ndarray, a: np.ndarray, k: ConvexSet) -> np.ndarray:
    """Euclidean projection of p onto A*K."""
    return _transformed_projector(a, k)(p)


def _distance_bisect(g, x, k) -> Distance:
    """dist <= t  iff  (x + t*B) meets K; the test uses exact projections."""
    if isinstance(g, G.ShiftedEllipsoid):
        a, c = g.matrix, g.center
        projector = _transformed_projector(a, k)

        def gap(t):
            p = a @ (x + t * c)
            w = projector(p)
            return float(np.linalg.norm(w - p)) - t, np.linalg.solve(a, w)

    else:
        verts = G.ball_vertices(g)
        if g.dim == 2:
            from .hulls import convex_hull_2d
            from .projections import project_polygon_ccw

            hull0 = convex_hull_2d(verts)  # hull order is scale/shift invariant

            def gap(t):
                w = project_polygon_ccw(k.center, x + t * hull0)
                return float(np.linalg.norm(w - k.center)) - k.radius, project_ball(
                    w, k.center, k.radius
                )

        else:

            def gap(t):
                w = project_hull(k.center, x + t * verts)
                return float(np.linalg.norm(w - k.center)) - k.radius, project_ball(
                    w, k.center, k.radius
                )

    y0 = euclidean_project(x, k)
    hi = G.gauge_eval(g, y0 - x)
    lo = 0.0
    witness = y0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        val, y = gap(mid)
        if val <= 0.0:
            hi, witness = mid, y
        else:
            lo = mid
        if hi - lo <= _BISECT_TOL * (1.0 + hi):
            break
    return Distance(hi, witness)


def _line_gauge_values(g, base, d):
    """Factory: lam-array -> gauge(base + lam*d) rowwise, with the line
    coefficients precomputed (affine per facet, quadratic for ellipsoids)."""
    if G.is_polytopal(g):
        rows = G.ball_facets(g)
        p = base @ rows.T
        q = (d @ rows.T) if d.ndim == 2 else rows @ d

        def values(lam):
            if d.ndim == 2:
                return np.maximum(p + lam[:, None] * q, 0.0).max(axis=1)
            return np.maximum(p + np.outer(lam, q), 0.0).max(axis=1)

        return values
    a, c = g.matrix, g.center
    ac = a @ (a @ c)
    qq = float((a @ c) @ (a @ c)) - 1.0
    u = base @ a
    w = (d @ a) if d.ndim == 2 else (a @ d)[None, :]
    b0 = base @ ac
    b1 = (d @ ac) if d.ndim == 2 else float(d @ ac)
    s0 = np.einsum("ij,ij->i", u, u)
    s1 = np.einsum("ij,ij->i", u, np.broadcast_to(w, u.shape))
    s2 = (
        np.einsum("ij,ij->i", w, w)
        if d.ndim == 2
        else np.full(len(base), float(w[0] @ w[0]))
    )

    def values(lam):
        b = b0 + lam * b1
        s = s0 + 2.0 * lam * s1 + lam * lam * s2
        disc = np.maximum(b * b - qq * s, 0.0)
        return np.maximum((b - np.sqrt(disc)) / qq, 0.0)

    return values


def _ternary_min(g, base, d, lo, hi, iters):
    """Vectorized ternary search of gauge(base + lam*d) over [lo, hi] rows."""
    f = _line_gauge_values(g, base, d)
    for _ in range(iters):  # the section of a gauge along a line is convex
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        take = f(m1) < f(m2)
        hi = np.where(take, m2, hi)
        lo = np.where(take, lo, m1)
    return f(0.5 * (lo + hi))


def _edge_dist_many(g, u, v, pts, iters=40):
    """min over lam in [0,1] of gauge(u + lam (v-u) - x), vectorized in x."""
    n = len(pts)
    return _ternary_min(g, u - pts, v - u, np.zeros(n), np.ones(n), iters)


def _line_dist_many(g, base_pt, direction, pts, iters=64):
    """min over lam in R of gauge(base + lam dir - x), vectorized in x."""
    reach = G.ball_outer_radius(g) * G.lipschitz_bound(g)
    rad = reach * (np.linalg.norm(pts - base_pt, axis=1) + 1.0) + 1.0
    return _ternary_min(g, base_pt - pts, direction, -rad, rad, iters)


def _circle_dist_many(g, center, radius, pts):
    """min over the circle bd K of the gauge distance, vectorized (2-D)."""
    coarse = np.linspace(0.0, 2.0 * np.pi, 65)[:-1]
    ring = center + radius * np.column_stack([np.cos(coarse), np.sin(coarse)])
    n = len(pts)
    vals = np.empty((n, len(coarse)))
    for j, y in enumerate(ring):
        vals[:, j] = G.gauge_eval_many(g, y - pts)
    kbest = np.argmin(vals, axis=1)
    step = coarse[1] - coarse[0]
    lo = coarse[kbest] - step
    hi = coarse[kbest] + step
    best = vals[np.arange(n), kbest]
    stacked = np.vstack([pts, pts])
    for _ in range(48):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        ang = np.concatenate([m1, m2])
        probe = center + radius * np.column_stack([np.cos(ang), np.sin(ang)])
        f = G.gauge_eval_many(g, probe - stacked)
        take = f[:n] < f[n:]
        hi = np.where(take, m2, hi)
        lo = np.where(take, lo, m1)
    mid = 0.5 * (lo + hi)
    ym = center + radius * np.column_stack([np.cos(mid), np.sin(mid)]) - pts
    return np.minimum(best, G.gauge_eval_many(g, ym))


def _is_scaled_euclidean(g) -> float | None:
    """Return sigma if gauge(z) = sigma ||z||, else None."""
    if not isinstance(g, G.ShiftedEllipsoid):
        return None
    if np.linalg.norm(g.center) > 1e-15:
        return None
    a = g.matrix
    sigma = a[0, 0]
    if np.max(np.abs(a - sigma * np.eye(len(a)))) <= 1e-12:
        return float(sigma)
    return None


def dist_many(g: G.Gauge, k: ConvexSet, pts: np.ndarray) -> np.ndarray:
    """Vectorized set_distance values over rows of `pts` (no witnesses)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if isinstance(k, Singleton):
        return G.gauge_eval_many(g, k.p - pts)
    sigma = _is_scaled_euclidean(g)
    if sigma is not None and isinstance(k, AffineFlat):
        rel = pts - k.base
        along = rel @ k.onb.T @ k.onb
        return sigma * np.linalg.norm(rel - along, axis=1)
    if sigma is not None and isinstance(k, EuclideanBall):
        return sigma * np.maximum(np.linalg.norm(pts - k.center, axis=1) - k.radius, 0.0)
    if k.dim == 2:
        if isinstance(k, VPolytopeSet):
            from .hulls import hull_facets

            hull = k.hull2d
            if len(hull) == 1:
                return G.gauge_eval_many(g, hull[0] - pts)
            if len(hull) == 2:
                return _edge_dist_many(g, hull[0], hull[1], pts)
            # all boundary edges share one stacked ternary search
            n = len(pts)
            nxt = np.roll(hull, -1, axis=0)
            base = (hull[:, None, :] - pts[None, :, :]).reshape(-1, 2)
            dirs = np.repeat(nxt - hull, n, axis=0)
            m = len(base)
            vals = _ternary_min(g, base, dirs, np.zeros(m), np.ones(m), 40)
            out = vals.reshape(len(hull), n).min(axis=0)
            rows, offs = hull_facets(hull)
            inside = np.all(pts @ rows.T <= offs + 1e-12, axis=1)
            out[inside] = 0.0
            return out
        if isinstance(k, AffineFlat):
            if len(k.directions) >= k.dim:
                return np.zeros(len(pts))
            return _line_dist_many(g, k.base, k.directions[0], pts)
        if isinstance(k, EuclideanBall):
            out = _circle_dist_many(g, k.center, k.radius, pts)
            inside = np.linalg.norm(pts - k.center, axis=1) <= k.radius
            out[inside] = 0.0
            return out
    return np.array([set_distance(g, p, k).value for p in pts])


def normal_cone_contains(k: ConvexSet, x, phi, tol: float) -> bool:
    """Whether phi lies in the normal cone of K at x (x must be in K)."""
    x = _vec(x, k.dim)
    phi = _vec(phi, k.dim, "functional")
    if not contains(k, x, max(tol, 1e-9)):
        raise PreconditionError("x is not a point of K")
    scale = tol * (1.0 + float(np.linalg.norm(phi)))
    if isinstance(k, Singleton):
        return True
    if isinstance(k, VPolytopeSet):
        return bool(np.all((k.vertices - x) @ phi <= scale))
    if isinstance(k, AffineFlat):
        return bool(np.all(np.abs(k.onb @ phi) <= scale))
    rel = x - k.center
    if np.linalg.norm(rel) < k.radius - max(tol, 1e-12):
        return bool(np.linalg.norm(phi) <= scale)  # interior: cone is {0}
    n = np.linalg.norm(phi)
    if n <= scale:
        return True
    return bool(phi @ rel >= n * k.radius - scale * (1.0 + k.radius))


def dist_subdifferential_contains(g: G.Gauge, x, k: ConvexSet, phi, tol: float) -> bool:
    """Exact membership test for the subdifferential of dist(., K) at x."""
    x = _vec(x, k.dim)
    phi = _vec(phi, k.dim, "functional")
    if G.gauge_polar_eval(g, -phi) > 1.0 + tol:
        return False
    sup = support_value(k, phi)
    if not sup.finite:
        return False
    dist = set_distance(g, x, k).value
    lhs = sup.value + dist
    rhs = float(phi @ x)
    return bool(abs(lhs - rhs) <= tol * (1.0 + abs(rhs)))
