"""Euclidean-norm specializations: projection-form optimality tests.

Everything here fixes the gauge to the Euclidean norm, where metric
projections are single-valued and the optimality conditions become
statements about sums of unit vectors versus normal-cone caps.  Set
membership in a Minkowski sum of caps is decided by Dykstra alternating
projections on the product space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import ftcore as F
from . import gauge as G
from . import sets as S
from .errors import InputError, PreconditionError
from .projections import project_polar_cone

DYKSTRA_SWEEPS = 10_000
DYKSTRA_TOL = 1e-7
CRITERION_TOL = 1e-9


@dataclass(eq=False)
class EuclidInstance:
    dimension: int
    sites: tuple[tuple[S.ConvexSet, float], ...]

    def __post_init__(self):
        self.sites = tuple((k, float(w)) for k, w in self.sites)
        if not self.sites:
            raise InputError("instance has no sites")
        for k, w in self.sites:
            if k.dim != self.dimension:
                raise InputError("site dimension differs from instance")
            if w <= 0:
                raise InputError("weights must be positive")

    def to_instance(self) -> F.Instance:
        g = G.euclidean_gauge(self.dimension)
        return F.Instance(
            self.dimension, tuple(F.SiteSpec(k, g, w) for k, w in self.sites)
        )


def _unit_toward_projection(k: S.ConvexSet, x: np.ndarray) -> np.ndarray:
    p = S.euclidean_project(x, k)
    rel = p - x
    return rel / np.linalg.norm(rel)


def _cone_projector(k: S.ConvexSet, x: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Euclidean projector onto the normal cone of K at x (x in K)."""
    if isinstance(k, S.Singleton):
        return lambda z: z.copy()  # normal cone is the whole space
    if isinstance(k, S.VPolytopeSet):
        gens = k.vertices - x
        return lambda z: project_polar_cone(z, gens)
    if isinstance(k, S.AffineFlat):
        onb = k.onb
        return lambda z: z - onb.T @ (onb @ z)
    rel = x - k.center
    r = np.linalg.norm(rel)
    if r < k.radius - 1e-9:
        return lambda z: np.zeros_like(z)  # interior: cone is {0}
    u = rel / r
    return lambda z: max(float(z @ u), 0.0) * u


def minkowski_cap_membership(
    u: np.ndarray,
    caps: list[tuple[Callable[[np.ndarray], np.ndarray], float]],
    tol: float = DYKSTRA_TOL,
    sweeps: int = DYKSTRA_SWEEPS,
) -> tuple[bool, float]:
    """Dykstra test for u in sum of {cone_i intersect ball(0, w_i)}.

    Projection onto a cone capped by a centered ball is the radial clip of
    the cone projection.  Returns (member, residual).
    """
    m = len(caps)
    if m == 0:
        r = float(np.linalg.norm(u))
        return r <= tol, r
    d = u.shape[0]
    z = np.tile(u / m, (m, 1))
    corr = np.zeros((m, d))
    best = np.inf
    window_best = np.inf
    for sweep in range(sweeps):
        y = np.empty_like(z)
        for i, (proj, w) in enumerate(caps):
            c = proj(z[i] + corr[i])
            n = np.linalg.norm(c)
            if n > w:
                c = c * (w / n)
            y[i] = c
        corr = z + corr - y
        resid = float(np.linalg.norm(y.sum(axis=0) - u))
        best = min(best, resid)
        if resid <= tol * 0.1:
            return True, resid
        # non-members converge to a positive gap: stop once it plateaus
        if sweep % 400 == 399:
            if best > tol and best > window_best * (1.0 - 1e-4):
                break
            window_best = best
        z = y + (u - y.sum(axis=0)) / m
    return best <= tol, best


@dataclass
class OptimalityReport:
    optimal: bool
    pull: np.ndarray  # weighted unit-vector sum over non-containing sites
    residual: float


def euclid_optimal_report(inst: EuclidInstance, xbar, tol: float = DYKSTRA_TOL) -> OptimalityReport:
    """Projection-form optimality test with weights."""
    xbar = np.asarray(xbar, dtype=float)
    if xbar.shape != (inst.dimension,):
        raise InputError("point has wrong dimension")
    u = np.zeros(inst.dimension)
    caps = []
    for k, w in inst.sites:
        if S.contains(k, xbar, 1e-9):
            caps.append((_cone_projector(k, xbar), w))
        else:
            u += w * _unit_toward_projection(k, xbar)
    member, resid = minkowski_cap_membership(u, caps, tol)
    return OptimalityReport(member, u, resid)


def euclid_optimal(inst: EuclidInstance, xbar, tol: float = DYKSTRA_TOL) -> bool:
    return euclid_optimal_report(inst, xbar, tol).optimal


def _split_absorbed(inst: EuclidInstance, xbar, kind: str):
    """Locate the absorbed site and check the structural preconditions."""
    absorbed = []
    others = []
    for k, w in inst.sites:
        if kind == "point_absorbed" and isinstance(k, S.Singleton) and np.linalg.norm(
            k.p - xbar
        ) <= 1e-9:
            absorbed.append((k, w))
        elif kind == "flat_absorbed" and isinstance(k, S.AffineFlat) and S.contains(
            k, xbar, 1e-9
        ):
            absorbed.append((k, w))
        else:
            others.append((k, w))
    if len(absorbed) != 1:
        raise PreconditionError(f"{kind} case needs exactly one matching absorbed site")
    for k, _ in others:
        if S.contains(k, xbar, 1e-9):
            raise PreconditionError("point lies in a site other than the absorbed one")
    return absorbed[0], others


def flat_case_test(inst: EuclidInstance, xbar, case: str) -> bool:
    """The three displayed criteria: floating, point_absorbed, flat_absorbed."""
    xbar = np.asarray(xbar, dtype=float)
    if case == "floating":
        for k, _ in inst.sites:
            if S.contains(k, xbar, 1e-9):
                raise PreconditionError("floating case forbids containing sites")
        pull = sum(w * _unit_toward_projection(k, xbar) for k, w in inst.sites)
        return bool(np.linalg.norm(pull) <= CRITERION_TOL)
    if case == "point_absorbed":
        (k_abs, w_abs), others = _split_absorbed(inst, xbar, case)
        pull = sum(
            (w * _unit_toward_projection(k, xbar) for k, w in others),
            np.zeros(inst.dimension),
        )
        return bool(np.linalg.norm(pull) <= w_abs + CRITERION_TOL)
    if case == "flat_absorbed":
        (k_abs, w_abs), others = _split_absorbed(inst, xbar, case)
        pull = sum(
            (w * _unit_toward_projection(k, xbar) for k, w in others),
            np.zeros(inst.dimension),
        )
        onb = k_abs.onb
        tangential = float(np.linalg.norm(onb @ pull))
        if tangential > CRITERION_TOL * (1.0 + np.linalg.norm(pull)):
            return False
        return bool(np.linalg.norm(pull) <= w_abs + CRITERION_TOL)
    raise PreconditionError(f"unknown case {case!r}")


@dataclass
class FlatPointVerdict:
    optimal: bool
    pull: np.ndarray
    alpha: float
    bound: float


def flat_point_absorbed_test(inst: EuclidInstance, xbar) -> FlatPointVerdict:
    """Corrected criterion for a point site sitting on a flat site.

    The absorbed point and flat sites must carry weight 1 (the piecewise
    bound is specific to that normalization); remaining sites may be
    weighted.  The angle/bound verdict is cross-checked against the
    set-membership criterion away from the boundary.
    """
    xbar = np.asarray(xbar, dtype=float)
    point_site = None
    flat_site = None
    others = []
    for k, w in inst.sites:
        if point_site is None and isinstance(k, S.Singleton) and np.linalg.norm(
            k.p - xbar
        ) <= 1e-9:
            point_site = (k, w)
        elif flat_site is None and isinstance(k, S.AffineFlat) and S.contains(
            k, xbar, 1e-9
        ):
            flat_site = (k, w)
        else:
            others.append((k, w))
    if point_site is None or flat_site is None:
        raise PreconditionError("need a point site at x and a flat site through x")
    k_flat = flat_site[0]
    if not 1 <= len(k_flat.directions) <= inst.dimension - 1:
        raise PreconditionError("flat dimension must be between 1 and d-1")
    if abs(point_site[1] - 1.0) > 1e-12 or abs(flat_site[1] - 1.0) > 1e-12:
        raise PreconditionError("absorbed sites must have weight 1")
    for k, _ in others:
        if S.contains(k, xbar, 1e-9):
            raise PreconditionError("point lies in an additional site")

    v = sum(
        (w * _unit_toward_projection(k, xbar) for k, w in others),
        np.zeros(inst.dimension),
    )
    onb = k_flat.onb
    v_par = onb.T @ (onb @ v)
    v_perp = v - v_par
    nv = float(np.linalg.norm(v))
    alpha = 0.0 if nv <= 1e-15 else float(np.arctan2(np.linalg.norm(v_perp), np.linalg.norm(v_par)))
    bound = 1.0 / np.cos(alpha) if alpha <= np.pi / 4 else 2.0 * np.sin(alpha)
    optimal = nv <= bound + CRITERION_TOL

    caps = [
        (lambda z: z - onb.T @ (onb @ z), 1.0),  # flat normal cone cap
        (lambda z: z.copy(), 1.0),  # point site: whole-space cap
    ]
    member, _ = minkowski_cap_membership(v, caps)
    if abs(nv - bound) > 1e-6 and member != optimal:
        raise RuntimeError("set-membership criterion disagrees with the angle bound")
    return FlatPointVerdict(bool(optimal), v, alpha, float(bound))


def directional_derivative(k: S.ConvexSet, x, y) -> float:
    """One-sided derivative of the Euclidean distance to K at x along y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (k.dim,) or y.shape != (k.dim,):
        raise InputError("dimension mismatch")
    if not S.contains(k, x, 1e-12):
        p = S.euclidean_project(x, k)
        rel = x - p
        return float(rel @ y / np.linalg.norm(rel))
    # support of (normal cone intersect unit ball) at y = norm of the cone projection
    proj = _cone_projector(k, x)
    return float(np.linalg.norm(proj(y)))


@dataclass
class Multiplicity:
    multiple: bool
    case: str | None  # "i" | "ii" | "iii"
    flags: tuple[str, ...] = ()


def multiplicity_classify(flat: S.AffineFlat, points, tol: float) -> Multiplicity:
    """Classify when dist(., flat) + sum of point distances has several minima."""
    pts = [np.asarray(p, dtype=float) for p in points]
    n = len(pts)
    for i in range(n):
        for j in range(i + 1, n):
            if np.linalg.norm(pts[i] - pts[j]) <= tol:
                raise InputError("points must be distinct")
    if n == 1:
        if not S.contains(flat, pts[0], tol):
            return Multiplicity(True, "i")
        return Multiplicity(False, None)

    arr = np.array(pts)
    centered = arr - arr.mean(axis=0)
    svals = np.linalg.svd(centered, compute_uv=False)
    collinear = svals[1] <= tol * max(1.0, svals[0])
    if not collinear:
        return Multiplicity(False, None)
    direction = centered[np.argmax(np.linalg.norm(centered, axis=1))]
    direction = direction / np.linalg.norm(direction)
    onb = flat.onb

    if n % 2 == 0:
        inside = S.contains(flat, pts[0], tol) and np.linalg.norm(
            direction - onb.T @ (onb @ direction)
        ) <= tol
        if inside:
            return Multiplicity(True, "ii")
        return Multiplicity(False, None)

    # odd n >= 3: ortho-collinear with the median off the flat
    orthogonal = float(np.linalg.norm(onb @ direction)) <= tol
    if not orthogonal:
        return Multiplicity(False, None)
    # the line {p1 + t direction} must meet the flat
    rel = pts[0] - flat.base
    perp_rel = rel - onb.T @ (onb @ rel)
    t_star = -float(perp_rel @ direction)  # direction is unit and orthogonal to U
    foot = pts[0] + t_star * direction
    if not S.contains(flat, foot, max(tol, 1e-9)):
        return Multiplicity(False, None)
    order = np.argsort(arr @ direction, kind="stable")
    median = arr[order[(n - 1) // 2]]
    flags = []
    if any(np.linalg.norm(foot - p) <= tol for p in pts):
        flags.append("foot coincides with a given point; it is counted twice")
    if S.contains(flat, median, tol):
        return Multiplicity(False, None, tuple(flags))
    return Multiplicity(True, "iii", tuple(flags))
