"""Minsum location instances, solvers, and optimality certificates.

Fully polyhedral instances (polytopal gauges, polyhedral sites and
constraint) are solved exactly by one LP.  Everything else runs the
standard nonsmooth baseline: a subgradient method with diminishing steps,
followed by a deterministic multiscale local polish (the objective is
convex, so the polish cannot be trapped).

Certificates follow the dual convention gamma_i_polar(-phi_i) <= 1 with
support equality; for singleton sites the classical norming-functional
form is the negation, which `certify_points` applies internally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gauge as G
from . import sets as S
from .errors import (
    DimensionMismatchError,
    EmptyInstanceError,
    InputError,
    NonattainmentSuspected,
    PreconditionError,
)
from .linprog import solve_lp

SUBGRAD_MAX_ITER = 100_000
SUBGRAD_BUDGET = 800  # coarse localization; the polish phases add precision
SUBGRAD_PATIENCE = 80
CERT_TOL = 1e-7


@dataclass(eq=False)
class SiteSpec:
    set: S.ConvexSet
    gauge: G.Gauge
    weight: float = 1.0

    def __post_init__(self):
        self.weight = float(self.weight)
        if self.weight <= 0:
            raise InputError("site weight must be positive")
        if self.set.dim != self.gauge.dim:
            raise DimensionMismatchError("site set and gauge dimensions differ")


@dataclass(eq=False)
class Instance:
    dimension: int
    sites: tuple[SiteSpec, ...]
    constraint: S.ConvexSet | None = None

    def __post_init__(self):
        self.sites = tuple(self.sites)
        if not self.sites:
            raise EmptyInstanceError("instance has no sites")
        for s in self.sites:
            if s.set.dim != self.dimension:
                raise DimensionMismatchError("site dimension differs from instance")
        if self.constraint is not None and self.constraint.dim != self.dimension:
            raise DimensionMismatchError("constraint dimension differs from instance")

    @property
    def is_heron(self) -> bool:
        return self.constraint is not None


def instance(dimension, sites, constraint=None) -> Instance:
    return Instance(dimension, tuple(SiteSpec(*s) for s in sites), constraint)


def point_instance(points, gauge_obj, weights=None) -> Instance:
    pts = [np.asarray(p, float) for p in points]
    w = weights if weights is not None else [1.0] * len(pts)
    return Instance(
        len(pts[0]),
        tuple(SiteSpec(S.Singleton(p), gauge_obj, wi) for p, wi in zip(pts, w)),
    )


@dataclass(frozen=True)
class Certificate:
    """Dual functionals, one per site (+ one for the Heron constraint)."""

    phis: tuple[np.ndarray, ...]
    phi0: np.ndarray | None = None

    def point_functionals(self) -> tuple[np.ndarray, ...]:
        """The norming-functional view (phi_i norms p_i - x)."""
        return tuple(-p for p in self.phis)

    def sum_residual(self) -> float:
        total = sum(self.phis)
        if self.phi0 is not None:
            total = total + self.phi0
        return float(np.linalg.norm(total))


@dataclass
class Solution:
    point: np.ndarray
    value: float
    certificate: Certificate | None
    method: str  # "lp" | "subgradient"
    iterations: int
    residual: float


@dataclass
class CertificateReport:
    ok: bool
    failures: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.ok


def weighted_gauge(site: SiteSpec) -> G.Gauge:
    """w * gamma, realized by scaling the unit ball by 1/w."""
    if site.weight == 1.0:
        return site.gauge
    return G.scale_gauge(site.gauge, 1.0 / site.weight)


def objective_eval(inst: Instance, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (inst.dimension,):
        raise DimensionMismatchError("point has wrong dimension")
    return float(
        sum(s.weight * S.set_distance(s.gauge, x, s.set).value for s in inst.sites)
    )


def objective_many(inst: Instance, pts) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    total = np.zeros(len(pts))
    for s in inst.sites:
        total += s.weight * S.dist_many(s.gauge, s.set, pts)
    return total


def is_fully_polyhedral(inst: Instance) -> bool:
    if any(not G.is_polytopal(s.gauge) or not S.is_polyhedral(s.set) for s in inst.sites):
        return False
    return inst.constraint is None or S.is_polyhedral(inst.constraint)


# ---------------------------------------------------------------------------
# solving


def solve(inst: Instance) -> Solution:
    """Minimize the weighted sum of gauge distances (optionally over K0)."""
    if is_fully_polyhedral(inst):
        return _solve_lp(inst)
    return _solve_subgradient(inst)


def _solve_lp(inst: Instance) -> Solution:
    """One LP: min sum w_i t_i with ball rows bounding each t_i.

    Variables: x free, per-site hull weights mu_i (or flat coordinates
    lambda_i), epigraph variables t_i >= 0, plus constraint rows for K0.
    """
    d = inst.dimension
    n = len(inst.sites)
    cols: list[tuple[str, int]] = [("x", d)]
    for i, s in enumerate(inst.sites):
        if isinstance(s.set, S.VPolytopeSet):
            cols.append((f"mu{i}", len(s.set.vertices)))
        elif isinstance(s.set, S.AffineFlat):
            cols.append((f"lam{i}", len(s.set.directions)))
    k0 = inst.constraint
    if isinstance(k0, S.VPolytopeSet):
        cols.append(("mu0", len(k0.vertices)))
    elif isinstance(k0, S.AffineFlat):
        cols.append(("lam0", len(k0.directions)))
    cols.append(("t", n))
    offs, total = {}, 0
    for name, size in cols:
        offs[name] = total
        total += size

    free = np.zeros(total, dtype=bool)
    free[:d] = True
    for name, size in cols:
        if name.startswith("lam"):
            free[offs[name] : offs[name] + size] = True

    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for i, s in enumerate(inst.sites):
        rows = G.ball_facets(s.gauge)
        ti = offs["t"] + i
        for a in rows:
            row = np.zeros(total)
            row[:d] = -a
            row[ti] = -1.0
            if isinstance(s.set, S.Singleton):
                a_ub.append(row)
                b_ub.append(-float(a @ s.set.p))
            elif isinstance(s.set, S.VPolytopeSet):
                o = offs[f"mu{i}"]
                row[o : o + len(s.set.vertices)] = s.set.vertices @ a
                a_ub.append(row)
                b_ub.append(0.0)
            else:
                o = offs[f"lam{i}"]
                row[o : o + len(s.set.directions)] = s.set.directions @ a
                a_ub.append(row)
                b_ub.append(-float(a @ s.set.base))
        if isinstance(s.set, S.VPolytopeSet):
            row = np.zeros(total)
            o = offs[f"mu{i}"]
            row[o : o + len(s.set.vertices)] = 1.0
            a_eq.append(row)
            b_eq.append(1.0)
    if isinstance(k0, S.Singleton):
        for j in range(d):
            row = np.zeros(total)
            row[j] = 1.0
            a_eq.append(row)
            b_eq.append(float(k0.p[j]))
    elif isinstance(k0, S.VPolytopeSet):
        o = offs["mu0"]
        for j in range(d):
            row = np.zeros(total)
            row[j] = 1.0
            row[o : o + len(k0.vertices)] = -k0.vertices[:, j]
            a_eq.append(row)
            b_eq.append(0.0)
        row = np.zeros(total)
        row[o : o + len(k0.vertices)] = 1.0
        a_eq.append(row)
        b_eq.append(1.0)
    elif isinstance(k0, S.AffineFlat):
        o = offs["lam0"]
        for j in range(d):
            row = np.zeros(total)
            row[j] = 1.0
            row[o : o + len(k0.directions)] = -k0.directions[:, j]
            a_eq.append(row)
            b_eq.append(float(k0.base[j]))

    c = np.zeros(total)
    for i, s in enumerate(inst.sites):
        c[offs["t"] + i] = s.weight
    res = solve_lp(
        c,
        a_ub=np.array(a_ub),
        b_ub=np.array(b_ub),
        a_eq=np.array(a_eq) if a_eq else None,
        b_eq=np.array(b_eq) if b_eq else None,
        free=free,
    )
    if res.status == "unbounded":
        ray = res.ray[:d] if res.ray is not None else np.zeros(d)
        raise NonattainmentSuspected(None, None, ray)
    if not res.ok:
        raise RuntimeError(f"LP solver failed: {res.status}")
    x = res.x[:d]
    cert = find_certificate(inst, x)
    value = objective_eval(inst, x)
    residual = cert.sum_residual() if cert is not None else abs(res.objective - value)
    return Solution(x, value, cert, "lp", 0, residual)


def _project_constraint(inst: Instance, x: np.ndarray) -> np.ndarray:
    if inst.constraint is None:
        return x
    return S.euclidean_project(x, inst.constraint)


def _subgradient_at(inst: Instance, x: np.ndarray) -> np.ndarray:
    return _value_and_subgrad(inst, x)[1]


def _value_and_subgrad(inst: Instance, x: np.ndarray):
    value = 0.0
    grad = np.zeros(inst.dimension)
    for s in inst.sites:
        val, wit = S.set_distance(s.gauge, x, s.set)
        value += s.weight * val
        if val <= 1e-12:
            continue  # 0 is an admissible subgradient choice on the site
        psi = G.norming_functionals(s.gauge, wit - x).generators[0]
        grad += -s.weight * psi
    return value, grad


def _objective_fast(inst: Instance, x: np.ndarray) -> float:
    """Vectorized-path objective (oracle-grade accuracy, much cheaper)."""
    return float(objective_many(inst, x[None, :])[0])


def _candidate_points(inst: Instance) -> list[np.ndarray]:
    pts = []
    for s in inst.sites:
        if isinstance(s.set, (S.Singleton, S.VPolytopeSet)):
            pts.extend(list(S.generator_points(s.set)))
        else:
            pts.append(S.representative_point(s.set))
    return [_project_constraint(inst, p) for p in pts]


def _grid_polish(inst, x0, radius, levels=48):
    """Deterministic multiscale descent; sound on convex objectives."""
    d = inst.dimension
    grids = np.array(np.meshgrid(*([[-1.0, -0.5, 0.0, 0.5, 1.0]] * d))).reshape(d, -1).T
    x = x0.copy()
    fx = objective_eval(inst, x)
    r = radius
    for _ in range(levels):
        pts = x + r * grids
        if inst.constraint is not None:
            pts = np.array([_project_constraint(inst, p) for p in pts])
        vals = objective_many(inst, pts)
        k = int(np.argmin(vals))
        if vals[k] < fx:
            x, fx = pts[k], float(vals[k])
            on_rim = np.max(np.abs(grids[k])) >= 1.0 - 1e-12
            if on_rim:
                continue  # same radius, recentered
        r *= 0.5
        if r < 1e-12 * (1.0 + np.linalg.norm(x)):
            break
    return x, fx


def _bundle_polish(inst, x0, radius, max_iter=60, tol=1e-11):
    """Cutting-plane descent with a trust box; returns (x, f, certified gap).

    Each iterate adds the cut f(x_j) + <g_j, z - x_j> <= t and minimizes the
    model over a box around the incumbent; the model value is a lower bound
    there, so f_best - model_value certifies optimality on the box.  The box
    doubles whenever the model argmin sticks to its boundary, which keeps the
    final bound effectively global for the convex objective.
    """
    d = inst.dimension
    k0 = inst.constraint
    if k0 is not None and not S.is_polyhedral(k0):
        return x0, objective_eval(inst, x0), float("nan")
    x = x0.copy()
    cuts = []  # (gradient, offset) with model row g.z - t <= g.x_j - f_j
    f_best = np.inf
    x_best = x.copy()
    r = max(radius, 1e-6)
    gap = float("nan")
    for _ in range(max_iter):
        fx, gx = _value_and_subgrad(inst, x)
        if fx < f_best:
            f_best, x_best = fx, x.copy()
        cuts.append((gx.copy(), float(gx @ x - fx)))
        n_mu = len(k0.vertices) if isinstance(k0, S.VPolytopeSet) else 0
        total = d + 1 + n_mu
        free = np.zeros(total, dtype=bool)
        free[: d + 1] = True
        a_ub, b_ub, a_eq, b_eq = [], [], [], []
        for g, off in cuts:
            row = np.zeros(total)
            row[:d] = g
            row[d] = -1.0
            a_ub.append(row)
            b_ub.append(off)
        for j in range(d):
            for sign in (1.0, -1.0):
                row = np.zeros(total)
                row[j] = sign
                a_ub.append(row)
                b_ub.append(sign * x_best[j] + r)
        if isinstance(k0, S.Singleton):
            for j in range(d):
                row = np.zeros(total)
                row[j] = 1.0
                a_eq.append(row)
                b_eq.append(float(k0.p[j]))
        elif isinstance(k0, S.AffineFlat):
            onb = k0.onb
            comp = np.eye(d) - onb.T @ onb
            for w in comp:
                if np.linalg.norm(w) < 1e-12:
                    continue
                row = np.zeros(total)
                row[:d] = w
                a_eq.append(row)
                b_eq.append(float(w @ k0.base))
        elif isinstance(k0, S.VPolytopeSet):
            o = d + 1
            for j in range(d):
                row = np.zeros(total)
                row[j] = 1.0
                row[o : o + n_mu] = -k0.vertices[:, j]
                a_eq.append(row)
                b_eq.append(0.0)
            row = np.zeros(total)
            row[o : o + n_mu] = 1.0
            a_eq.append(row)
            b_eq.append(1.0)
        c = np.zeros(total)
        c[d] = 1.0
        res = solve_lp(
            c,
            a_ub=np.array(a_ub),
            b_ub=np.array(b_ub),
            a_eq=np.array(a_eq) if a_eq else None,
            b_eq=np.array(b_eq) if b_eq else None,
            free=free,
        )
        if not res.ok:
            break
        z = res.x[:d]
        model = float(res.objective)
        gap = f_best - model
        if gap <= tol * (1.0 + abs(f_best)):
            break
        if np.max(np.abs(z - x_best)) >= r * (1.0 - 1e-9):
            r *= 2.0  # model wants to leave the box
        x = z
    return x_best, f_best, max(gap, 0.0)


def _smooth_polish(inst, x, iters=200):
    """Backtracking gradient descent; valid while x stays off all sites."""
    fx = _objective_fast(inst, x)
    step = 1.0
    for _ in range(iters):
        if any(S._contains_fast(s.set, x, 1e-9) for s in inst.sites):
            break
        grad = _subgradient_at(inst, x)
        gn = float(np.linalg.norm(grad))
        if gn < 1e-13:
            break
        improved = False
        while step > 1e-16:
            cand = _project_constraint(inst, x - step * grad)
            fc = _objective_fast(inst, cand)
            if fc < fx - 0.1 * step * gn * gn:
                x, fx = cand, fc
                improved = True
                step *= 1.6
                break
            step *= 0.5
        if not improved:
            break
    return x, objective_eval(inst, x)


def _solve_subgradient(inst: Instance, start=None) -> Solution:
    reps = [S.representative_point(s.set) for s in inst.sites]
    smooth = all(isinstance(s.gauge, G.ShiftedEllipsoid) for s in inst.sites)
    x = np.asarray(start, dtype=float) if start is not None else np.mean(reps, axis=0)
    x = _project_constraint(inst, x)
    f0, _ = _value_and_subgrad(inst, x)
    wsum = sum(s.weight for s in inst.sites)
    alpha0 = max(f0 / wsum, 1e-9)
    best_x, best_f = x.copy(), f0
    # when every gauge is smooth, the polish phases do the fine work
    patience = 25 if smooth else SUBGRAD_PATIENCE
    budget = min(SUBGRAD_MAX_ITER, 300 if smooth else SUBGRAD_BUDGET)
    stale = 0
    iters = 0
    for k in range(1, budget + 1):
        iters = k
        fx, grad = _value_and_subgrad(inst, x)
        if fx < best_f - 1e-9 * (1.0 + abs(best_f)):
            best_x, best_f, stale = x.copy(), fx, 0
        else:
            if fx < best_f:
                best_x, best_f = x.copy(), fx
            stale += 1
            if stale >= patience:
                break
        gn = np.linalg.norm(grad)
        if gn < 1e-13:
            break
        alpha = alpha0 / np.sqrt(k)
        x = _project_constraint(inst, x - alpha * grad)
        if np.linalg.norm(x) > 1e8 * (1.0 + np.linalg.norm(best_x)):
            raise NonattainmentSuspected(best_x, best_f, x / np.linalg.norm(x))
    for p in _candidate_points(inst):
        fp = objective_eval(inst, p)
        if fp < best_f:
            best_x, best_f = p.copy(), fp
    spread = max(
        (np.linalg.norm(r - best_x) for r in reps), default=1.0
    )
    best_x, best_f = _grid_polish(inst, best_x, radius=max(spread, 1.0), levels=20)
    if smooth and not any(S._contains_fast(s.set, best_x, 1e-9) for s in inst.sites):
        best_x, best_f = _smooth_polish(inst, best_x)
    bx, bf, gap = _bundle_polish(inst, best_x, radius=max(0.25 * spread, 0.5))
    if bf < best_f:
        best_x, best_f = bx, bf
    cert = find_certificate(inst, best_x, tol=1e-6)
    value = objective_eval(inst, best_x)
    residual = cert.sum_residual() if cert is not None else gap
    return Solution(best_x, value, cert, "subgradient", iters, residual)


# ---------------------------------------------------------------------------
# certificates


def _site_distances(inst, x):
    out = []
    for s in inst.sites:
        val, wit = S.set_distance(s.gauge, x, s.set)
        out.append((s.weight * val, wit))
    return out


def certify_sets(inst: Instance, x, cert: Certificate, tol: float) -> CertificateReport:
    """Check the dual optimality conditions for the set problem."""
    x = np.asarray(x, dtype=float)
    if len(cert.phis) != len(inst.sites):
        raise PreconditionError("certificate length differs from the site count")
    failures = []
    dists = _site_distances(inst, x)
    for i, (s, phi) in enumerate(zip(inst.sites, cert.phis)):
        phi = np.asarray(phi, dtype=float)
        if G.gauge_polar_eval(s.gauge, -phi / s.weight) > 1.0 + tol:
            failures.append(f"site {i}: polar bound exceeded")
        sup = S.support_value(s.set, phi)
        if not sup.finite:
            failures.append(f"site {i}: support value infinite")
            continue
        gap = dists[i][0] + sup.value - float(phi @ x)
        if abs(gap) > tol:
            failures.append(f"site {i}: support equality off by {gap:.3e}")
    total = sum(np.asarray(p, float) for p in cert.phis)
    if np.linalg.norm(total) > tol:
        failures.append("functional sum is nonzero")
    return CertificateReport(not failures, tuple(failures))


def certify_points(
    inst: Instance, x, cert: Certificate, tol: float
) -> CertificateReport:
    """Norming-functional check for singleton-site instances.

    The stored functionals follow the set-problem convention and are
    negated here: psi_i = -phi_i must norm p_i - x.
    """
    x = np.asarray(x, dtype=float)
    if any(not isinstance(s.set, S.Singleton) for s in inst.sites):
        raise PreconditionError("certify_points needs singleton sites")
    if len(cert.phis) != len(inst.sites):
        raise PreconditionError("certificate length differs from the site count")
    failures = []
    absorbed = None
    for j, s in enumerate(inst.sites):
        if np.linalg.norm(x - s.set.p) <= tol:
            absorbed = j
            break
    psis = cert.point_functionals()
    for i, s in enumerate(inst.sites):
        if i == absorbed:
            continue
        gw = weighted_gauge(s)
        psi = psis[i]
        rel = s.set.p - x
        gval = G.gauge_eval(gw, rel)
        if abs(G.gauge_polar_eval(gw, psi) - 1.0) > tol:
            failures.append(f"site {i}: functional is not unit in the polar gauge")
        if abs(float(psi @ rel) - gval) > tol * (1.0 + gval):
            failures.append(f"site {i}: norming equality fails")
    if absorbed is None:
        total = sum(psis)
        if np.linalg.norm(total) > tol:
            failures.append("functional sum is nonzero")
    else:
        gw = weighted_gauge(inst.sites[absorbed])
        rest = -sum(psis[i] for i in range(len(psis)) if i != absorbed)
        if G.gauge_polar_eval(gw, rest) > 1.0 + tol:
            failures.append(f"site {absorbed}: absorbed polar bound exceeded")
    return CertificateReport(not failures, tuple(failures))


def certify_heron(inst: Instance, x, cert: Certificate, tol: float) -> CertificateReport:
    """certify_sets plus the normal-cone condition on the constraint."""
    if inst.constraint is None:
        raise PreconditionError("instance has no constraint set")
    x = np.asarray(x, dtype=float)
    if not S.contains(inst.constraint, x, max(tol, 1e-9)):
        raise PreconditionError("point lies outside the constraint set")
    base = certify_sets(inst, x, cert, tol)
    failures = [f for f in base.failures if f != "functional sum is nonzero"]
    phi0 = cert.phi0 if cert.phi0 is not None else np.zeros(inst.dimension)
    if not S.normal_cone_contains(inst.constraint, x, phi0, tol):
        failures.append("constraint functional outside the normal cone")
    total = sum(np.asarray(p, float) for p in cert.phis) + phi0
    if np.linalg.norm(total) > tol:
        failures.append("functional sum (with phi0) is nonzero")
    return CertificateReport(not failures, tuple(failures))


def _forced_functional(s: SiteSpec, x, dist_w, wit):
    """Unique subgradient of w*dist at x for combinations with no freedom."""
    if isinstance(s.gauge, G.ShiftedEllipsoid):
        psi = G.norming_functionals(s.gauge, wit - x).generators[0]
        return -s.weight * psi
    # polytopal gauge, ball site, x outside: normal ray + support equality
    u = wit - s.set.center
    den = float(u @ (x - wit))
    if den <= 1e-14:
        return None
    return (dist_w / den) * u


def find_certificate(inst: Instance, x, tol: float = CERT_TOL) -> Certificate | None:
    """Construct a certificate at x, or None when none exists within tol.

    Polyhedral blocks enter one feasibility LP (sum-row relaxed by slacks);
    smooth blocks contribute their unique subgradients as constants.  The
    result is verified independently before being returned.
    """
    x = np.asarray(x, dtype=float)
    d = inst.dimension
    if inst.is_heron and not S.contains(inst.constraint, x, 1e-9):
        return None
    dists = _site_distances(inst, x)

    forced: dict[int, np.ndarray] = {}
    lp_sites: list[int] = []
    ray_sites: dict[int, np.ndarray] = {}  # ball sites with x on the boundary
    for i, s in enumerate(inst.sites):
        dist_w, wit = dists[i]
        inside = dist_w <= 1e-12
        if G.is_polytopal(s.gauge) and S.is_polyhedral(s.set):
            lp_sites.append(i)
        elif isinstance(s.set, S.EuclideanBall) and G.is_polytopal(s.gauge):
            if not inside:
                phi = _forced_functional(s, x, dist_w, wit)
                if phi is None:
                    return None
                forced[i] = phi
            elif np.linalg.norm(x - s.set.center) < s.set.radius - 1e-9:
                forced[i] = np.zeros(d)
            else:
                ray_sites[i] = (x - s.set.center) / np.linalg.norm(x - s.set.center)
        else:  # smooth gauge
            if not inside:
                forced[i] = _forced_functional(s, x, dists[i][0], wit)
            else:
                # Zero is always admissible on a containing site; richer
                # choices for smooth gauges are outside the supported class.
                forced[i] = np.zeros(d)

    # Column layout: phi_i blocks (free), ray scalars t_i (>= 0), slacks s+/s-.
    offs = {}
    total = 0
    for i in lp_sites:
        offs[i] = total
        total += d
    ray_off = {}
    for i in ray_sites:
        ray_off[i] = total
        total += 1
    phi0_off = None
    k0 = inst.constraint
    k0_ray = None
    if inst.is_heron:
        if isinstance(k0, S.EuclideanBall):
            relc = np.linalg.norm(x - k0.center)
            if relc < k0.radius - 1e-9:
                phi0_off = None  # interior: phi0 = 0
            else:
                k0_ray = (x - k0.center) / relc
                phi0_off = ("ray", total)
                total += 1
        elif isinstance(k0, S.Singleton):
            phi0_off = ("free", total)
            total += d
        else:
            phi0_off = ("free", total)
            total += d
    slack_off = total
    total += 2 * d

    free = np.zeros(total, dtype=bool)
    for i in lp_sites:
        free[offs[i] : offs[i] + d] = True
    if isinstance(phi0_off, tuple) and phi0_off[0] == "free":
        free[phi0_off[1] : phi0_off[1] + d] = True

    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for i in lp_sites:
        s = inst.sites[i]
        dist_w, _ = dists[i]
        o = offs[i]
        for crow in G.polar_ball_facets(s.gauge):
            row = np.zeros(total)
            row[o : o + d] = -crow
            a_ub.append(row)
            b_ub.append(s.weight)
        if isinstance(s.set, (S.Singleton, S.VPolytopeSet)):
            for v in S.generator_points(s.set):
                row = np.zeros(total)
                row[o : o + d] = v - x
                a_ub.append(row)
                b_ub.append(-dist_w)
        else:  # flat
            for u in s.set.directions:
                row = np.zeros(total)
                row[o : o + d] = u
                a_eq.append(row)
                b_eq.append(0.0)
            row = np.zeros(total)
            row[o : o + d] = s.set.base - x
            a_ub.append(row)
            b_ub.append(-dist_w)
    for i, u in ray_sites.items():
        s = inst.sites[i]
        cap = s.weight / G.gauge_polar_eval(s.gauge, -u)
        row = np.zeros(total)
        row[ray_off[i]] = 1.0
        a_ub.append(row)
        b_ub.append(cap)
    if inst.is_heron and isinstance(phi0_off, tuple) and phi0_off[0] == "free":
        o = phi0_off[1]
        if isinstance(k0, S.VPolytopeSet):
            for v in S.generator_points(k0):
                row = np.zeros(total)
                row[o : o + d] = v - x
                a_ub.append(row)
                b_ub.append(0.0)
        elif isinstance(k0, S.AffineFlat):
            for u in k0.directions:
                row = np.zeros(total)
                row[o : o + d] = u
                a_eq.append(row)
                b_eq.append(0.0)
        # singleton constraint: phi0 unrestricted

    rhs_const = -sum(forced.values()) if forced else np.zeros(d)
    for j in range(d):
        row = np.zeros(total)
        for i in lp_sites:
            row[offs[i] + j] = 1.0
        for i, u in ray_sites.items():
            row[ray_off[i]] = u[j]
        if isinstance(phi0_off, tuple):
            if phi0_off[0] == "free":
                row[phi0_off[1] + j] = 1.0
            else:
                row[phi0_off[1]] = k0_ray[j]
        row[slack_off + j] = 1.0
        row[slack_off + d + j] = -1.0
        a_eq.append(row)
        b_eq.append(float(rhs_const[j]))

    c = np.zeros(total)
    c[slack_off:] = 1.0
    res = solve_lp(
        c,
        a_ub=np.array(a_ub) if a_ub else None,
        b_ub=np.array(b_ub) if b_ub else None,
        a_eq=np.array(a_eq),
        b_eq=np.array(b_eq),
        free=free,
    )
    scale = 1.0 + float(np.linalg.norm(rhs_const))
    if not res.ok or res.objective > tol * scale:
        return None

    phis = []
    for i in range(len(inst.sites)):
        if i in forced:
            phis.append(forced[i])
        elif i in lp_sites:
            phis.append(res.x[offs[i] : offs[i] + d].copy())
        else:
            phis.append(res.x[ray_off[i]] * ray_sites[i])
    phi0 = None
    if inst.is_heron:
        if isinstance(phi0_off, tuple):
            if phi0_off[0] == "free":
                phi0 = res.x[phi0_off[1] : phi0_off[1] + d].copy()
            else:
                phi0 = res.x[phi0_off[1]] * k0_ray
        else:
            phi0 = np.zeros(d)
    cert = Certificate(tuple(phis), phi0)
    check_tol = max(tol * 10.0, 1e-6)
    report = (
        certify_heron(inst, x, cert, check_tol)
        if inst.is_heron
        else certify_sets(inst, x, cert, check_tol)
    )
    return cert if report.ok else None
