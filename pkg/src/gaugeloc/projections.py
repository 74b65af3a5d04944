"""Euclidean projections onto the convex pieces the solvers need.

Hull and cone projections enumerate low-dimensional faces (Caratheodory
caps the face size at d+1), which is exact and fast at the sizes used
here; a FISTA fallback covers larger generator counts.
"""

from __future__ import annotations

import itertools

import numpy as np

_EXACT_MAX_GENERATORS = 12


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Project onto the probability simplex (sort-based)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, len(v) + 1)
    cond = u - css / ks > 0
    rho = ks[cond][-1]
    theta = css[cond][-1] / rho
    return np.maximum(v - theta, 0.0)


def project_flat(z: np.ndarray, base: np.ndarray, onb: np.ndarray) -> np.ndarray:
    """Project onto base + span(onb rows); onb rows must be orthonormal."""
    rel = z - base
    return base + onb.T @ (onb @ rel)


def project_ball(z: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    rel = z - center
    n = np.linalg.norm(rel)
    if n <= radius:
        return np.asarray(z, dtype=float).copy()
    return center + rel * (radius / n)


def _affine_ls(pts: np.ndarray, z: np.ndarray):
    """Least squares of z onto the affine hull of pts, with barycentric weights."""
    k = len(pts)
    if k == 1:
        return pts[0].copy(), np.ones(1)
    base = pts[0]
    span = (pts[1:] - base).T  # d x (k-1)
    coef, *_ = np.linalg.lstsq(span, z - base, rcond=None)
    w = np.concatenate([[1.0 - coef.sum()], coef])
    return base + span @ coef, w


def _project_segment(z, a, b):
    d = b - a
    den = float(d @ d)
    if den <= 1e-30:
        return a.copy()
    t = min(max(float((z - a) @ d) / den, 0.0), 1.0)
    return a + t * d


def project_polygon_ccw(z, hull):
    """Project onto a polygon given by its CCW hull vertices (no hull pass)."""
    if len(hull) == 1:
        return hull[0].copy()
    if len(hull) == 2:
        return _project_segment(z, hull[0], hull[1])
    nxt = np.roll(hull, -1, axis=0)
    edge = nxt - hull
    rel = z - hull
    if np.all(edge[:, 0] * rel[:, 1] - edge[:, 1] * rel[:, 0] >= -1e-12):
        return np.asarray(z, dtype=float).copy()  # inside the CCW polygon
    best, best_d2 = None, np.inf
    for a, b in zip(hull, nxt):
        y = _project_segment(z, a, b)
        d2 = float((y - z) @ (y - z))
        if d2 < best_d2:
            best, best_d2 = y, d2
    return best


def _project_hull_2d(z, v):
    from .hulls import convex_hull_2d

    return project_polygon_ccw(z, convex_hull_2d(v))


def project_hull(z: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Project onto conv(vertices)."""
    z = np.asarray(z, dtype=float)
    v = np.atleast_2d(np.asarray(vertices, dtype=float))
    m, d = v.shape
    if m == 1:
        return v[0].copy()
    if d == 2:
        return _project_hull_2d(z, v)
    if m <= _EXACT_MAX_GENERATORS:
        best, best_d2 = None, np.inf
        for k in range(1, min(m, d + 1) + 1):
            for idx in itertools.combinations(range(m), k):
                y, w = _affine_ls(v[list(idx)], z)
                if np.min(w) < -1e-12:
                    continue
                d2 = float(np.dot(y - z, y - z))
                if d2 < best_d2 - 1e-15:
                    best, best_d2 = y, d2
        return best
    return _fista_hull(z, v)


def _fista_hull(z, v, iters: int = 3000):
    m = len(v)
    gram_l = float(np.linalg.norm(v @ v.T, 2))
    mu = np.full(m, 1.0 / m)
    y, t = mu.copy(), 1.0
    for _ in range(iters):
        grad = v @ ((y @ v) - z)
        mu_new = project_simplex(y - grad / gram_l)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = mu_new + (t - 1.0) / t_new * (mu_new - mu)
        mu, t = mu_new, t_new
    # polish on the detected support
    sup = np.flatnonzero(mu > 1e-10)
    y_pt, w = _affine_ls(v[sup], z)
    if np.min(w) >= -1e-10:
        return y_pt
    return mu @ v


def project_cone(z: np.ndarray, generators: np.ndarray) -> np.ndarray:
    """Project onto cone{generators} (nonnegative combinations)."""
    z = np.asarray(z, dtype=float)
    g = np.atleast_2d(np.asarray(generators, dtype=float))
    norms = np.linalg.norm(g, axis=1)
    g = g[norms > 1e-14]
    if len(g) == 0:
        return np.zeros_like(z)
    g = g / np.linalg.norm(g, axis=1)[:, None]
    m, d = g.shape
    best, best_d2 = np.zeros_like(z), float(np.dot(z, z))
    for k in range(1, min(m, d) + 1):
        for idx in itertools.combinations(range(m), k):
            sub = g[list(idx)].T  # d x k
            coef, *_ = np.linalg.lstsq(sub, z, rcond=None)
            if np.min(coef) < -1e-12:
                continue
            y = sub @ coef
            d2 = float(np.dot(y - z, y - z))
            if d2 < best_d2 - 1e-15:
                best, best_d2 = y, d2
    return best


def project_polar_cone(z: np.ndarray, generators: np.ndarray) -> np.ndarray:
    """Project onto {phi : <phi, g> <= 0 for all g} via Moreau decomposition."""
    return np.asarray(z, dtype=float) - project_cone(z, generators)


def project_ellipsoid(
    z: np.ndarray, m_mat: np.ndarray, m_vec: np.ndarray, radius: float
) -> np.ndarray:
    """Project onto {y : ||M y - m|| <= radius} (M invertible)."""
    z = np.asarray(z, dtype=float)
    if np.linalg.norm(m_mat @ z - m_vec) <= radius:
        return z.copy()
    # KKT: y(nu) = (I + nu M^T M)^-1 (z + nu M^T m); root-find on the residual,
    # evaluated in the eigenbasis of M^T M so each step is vector arithmetic.
    lam, q = np.linalg.eigh(m_mat.T @ m_mat)
    zt = q.T @ z
    mt = q.T @ (m_mat.T @ m_vec)
    mm = float(m_vec @ m_vec)
    r2 = radius * radius

    def excess(nu):
        w = (zt + nu * mt) / (1.0 + nu * lam)
        return float(lam @ (w * w) - 2.0 * (mt @ w) + mm) - r2

    lo, hi = 0.0, 1.0
    while excess(hi) > 0.0:
        hi *= 4.0
        if hi > 1e18:
            break
    for _ in range(48):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return q @ ((zt + hi * mt) / (1.0 + hi * lam))
