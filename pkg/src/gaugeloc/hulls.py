"""Small-scale polytope conversions: vertex hulls and facet enumeration.

2-D uses the monotone chain; higher dimensions use naive subset
enumeration, which is fine for the instance sizes this package targets.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import GaugeDefinitionError

DEDUP_TOL = 1e-9


def dedupe_points(pts: np.ndarray, tol: float = DEDUP_TOL) -> np.ndarray:
    out: list[np.ndarray] = []
    for p in pts:
        if all(np.linalg.norm(p - q) > tol for q in out):
            out.append(p)
    return np.array(out) if out else pts[:0]


def convex_hull_2d(pts: np.ndarray) -> np.ndarray:
    """Counterclockwise hull vertices (monotone chain)."""
    pts = dedupe_points(np.asarray(pts, dtype=float))
    if len(pts) <= 2:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[np.ndarray] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 1e-12:
            lower.pop()
        lower.append(p)
    upper: list[np.ndarray] = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 1e-12:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    return np.array(hull)


def hull_facets(vertices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Facet rows (N, beta) with the hull equal to {z : N z <= beta}.

    The hull must be full-dimensional; rows are normalized to unit normals.
    """
    v = np.asarray(vertices, dtype=float)
    d = v.shape[1]
    if d == 1:
        lo, hi = float(v.min()), float(v.max())
        return np.array([[-1.0], [1.0]]), np.array([-lo, hi])
    if d == 2:
        hull = convex_hull_2d(v)
        if len(hull) < 3:
            raise GaugeDefinitionError("polytope is not full-dimensional")
        rows, offs = [], []
        for i in range(len(hull)):
            a, b = hull[i], hull[(i + 1) % len(hull)]
            e = b - a
            n = np.array([e[1], -e[0]])  # outward for CCW order
            n /= np.linalg.norm(n)
            rows.append(n)
            offs.append(float(n @ a))
        return np.array(rows), np.array(offs)

    # Naive: every d-subset spans a candidate hyperplane.
    rows, offs = [], []
    for idx in itertools.combinations(range(len(v)), d):
        pts = v[list(idx)]
        base = pts[0]
        span = pts[1:] - base
        if np.linalg.matrix_rank(span, tol=1e-9) < d - 1:
            continue
        # normal = null space of span
        _, _, vt = np.linalg.svd(span)
        n = vt[-1]
        proj = v @ n
        off = float(n @ base)
        if np.all(proj <= off + 1e-9):
            pass
        elif np.all(proj >= off - 1e-9):
            n, off = -n, -off
        else:
            continue
        if any(
            np.linalg.norm(n - r) < 1e-9 and abs(off - o) < 1e-9
            for r, o in zip(rows, offs)
        ):
            continue
        rows.append(n)
        offs.append(off)
    if not rows:
        raise GaugeDefinitionError("polytope is not full-dimensional")
    return np.array(rows), np.array(offs)


def hpoly_vertices(normals: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Vertices of the bounded polyhedron {z : normals z <= offsets}.

    2-D output is ordered counterclockwise; boundedness is the caller's duty.
    """
    a = np.asarray(normals, dtype=float)
    b = np.asarray(offsets, dtype=float)
    d = a.shape[1]
    if d == 1:
        lo = max((b[i] / a[i, 0]) for i in range(len(a)) if a[i, 0] < 0)
        hi = min((b[i] / a[i, 0]) for i in range(len(a)) if a[i, 0] > 0)
        return np.array([[lo], [hi]])
    verts = []
    for idx in itertools.combinations(range(len(a)), d):
        sub = a[list(idx)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        z = np.linalg.solve(sub, b[list(idx)])
        if np.all(a @ z <= b + 1e-8):
            verts.append(z)
    verts = dedupe_points(np.array(verts)) if verts else np.zeros((0, d))
    if d == 2 and len(verts) >= 3:
        verts = convex_hull_2d(verts)
    return verts
