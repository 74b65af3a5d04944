"""Brute-force verification oracle: multiscale grid minimization.

The refinement bands are sized by per-gauge Lipschitz constants, so the
reported value is a certified near-minimum: true_min >= value - L*cell,
and no near-optimal cell can be discarded between levels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ftcore as F
from . import gauge as G
from . import sets as S
from .errors import InputError

_REFINE = 4          # spacing shrink factor per level
_MAX_REFINE_CELLS = 4000
_MAX_TIE_CELLS = 20000


@dataclass(frozen=True)
class GridSpec:
    box: tuple[np.ndarray, np.ndarray]
    resolution: int = 33
    levels: int = 4

    def __post_init__(self):
        lo = np.asarray(self.box[0], dtype=float)
        hi = np.asarray(self.box[1], dtype=float)
        if lo.shape != hi.shape or np.any(lo >= hi):
            raise InputError("grid box must have low < high componentwise")
        if self.resolution < 3:
            raise InputError("resolution must be at least 3 points per axis")
        if self.levels < 1:
            raise InputError("levels must be at least 1")
        object.__setattr__(self, "box", (lo, hi))


@dataclass
class GridResult:
    value: float
    argmin_cells: np.ndarray
    cell_size: float
    instance: F.Instance
    lipschitz: float


def instance_lipschitz(inst: F.Instance) -> float:
    """Sum of weighted gauge Lipschitz bounds; f is this Lipschitz."""
    return float(sum(s.weight * G.lipschitz_bound(s.gauge) for s in inst.sites))


def default_grid_spec(inst: F.Instance, resolution: int = 33, levels: int = 4) -> GridSpec:
    """Box = site bounding box inflated by the objective at the centroid.

    Any minimizer x* satisfies w_i gauge_i(y_i - x*) <= f(centroid) for a
    point y_i of each site, so it lies within f(centroid)/w_i times the
    ball's outer radius of that site; the padding uses the best such bound.
    """
    pts = np.array([S.representative_point(s.set) for s in inst.sites])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    center = 0.5 * (lo + hi)
    candidates = np.vstack([pts, center[None, :], 0.5 * (pts + center[None, :])])
    fc = float(np.min(F.objective_many(inst, candidates)))
    reaches = []
    for s in inst.sites:
        if not S.is_bounded(s.set):
            continue
        spread = 0.0
        if isinstance(s.set, S.VPolytopeSet):
            rep = S.representative_point(s.set)
            spread = float(np.max(np.linalg.norm(s.set.vertices - rep, axis=1)))
        elif isinstance(s.set, S.EuclideanBall):
            spread = s.set.radius
        reaches.append(fc / s.weight * G.ball_outer_radius(s.gauge) + spread)
    pad = (min(reaches) if reaches else fc) + 1.0
    return GridSpec((lo - pad, hi + pad), resolution, levels)


def grid_minimize(inst: F.Instance, spec: GridSpec) -> GridResult:
    """Exhaustive evaluation plus banded refinement around near-minima."""
    lo, hi = spec.box
    d = lo.shape[0]
    if d != inst.dimension:
        raise InputError("grid box dimension differs from the instance")
    lip = instance_lipschitz(inst)

    axes = [np.linspace(lo[j], hi[j], spec.resolution) for j in range(d)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    h = (hi - lo) / (spec.resolution - 1)  # per-axis spacing vector
    vals = _constrained_values(inst, pts)
    best = float(np.min(vals))

    grid_offsets = np.stack(
        np.meshgrid(*([np.arange(-2.0, 3.0)] * d), indexing="ij"), axis=-1
    ).reshape(-1, d)
    for _ in range(spec.levels - 1):
        # Sound band: the cell holding a true minimizer has value at most
        # best + L * (half cell diagonal), so it always survives the keep.
        band = lip * float(np.linalg.norm(h)) / 2.0
        mask = vals <= best + band
        keep = pts[mask]
        if len(keep) > _MAX_REFINE_CELLS:
            order = np.argsort(vals[mask], kind="stable")
            keep = keep[order[:_MAX_REFINE_CELLS]]
        h_new = h / _REFINE
        cand = (keep[:, None, :] + (grid_offsets * h_new)[None, :, :]).reshape(-1, d)
        cand = np.clip(cand, lo, hi)
        # every candidate sits on the per-axis lattice lo + k * h_new
        keys = np.round((cand - lo) / h_new).astype(np.int64)
        _, uniq = np.unique(keys, axis=0, return_index=True)
        pts = lo + keys[np.sort(uniq)] * h_new
        vals = _constrained_values(inst, pts)
        best = min(best, float(np.min(vals)))
        h = h_new

    cell = float(np.max(h))
    ties = pts[vals <= best + lip * cell]
    if len(ties) > _MAX_TIE_CELLS:
        ties = ties[np.argsort(vals[vals <= best + lip * cell], kind="stable")][
            :_MAX_TIE_CELLS
        ]
    return GridResult(best, ties, cell, inst, lip)


def _constrained_values(inst: F.Instance, pts: np.ndarray) -> np.ndarray:
    vals = F.objective_many(inst, pts)
    if inst.constraint is not None:
        mask = np.array([S.contains(inst.constraint, p, 1e-9) for p in pts])
        vals = np.where(mask, vals, np.inf)
    return vals


def argmin_set_matches(out: GridResult, candidate, tol: float) -> bool:
    """Symmetric check between oracle near-minima and a candidate set.

    Every near-optimal cell center must be within tol + cell_size of the
    candidate, and candidate sample points must achieve the oracle value
    within tol.  `candidate` is a 2-D Polygon or a list of points.
    """
    cells = out.argmin_cells
    if hasattr(candidate, "vertices") and hasattr(candidate, "kind"):
        from .geometry2d import point_to_polygon_distance

        dist_fn = lambda p: point_to_polygon_distance(p, candidate)
        samples = _polygon_samples(candidate)
    else:
        arr = np.atleast_2d(np.asarray(candidate, dtype=float))
        dist_fn = lambda p: float(np.min(np.linalg.norm(arr - p, axis=1)))
        samples = arr
    reach = tol + out.cell_size
    if any(dist_fn(c) > reach for c in cells):
        return False
    for s in samples:
        if F.objective_eval(out.instance, s) > out.value + tol:
            return False
    return True


def _polygon_samples(poly) -> np.ndarray:
    v = np.atleast_2d(poly.vertices)
    if len(v) <= 1:
        return v
    mids = 0.5 * (v + np.roll(v, -1, axis=0))
    if len(v) == 2:
        mids = mids[:1]
    pts = np.vstack([v, mids, v.mean(axis=0, keepdims=True)])
    return pts
