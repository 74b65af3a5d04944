"""Level-curve rendering: marching squares on the objective raster.

Contours are extracted by a 16-case marching-squares pass (saddles
resolved by the cell-center average) and drawn with matplotlib into an
SVG document.  Output bytes are deterministic for fixed inputs: the SVG
hash salt is pinned and the date metadata is stripped.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.collections import LineCollection

from . import ftcore as F
from . import sets as S
from .errors import InputError, PreconditionError

_CHUNK = 4096
_HASH_SALT = "gauge-minsum"


@dataclass(frozen=True)
class PlotSpec:
    view_box: tuple[tuple[float, float], tuple[float, float]]
    levels: tuple[float, ...]
    resolution: int = 400
    stroke: float = 0.9
    precision: int = 12
    overlay: object | None = None  # optional Polygon drawn dashed

    def __post_init__(self):
        (x0, y0), (x1, y1) = self.view_box
        if not (x1 > x0 and y1 > y0):
            raise InputError("view box must have positive extent")
        lv = tuple(float(v) for v in self.levels)
        if any(b <= a for a, b in zip(lv, lv[1:])):
            raise InputError("levels must be strictly ascending")
        if self.resolution < 8:
            raise InputError("raster resolution too small")
        object.__setattr__(self, "levels", lv)


_SEGMENT_TABLE = {
    0: [], 15: [],
    1: [("L", "B")], 14: [("L", "B")],
    2: [("B", "R")], 13: [("B", "R")],
    3: [("L", "R")], 12: [("L", "R")],
    4: [("R", "T")], 11: [("R", "T")],
    6: [("B", "T")], 9: [("B", "T")],
    7: [("L", "T")], 8: [("L", "T")],
}


def marching_squares(field: np.ndarray, xs: np.ndarray, ys: np.ndarray, level: float):
    """Contour segments of field (indexed [ix, iy]) at the given level."""
    above = field >= level
    segs = []
    any_above = above[:-1, :-1] | above[1:, :-1] | above[1:, 1:] | above[:-1, 1:]
    all_above = above[:-1, :-1] & above[1:, :-1] & above[1:, 1:] & above[:-1, 1:]
    mixed = np.argwhere(any_above & ~all_above)
    for ix, iy in mixed:
        fa, fb = field[ix, iy], field[ix + 1, iy]
        fc, fd = field[ix + 1, iy + 1], field[ix, iy + 1]
        idx = (
            (fa >= level) * 1 + (fb >= level) * 2 + (fc >= level) * 4 + (fd >= level) * 8
        )
        if idx in (0, 15):
            continue
        x0, x1 = xs[ix], xs[ix + 1]
        y0, y1 = ys[iy], ys[iy + 1]

        def lerp(f0, f1, p0, p1):
            t = 0.5 if f1 == f0 else (level - f0) / (f1 - f0)
            t = min(max(t, 0.0), 1.0)
            return (p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1]))

        pts = {
            "B": lerp(fa, fb, (x0, y0), (x1, y0)),
            "R": lerp(fb, fc, (x1, y0), (x1, y1)),
            "T": lerp(fd, fc, (x0, y1), (x1, y1)),
            "L": lerp(fa, fd, (x0, y0), (x0, y1)),
        }
        if idx in (5, 10):
            center_above = 0.25 * (fa + fb + fc + fd) >= level
            if idx == 5:
                pairs = [("L", "T"), ("B", "R")] if center_above else [("L", "B"), ("R", "T")]
            else:
                pairs = [("L", "B"), ("R", "T")] if center_above else [("B", "R"), ("L", "T")]
        else:
            pairs = _SEGMENT_TABLE[idx]
        for a, b in pairs:
            segs.append((pts[a], pts[b]))
    return segs


def objective_raster(inst: F.Instance, spec: PlotSpec):
    (x0, y0), (x1, y1) = spec.view_box
    xs = np.linspace(x0, x1, spec.resolution)
    ys = np.linspace(y0, y1, spec.resolution)
    grid = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
    vals = np.empty(len(grid))
    for start in range(0, len(grid), _CHUNK):
        block = grid[start : start + _CHUNK]
        vals[start : start + _CHUNK] = F.objective_many(inst, block)
    return xs, ys, vals.reshape(spec.resolution, spec.resolution)


def _draw_site(ax, k: S.ConvexSet, view_box):
    if isinstance(k, S.Singleton):
        ax.plot([k.p[0]], [k.p[1]], marker="o", markersize=4, color="black")
    elif isinstance(k, S.VPolytopeSet):
        v = k.vertices
        if len(v) == 1:
            ax.plot([v[0, 0]], [v[0, 1]], marker="o", markersize=4, color="black")
        else:
            from .hulls import convex_hull_2d

            hull = convex_hull_2d(v)
            loop = np.vstack([hull, hull[:1]])
            ax.plot(loop[:, 0], loop[:, 1], color="black", linewidth=1.2)
    elif isinstance(k, S.EuclideanBall):
        theta = np.linspace(0, 2 * np.pi, 128)
        ax.plot(
            k.center[0] + k.radius * np.cos(theta),
            k.center[1] + k.radius * np.sin(theta),
            color="black",
            linewidth=1.2,
        )
    else:  # flat: draw the line through the view box
        (x0, y0), (x1, y1) = view_box
        span = 2.0 * max(x1 - x0, y1 - y0)
        u = k.directions[0] / np.linalg.norm(k.directions[0])
        a, b = k.base - span * u, k.base + span * u
        ax.plot([a[0], b[0]], [a[1], b[1]], color="black", linewidth=1.2)


def render_svg(inst: F.Instance, spec: PlotSpec) -> bytes:
    """Deterministic SVG bytes with contours, sites, optional overlay."""
    if inst.dimension != 2:
        raise PreconditionError("plots are only rendered in 2-D")
    xs, ys, field = objective_raster(inst, spec)
    (x0, y0), (x1, y1) = spec.view_box
    width = 6.0
    height = width * (y1 - y0) / (x1 - x0)
    with matplotlib.rc_context({"svg.hashsalt": _HASH_SALT}):
        fig, ax = plt.subplots(figsize=(width, height), dpi=100)
        try:
            for level in spec.levels:
                segs = marching_squares(field, xs, ys, level)
                if segs:
                    ax.add_collection(
                        LineCollection(segs, colors="black", linewidths=spec.stroke)
                    )
            for s in inst.sites:
                _draw_site(ax, s.set, spec.view_box)
            if inst.constraint is not None:
                _draw_site(ax, inst.constraint, spec.view_box)
            overlay = spec.overlay
            if overlay is not None and len(overlay.vertices):
                v = np.atleast_2d(overlay.vertices)
                loop = np.vstack([v, v[:1]]) if len(v) > 2 else v
                ax.plot(
                    loop[:, 0], loop[:, 1], color="black", linewidth=1.4, linestyle="--"
                )
                if len(v) == 1:
                    ax.plot([v[0, 0]], [v[0, 1]], marker="s", markersize=5, color="black")
            ax.set_xlim(x0, x1)
            ax.set_ylim(y0, y1)
            ax.set_aspect("equal")
            buf = io.BytesIO()
            fig.savefig(buf, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return buf.getvalue()
