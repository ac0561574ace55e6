"""Local size functions and the oversized predicate.

A size field maps a point to the largest allowed element side length there.
Refinement only ever asks for ``min_over_quad``: a lower bound on the field
inside a convex quadrilateral.  The analytic fields return the exact infimum;
:class:`GridSize` returns a bound certified by its Lipschitz constant.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = [
    "SizeField",
    "ConstantSize",
    "PointSize",
    "CircleSize",
    "RampSize",
    "GridSize",
    "side_length",
    "oversized",
]

DEFAULT_FLOOR = 3.0**-12


def side_length(level: int) -> float:
    return 3.0 ** (-level / 2.0)


def _point_polygon_distances(x, y, poly):
    """(min, max) distance from (x, y) to a convex CCW polygon."""
    inside = True
    dmin = math.inf
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        ex, ey = x1 - x0, y1 - y0
        if ex * (y - y0) - ey * (x - x0) < 0:
            inside = False
        L2 = ex * ex + ey * ey
        t = ((x - x0) * ex + (y - y0) * ey) / L2
        t = min(1.0, max(0.0, t))
        dmin = min(dmin, math.hypot(x - x0 - t * ex, y - y0 - t * ey))
    dmax = max(math.hypot(x - px, y - py) for px, py in poly)
    return (0.0 if inside else dmin), dmax


class SizeField:
    """Base class: subclasses implement ``__call__`` and ``min_over_quad``."""

    kind = "abstract"

    def __call__(self, x: float, y: float) -> float:
        raise NotImplementedError

    def min_over_quad(self, poly) -> float:
        """Lower bound on the field over the convex polygon ``poly``."""
        raise NotImplementedError

    def min_at_vertices(self, poly) -> float:
        return min(self(x, y) for x, y in poly)

    def params(self) -> dict:
        return {}

    def __eq__(self, other):
        return type(self) is type(other) and self.params() == other.params()

    def __hash__(self):
        return hash((type(self).__name__, tuple(sorted(self.params().items()))))

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"


class ConstantSize(SizeField):
    kind = "constant"

    def __init__(self, value: float):
        if not value > 0:
            raise ValueError("size must be positive")
        self.value = float(value)

    def __call__(self, x, y):
        return self.value

    def min_over_quad(self, poly):
        return self.value

    def params(self):
        return {"value": self.value}


class PointSize(SizeField):
    """``min + scale * |p - c|``: fine near a point, coarsening linearly."""

    kind = "point"

    def __init__(self, cx: float = 0.0, cy: float = 0.0, scale: float = 0.5, min: float = 0.1):
        if not min > 0 or scale < 0:
            raise ValueError("point field needs min > 0 and scale >= 0")
        self.cx, self.cy, self.scale, self.min = float(cx), float(cy), float(scale), float(min)

    def __call__(self, x, y):
        return self.min + self.scale * math.hypot(x - self.cx, y - self.cy)

    def min_over_quad(self, poly):
        dmin, _ = _point_polygon_distances(self.cx, self.cy, poly)
        return self.min + self.scale * dmin

    def params(self):
        return {"cx": self.cx, "cy": self.cy, "scale": self.scale, "min": self.min}


class CircleSize(SizeField):
    """``max(min, scale * | |p - c| - r |)``: fine along a circle.

    The floor keeps the field positive on the circle itself.
    """

    kind = "circle"

    def __init__(self, cx=0.0, cy=0.0, r=4.0, scale=0.2, min=0.1):
        if not min > 0 or scale < 0 or r < 0:
            raise ValueError("circle field needs min > 0, scale >= 0, r >= 0")
        self.cx, self.cy, self.r = float(cx), float(cy), float(r)
        self.scale, self.min = float(scale), float(min)

    def __call__(self, x, y):
        d = abs(math.hypot(x - self.cx, y - self.cy) - self.r)
        return max(self.min, self.scale * d)

    def min_over_quad(self, poly):
        dmin, dmax = _point_polygon_distances(self.cx, self.cy, poly)
        if dmin <= self.r <= dmax:
            d = 0.0
        else:
            d = min(abs(dmin - self.r), abs(dmax - self.r))
        return max(self.min, self.scale * d)

    def params(self):
        return {"cx": self.cx, "cy": self.cy, "r": self.r, "scale": self.scale, "min": self.min}


class RampSize(SizeField):
    """``max(min, c + gx x + gy y)``; linear, so its minimum is at a corner."""

    kind = "ramp"

    def __init__(self, c=1.0, gx=0.1, gy=0.0, min=0.1):
        if not min > 0:
            raise ValueError("ramp field needs min > 0")
        self.c, self.gx, self.gy, self.min = float(c), float(gx), float(gy), float(min)

    def __call__(self, x, y):
        return max(self.min, self.c + self.gx * x + self.gy * y)

    def min_over_quad(self, poly):
        return self.min_at_vertices(poly)

    def params(self):
        return {"c": self.c, "gx": self.gx, "gy": self.gy, "min": self.min}


class GridSize(SizeField):
    """Bilinear interpolation of samples on a regular grid.

    ``values[i, j]`` is the size at ``(x0 + j*dx, y0 + i*dy)``; points outside
    the grid use the nearest edge value.  ``lipschitz`` must bound the gradient norm
    of the interpolant; quad minima are certified as ``f(centroid) - L * radius``
    and clamped below at ``floor``.
    """

    kind = "grid"

    def __init__(self, values, x0, y0, dx, dy, lipschitz, floor=DEFAULT_FLOOR, path=None):
        self.values = np.asarray(values, dtype=float)
        if self.values.ndim != 2 or min(self.values.shape) < 2:
            raise ValueError("grid values must be a 2-d array with at least 2x2 samples")
        if lipschitz is None or lipschitz < 0:
            raise ValueError("grid field requires a non-negative Lipschitz constant")
        if dx <= 0 or dy <= 0 or not floor > 0:
            raise ValueError("grid spacing and floor must be positive")
        self.x0, self.y0, self.dx, self.dy = float(x0), float(y0), float(dx), float(dy)
        self.lipschitz, self.floor, self.path = float(lipschitz), float(floor), path
        # gradient norm of the bilinear interpolant is at most hypot(sx, sy)
        slope = math.hypot(
            np.abs(np.diff(self.values, axis=1)).max() / self.dx,
            np.abs(np.diff(self.values, axis=0)).max() / self.dy,
        )
        if slope > self.lipschitz * (1 + 1e-12):
            raise ValueError(f"lipschitz={lipschitz} below sampled slope {slope:.6g}")

    def _interp(self, x, y):
        ny, nx = self.values.shape
        u = min(max((x - self.x0) / self.dx, 0.0), nx - 1.0)
        v = min(max((y - self.y0) / self.dy, 0.0), ny - 1.0)
        j = min(int(u), nx - 2)
        i = min(int(v), ny - 2)
        s, t = u - j, v - i
        g = self.values
        return (
            (1 - s) * (1 - t) * g[i, j]
            + s * (1 - t) * g[i, j + 1]
            + (1 - s) * t * g[i + 1, j]
            + s * t * g[i + 1, j + 1]
        )

    def __call__(self, x, y):
        return max(self.floor, self._interp(x, y))

    def min_over_quad(self, poly):
        cx = sum(p[0] for p in poly) / len(poly)
        cy = sum(p[1] for p in poly) / len(poly)
        rad = max(math.hypot(px - cx, py - cy) for px, py in poly)
        bound = self._interp(cx, cy) - self.lipschitz * rad
        bound = min(bound, self.min_at_vertices(poly))
        return max(self.floor, bound)

    def params(self):
        return {
            "x0": self.x0,
            "y0": self.y0,
            "dx": self.dx,
            "dy": self.dy,
            "lipschitz": self.lipschitz,
            "floor": self.floor,
            "values": tuple(map(tuple, self.values.tolist())),
        }


def oversized(field: SizeField, poly, level: int, sampling: str = "exact") -> bool:
    """True when the field drops below the quad's side length somewhere in it.

    ``sampling="vertices"`` only evaluates the corners (a cheaper
    approximation that can miss interior minima).
    """
    side = side_length(level)
    if sampling == "vertices":
        return field.min_at_vertices(poly) < side
    return field.min_over_quad(poly) < side
