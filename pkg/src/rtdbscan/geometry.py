"""Points, eps-spheres, axis-aligned boxes and the tests between them.

Every distance in the package is computed as
``sqrt((ax-bx)*(ax-bx) + (ay-by)*(ay-by) + (az-bz)*(az-bz))`` in double
precision, in exactly that order. The compiled kernels and the numpy oracle
use the same expression so boundary decisions (``dist == eps``) agree
bit-for-bit across every code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DatasetError, EmptyDatasetError, ParameterError


@dataclass(frozen=True)
class Point:
    id: int
    x: float
    y: float
    z: float = 0.0

    @property
    def xyz(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class Sphere:
    center: Point
    radius: float


@dataclass(frozen=True)
class Aabb:
    min: tuple[float, float, float]
    max: tuple[float, float, float]

    def __post_init__(self):
        if any(lo > hi for lo, hi in zip(self.min, self.max)):
            raise ValueError(f"inverted box: min={self.min} max={self.max}")

    def union(self, other: Aabb) -> Aabb:
        return Aabb(
            tuple(min(a, b) for a, b in zip(self.min, other.min)),
            tuple(max(a, b) for a, b in zip(self.max, other.max)),
        )

    def contains_box(self, other: Aabb) -> bool:
        return all(self.min[k] <= other.min[k] and other.max[k] <= self.max[k] for k in range(3))


@dataclass(frozen=True)
class Params:
    """Clustering parameters: search radius and the core-point threshold.

    ``min_pts`` counts neighbors *excluding* the point itself.
    """

    eps: float
    min_pts: int

    def __post_init__(self):
        if not (isinstance(self.eps, (int, float)) and math.isfinite(self.eps) and self.eps > 0):
            raise ParameterError(f"eps must be a finite positive number, got {self.eps!r}")
        if isinstance(self.min_pts, bool) or not isinstance(self.min_pts, (int, np.integer)) or self.min_pts < 1:
            raise ParameterError(f"min_pts must be an integer >= 1, got {self.min_pts!r}")


def check_eps(eps: float) -> float:
    if not (math.isfinite(eps) and eps > 0):
        raise ParameterError(f"eps must be a finite positive number, got {eps!r}")
    return float(eps)


def distance(a: Point, b: Point) -> float:
    dx = a.x - b.x
    dy = a.y - b.y
    dz = a.z - b.z
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def expand_sphere(p: Point, eps: float) -> Sphere:
    return Sphere(p, check_eps(eps))


def sphere_aabb(s: Sphere) -> Aabb:
    r = s.radius
    c = s.center
    return Aabb((c.x - r, c.y - r, c.z - r), (c.x + r, c.y + r, c.z + r))


def point_in_aabb(q: Point, box: Aabb) -> bool:
    return all(box.min[k] <= v <= box.max[k] for k, v in enumerate(q.xyz))


def point_in_sphere(q: Point, s: Sphere) -> bool:
    return distance(q, s.center) <= s.radius


PointsLike = Union[np.ndarray, Sequence[Point]]


def as_coords(points: PointsLike) -> np.ndarray:
    """Coerce points to a C-contiguous ``(n, 3)`` float64 array.

    Accepts a list of :class:`Point` (ids must be ``0..n-1``, any order),
    an ``(n, 2)`` or ``(n, 3)`` array (2D rows are embedded at z = 0), or
    anything with a ``coords`` attribute such as :class:`~rtdbscan.data.Dataset`.
    """
    if hasattr(points, "coords"):
        points = points.coords
    if isinstance(points, np.ndarray):
        arr = points
    else:
        pts = list(points)
        if pts and isinstance(pts[0], Point):
            ids = sorted(p.id for p in pts)
            if ids != list(range(len(pts))):
                raise DatasetError("point ids must be exactly 0..n-1")
            arr = np.empty((len(pts), 3))
            for p in pts:
                arr[p.id] = p.xyz
        else:
            arr = np.asarray(pts, dtype=np.float64)
    if arr.size == 0:
        raise EmptyDatasetError("dataset has no points")
    if arr.ndim != 2 or arr.shape[1] not in (2, 3):
        raise DatasetError(f"expected an (n, 2) or (n, 3) array, got shape {arr.shape}")
    if arr.shape[1] == 2:
        arr = np.column_stack([arr, np.zeros(len(arr))])
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DatasetError("coordinates must be finite")
    return arr


def to_points(coords: np.ndarray) -> list[Point]:
    return [Point(i, float(x), float(y), float(z)) for i, (x, y, z) in enumerate(coords)]
