"""Fixed-radius neighborhoods through a sphere BVH, plus the brute-force oracle.

Every point is replaced by an eps-sphere. A point ``q`` lies inside the
sphere of ``p`` exactly when ``p`` lies inside the sphere of ``q``, so the
neighborhood of ``q`` is the set of spheres containing ``q``: a pure
point-containment query against the BVH.
"""

from __future__ import annotations

import threading
import time
from functools import cached_property

import numpy as np

from . import _kernels
from .bvh import BuildConfig, Bvh, build_bvh_arrays, empty_tree_arrays
from .errors import DatasetError
from .geometry import Point, PointsLike, Sphere, as_coords, check_eps, to_points


class NeighborIndex:
    """One eps-sphere per point and a BVH over them. Immutable after construction."""

    def __init__(self, coords: np.ndarray, eps: float, bvh: Bvh, build_time: float):
        self.coords = coords
        self.eps = eps
        self.bvh = bvh
        self.build_time = build_time
        self._local = threading.local()

    def __len__(self) -> int:
        return len(self.coords)

    @cached_property
    def points(self) -> list[Point]:
        return to_points(self.coords)

    @cached_property
    def spheres(self) -> list[Sphere]:
        return [Sphere(p, self.eps) for p in self.points]

    def _buffer(self) -> np.ndarray:
        buf = getattr(self._local, "buf", None)
        if buf is None:
            buf = self._local.buf = np.empty(len(self.coords), np.int64)
        return buf

    def check_id(self, q_id: int) -> int:
        if not 0 <= q_id < len(self.coords):
            raise DatasetError(f"point id {q_id} out of range [0, {len(self.coords)})")
        return int(q_id)


class BruteIndex(NeighborIndex):
    """Same query surface as :class:`NeighborIndex` but every query scans all points."""

    def __init__(self, coords: np.ndarray, eps: float, build_time: float = 0.0):
        super().__init__(coords, eps, None, build_time)


def search_args(idx: NeighborIndex) -> tuple:
    """Leading positional arguments for the search kernels in ``_kernels``."""
    args = idx.__dict__.get("_search_args")
    if args is None:
        if idx.bvh is None:
            args = (False, *empty_tree_arrays(), idx.coords, idx.eps, 1)
        else:
            args = (True, *idx.bvh.tree_arrays(), idx.coords, idx.eps, idx.bvh.stack_size)
        idx.__dict__["_search_args"] = args
    return args


def build_brute_index(points: PointsLike, eps: float) -> BruteIndex:
    t0 = time.perf_counter()
    eps = check_eps(eps)
    coords = as_coords(points)
    return BruteIndex(coords, eps, time.perf_counter() - t0)


def build_index(points: PointsLike, eps: float, cfg: BuildConfig = BuildConfig()) -> NeighborIndex:
    t0 = time.perf_counter()
    eps = check_eps(eps)
    coords = as_coords(points)
    bvh = build_bvh_arrays(coords, eps, cfg)
    return NeighborIndex(coords, eps, bvh, time.perf_counter() - t0)


def find_neighborhood(idx: NeighborIndex, q_id: int, stats: np.ndarray | None = None) -> list[int]:
    """Ids within eps of point ``q_id`` (itself excluded), ascending.

    Candidates come from the BVH leaves whose boxes hold the query point;
    each is confirmed with the exact distance test before it is reported.
    """
    q_id = idx.check_id(q_id)
    if stats is None:
        stats = np.zeros(3, np.int64)
    buf = idx._buffer()
    qx, qy, qz = idx.coords[q_id]
    k = _kernels.search_point(*search_args(idx), qx, qy, qz, q_id, buf, stats)
    return np.sort(buf[:k]).tolist()


def brute_force_neighborhood(points: PointsLike, q_id: int, eps: float) -> list[int]:
    """O(n) scan over all points; the reference answer for ``find_neighborhood``."""
    coords = points if isinstance(points, np.ndarray) and points.shape[1:] == (3,) else as_coords(points)
    if not 0 <= q_id < len(coords):
        raise DatasetError(f"point id {q_id} out of range [0, {len(coords)})")
    d = coords[q_id] - coords
    dist = np.sqrt(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1] + d[:, 2] * d[:, 2])
    hits = np.flatnonzero(dist <= eps)
    return hits[hits != q_id].tolist()
