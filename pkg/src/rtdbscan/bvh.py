"""Bounding volume hierarchy over equal-radius spheres.

Nodes live in flat arrays with the root at index 0; children always have
larger indices than their parent. A node is a leaf iff ``left[i] == -1``,
in which case its spheres are ``prims[first[i]:first[i] + count[i]]``.

Queries are point-containment queries: a node is entered only if its box
contains the query point, and leaves hand every stored sphere id to the
caller's visitor.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Literal, Optional, Sequence

import numpy as np

from . import _kernels
from .errors import EmptyDatasetError, ParameterError
from .geometry import Aabb, Point, Sphere, as_coords

SplitRule = Literal["median", "sah"]

_SAH_BINS = 16


@dataclass(frozen=True)
class BuildConfig:
    leaf_capacity: int = 4
    split_rule: SplitRule = "median"

    def __post_init__(self):
        if self.leaf_capacity < 1:
            raise ParameterError(f"leaf_capacity must be >= 1, got {self.leaf_capacity}")
        if self.split_rule not in ("median", "sah"):
            raise ParameterError(f"unknown split rule {self.split_rule!r}")


@dataclass(frozen=True)
class BvhNode:
    box: Aabb
    left: Optional[int] = None
    right: Optional[int] = None
    spheres: Optional[tuple[int, ...]] = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass
class VisitStats:
    nodes_visited: int = 0
    leaves_visited: int = 0
    spheres_tested: int = 0


@dataclass
class BuildStats:
    node_count: int
    leaf_count: int
    depth: int
    build_time: float


class Bvh:
    """Flat-array BVH. Treat as immutable once built."""

    def __init__(self, node_min, node_max, left, right, first, count, prims,
                 centers, radius, config, build_stats):
        self.node_min = node_min
        self.node_max = node_max
        self.left = left
        self.right = right
        self.first = first
        self.count = count
        self.prims = prims
        self.centers = centers
        self.prim_xyz = np.ascontiguousarray(centers[prims])
        self.radius = float(radius)
        self.config = config
        self.build_stats = build_stats

    @property
    def sphere_count(self) -> int:
        return len(self.centers)

    @property
    def node_count(self) -> int:
        return len(self.left)

    @property
    def stack_size(self) -> int:
        return self.build_stats.depth + 2

    def tree_arrays(self) -> tuple:
        return (self.node_min, self.node_max, self.left, self.right,
                self.first, self.count, self.prims, self.prim_xyz)

    def node(self, i: int) -> BvhNode:
        box = Aabb(tuple(self.node_min[i].tolist()), tuple(self.node_max[i].tolist()))
        if self.left[i] < 0:
            s = int(self.first[i])
            return BvhNode(box, spheres=tuple(self.prims[s:s + int(self.count[i])].tolist()))
        return BvhNode(box, int(self.left[i]), int(self.right[i]))

    @property
    def nodes(self) -> list[BvhNode]:
        return [self.node(i) for i in range(self.node_count)]

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for arr in (self.node_min, self.node_max, self.left, self.right, self.first,
                    self.count, self.prims):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()

    @cached_property
    def _lists(self):
        return (self.node_min.tolist(), self.node_max.tolist(), self.left.tolist(),
                self.right.tolist(), self.first.tolist(), self.count.tolist(),
                self.prims.tolist())


def empty_tree_arrays() -> tuple:
    """Placeholder tree arrays for kernels running in brute-force mode."""
    i64 = np.empty(0, np.int64)
    return (np.empty((0, 3)), np.empty((0, 3)), i64, i64, i64, i64, i64, np.empty((0, 3)))


def _spheres_to_arrays(spheres: Sequence[Sphere]) -> tuple[np.ndarray, float]:
    if len(spheres) == 0:
        raise EmptyDatasetError("cannot build a BVH over zero spheres")
    radius = spheres[0].radius
    if any(s.radius != radius for s in spheres):
        raise ParameterError("all spheres must share one radius")
    centers = np.empty((len(spheres), 3))
    for i, s in enumerate(spheres):
        if s.center.id != i:
            raise ParameterError(f"sphere {i} is centered on point id {s.center.id}; expected {i}")
        centers[i] = s.center.xyz
    return centers, radius


def build_bvh(spheres: Sequence[Sphere], cfg: BuildConfig = BuildConfig()) -> Bvh:
    """Build a BVH over ``spheres``; sphere ``i`` must be centered on point id ``i``."""
    centers, radius = _spheres_to_arrays(spheres)
    return build_bvh_arrays(centers, radius, cfg)


def build_bvh_arrays(centers: np.ndarray, radius: float, cfg: BuildConfig = BuildConfig()) -> Bvh:
    t0 = time.perf_counter()
    if len(centers) == 0:
        raise EmptyDatasetError("cannot build a BVH over zero spheres")
    centers = as_coords(np.asarray(centers, dtype=np.float64))
    n = len(centers)
    if not radius > 0:
        raise ParameterError(f"sphere radius must be positive, got {radius!r}")
    lo = centers - radius
    hi = centers + radius

    order = np.arange(n, dtype=np.int64)
    left: list[int] = [-1]
    right: list[int] = [-1]
    first: list[int] = [0]
    count: list[int] = [0]
    depth_of: list[int] = [0]
    leaves: list[int] = []
    stack = [(0, 0, n)]
    while stack:
        node, s, e = stack.pop()
        if e - s <= cfg.leaf_capacity:
            first[node] = s
            count[node] = e - s
            leaves.append(node)
            continue
        if cfg.split_rule == "sah":
            mid = _split_sah(order, s, e, centers, lo, hi)
        else:
            mid = _split_median(order, s, e, centers)
        li = len(left)
        for _ in range(2):
            left.append(-1)
            right.append(-1)
            first.append(0)
            count.append(0)
            depth_of.append(depth_of[node] + 1)
        left[node], right[node] = li, li + 1
        stack.append((li + 1, mid, e))
        stack.append((li, s, mid))

    m = len(left)
    left_a = np.array(left, dtype=np.int64)
    right_a = np.array(right, dtype=np.int64)
    first_a = np.array(first, dtype=np.int64)
    count_a = np.array(count, dtype=np.int64)
    node_min = np.empty((m, 3))
    node_max = np.empty((m, 3))
    leaf_idx = np.array(leaves, dtype=np.int64)
    # leaf boxes: segment reductions over the reordered sphere boxes
    seg_order = np.argsort(first_a[leaf_idx], kind="stable")
    starts = first_a[leaf_idx][seg_order]
    node_min[leaf_idx[seg_order]] = np.minimum.reduceat(lo[order], starts, axis=0)
    node_max[leaf_idx[seg_order]] = np.maximum.reduceat(hi[order], starts, axis=0)
    for i in range(m - 1, -1, -1):
        li = left[i]
        if li >= 0:
            ri = right[i]
            node_min[i] = np.minimum(node_min[li], node_min[ri])
            node_max[i] = np.maximum(node_max[li], node_max[ri])

    stats = BuildStats(node_count=m, leaf_count=len(leaves), depth=max(depth_of),
                       build_time=time.perf_counter() - t0)
    return Bvh(node_min, node_max, left_a, right_a, first_a, count_a, order,
               centers, radius, cfg, stats)


def _split_median(order: np.ndarray, s: int, e: int, centers: np.ndarray) -> int:
    ids = order[s:e]
    c = centers[ids]
    extent = c.max(axis=0) - c.min(axis=0)
    axis = int(np.argmax(extent))
    mid = s + (e - s) // 2
    if extent[axis] == 0.0:
        # every centroid coincides: split the id range in half
        order[s:e] = np.sort(ids)
        return mid
    order[s:e] = ids[np.argsort(c[:, axis], kind="stable")]
    return mid


def _surface_area(bmin: np.ndarray, bmax: np.ndarray) -> np.ndarray:
    d = bmax - bmin
    return 2.0 * (d[..., 0] * d[..., 1] + d[..., 1] * d[..., 2] + d[..., 2] * d[..., 0])


def _split_sah(order: np.ndarray, s: int, e: int, centers: np.ndarray,
               lo: np.ndarray, hi: np.ndarray) -> int:
    ids = order[s:e]
    c = centers[ids]
    cmin = c.min(axis=0)
    extent = c.max(axis=0) - cmin
    best = (np.inf, -1, -1)
    best_bins = None
    for axis in range(3):
        if extent[axis] == 0.0:
            continue
        bins = ((c[:, axis] - cmin[axis]) / extent[axis] * _SAH_BINS).astype(np.int64)
        np.clip(bins, 0, _SAH_BINS - 1, out=bins)
        n_in = np.bincount(bins, minlength=_SAH_BINS)
        bmin = np.full((_SAH_BINS, 3), np.inf)
        bmax = np.full((_SAH_BINS, 3), -np.inf)
        np.minimum.at(bmin, bins, lo[ids])
        np.maximum.at(bmax, bins, hi[ids])
        left_min = np.minimum.accumulate(bmin, axis=0)[:-1]
        left_max = np.maximum.accumulate(bmax, axis=0)[:-1]
        right_min = np.minimum.accumulate(bmin[::-1], axis=0)[::-1][1:]
        right_max = np.maximum.accumulate(bmax[::-1], axis=0)[::-1][1:]
        n_left = np.cumsum(n_in)[:-1]
        n_right = len(ids) - n_left
        with np.errstate(invalid="ignore"):
            cost = (n_left * _surface_area(left_min, left_max)
                    + n_right * _surface_area(right_min, right_max))
        cost[(n_left == 0) | (n_right == 0)] = np.inf
        k = int(np.argmin(cost))
        if cost[k] < best[0]:
            best = (cost[k], axis, k)
            best_bins = bins
    if best_bins is None or not np.isfinite(best[0]):
        return _split_median(order, s, e, centers)
    goes_left = best_bins <= best[2]
    order[s:e] = np.concatenate([ids[goes_left], ids[~goes_left]])
    return s + int(goes_left.sum())


def query_point(bvh: Bvh, q: Point, visit: Callable[[int], None]) -> VisitStats:
    """Call ``visit(sphere_id)`` for every sphere in a leaf whose box holds ``q``.

    Subtrees whose box does not contain ``q`` are never entered.
    """
    node_min, node_max, left, right, first, count, prims = bvh._lists
    qx, qy, qz = q.x, q.y, q.z
    stats = VisitStats()
    stack = [0]
    while stack:
        i = stack.pop()
        stats.nodes_visited += 1
        lo, hi = node_min[i], node_max[i]
        if not (lo[0] <= qx <= hi[0] and lo[1] <= qy <= hi[1] and lo[2] <= qz <= hi[2]):
            continue
        if left[i] < 0:
            stats.leaves_visited += 1
            for k in range(first[i], first[i] + count[i]):
                stats.spheres_tested += 1
                visit(prims[k])
        else:
            stack.append(right[i])
            stack.append(left[i])
    return stats


def count_within(bvh: Bvh, q: Point, spheres: Optional[Sequence[Sphere]] = None,
                 exclude_id: int = -1, limit: Optional[int] = None,
                 stats: Optional[np.ndarray] = None) -> int:
    """Number of spheres (other than ``exclude_id``) containing ``q``.

    With ``limit`` set the traversal stops as soon as ``limit`` spheres are
    confirmed, so the result is ``min(true count, limit)``: only compare it
    against ``limit``.
    """
    if spheres is None:
        centers, radius = bvh.centers, bvh.radius
    else:
        centers, radius = _spheres_to_arrays(spheres)
    if stats is None:
        stats = np.zeros(3, np.int64)
    lim = 0 if limit is None else int(limit)
    if limit is not None and lim < 1:
        raise ParameterError("limit must be >= 1")
    return int(_kernels.count_point(True, *bvh.tree_arrays(), centers, radius, bvh.stack_size,
                                    float(q.x), float(q.y), float(q.z), int(exclude_id), lim,
                                    stats))


@dataclass(frozen=True)
class Violation:
    kind: str  # "structure" | "containment" | "tightness" | "coverage" | "leaf_size"
    node: int
    detail: str


def validate_bvh(bvh: Bvh, spheres: Optional[Sequence[Sphere]] = None) -> list[Violation]:
    """Check every structural invariant; an empty list means the tree is sound."""
    if spheres is None:
        centers, radius = bvh.centers, bvh.radius
    else:
        centers, radius = _spheres_to_arrays(spheres)
    n = len(centers)
    m = len(bvh.left)
    out: list[Violation] = []
    if m == 0:
        return [Violation("structure", -1, "tree has no nodes")]
    sphere_lo = centers - radius
    sphere_hi = centers + radius
    node_min, node_max = bvh.node_min, bvh.node_max

    parent_seen = np.full(m, -1, dtype=np.int64)
    seen_count = np.zeros(n, dtype=np.int64)
    reached = np.zeros(m, dtype=bool)
    stack = [0]
    reached[0] = True
    while stack:
        i = stack.pop()
        if np.any(node_min[i] > node_max[i]):
            out.append(Violation("structure", i, "box min exceeds max"))
        li, ri = int(bvh.left[i]), int(bvh.right[i])
        if li < 0:
            c = int(bvh.count[i])
            f = int(bvh.first[i])
            if not 1 <= c <= bvh.config.leaf_capacity:
                out.append(Violation("leaf_size", i, f"leaf holds {c} spheres"))
            ids = bvh.prims[f:f + c]
            bad = ids[(ids < 0) | (ids >= n)]
            if len(bad):
                out.append(Violation("coverage", i, f"sphere ids out of range: {bad.tolist()}"))
            ids = ids[(ids >= 0) & (ids < n)]
            np.add.at(seen_count, ids, 1)
            if len(ids):
                want_lo = sphere_lo[ids].min(axis=0)
                want_hi = sphere_hi[ids].max(axis=0)
                _check_box(out, i, node_min[i], node_max[i], want_lo, want_hi, "its spheres")
            continue
        children = []
        for ch in (li, ri):
            if not 0 <= ch < m or ch == i:
                out.append(Violation("structure", i, f"child index {ch} is invalid"))
                continue
            if reached[ch]:
                out.append(Violation("structure", ch,
                                     f"node reached from {i} and {parent_seen[ch]} (cycle or shared child)"))
                continue
            reached[ch] = True
            parent_seen[ch] = i
            children.append(ch)
            stack.append(ch)
        if len(children) == 2:
            want_lo = np.minimum(node_min[li], node_min[ri])
            want_hi = np.maximum(node_max[li], node_max[ri])
            _check_box(out, i, node_min[i], node_max[i], want_lo, want_hi, "its children")
    for i in np.flatnonzero(~reached).tolist():
        out.append(Violation("structure", i, "node unreachable from root"))
    for sid in np.flatnonzero(seen_count == 0).tolist():
        out.append(Violation("coverage", -1, f"sphere {sid} missing from every leaf"))
    for sid in np.flatnonzero(seen_count > 1).tolist():
        out.append(Violation("coverage", -1, f"sphere {sid} appears {seen_count[sid]} times"))
    return out


def _check_box(out, i, bmin, bmax, want_lo, want_hi, what):
    if np.any(bmin > want_lo) or np.any(bmax < want_hi):
        out.append(Violation("containment", i, f"box does not contain {what}"))
    elif np.any(bmin != want_lo) or np.any(bmax != want_hi):
        out.append(Violation("tightness", i, f"box is looser than the union of {what}"))
