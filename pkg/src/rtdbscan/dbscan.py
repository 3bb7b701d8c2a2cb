"""DBSCAN two ways: sequential seed expansion and two-stage union-find.

Neighbor counts are self-excluded everywhere: a point is core when at least
``min_pts`` *other* points lie within ``eps``. Both algorithms use the same
predicate so their core sets can be compared exactly.
"""

from __future__ import annotations

import enum
import threading
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal, Optional

import numpy as np

from . import _kernels
from .bvh import BuildConfig
from .disjoint_set import DisjointSet
from .errors import DatasetError, ParameterError
from .geometry import Params, PointsLike
from .neighbor import (
    NeighborIndex,
    build_brute_index,
    build_index,
    find_neighborhood,
    search_args,
)

NOISE = -1
Search = Literal["bvh", "brute"]


class PointClass(enum.IntEnum):
    NOISE = 0
    BORDER = 1
    CORE = 2


@dataclass
class Labeling:
    """Per-point cluster labels (``NOISE`` or the smallest member id) and classes.

    ``timings`` (integer nanoseconds from a monotonic clock) and
    ``traversal`` are run metadata and take no part in equality.
    """

    labels: np.ndarray
    classes: np.ndarray
    cluster_count: int
    timings: dict = field(default_factory=dict, compare=False)
    traversal: dict = field(default_factory=dict, compare=False)

    def __eq__(self, other):
        if not isinstance(other, Labeling):
            return NotImplemented
        return (np.array_equal(self.labels, other.labels)
                and np.array_equal(self.classes, other.classes)
                and self.cluster_count == other.cluster_count)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def core(self) -> np.ndarray:
        return self.classes == PointClass.CORE

    @property
    def noise(self) -> np.ndarray:
        return self.labels == NOISE

    @property
    def noise_count(self) -> int:
        return int(np.count_nonzero(self.noise))

    def clusters(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for i, lab in enumerate(self.labels.tolist()):
            if lab != NOISE:
                out.setdefault(lab, []).append(i)
        return out

    def tobytes(self) -> bytes:
        return self.labels.astype(np.int64).tobytes() + self.classes.astype(np.int8).tobytes()


def canonicalize_labels(labeling: Labeling) -> Labeling:
    """Relabel every cluster by the smallest point id it contains."""
    labels = np.asarray(labeling.labels, dtype=np.int64)
    out = np.full(len(labels), NOISE, dtype=np.int64)
    members = np.flatnonzero(labels != NOISE)
    count = 0
    if len(members):
        _, first, inverse = np.unique(labels[members], return_index=True, return_inverse=True)
        out[members] = members[first][inverse.ravel()]
        count = len(first)
    return Labeling(out, np.asarray(labeling.classes, dtype=np.int8).copy(), count,
                    dict(labeling.timings), dict(labeling.traversal))


def _make_index(points, params: Params, search: Search, cfg: BuildConfig) -> NeighborIndex:
    if search == "bvh":
        return build_index(points, params.eps, cfg)
    if search == "brute":
        return build_brute_index(points, params.eps)
    raise ParameterError(f"unknown neighbor search {search!r}")


def _traversal_summary(stats: np.ndarray, queries: int) -> dict:
    q = max(queries, 1)
    return {
        "queries": int(queries),
        "nodes_visited": int(stats[0]),
        "leaves_visited": int(stats[1]),
        "spheres_tested": int(stats[2]),
        "mean_leaves_visited": float(stats[1]) / q,
        "mean_spheres_tested": float(stats[2]) / q,
    }


def classic_dbscan(points: PointsLike, params: Params, *, search: Search = "bvh",
                   cfg: BuildConfig = BuildConfig(), index: Optional[NeighborIndex] = None) -> Labeling:
    """Sequential DBSCAN by breadth-first seed expansion.

    Points are scanned in ascending id order and every neighborhood is taken
    in ascending id order, so the result is fully deterministic. A border
    point reachable from two clusters joins whichever reaches it first.
    """
    warm_up()
    t0 = time.perf_counter_ns()
    idx = index if index is not None else _make_index(points, params, search, cfg)
    t1 = time.perf_counter_ns()
    n = len(idx)
    min_pts = params.min_pts
    stats = np.zeros(3, np.int64)
    queries = 0

    unassigned, noise = -2, NOISE
    labels = [unassigned] * n
    core = [False] * n
    queued = [False] * n
    for p in range(n):
        if labels[p] != unassigned:
            continue
        neighbors = find_neighborhood(idx, p, stats)
        queries += 1
        if len(neighbors) < min_pts:
            labels[p] = noise
            continue
        core[p] = True
        labels[p] = p
        queued[p] = True
        seeds = deque()
        for q in neighbors:
            if not queued[q]:
                queued[q] = True
                seeds.append(q)
        while seeds:
            q = seeds.popleft()
            if labels[q] != unassigned and labels[q] != noise:
                continue
            labels[q] = p
            q_neighbors = find_neighborhood(idx, q, stats)
            queries += 1
            if len(q_neighbors) >= min_pts:
                core[q] = True
                for r in q_neighbors:
                    if not queued[r]:
                        queued[r] = True
                        seeds.append(r)
    t2 = time.perf_counter_ns()

    labels_a = np.array(labels, dtype=np.int64)
    core_a = np.array(core, dtype=bool)
    classes = np.where(core_a, PointClass.CORE,
                       np.where(labels_a == NOISE, PointClass.NOISE, PointClass.BORDER)).astype(np.int8)
    out = canonicalize_labels(Labeling(labels_a, classes, 0))
    t3 = time.perf_counter_ns()
    out.timings = {"index_build": t1 - t0, "stage1": t2 - t1, "stage2": 0,
                   "assembly": t3 - t2, "total": t3 - t0}
    out.traversal = {"stage1": _traversal_summary(stats, queries)}
    return out


@dataclass
class CoreFlags:
    """Stage-1 output. ``counts`` are exact only when ``early_exit`` was off."""

    core: np.ndarray
    counts: np.ndarray
    early_exit: bool
    stats: np.ndarray  # one (nodes, leaves, spheres) row per point

    def with_min_pts(self, min_pts: int) -> np.ndarray:
        """Core flags for a different threshold, reusing the exact counts."""
        if self.early_exit:
            raise ParameterError("counts from an early-exit run are only threshold comparisons")
        return self.counts >= min_pts


def _chunks(ids: np.ndarray, threads: int, per_thread: int = 8) -> list[np.ndarray]:
    k = max(1, min(len(ids), threads * per_thread))
    return [c for c in np.array_split(ids, k) if len(c)]


def identify_core_points(idx: NeighborIndex, params: Params, early_exit: bool = False,
                         threads: int = 1) -> CoreFlags:
    """Stage 1: count each point's neighbors and flag the core points."""
    if idx.eps != params.eps:
        raise ParameterError(f"index built for eps={idx.eps}, params ask for eps={params.eps}")
    n = len(idx)
    counts = np.zeros(n, np.int64)
    stats = np.zeros((n, 3), np.int64)
    limit = params.min_pts if early_exit else 0
    args = search_args(idx)
    ids = np.arange(n, dtype=np.int64)
    if threads <= 1:
        _kernels.count_batch(*args, ids, limit, counts, stats)
    else:
        def work(chunk):
            lo, hi = int(chunk[0]), int(chunk[-1]) + 1
            _kernels.count_batch(*args, chunk, limit, counts[lo:hi], stats[lo:hi])

        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, _chunks(ids, threads)))
    return CoreFlags(counts >= params.min_pts, counts, early_exit, stats)


def form_clusters(idx: NeighborIndex, core: np.ndarray, params: Params, *,
                  deterministic: bool = True, threads: int = 1,
                  stats: Optional[np.ndarray] = None) -> DisjointSet:
    """Stage 2: merge core points within eps and attach each border point once.

    A core point is unioned with every core neighbor. A non-core neighbor is
    attached to the first core point that claims it; the claim is an atomic
    test-and-set, so a border point can never bridge two clusters.
    Deterministic mode walks core points in ascending id order on one thread.
    """
    if idx.eps != params.eps:
        raise ParameterError(f"index built for eps={idx.eps}, params ask for eps={params.eps}")
    n = len(idx)
    core = np.ascontiguousarray(core, dtype=np.bool_)
    if core.shape != (n,):
        raise DatasetError(f"core flags have shape {core.shape}, expected ({n},)")
    if stats is None:
        stats = np.zeros(3, np.int64)
    ds = DisjointSet(n)
    claimed = np.zeros(n, dtype=np.bool_)
    args = search_args(idx)
    if deterministic:
        _kernels.form_clusters_sequential(*args, core, ds.parent, ds.rank, claimed, stats)
        return ds

    claim_lock = threading.Lock()
    is_core = core.tolist()

    def claim(m: int) -> bool:
        with claim_lock:
            if claimed[m]:
                return False
            claimed[m] = True
            return True

    def work(chunk: np.ndarray) -> np.ndarray:
        local = np.zeros(3, np.int64)
        offsets, nbrs = _kernels.neighbors_csr(*args, chunk, local)
        offsets = offsets.tolist()
        nbrs = nbrs.tolist()
        for t, p in enumerate(chunk.tolist()):
            for m in nbrs[offsets[t]:offsets[t + 1]]:
                if is_core[m]:
                    ds.union(p, m)
                elif claim(m):
                    ds.union(p, m)
        return local

    core_ids = np.flatnonzero(core).astype(np.int64)
    if len(core_ids):
        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            for local in pool.map(work, _chunks(core_ids, max(1, threads))):
                stats += local
    return ds


def labeling_from_forest(ds: DisjointSet, core: np.ndarray) -> Labeling:
    """Clusters are the sets holding at least one core point; everything else is noise."""
    n = len(ds)
    roots = ds.roots()
    has_core = np.zeros(n, dtype=bool)
    has_core[roots[core]] = True
    member = has_core[roots]
    labels = np.full(n, NOISE, dtype=np.int64)
    ids = np.flatnonzero(member)
    count = 0
    if len(ids):
        _, first, inverse = np.unique(roots[ids], return_index=True, return_inverse=True)
        labels[ids] = ids[first][inverse.ravel()]
        count = len(first)
    classes = np.where(core, PointClass.CORE,
                       np.where(member, PointClass.BORDER, PointClass.NOISE)).astype(np.int8)
    return Labeling(labels, classes, count)


@lru_cache(maxsize=None)
def warm_up() -> None:
    """Compile (or load cached) kernels so timings exclude JIT work."""
    pts = np.array([[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [3.0, 0.0, 0.0]])
    params = Params(1.0, 1)
    for search in ("bvh", "brute"):
        idx = _make_index(pts, params, search, BuildConfig())
        for early in (False, True):
            flags = identify_core_points(idx, params, early)
        form_clusters(idx, flags.core, params, deterministic=True)
        form_clusters(idx, flags.core, params, deterministic=False)
        find_neighborhood(idx, 0)
    _kernels.find_all(np.arange(3, dtype=np.int64))


def rt_dbscan(points: PointsLike, params: Params, *, early_exit: bool = False,
              deterministic: bool = True, threads: int = 1, search: Search = "bvh",
              cfg: BuildConfig = BuildConfig(), index: Optional[NeighborIndex] = None) -> Labeling:
    """Two-stage union-find DBSCAN over an eps-sphere index.

    ``search="brute"`` keeps the two-stage structure but answers every
    neighborhood query with a full scan, which isolates what the BVH buys.
    ``timings`` holds ``index_build``, ``stage1``, ``stage2``, ``assembly``
    and ``total`` in nanoseconds.
    """
    if threads < 1:
        raise ParameterError(f"threads must be >= 1, got {threads}")
    warm_up()
    t0 = time.perf_counter_ns()
    idx = index if index is not None else _make_index(points, params, search, cfg)
    t1 = time.perf_counter_ns()
    flags = identify_core_points(idx, params, early_exit, 1 if deterministic else threads)
    t2 = time.perf_counter_ns()
    stage2_stats = np.zeros(3, np.int64)
    ds = form_clusters(idx, flags.core, params, deterministic=deterministic,
                       threads=threads, stats=stage2_stats)
    t3 = time.perf_counter_ns()
    out = labeling_from_forest(ds, flags.core)
    t4 = time.perf_counter_ns()
    out.timings = {"index_build": t1 - t0, "stage1": t2 - t1, "stage2": t3 - t2,
                   "assembly": t4 - t3, "total": t4 - t0}
    out.traversal = {
        "stage1": _traversal_summary(flags.stats.sum(axis=0), len(idx)),
        "stage2": _traversal_summary(stage2_stats, int(np.count_nonzero(flags.core))),
    }
    return out


@dataclass(frozen=True)
class Mismatch:
    kind: str  # "core" | "partition" | "noise" | "border" | "label"
    point: int
    detail: str


@dataclass
class ComparisonReport:
    violations: list[Mismatch]

    @property
    def passed(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.passed

    def summary(self, limit: int = 10) -> str:
        if self.passed:
            return "PASS"
        lines = [f"FAIL ({len(self.violations)} violations)"]
        lines += [f"  {v.kind} @ {v.point}: {v.detail}" for v in self.violations[:limit]]
        return "\n".join(lines)


def compare_clusterings(a: Labeling, b: Labeling, idx: NeighborIndex, params: Params) -> ComparisonReport:
    """Equivalence up to border-point assignment.

    Passes iff core flags match, the partitions restricted to core points
    match up to renaming, the noise sets match, and every border point in
    either labeling sits in a cluster holding a core point within eps.
    """
    n = len(idx)
    if len(a) != n or len(b) != n:
        raise DatasetError(f"labelings cover {len(a)} and {len(b)} points, index has {n}")
    if idx.eps != params.eps:
        raise ParameterError(f"index built for eps={idx.eps}, params ask for eps={params.eps}")
    out: list[Mismatch] = []
    for name, lab in (("a", a), ("b", b)):
        bad = np.flatnonzero((lab.labels == NOISE) != (lab.classes == PointClass.NOISE))
        out += [Mismatch("label", int(i), f"{name}: noise label and class disagree") for i in bad]

    core_a, core_b = a.core, b.core
    for i in np.flatnonzero(core_a != core_b).tolist():
        out.append(Mismatch("core", i, f"core in {'a' if core_a[i] else 'b'} only"))

    a_to_b: dict[int, int] = {}
    b_to_a: dict[int, int] = {}
    for i in np.flatnonzero(core_a & core_b).tolist():
        la, lb = int(a.labels[i]), int(b.labels[i])
        if a_to_b.setdefault(la, lb) != lb or b_to_a.setdefault(lb, la) != la:
            out.append(Mismatch("partition", i,
                                f"core point in a-cluster {la} / b-cluster {lb} breaks the 1:1 mapping"))

    for i in np.flatnonzero(a.noise != b.noise).tolist():
        out.append(Mismatch("noise", i, f"noise in {'a' if a.noise[i] else 'b'} only"))

    for name, lab in (("a", a), ("b", b)):
        core = lab.core
        for i in np.flatnonzero(lab.classes == PointClass.BORDER).tolist():
            li = lab.labels[i]
            if not any(core[j] and lab.labels[j] == li for j in find_neighborhood(idx, i)):
                out.append(Mismatch("border", i,
                                    f"{name}: cluster {li} has no core point within eps"))
    return ComparisonReport(out)
