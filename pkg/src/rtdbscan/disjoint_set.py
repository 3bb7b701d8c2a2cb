"""Union-find forest over point ids, safe for concurrent use from threads.

``find`` is lock-free: it only ever rewrites the parent of a non-root node
to one of its ancestors (path halving), and non-roots never become roots
again, so racing compressions cannot create cycles.

``union`` retries a single atomic *link* step: install root ``r1`` under
root ``r2`` only if both are still roots at that instant. The step is a
short critical section standing in for a double compare-and-swap.
"""

from __future__ import annotations

import threading

import numpy as np

from . import _kernels
from .errors import DatasetError


class DisjointSet:
    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)
        self.rank = np.zeros(n, dtype=np.int64)
        self._link_lock = threading.Lock()

    def __len__(self) -> int:
        return len(self.parent)

    def _check(self, i) -> int:
        if not 0 <= i < len(self.parent):
            raise DatasetError(f"id {i} out of range [0, {len(self.parent)})")
        return int(i)

    def find(self, i: int) -> int:
        i = self._check(i)
        parent = self.parent
        while True:
            p = int(parent[i])
            if p == i:
                return i
            gp = int(parent[p])
            parent[i] = gp
            i = gp

    def _try_link(self, ra: int, rb: int) -> bool:
        with self._link_lock:
            parent, rank = self.parent, self.rank
            if parent[ra] != ra or parent[rb] != rb:
                return False
            if rank[ra] < rank[rb]:
                parent[ra] = rb
            elif rank[ra] > rank[rb]:
                parent[rb] = ra
            else:
                parent[rb] = ra
                rank[ra] += 1
            return True

    def union(self, a: int, b: int) -> None:
        self._check(a)
        self._check(b)
        while True:
            ra, rb = self.find(a), self.find(b)
            if ra == rb or self._try_link(ra, rb):
                return

    def roots(self) -> np.ndarray:
        """Root of every id. Call only after all concurrent unions finished."""
        return _kernels.find_all(self.parent)

    def root_count(self) -> int:
        return int(np.count_nonzero(self.parent == np.arange(len(self.parent))))

    def partition(self) -> list[frozenset[int]]:
        roots = self.roots()
        groups: dict[int, list[int]] = {}
        for i, r in enumerate(roots.tolist()):
            groups.setdefault(r, []).append(i)
        return sorted((frozenset(g) for g in groups.values()), key=min)


def ds_find(ds: DisjointSet, i: int) -> int:
    return ds.find(i)


def ds_union(ds: DisjointSet, a: int, b: int) -> None:
    ds.union(a, b)
