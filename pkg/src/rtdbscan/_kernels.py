"""Compiled inner loops shared by the BVH, neighbor and clustering modules.

Tree arguments are always passed as the flat arrays of :class:`~rtdbscan.bvh.Bvh`
in this order: ``node_min, node_max, left, right, first, count, prims, prim_xyz``.
Brute-force callers pass empty placeholders of the same dtypes so a single
compiled signature serves both search strategies.

Per-query statistics are ``int64[3]``: nodes visited, leaves visited,
spheres tested.
"""

import numpy as np
from numba import njit

NODES, LEAVES, TESTED = 0, 1, 2


@njit(cache=True, nogil=True)
def bvh_search(node_min, node_max, left, right, first, count, prims, prim_xyz, centers, eps,
               qx, qy, qz, exclude, limit, write, out, stack, stats):
    found = 0
    nodes = 0
    leaves = 0
    tested = 0
    sp = 1
    stack[0] = 0
    while sp > 0:
        sp -= 1
        node = stack[sp]
        nodes += 1
        if not (node_min[node, 0] <= qx and qx <= node_max[node, 0]
                and node_min[node, 1] <= qy and qy <= node_max[node, 1]
                and node_min[node, 2] <= qz and qz <= node_max[node, 2]):
            continue
        if left[node] < 0:
            leaves += 1
            start = first[node]
            stop = start + count[node]
            tested += stop - start
            for k in range(start, stop):
                dx = qx - prim_xyz[k, 0]
                dy = qy - prim_xyz[k, 1]
                dz = qz - prim_xyz[k, 2]
                if np.sqrt(dx * dx + dy * dy + dz * dz) <= eps:
                    j = prims[k]
                    if j == exclude:
                        continue
                    if write:
                        out[found] = j
                    found += 1
                    if found == limit:
                        # early exit: spheres after k in this leaf were never tested
                        tested -= stop - k - 1
                        sp = 0
                        break
        else:
            stack[sp] = right[node]
            stack[sp + 1] = left[node]
            sp += 2
    stats[NODES] += nodes
    stats[LEAVES] += leaves
    stats[TESTED] += tested
    return found


@njit(cache=True, nogil=True)
def brute_search(centers, eps, qx, qy, qz, exclude, limit, write, out, stats):
    found = 0
    n = centers.shape[0]
    tested = n
    for j in range(n):
        if j == exclude:
            continue
        dx = qx - centers[j, 0]
        dy = qy - centers[j, 1]
        dz = qz - centers[j, 2]
        if np.sqrt(dx * dx + dy * dy + dz * dz) <= eps:
            if write:
                out[found] = j
            found += 1
            if found == limit:
                tested = j + 1
                break
    stats[TESTED] += tested
    return found


@njit(cache=True, nogil=True)
def _search(use_bvh, node_min, node_max, left, right, first, count, prims, prim_xyz, centers, eps,
            q, limit, write, out, stack, stats):
    qx = centers[q, 0]
    qy = centers[q, 1]
    qz = centers[q, 2]
    if use_bvh:
        return bvh_search(node_min, node_max, left, right, first, count, prims, prim_xyz, centers, eps,
                          qx, qy, qz, q, limit, write, out, stack, stats)
    return brute_search(centers, eps, qx, qy, qz, q, limit, write, out, stats)


@njit(cache=True, nogil=True)
def count_batch(use_bvh, node_min, node_max, left, right, first, count, prims, prim_xyz, centers, eps,
                stack_size, queries, limit, counts, stats):
    """Self-excluded neighbor count for each id in ``queries``.

    ``stats`` has one row per query. With ``limit > 0`` a count stops
    growing once it reaches ``limit``.
    """
    stack = np.empty(stack_size, np.int64)
    dummy = np.empty(0, np.int64)
    for i in range(queries.shape[0]):
        counts[i] = _search(use_bvh, node_min, node_max, left, right, first, count, prims, prim_xyz,
                            centers, eps, queries[i], limit, False, dummy, stack, stats[i])


@njit(cache=True, nogil=True)
def neighbors_csr(use_bvh, node_min, node_max, left, right, first, count, prims, prim_xyz, centers, eps,
                  stack_size, queries, stats):
    """Neighbor lists of ``queries`` as ``(offsets, ids)``; stats are totals."""
    nq = queries.shape[0]
    stack = np.empty(stack_size, np.int64)
    dummy = np.empty(0, np.int64)
    scratch = np.zeros(3, np.int64)
    offsets = np.zeros(nq + 1, np.int64)
    for i in range(nq):
        c = _search(use_bvh, node_min, node_max, left, right, first, count, prims, prim_xyz,
                    centers, eps, queries[i], 0, False, dummy, stack, scratch)
        offsets[i + 1] = offsets[i] + c
    ids = np.empty(offsets[nq], np.int64)
    for i in range(nq):
        _search(use_bvh, node_min, node_max, left, right, first, count, prims, prim_xyz,
                centers, eps, queries[i], 0, True, ids[offsets[i]:], stack, stats)
    return offsets, ids


@njit(cache=True, nogil=True)
def search_point(use_bvh, node_min, node_max, left, right, first, count, prims, prim_xyz, centers, eps,
                 stack_size, qx, qy, qz, exclude, out, stats):
    stack = np.empty(stack_size, np.int64)
    if use_bvh:
        return bvh_search(node_min, node_max, left, right, first, count, prims, prim_xyz, centers, eps,
                          qx, qy, qz, exclude, 0, True, out, stack, stats)
    return brute_search(centers, eps, qx, qy, qz, exclude, 0, True, out, stats)


@njit(cache=True, nogil=True)
def count_point(use_bvh, node_min, node_max, left, right, first, count, prims, prim_xyz, centers, eps,
                stack_size, qx, qy, qz, exclude, limit, stats):
    stack = np.empty(stack_size, np.int64)
    dummy = np.empty(0, np.int64)
    if use_bvh:
        return bvh_search(node_min, node_max, left, right, first, count, prims, prim_xyz, centers, eps,
                          qx, qy, qz, exclude, limit, False, dummy, stack, stats)
    return brute_search(centers, eps, qx, qy, qz, exclude, limit, False, dummy, stats)


@njit(cache=True, nogil=True)
def uf_find(parent, i):
    # path halving
    while parent[i] != i:
        gp = parent[parent[i]]
        parent[i] = gp
        i = gp
    return i


@njit(cache=True, nogil=True)
def uf_link(parent, rank, ra, rb):
    """Union by rank of two distinct roots; returns the surviving root."""
    if rank[ra] < rank[rb]:
        parent[ra] = rb
        return rb
    parent[rb] = ra
    if rank[ra] == rank[rb]:
        rank[ra] += 1
    return ra


@njit(cache=True, nogil=True)
def uf_union(parent, rank, a, b):
    ra = uf_find(parent, a)
    rb = uf_find(parent, b)
    if ra != rb:
        uf_link(parent, rank, ra, rb)


@njit(cache=True, nogil=True)
def find_all(parent):
    roots = np.empty(parent.shape[0], np.int64)
    for i in range(parent.shape[0]):
        roots[i] = uf_find(parent, i)
    return roots


@njit(cache=True, nogil=True)
def form_clusters_sequential(use_bvh, node_min, node_max, left, right, first, count, prims, prim_xyz,
                             centers, eps, stack_size, core, parent, rank, attached, stats):
    """Cluster formation in ascending point order: core-core union, first-wins border claim."""
    n = centers.shape[0]
    stack = np.empty(stack_size, np.int64)
    buf = np.empty(n, np.int64)
    queries = 0
    for p in range(n):
        if not core[p]:
            continue
        queries += 1
        k = _search(use_bvh, node_min, node_max, left, right, first, count, prims, prim_xyz,
                    centers, eps, p, 0, True, buf, stack, stats)
        # p's root only changes when it gets linked under a neighbor's root
        rp = uf_find(parent, p)
        for t in range(k):
            m = buf[t]
            if not core[m]:
                if attached[m]:
                    continue
                attached[m] = True
            rm = uf_find(parent, m)
            if rm != rp:
                rp = uf_link(parent, rank, rp, rm)
    return queries
