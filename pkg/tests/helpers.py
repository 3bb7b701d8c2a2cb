"""Dataset mixes and independent oracles shared by the test modules.

Nothing here imports the code paths under test beyond plain data types.
"""

import numpy as np

KINDS = ("uniform", "blobs", "duplicates", "grid", "uniform3d", "line")


def random_dataset(rng: np.random.Generator, n: int, kind: str) -> np.ndarray:
    """An ``(n, 3)`` array; 2D kinds have z = 0."""
    if kind == "uniform":
        pts = rng.uniform(0, 1, size=(n, 2))
    elif kind == "uniform3d":
        return rng.uniform(-1, 1, size=(n, 3))
    elif kind == "blobs":
        k = int(rng.integers(1, 6))
        centers = rng.uniform(0, 10, size=(k, 2))
        which = rng.integers(0, k, size=n)
        pts = centers[which] + rng.normal(0, rng.uniform(0.05, 0.5), size=(n, 2))
        noise = rng.random(n) < 0.1
        pts[noise] = rng.uniform(0, 10, size=(int(noise.sum()), 2))
    elif kind == "duplicates":
        sites = rng.uniform(0, 1, size=(max(1, n // 8), 2))
        pts = sites[rng.integers(0, len(sites), size=n)]
    elif kind == "grid":
        # integer coordinates put many pairs at exactly eps
        pts = rng.integers(0, max(2, int(np.sqrt(n))), size=(n, 2)).astype(float)
    elif kind == "line":
        pts = np.column_stack([np.sort(rng.uniform(0, n / 10, size=n)), np.zeros(n)])
    else:
        raise ValueError(kind)
    return np.column_stack([pts, np.zeros(n)])


def pairwise_distances(coords: np.ndarray) -> np.ndarray:
    d = coords[:, None, :] - coords[None, :, :]
    return np.sqrt(d[..., 0] * d[..., 0] + d[..., 1] * d[..., 1] + d[..., 2] * d[..., 2])


def pick_eps(rng: np.random.Generator, coords: np.ndarray, kind: str) -> float:
    """An eps giving a mean neighborhood of a few to a few dozen points."""
    if kind == "grid":
        return float(rng.choice([1.0, 2.0, np.sqrt(2.0)]))
    if len(coords) < 2:
        return 0.5
    sample = coords[rng.choice(len(coords), size=min(len(coords), 64), replace=False)]
    d = np.sqrt(((sample[:, None, :] - coords[None, :, :]) ** 2).sum(-1))
    d.sort(axis=1)
    k = int(rng.integers(1, min(len(coords), 30)))
    eps = float(np.median(d[:, k]))
    return eps if eps > 0 else 0.01


def brute_neighbor_sets(coords: np.ndarray, eps: float) -> list[set[int]]:
    dist = pairwise_distances(coords)
    adj = dist <= eps
    np.fill_diagonal(adj, False)
    return [set(np.flatnonzero(row).tolist()) for row in adj]


def components(n: int, edges) -> list[int]:
    """Naive label propagation to a fixed point: component label = smallest id."""
    label = list(range(n))
    edges = list(edges)
    changed = True
    while changed:
        changed = False
        for a, b in edges:
            m = min(label[a], label[b])
            if label[a] != m or label[b] != m:
                label[a] = label[b] = m
                changed = True
    return label


def reference_dbscan(coords: np.ndarray, eps: float, min_pts: int):
    """Textbook recursive DBSCAN on a dense distance matrix (self-excluded counts).

    Returns ``(labels, core)`` with labels as the first-seen core id or -1.
    """
    n = len(coords)
    nbrs = brute_neighbor_sets(coords, eps)
    core = [len(nbrs[i]) >= min_pts for i in range(n)]
    labels = [None] * n

    def expand(i, cid):
        for j in sorted(nbrs[i]):
            if labels[j] is None:
                labels[j] = cid
                if core[j]:
                    expand(j, cid)

    for i in range(n):
        if labels[i] is None and core[i]:
            labels[i] = i
            expand(i, i)
    return [(-1 if v is None else v) for v in labels], core


def quick_find_partition(n: int, edges) -> list[frozenset[int]]:
    """Sequential quick-find over the union list; sets sorted by smallest member."""
    label = np.arange(n)
    for a, b in edges:
        la, lb = label[a], label[b]
        if la != lb:
            label[label == lb] = la
    groups: dict[int, list[int]] = {}
    for i, lab in enumerate(label.tolist()):
        groups.setdefault(lab, []).append(i)
    return sorted((frozenset(g) for g in groups.values()), key=min)
