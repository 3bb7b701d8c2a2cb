"""Traversal cost when every point sits inside every other point's eps-ball.

No box can be pruned in this regime, so each query walks the whole tree.
The script reports nodes, leaves and spheres per query next to the
brute-force scan for growing n.

    python scripts/dense_regime.py --sizes 1000,10000,30000
"""

import argparse
import time
from dataclasses import dataclass

import numpy as np

from rtdbscan.bvh import BuildConfig
from rtdbscan.data import DenseSpec, generate
from rtdbscan.dbscan import identify_core_points, warm_up
from rtdbscan.geometry import Params
from rtdbscan.neighbor import build_brute_index, build_index


@dataclass
class DenseConfig:
    sizes: tuple = (1_000, 3_000, 10_000)
    eps: float = 1e-3
    scale: float = 1e-4
    leaf_capacity: int = 4
    seed: int = 0


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default=",".join(map(str, DenseConfig.sizes)))
    ap.add_argument("--leaf-capacity", type=int, default=DenseConfig.leaf_capacity)
    args = ap.parse_args()
    cfg = DenseConfig(tuple(int(s) for s in args.sizes.split(",")), leaf_capacity=args.leaf_capacity)
    warm_up()
    print(f"{'n':>7} {'nodes/q':>9} {'leaves/q':>9} {'spheres/q':>10} {'bvh s':>8} {'brute s':>8}")
    for n in cfg.sizes:
        coords = generate(DenseSpec(n, cfg.scale), seed=cfg.seed).coords
        params = Params(cfg.eps, n)  # no point can be core: the zero-cluster regime
        idx = build_index(coords, cfg.eps, BuildConfig(cfg.leaf_capacity))
        t0 = time.perf_counter()
        flags = identify_core_points(idx, params)
        t1 = time.perf_counter()
        identify_core_points(build_brute_index(coords, cfg.eps), params)
        t2 = time.perf_counter()
        per_q = flags.stats.mean(axis=0)
        assert not np.any(flags.core)
        print(f"{n:>7} {per_q[0]:>9.0f} {per_q[1]:>9.0f} {per_q[2]:>10.0f} {t1 - t0:>8.2f} {t2 - t1:>8.2f}")


if __name__ == "__main__":
    main()
