"""Share of index build, stage 1 and stage 2 in the total run time.

Small datasets spend most of their time building the tree; as n grows the
two query stages take over.

    python scripts/timing_breakdown.py --sizes 100,1000,10000,100000 --eps 0.002,0.01
"""

import argparse
from dataclasses import dataclass

import numpy as np

from rtdbscan.data import UniformSpec, generate
from rtdbscan.dbscan import rt_dbscan, warm_up
from rtdbscan.geometry import Params


@dataclass
class BreakdownConfig:
    sizes: tuple = (100, 1_000, 10_000, 50_000)
    eps: tuple = (0.002, 0.01)
    min_pts: int = 5
    repeats: int = 3
    seed: int = 0


def breakdown(cfg: BreakdownConfig):
    warm_up()
    for n in cfg.sizes:
        coords = generate(UniformSpec(n), seed=cfg.seed).coords
        for eps in cfg.eps:
            runs = [rt_dbscan(coords, Params(eps, cfg.min_pts)).timings for _ in range(cfg.repeats)]
            med = {k: float(np.median([r[k] for r in runs])) for k in runs[0]}
            yield n, eps, med


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default=",".join(map(str, BreakdownConfig.sizes)))
    ap.add_argument("--eps", default=",".join(map(str, BreakdownConfig.eps)))
    ap.add_argument("--minpts", type=int, default=BreakdownConfig.min_pts)
    ap.add_argument("--repeats", type=int, default=BreakdownConfig.repeats)
    args = ap.parse_args()
    cfg = BreakdownConfig(tuple(int(s) for s in args.sizes.split(",")),
                          tuple(float(e) for e in args.eps.split(",")), args.minpts, args.repeats)
    print(f"{'n':>8} {'eps':>7} {'total ms':>10} {'build':>7} {'stage1':>7} {'stage2':>7}")
    for n, eps, t in breakdown(cfg):
        total = t["total"]
        shares = [100 * t[k] / total for k in ("index_build", "stage1", "stage2")]
        print(f"{n:>8} {eps:>7.4f} {total / 1e6:>10.2f} " + " ".join(f"{s:>6.1f}%" for s in shares))


if __name__ == "__main__":
    main()
