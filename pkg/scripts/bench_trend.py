"""BVH vs brute-force neighbor search across dataset sizes.

Uniform 2D points, eps chosen so the expected neighborhood holds about
``target`` points. Prints one row per size; pass ``--json`` for raw reports.

    python scripts/bench_trend.py --sizes 1000,10000,100000
"""

import argparse
import json
import math
from dataclasses import asdict, dataclass

from rtdbscan.cli import bench_cell
from rtdbscan.data import UniformSpec, generate
from rtdbscan.dbscan import warm_up
from rtdbscan.geometry import Params


@dataclass
class TrendConfig:
    sizes: tuple = (1_000, 3_000, 10_000, 30_000)
    target: float = 20.0
    min_pts: int = 10
    repeats: int = 3
    seed: int = 0


def eps_for(n: int, target: float) -> float:
    return math.sqrt(target / (math.pi * n))


def run(cfg: TrendConfig) -> list[dict]:
    warm_up()
    options = {"early_exit": False, "deterministic": True, "threads": 1,
               "leaf_capacity": 4, "split_rule": "median"}
    rows = []
    for n in cfg.sizes:
        ds = generate(UniformSpec(n), seed=cfg.seed)
        params = Params(eps_for(n, cfg.target), cfg.min_pts)
        cells = {mode: bench_cell(ds, params, mode, options, cfg.repeats, warmup=False)
                 for mode in ("rt", "brute")}
        rt, brute = cells["rt"], cells["brute"]
        rows.append({
            "n": n,
            "eps": params.eps,
            "rt_ms": rt.timings_ms["total"],
            "brute_ms": brute.timings_ms["total"],
            "ratio": rt.timings_ms["total"] / max(brute.timings_ms["total"], 1e-3),
            "rt_tested_frac": rt.traversal["mean_spheres_tested"] / n,
            "clusters": rt.cluster_count,
            "reports": [c.to_dict() for c in cells.values()],
        })
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default=",".join(map(str, TrendConfig.sizes)))
    ap.add_argument("--target", type=float, default=TrendConfig.target)
    ap.add_argument("--minpts", type=int, default=TrendConfig.min_pts)
    ap.add_argument("--repeats", type=int, default=TrendConfig.repeats)
    ap.add_argument("--seed", type=int, default=TrendConfig.seed)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    cfg = TrendConfig(tuple(int(s) for s in args.sizes.split(",")), args.target,
                      args.minpts, args.repeats, args.seed)
    rows = run(cfg)
    if args.json:
        print(json.dumps({"config": asdict(cfg), "rows": rows}, indent=2))
        return
    print(f"{'n':>8} {'eps':>9} {'rt ms':>10} {'brute ms':>11} {'rt/brute':>9} {'tested/n':>9}")
    for r in rows:
        print(f"{r['n']:>8} {r['eps']:>9.5f} {r['rt_ms']:>10.1f} {r['brute_ms']:>11.1f} "
              f"{r['ratio']:>9.3f} {r['rt_tested_frac']:>9.4f}")


if __name__ == "__main__":
    main()
