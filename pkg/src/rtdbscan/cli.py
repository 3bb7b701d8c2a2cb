"""Command-line driver: ``python -m rtdbscan {cluster,verify,sweep,bench} ...``.

Exit codes: 0 success, 1 verification failed, 2 bad usage or bad input.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from .bvh import BuildConfig
from .data import Dataset, generate, load_csv, parse_generator
from .dbscan import classic_dbscan, compare_clusterings, rt_dbscan, warm_up
from .errors import DatasetError, ParameterError
from .geometry import Params
from .neighbor import build_brute_index, build_index
from .report import (
    TIMING_KEYS,
    RunReport,
    dump_reports,
    make_report,
    with_samples,
    write_labels,
)

log = logging.getLogger("rtdbscan")

MODES = ("rt", "classic", "brute")


def _csv_list(kind):
    def parse(text: str):
        try:
            return [kind(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected comma-separated {kind.__name__} values, got {text!r}")
    return parse


def _modes(text: str) -> list[str]:
    modes = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in modes if m not in MODES]
    if bad or not modes:
        raise argparse.ArgumentTypeError(f"modes must be from {MODES}, got {text!r}")
    return modes


def _input_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    src = p.add_argument_group("input")
    src.add_argument("--input", help="CSV file of coordinates")
    src.add_argument("--generate", metavar="SPEC",
                     help="synthetic dataset, e.g. uniform:n=1000,dims=2 or dense:n=500,scale=0")
    src.add_argument("--dims", type=int, choices=(2, 3), default=2)
    src.add_argument("--columns", type=_csv_list(int), help="coordinate column indices, e.g. 1,2")
    src.add_argument("--limit", type=int, help="use only the first N rows")
    src.add_argument("--has-header", action="store_true")
    src.add_argument("--seed", type=int, default=0, help="generator seed")
    run = p.add_argument_group("run")
    run.add_argument("--early-exit", action="store_true",
                     help="stop stage-1 counting at minpts neighbors")
    run.add_argument("--deterministic", action="store_true",
                     help="sequential reference path regardless of --threads")
    run.add_argument("--threads", type=int, default=1)
    run.add_argument("--leaf-capacity", type=int, default=4)
    run.add_argument("--split", choices=("median", "sah"), default="median")
    run.add_argument("--out-report", help="write the JSON report here (default: stdout)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _input_parser()
    parser = argparse.ArgumentParser(prog="rtdbscan", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("cluster", parents=[common], help="cluster one dataset")
    c.add_argument("--eps", type=float, required=True)
    c.add_argument("--minpts", type=int, required=True)
    c.add_argument("--mode", choices=MODES, default="rt")
    c.add_argument("--out-labels", help="write id,label CSV here")

    v = sub.add_parser("verify", parents=[common], help="run rt and classic, compare")
    v.add_argument("--eps", type=float, required=True)
    v.add_argument("--minpts", type=int, required=True)
    v.add_argument("--oracle-search", choices=("brute", "bvh"), default="brute",
                   help="neighbor search used by the classic reference run")
    v.add_argument("--out-labels", help="write the rt labels here")

    for name, help_ in (("sweep", "cartesian sweep over eps, minpts and mode"),
                        ("bench", "like sweep, averaging timings over repeats")):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("--eps", type=_csv_list(float), required=True)
        s.add_argument("--minpts", type=_csv_list(int), required=True)
        s.add_argument("--mode", type=_modes, default=["rt"])
        s.add_argument("--repeats", type=int, default=1 if name == "sweep" else 10)
    return parser


def load_dataset(args) -> Dataset:
    if bool(args.input) == bool(args.generate):
        raise ParameterError("give exactly one of --input or --generate")
    if args.input:
        return load_csv(args.input, dims=args.dims, columns=args.columns,
                        has_header=args.has_header, limit=args.limit)
    ds = generate(parse_generator(args.generate), seed=args.seed)
    if args.limit is not None:
        ds = Dataset(ds.coords[: args.limit].copy(), ds.declared_dims, ds.source)
    return ds


def _options(args) -> dict:
    if args.threads < 1:
        raise ParameterError(f"--threads must be >= 1, got {args.threads}")
    return {
        "early_exit": bool(args.early_exit),
        "deterministic": bool(args.deterministic or args.threads == 1),
        "threads": int(args.threads),
        "leaf_capacity": int(args.leaf_capacity),
        "split_rule": args.split,
    }


def run_mode(ds: Dataset, params: Params, mode: str, options: dict):
    cfg = BuildConfig(options["leaf_capacity"], options["split_rule"])
    if mode == "classic":
        return classic_dbscan(ds.coords, params, search="bvh", cfg=cfg)
    return rt_dbscan(ds.coords, params, early_exit=options["early_exit"],
                     deterministic=options["deterministic"], threads=options["threads"],
                     search="brute" if mode == "brute" else "bvh", cfg=cfg)


def _dataset_info(ds: Dataset) -> dict:
    return {"source": ds.source, "n": len(ds), "dims": ds.declared_dims}


def _params_dict(params: Params) -> dict:
    return {"eps": params.eps, "min_pts": params.min_pts}


def _emit(args, text: str) -> None:
    if args.out_report:
        with open(args.out_report, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_cluster(args) -> int:
    ds = load_dataset(args)
    params = Params(args.eps, args.minpts)
    options = _options(args)
    labeling = run_mode(ds, params, args.mode, options)
    report = make_report(labeling, args.mode, _params_dict(params), options, _dataset_info(ds))
    if args.out_labels:
        write_labels(labeling, args.out_labels)
    _emit(args, dump_reports(report))
    log.info("%s: %d clusters, %d noise, %.3f ms", args.mode, report.cluster_count,
             report.noise_count, report.timings_ms["total"])
    return 0


def cmd_verify(args) -> int:
    ds = load_dataset(args)
    params = Params(args.eps, args.minpts)
    options = _options(args)
    rt = run_mode(ds, params, "rt", options)
    oracle_idx = (build_brute_index(ds.coords, params.eps) if args.oracle_search == "brute"
                  else build_index(ds.coords, params.eps))
    ref = classic_dbscan(ds.coords, params, index=oracle_idx)
    result = compare_clusterings(rt, ref, oracle_idx, params)
    reports = [
        make_report(rt, "rt", _params_dict(params), options, _dataset_info(ds)),
        make_report(ref, "classic", _params_dict(params),
                    {**options, "oracle_search": args.oracle_search}, _dataset_info(ds)),
    ]
    if args.out_labels:
        write_labels(rt, args.out_labels)
    _emit(args, dump_reports(reports))
    print(f"verify: {result.summary()}", file=sys.stderr)
    return 0 if result.passed else 1


def cmd_sweep(args) -> int:
    ds = load_dataset(args)
    options = _options(args)
    if args.repeats < 1:
        raise ParameterError(f"--repeats must be >= 1, got {args.repeats}")
    warm_up()
    reports: list[RunReport] = []
    for eps in args.eps:
        for min_pts in args.minpts:
            params = Params(eps, min_pts)
            for mode in args.mode:
                reports.append(bench_cell(ds, params, mode, options, args.repeats,
                                          warmup=args.command == "bench"))
                log.info("eps=%g minpts=%d %s: %.3f ms", eps, min_pts, mode,
                         reports[-1].timings_ms["total"])
    _emit(args, dump_reports(reports))
    return 0


def bench_cell(ds: Dataset, params: Params, mode: str, options: dict, repeats: int,
               warmup: bool = True) -> RunReport:
    """Run one (params, mode) cell ``repeats`` times after an untimed warm-up run."""
    if warmup:
        run_mode(ds, params, mode, options)
    runs = [run_mode(ds, params, mode, options) for _ in range(repeats)]
    report = make_report(runs[0], mode, _params_dict(params), options, _dataset_info(ds))
    if repeats > 1 or warmup:
        per_key = {k: [r.timings.get(k, 0) for r in runs] for k in TIMING_KEYS}
        with_samples(report, per_key["total"], per_key)
    return report


COMMANDS = {"cluster": cmd_cluster, "verify": cmd_verify, "sweep": cmd_sweep, "bench": cmd_sweep}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (DatasetError, ParameterError) as e:
        print(f"rtdbscan: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
