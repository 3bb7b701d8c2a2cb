"""Run reports and label files written by the command line.

Report schema (JSON object, keys sorted, one per run)::

    schema            "rtdbscan.run-report/1"
    mode              "rt" | "classic" | "brute"
    params            {"eps": float, "min_pts": int}
    options           {"early_exit": bool, "deterministic": bool, "threads": int,
                       "leaf_capacity": int, "split_rule": str}
    dataset           {"source": str, "n": int, "dims": int}
    timings_ms        {"index_build", "stage1", "stage2", "total"}: float ms, 1 us resolution
    cluster_count     int
    noise_count       int
    traversal         {"mean_spheres_tested": float, "mean_leaves_visited": float,
                       "stage1": {...}, "stage2": {...}}
    samples_ms        list of per-repeat totals (bench only)
    stats_ms          {"mean", "min", "max"} over samples_ms (bench only)

Everything except ``timings_ms``, ``samples_ms`` and ``stats_ms`` is stable
across runs for a fixed input.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .dbscan import NOISE, Labeling

SCHEMA = "rtdbscan.run-report/1"
TIMING_KEYS = ("index_build", "stage1", "stage2", "total")


def ns_to_ms(ns: int) -> float:
    """Truncate to whole microseconds, then express in milliseconds."""
    return (int(ns) // 1000) / 1000.0


@dataclass
class RunReport:
    mode: str
    params: dict
    options: dict
    dataset: dict
    timings_ms: dict
    cluster_count: int
    noise_count: int
    traversal: dict
    samples_ms: Optional[list] = None
    stats_ms: Optional[dict] = None
    schema: str = field(default=SCHEMA)

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: v for k, v in d.items() if v is not None}

    def stable_dict(self) -> dict:
        """The report without any timing fields, for golden-file comparison."""
        d = self.to_dict()
        for key in ("timings_ms", "samples_ms", "stats_ms"):
            d.pop(key, None)
        return d


def traversal_aggregate(traversal: dict) -> dict:
    stages = {k: v for k, v in traversal.items() if isinstance(v, dict)}
    queries = sum(s["queries"] for s in stages.values())
    q = max(queries, 1)
    return {
        "mean_spheres_tested": sum(s["spheres_tested"] for s in stages.values()) / q,
        "mean_leaves_visited": sum(s["leaves_visited"] for s in stages.values()) / q,
        **stages,
    }


def make_report(labeling: Labeling, mode: str, params: dict, options: dict, dataset: dict) -> RunReport:
    t = labeling.timings
    return RunReport(
        mode=mode,
        params=params,
        options=options,
        dataset=dataset,
        timings_ms={k: ns_to_ms(t.get(k, 0)) for k in TIMING_KEYS},
        cluster_count=int(labeling.cluster_count),
        noise_count=labeling.noise_count,
        traversal=traversal_aggregate(labeling.traversal),
    )


def with_samples(report: RunReport, totals_ns: Sequence[int], per_key_ns: dict) -> RunReport:
    """Attach repeat samples; ``timings_ms`` becomes the per-field mean."""
    samples = [ns_to_ms(x) for x in totals_ns]
    report.samples_ms = samples
    report.stats_ms = {"mean": float(np.mean(samples)), "min": min(samples), "max": max(samples)}
    report.timings_ms = {k: ns_to_ms(int(np.mean(v))) for k, v in per_key_ns.items()}
    return report


def dump_reports(reports: Union[RunReport, Sequence[RunReport]]) -> str:
    if isinstance(reports, RunReport):
        payload = reports.to_dict()
    else:
        payload = [r.to_dict() for r in reports]
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_labels(labeling: Labeling, path: Union[str, Path]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("id,label\n")
        for i, lab in enumerate(labeling.labels.tolist()):
            fh.write(f"{i},{'NOISE' if lab == NOISE else lab}\n")


def read_labels(path: Union[str, Path]) -> list[Optional[int]]:
    """Inverse of :func:`write_labels`; ``None`` marks noise."""
    out: list[Optional[int]] = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "id,label":
            raise ValueError(f"unexpected labels header {header!r}")
        for expected, line in enumerate(fh):
            i, lab = line.strip().split(",")
            if int(i) != expected:
                raise ValueError(f"labels file out of order at id {i}")
            out.append(None if lab == "NOISE" else int(lab))
    return out
