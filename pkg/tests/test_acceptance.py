"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that the terminal summary prints at the
end of the run. Run with ``pytest tests/test_acceptance.py``.
"""

import sys
import threading
import time

import numpy as np
import pytest

from rtdbscan.data import DenseSpec, generate
from rtdbscan.dbscan import (
    NOISE,
    PointClass,
    classic_dbscan,
    compare_clusterings,
    identify_core_points,
    rt_dbscan,
    warm_up,
)
from rtdbscan.disjoint_set import DisjointSet
from rtdbscan.geometry import Params
from rtdbscan.neighbor import brute_force_neighborhood, build_brute_index, build_index, find_neighborhood
from rtdbscan.report import TIMING_KEYS, make_report

from helpers import KINDS, pick_eps, quick_find_partition, random_dataset

pytestmark = pytest.mark.acceptance


def suite(count, max_n, seed0):
    """Deterministic mix of dataset kinds with randomized eps and min_pts."""
    for i in range(count):
        rng = np.random.default_rng(seed0 + i)
        kind = KINDS[i % len(KINDS)]
        n = int(rng.integers(2, max_n + 1))
        coords = random_dataset(rng, n, kind)
        eps = pick_eps(rng, coords, kind)
        min_pts = int(rng.integers(1, 16))
        yield i, kind, coords, Params(eps, min_pts)


@pytest.fixture(scope="module", autouse=True)
def compiled():
    warm_up()


def test_criterion_1_neighborhood_oracle(record_criterion):
    t0 = time.perf_counter()
    datasets = queries = 0
    bad = []
    for i, kind, coords, params in suite(200, 2000, 10_000):
        idx = build_index(coords, params.eps)
        for q in range(len(coords)):
            if find_neighborhood(idx, q) != brute_force_neighborhood(coords, q, params.eps):
                bad.append((i, kind, q))
        datasets += 1
        queries += len(coords)
    elapsed = time.perf_counter() - t0
    ok = not bad and datasets >= 200 and elapsed < 120
    record_criterion(1, ok, f"{datasets} datasets, {queries} queries, {len(bad)} mismatches, {elapsed:.1f}s")
    assert not bad, bad[:5]
    assert elapsed < 120


def test_criterion_2_clustering_equivalence(record_criterion):
    t0 = time.perf_counter()
    failures = []
    datasets = 0
    for i, kind, coords, params in suite(200, 1500, 20_000):
        oracle_idx = build_brute_index(coords, params.eps)
        ref = classic_dbscan(coords, params, index=oracle_idx)
        got = rt_dbscan(coords, params)
        report = compare_clusterings(got, ref, oracle_idx, params)
        if not report:
            failures.append((i, kind, report.summary(3)))
        datasets += 1
    elapsed = time.perf_counter() - t0
    ok = not failures and datasets >= 200 and elapsed < 300
    record_criterion(2, ok, f"{datasets} datasets, {len(failures)} failures, {elapsed:.1f}s")
    assert not failures, failures[:3]
    assert elapsed < 300


def test_criterion_3_parallel_soundness(record_criterion):
    failures = []
    runs = 0
    for i, kind, coords, params in suite(50, 1500, 30_000):
        idx = build_index(coords, params.eps)
        ref = rt_dbscan(coords, params, deterministic=True, index=idx)
        for threads in (2, 4, 8):
            got = rt_dbscan(coords, params, deterministic=False, threads=threads, index=idx)
            report = compare_clusterings(got, ref, idx, params)
            runs += 1
            if not report:
                failures.append((i, kind, threads, report.summary(3)))
    record_criterion(3, not failures, f"{runs} parallel runs over 50 datasets, {len(failures)} failures")
    assert not failures, failures[:3]


def dense_case(coords, eps, one_cluster_min_pts):
    """All-noise run with min_pts = n, then one single-cluster run per min_pts given."""
    n = len(coords)
    noise = rt_dbscan(coords, Params(eps, n))
    results = {"all_noise": noise.cluster_count == 0 and bool(np.all(noise.labels == NOISE))
               and bool(np.all(noise.classes == PointClass.NOISE))}
    ns = noise.timings["total"]
    for m in one_cluster_min_pts:
        one = rt_dbscan(coords, Params(eps, m), early_exit=True)
        results[f"one_cluster(min_pts={m})"] = one.cluster_count == 1 and one.noise_count == 0
        ns += one.timings["total"]
    return results, ns


@pytest.mark.slow
def test_criterion_4_dense_regime(record_criterion):
    eps = 1e-3
    cases = {
        "coincident n=1e3": (np.zeros((1000, 3)), (1, 10, 999)),
        "near n=1e3": (generate(DenseSpec(1000, eps / 10), seed=1).coords, (1, 10, 999)),
        "near n=1e5": (generate(DenseSpec(100_000, eps / 10), seed=2).coords, (10,)),
    }
    outcome = {}
    seconds = {}
    for name, (coords, min_pts) in cases.items():
        outcome[name], ns = dense_case(coords, eps, min_pts)
        seconds[name] = ns / 1e9
    failed = [(name, k) for name, res in outcome.items() for k, v in res.items() if not v]
    detail = ", ".join(f"{name} {seconds[name]:.0f}s" for name in cases)
    record_criterion(4, not failed, f"all-noise and single-cluster checks on {detail}; failed: {failed or 'none'}")
    assert not failed


@pytest.mark.slow
def test_criterion_5_pruning_trend(record_criterion):
    rng = np.random.default_rng(5)
    n = 100_000
    coords = np.column_stack([rng.uniform(size=(n, 2)), np.zeros(n)])
    eps = float(np.sqrt(20 / (np.pi * n)))
    params = Params(eps, 10)
    rt = rt_dbscan(coords, params)
    brute = rt_dbscan(coords, params, search="brute")
    report = make_report(rt, "rt", {}, {}, {})
    mean_tested = report.traversal["mean_spheres_tested"]
    mean_hood = float(identify_core_points(build_index(coords, eps), params).counts.mean())
    ratio = rt.timings["total"] / brute.timings["total"]
    same = rt == brute
    ok = ratio < 0.25 and mean_tested <= 0.05 * n and same
    record_criterion(5, ok, f"rt/brute total = {ratio:.4f} (rt {rt.timings['total'] / 1e9:.2f}s, "
                            f"brute {brute.timings['total'] / 1e9:.2f}s), mean spheres_tested "
                            f"{mean_tested:.1f} = {100 * mean_tested / n:.3f}% of n, "
                            f"mean neighborhood {mean_hood:.1f}")
    assert same
    assert ratio < 0.25
    assert mean_tested <= 0.05 * n


def test_criterion_6_timing_decomposition(record_criterion):
    problems = []
    rng = np.random.default_rng(6)
    for mode, algo in (("rt", rt_dbscan), ("classic", classic_dbscan)):
        for _ in range(5):
            coords = rng.uniform(size=(int(rng.integers(100, 3000)), 2))
            out = algo(coords, Params(0.05, 5))
            t = out.timings
            if any(not isinstance(t.get(k), int) or t[k] < 0 for k in TIMING_KEYS):
                problems.append(f"{mode}: missing or negative timing in {t}")
            if t["total"] < t["index_build"] + t["stage1"] + t["stage2"]:
                problems.append(f"{mode}: total below parts (ns) {t}")
            ms = make_report(out, mode, {}, {}, {}).timings_ms
            us = {k: round(ms[k] * 1000) for k in TIMING_KEYS}
            if us["total"] < us["index_build"] + us["stage1"] + us["stage2"]:
                problems.append(f"{mode}: total below parts (report) {ms}")
            if t["stage1"] <= 0 or t["index_build"] <= 0:
                problems.append(f"{mode}: unpopulated stage timing {t}")

    shares = []
    for n in (100, 200, 400):
        coords = rng.uniform(size=(n, 2))
        runs = [rt_dbscan(coords, Params(0.005, 3)).timings for _ in range(5)]
        shares.append(float(np.median([r["index_build"] / r["total"] for r in runs])))
    dominated = all(s > 0.5 for s in shares)
    ok = not problems and dominated
    record_criterion(6, ok, f"{len(problems)} field problems; index_build share at n=100/200/400, "
                            f"eps=0.005: " + "/".join(f"{s:.2f}" for s in shares))
    assert not problems, problems[:3]
    assert dominated, shares


def test_criterion_7_early_exit(record_criterion):
    flag_mismatch, cluster_fail, not_lower = [], [], []
    dense_sets = 0
    cases = list(suite(200, 1500, 20_000))
    rng = np.random.default_rng(7)
    for j in range(20):
        # extra datasets whose neighborhoods are far larger than min_pts
        kind = ("blobs", "duplicates")[j % 2]
        coords = random_dataset(rng, int(rng.integers(200, 1500)), kind)
        cases.append((200 + j, kind, coords, Params(pick_eps(rng, coords, kind) * 3, 2)))
    for i, kind, coords, params in cases:
        idx = build_index(coords, params.eps)
        on = identify_core_points(idx, params, early_exit=True)
        off = identify_core_points(idx, params, early_exit=False)
        if not np.array_equal(on.core, off.core):
            flag_mismatch.append(i)
        a = rt_dbscan(coords, params, early_exit=True, index=idx)
        b = rt_dbscan(coords, params, early_exit=False, index=idx)
        if not compare_clusterings(a, b, idx, params):
            cluster_fail.append(i)
        if off.counts.mean() >= 4 * params.min_pts:
            dense_sets += 1
            if not on.stats[:, 2].sum() < off.stats[:, 2].sum():
                not_lower.append(i)
    ok = not (flag_mismatch or cluster_fail or not_lower) and dense_sets > 0
    record_criterion(7, ok, f"{len(cases)} datasets: {len(flag_mismatch)} flag mismatches, "
                            f"{len(cluster_fail)} clustering failures; stage-1 spheres_tested lower on "
                            f"{dense_sets - len(not_lower)}/{dense_sets} datasets with mean neighborhood >= 4 x min_pts")
    assert not flag_mismatch and not cluster_fail
    assert dense_sets > 0 and not not_lower, not_lower


def test_criterion_8_disjoint_set_linearizability(record_criterion):
    old = sys.getswitchinterval()
    sys.setswitchinterval(1e-6)
    failures = []
    schedules = 0
    try:
        for s in range(120):
            rng = np.random.default_rng(80_000 + s)
            n = int(rng.integers(2, 1001))
            m = int(rng.integers(1, 2 * n))
            edges = [tuple(e) for e in rng.integers(0, n, size=(m, 2)).tolist()]
            k = int(rng.integers(2, 9))
            owner = rng.integers(0, k, size=m)
            parts = [[edges[t] for t in np.flatnonzero(owner == w)] for w in range(k)]
            ds = DisjointSet(n)
            barrier = threading.Barrier(k)

            def worker(part):
                barrier.wait()
                for a, b in part:
                    ds.union(a, b)

            threads = [threading.Thread(target=worker, args=(p,)) for p in parts]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
            schedules += 1
            if ds.partition() != quick_find_partition(n, edges):
                failures.append(s)
    finally:
        sys.setswitchinterval(old)
    record_criterion(8, not failures and schedules >= 100,
                     f"{schedules} concurrent schedules (n <= 1000, 2-8 threads), {len(failures)} mismatches")
    assert not failures
