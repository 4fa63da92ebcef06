"""Benchmarks: numba kernels against their pure-numpy fallbacks, and the
probe-vs-full-run cost structure of the two-stage search on a shipped
synthetic workload.
"""

import time
import warnings

import numpy as np

from . import kernels
from .fixtures import make_blobs
from .hpo import SearchSpace, SmoothieParams, default_learner_grids, random_search, smoothie
from .kdtree import build_kdtree


def _time(fn, *args, repeats: int = 3) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_benchmark(seed: int = 0) -> list:
    """Time each kernel's numpy and numba builds on a medium workload.

    Returns rows of (kernel, numpy_seconds, numba_seconds).  The numba
    build is warmed once so JIT compilation is not billed.
    """
    rng = np.random.default_rng(seed)
    rows = []

    A = rng.normal(size=(400, 8))
    B = rng.normal(size=(500, 8))
    cases = {
        "pairwise_sq_dists": (A, B),
        "brute_knn": (A, B, 5),
    }
    tree = build_kdtree(rng.normal(size=(4000, 4)))
    q = rng.normal(size=4)
    cases["kdtree_knn"] = (tree.points, tree.perm, tree.node_dim,
                           tree.node_val, tree.node_left, tree.node_right,
                           tree.node_start, tree.node_end, q, 8)
    dev = rng.normal(size=(2000, 6))
    P = np.eye(6) + 0.1 * rng.normal(size=(6, 6))
    P = (P + P.T) / 2 + 6 * np.eye(6)
    sigma = np.linalg.inv(P)
    cases["gnb_sample_norms"] = (np.ascontiguousarray(dev @ P), P,
                                 np.ascontiguousarray(0.5 * P @ sigma @ P))
    cases["coverage_fractions"] = (rng.uniform(size=(20000, 15)), 0.05, 0.0, 1.0)

    for name, args in cases.items():
        np_fn, jit_fn = kernels.KERNEL_PAIRS[name]
        jit_fn(*args)                      # warm the JIT
        rows.append((name, _time(np_fn, *args), _time(jit_fn, *args)))
    return rows


def cost_benchmark(m: int = 320, n: int = 4, n1: int = 10, n2: int = 5,
                   epochs: int = 50, seed: int = 0) -> dict:
    """Run the two-stage search and random search on one blob workload and
    report the probe/full timing split.

    The structural claims this exercises: probes are a small fraction of
    full-run cost, and probing N1 then running N2 beats fully running all
    N1 configurations.
    """
    data = make_blobs(m=m + m // 3, n=n, seed=seed)
    train = make_blobs(m=m, n=n, seed=seed, name="bench-train")
    test = make_blobs(m=m // 3, n=n, seed=seed + 1, name="bench-test")
    del data
    space = SearchSpace(train_params={"epochs": epochs, "learning_rate": 0.03,
                                      "batch_size": 32},
                        learner_grids=default_learner_grids())
    params = SmoothieParams(N1=n1, N2=n2, seed=seed)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        t0 = time.perf_counter()
        _, smoothie_trials = smoothie(train, test, space, "ff", params,
                                      "accuracy")
        smoothie_wall = time.perf_counter() - t0

        t0 = time.perf_counter()
        _, random_trials = random_search(train, test, space, "ff", n1, seed,
                                         "accuracy")
        random_wall = time.perf_counter() - t0

    return {
        "m": m, "n1": n1, "n2": n2, "epochs": epochs,
        "probe_seconds": sum(t.probe_seconds for t in smoothie_trials),
        "full_seconds": sum(t.full_seconds for t in smoothie_trials),
        "smoothie_wall": smoothie_wall,
        "random_wall": random_wall,
        "smoothie_full_runs": sum(1 for t in smoothie_trials
                                  if t.metrics is not None),
        "random_full_runs": sum(1 for t in random_trials
                                if t.metrics is not None),
    }


def format_kernel_rows(rows: list) -> str:
    lines = [f"{'kernel':24s} {'numpy (s)':>12s} {'numba (s)':>12s} {'speedup':>8s}"]
    for name, np_s, jit_s in rows:
        speed = np_s / jit_s if jit_s > 0 else float("inf")
        lines.append(f"{name:24s} {np_s:12.6f} {jit_s:12.6f} {speed:7.1f}x")
    return "\n".join(lines)
