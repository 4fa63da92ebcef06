"""Built-in oracle suite behind the ``selftest`` CLI subcommand.

Each check recomputes an expected value through an independent route
(finite differences, dense tensor materialization, exhaustive enumeration,
Monte Carlo) and verifies the production path against it.
"""

import numpy as np

from . import kernels
from .fixtures import make_blobs
from .hpo import coverage_lower, coverage_upper, monte_carlo_coverage
from .learners import FFConfig, loss_and_grads, train_ff
from .smoothness import smoothness_gnb
from .learners import fit_gnb
from .stats import bh_adjust, kruskal_wallis, mann_whitney


def naive_tensor_norm_sup(dev, P, sigma) -> float:
    """Materialize all n^4 Hessian-tensor entries per sample; no shortcuts."""
    n = P.shape[0]
    best = 0.0
    for w in dev:
        G = P @ (np.outer(w, w) + 0.5 * sigma) @ P
        T = (np.einsum("ik,jl->ijkl", P, G)
             - 0.5 * np.einsum("ik,jl->ijkl", P, P)
             + np.einsum("ik,jl->ijkl", G, P))
        best = max(best, float(np.linalg.norm(T.reshape(n * n, n * n))))
    return best


def check_gradients(seeds=(0, 1, 2), tol: float = 1e-4) -> bool:
    """Backprop against central finite differences on 2-3-2 nets."""
    h = 1e-6
    for seed in seeds:
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(12, 2))
        y = rng.integers(0, 2, size=12)
        cfg = FFConfig(layers=1, units_per_layer=3, epochs=1, seed=seed)
        state = train_ff(make_blobs(m=12, n=2, seed=seed), cfg,
                         epochs_override=1)
        weights = [W.copy() for W in state.weights]
        biases = [b.copy() for b in state.biases]
        _, gW, _ = loss_and_grads(weights, biases, X, y, 0.01, 0.0)
        for l, W in enumerate(weights):
            flat = W.ravel()
            for idx in range(flat.size):
                orig = flat[idx]
                flat[idx] = orig + h
                up, _, _ = loss_and_grads(weights, biases, X, y, 0.01, 0.0)
                flat[idx] = orig - h
                dn, _, _ = loss_and_grads(weights, biases, X, y, 0.01, 0.0)
                flat[idx] = orig
                fd = (up - dn) / (2 * h)
                scale = max(abs(fd), abs(gW[l].ravel()[idx]), 1e-8)
                if abs(fd - gW[l].ravel()[idx]) / scale > tol:
                    return False
    return True


def check_gnb_oracle(cases: int = 5, tol: float = 1e-9) -> bool:
    rng = np.random.default_rng(7)
    for case in range(cases):
        n = 2 + case % 2
        L = rng.normal(size=(n, n))
        sigma = L @ L.T + n * np.eye(n)
        P = np.linalg.inv(sigma)
        P = (P + P.T) / 2
        dev = rng.normal(size=(6, n))
        A = np.ascontiguousarray(dev @ P)
        C0 = np.ascontiguousarray(0.5 * P @ sigma @ P)
        fast = float(np.max(kernels.gnb_sample_norms(A, P, C0)))
        naive = naive_tensor_norm_sup(dev, P, sigma)
        if abs(fast - naive) > tol * max(1.0, naive):
            return False
    # identity covariance, zero deviation: exactly n/2
    for n in (2, 3):
        I = np.eye(n)
        norms = kernels.gnb_sample_norms(np.zeros((1, n)), I,
                                         np.ascontiguousarray(0.5 * I))
        if norms[0] != n / 2:
            return False
    return True


def check_statistics() -> bool:
    mwu = mann_whitney([1, 2, 3], [4, 5, 6])
    if not (mwu["U"] == 0.0 and abs(mwu["p"] - 0.10) < 1e-12):
        return False
    kw = kruskal_wallis([[5, 5, 5], [5, 5, 5]])
    if not (kw["H"] == 0.0 and kw["p"] == 1.0):
        return False
    adj = bh_adjust([0.01, 0.04, 0.03])
    return np.allclose(adj, [0.03, 0.04, 0.04])


def check_coverage(trials: int = 20000, slack: float = 0.03) -> bool:
    for p in (1, 10, 30):
        emp = monte_carlo_coverage(p, 0.05, 0.0, 1.0, trials=trials, seed=p)
        if emp < coverage_lower(p, 0.05, 0.0, 1.0) - slack:
            return False
        if emp > coverage_upper(p, [0.05], [1.0]) + slack:
            return False
    return True


def check_kernel_equivalence(seed: int = 3) -> bool:
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(40, 5))
    B = rng.normal(size=(30, 5))
    for name in ("pairwise_sq_dists",):
        np_fn, jit_fn = kernels.KERNEL_PAIRS[name]
        if not np.allclose(np_fn(A, B), jit_fn(A, B), rtol=1e-12, atol=1e-12):
            return False
    np_fn, jit_fn = kernels.KERNEL_PAIRS["brute_knn"]
    i1, d1 = np_fn(A, B, 4)
    i2, d2 = jit_fn(A, B, 4)
    if not (np.array_equal(i1, i2) and np.allclose(d1, d2)):
        return False
    np_fn, jit_fn = kernels.KERNEL_PAIRS["coverage_fractions"]
    pts = rng.uniform(size=(500, 7))
    return np.allclose(np_fn(pts, 0.05, 0.0, 1.0), jit_fn(pts, 0.05, 0.0, 1.0))


def check_smoothness_fixture_direction() -> bool:
    blob = make_blobs(m=160, seed=11)
    from .fixtures import make_checkerboard
    board = make_checkerboard(m=160, seed=11)
    beta_blob = smoothness_gnb(fit_gnb(blob), blob).beta
    beta_board = smoothness_gnb(fit_gnb(board), board).beta
    return beta_blob < beta_board


CHECKS = [
    ("gradient check (backprop vs finite differences)", check_gradients),
    ("gaussian smoothness vs dense tensor oracle", check_gnb_oracle),
    ("rank statistics known values", check_statistics),
    ("coverage bounds vs Monte Carlo", check_coverage),
    ("numba/numpy kernel equivalence", check_kernel_equivalence),
    ("fixture smoothness direction", check_smoothness_fixture_direction),
]


def run_selftest(verbose: bool = True) -> bool:
    ok = True
    for label, fn in CHECKS:
        passed = fn()
        ok = ok and passed
        if verbose:
            print(f"[{'PASS' if passed else 'FAIL'}] {label}")
    return ok
