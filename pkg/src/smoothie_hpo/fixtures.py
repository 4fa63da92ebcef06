"""Seeded synthetic datasets used by tests, the self-test, the profile
examples, and the shipped cost benchmark.

The default parameterizations are calibrated so the Gaussian-probe beta of
soft blob data lands near 2 (the low, software-metrics-like population)
and interleaved checkerboards land well above 5.6 (the high population).
"""

import math

import numpy as np

from .data_io import Dataset


def make_blobs(m: int = 200, n: int = 2, k: int = 2, seed: int = 0,
               cluster_std: float = 2.4, center_span: float = 7.0,
               name: str = "blobs") -> Dataset:
    """Well-separated soft Gaussian clusters, one per class."""
    if n < 2:
        raise ValueError("need at least 2 features")
    rng = np.random.default_rng(seed)
    centers = np.zeros((k, n))
    for c in range(k):
        angle = 2.0 * math.pi * c / k
        centers[c, 0] = center_span * math.cos(angle)
        centers[c, 1] = center_span * math.sin(angle)
    counts = [m // k + (1 if c < m % k else 0) for c in range(k)]
    X = np.vstack([
        rng.normal(0.0, cluster_std, size=(counts[c], n)) + centers[c]
        for c in range(k)
    ])
    y = np.concatenate([np.full(counts[c], c, dtype=np.int64)
                        for c in range(k)])
    order = rng.permutation(m)
    return Dataset(X=X[order], y=y[order], k=k,
                   feature_names=[f"f{i}" for i in range(n)], name=name)


def make_checkerboard(m: int = 200, n: int = 2, cells: int = 4,
                      cell_size: float = 1.0, seed: int = 0,
                      name: str = "checkerboard") -> Dataset:
    """Interleaved alternating-cell labels over a square grid."""
    if n < 2:
        raise ValueError("need at least 2 features")
    rng = np.random.default_rng(seed)
    span = cells * cell_size
    X = rng.uniform(0.0, span, size=(m, n))
    cell_ids = np.floor(X[:, :2] / cell_size).astype(np.int64)
    y = ((cell_ids[:, 0] + cell_ids[:, 1]) % 2).astype(np.int64)
    if len(np.unique(y)) < 2:   # tiny m edge case
        y[0] = 1 - y[0]
    return Dataset(X=X, y=y, k=2,
                   feature_names=[f"f{i}" for i in range(n)], name=name)


def make_imbalanced(majority: int = 100, minority: int = 25, n: int = 2,
                    seed: int = 0, name: str = "imbalanced") -> Dataset:
    """Binary blobs with an explicit class-count imbalance."""
    rng = np.random.default_rng(seed)
    X0 = rng.normal(0.0, 1.0, size=(majority, n))
    X1 = rng.normal(0.0, 1.0, size=(minority, n)) + 4.0
    X = np.vstack([X0, X1])
    y = np.concatenate([np.zeros(majority, dtype=np.int64),
                        np.ones(minority, dtype=np.int64)])
    return Dataset(X=X, y=y, k=2,
                   feature_names=[f"f{i}" for i in range(n)], name=name)


def make_dataset(spec: dict) -> Dataset:
    """Build a fixture from a config-style spec dict ({"kind": ..., ...})."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    builders = {"blobs": make_blobs, "checkerboard": make_checkerboard,
                "imbalanced": make_imbalanced}
    if kind not in builders:
        raise ValueError(f"unknown synthetic dataset kind {kind!r}")
    return builders[kind](**spec)
