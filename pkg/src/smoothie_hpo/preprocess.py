"""Data pre-processing options: five column scalers, two oversamplers, and
semi-supervised label recovery.

Scalers are fit on train only and replayed on test.  Resamplers touch the
training set only and are pure functions of (input, seed); original rows
always survive verbatim as a prefix of the output.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .data_io import Dataset
from .errors import NoMinority, TooFewMinority
from .kdtree import build_kdtree

SCALER_KINDS = ("normalize", "standardize", "minmax", "maxabs", "robust")

# layer displacement per unit of per-feature standard deviation
FUZZY_STEP = 0.1


@dataclass
class FittedScaler:
    """Per-feature affine transform x -> (x - center) * inv_scale.

    Features whose spread denominator was zero get inv_scale 0 (mapping the
    whole column to zero) and are listed in ``zero_spread``.
    """
    kind: str
    center: np.ndarray
    inv_scale: np.ndarray
    zero_spread: list[int] = field(default_factory=list)
    percentile_method: str = "linear"

    def apply(self, X: np.ndarray) -> np.ndarray:
        return (X - self.center) * self.inv_scale


def fit_scaler(train_X: np.ndarray, kind: str) -> FittedScaler:
    X = np.asarray(train_X, dtype=np.float64)
    if kind == "normalize":
        center = np.zeros(X.shape[1])
        scale = np.sqrt((X * X).sum(axis=0))
    elif kind == "standardize":
        center = X.mean(axis=0)
        scale = X.std(axis=0)           # population sigma
    elif kind == "minmax":
        center = X.min(axis=0)
        scale = X.max(axis=0) - center
    elif kind == "maxabs":
        center = np.zeros(X.shape[1])
        scale = np.abs(X).max(axis=0)
    elif kind == "robust":
        p25, p50, p75 = np.percentile(X, [25, 50, 75], axis=0, method="linear")
        center = p50
        scale = p75 - p25
    else:
        raise ValueError(f"unknown scaler kind {kind!r}")

    zero = np.flatnonzero(scale == 0.0)
    inv = np.zeros_like(scale)
    nonzero = scale != 0.0
    inv[nonzero] = 1.0 / scale[nonzero]
    if zero.size:
        warnings.warn(
            f"{kind}: zero spread in feature(s) {zero.tolist()}, mapped to 0",
            stacklevel=2)
    return FittedScaler(kind=kind, center=center, inv_scale=inv,
                        zero_spread=zero.tolist())


def fit_apply_scaler(train_X, test_X, kind):
    """Fit on train, replay on both sides; returns (train', test', fitted)."""
    fitted = fit_scaler(train_X, kind)
    return fitted.apply(train_X), fitted.apply(test_X), fitted


def smote(train: Dataset, k_neighbors: int, seed: int = 0) -> Dataset:
    """Equalize every class to the majority count with synthetic points.

    A synthetic point is x + u * (x_nn - x) for u in [0, 1), where x_nn is
    one of x's k nearest same-class neighbors (Euclidean).
    """
    if k_neighbors < 1:
        raise ValueError("k_neighbors must be >= 1")
    counts = train.class_counts()
    target = counts.max()
    rng = np.random.default_rng(seed)

    new_X, new_y = [train.X], [train.y]
    for c in np.flatnonzero(counts < target):
        if counts[c] < 2:
            raise TooFewMinority(
                f"class {c} has {counts[c]} sample(s); need at least 2")
        pts = train.X[train.y == c]
        k = min(k_neighbors, len(pts) - 1)
        idx, _ = kernels.brute_knn(pts, pts, k + 1)
        neighbors = idx[:, 1:]          # drop self-match
        need = int(target - counts[c])
        base = rng.integers(0, len(pts), size=need)
        pick = rng.integers(0, k, size=need)
        u = rng.random(need)
        nn = neighbors[base, pick]
        synth = pts[base] + u[:, None] * (pts[nn] - pts[base])
        new_X.append(synth)
        new_y.append(np.full(need, c, dtype=np.int64))

    if len(new_X) == 1:
        return train
    return train.replace(X=np.vstack(new_X), y=np.concatenate(new_y))


def _round_half_up_ratio(num: int, den: int) -> int:
    """round-half-up of the positive rational num/den, exactly."""
    return (2 * num + den) // (2 * den)


def fuzzy_layer_count(minority: int, majority: int) -> int:
    """floor(log2(majority / minority)), computed exactly on integers."""
    layers = 0
    while minority << (layers + 1) <= majority:
        layers += 1
    return layers


def _fuzzy_once(train: Dataset, seed: int) -> Dataset:
    counts = train.class_counts()
    observed = np.flatnonzero(counts)
    if observed.size != 2:
        raise NoMinority(
            f"fuzzy sampling needs exactly 2 observed classes, got {observed.size}")
    c_min, c_maj = sorted(observed, key=lambda c: (counts[c], c))
    n_min, n_maj = int(counts[c_min]), int(counts[c_maj])
    layers = fuzzy_layer_count(n_min, n_maj)
    if layers == 0:
        warnings.warn("imbalance ratio above 1/2: no fuzzy layers, unchanged",
                      stacklevel=3)
        return train

    rng = np.random.default_rng(seed)
    pts = train.X[train.y == c_min]
    delta = train.X.std(axis=0) * FUZZY_STEP
    new_X, new_y = [train.X], [train.y]
    added = 0
    for layer in range(1, layers + 1):
        copies = _round_half_up_ratio(n_maj, n_min * (1 << layer))
        for _ in range(copies):
            signs = rng.choice([-1.0, 1.0], size=pts.shape)
            new_X.append(pts + signs * (layer * delta))
            new_y.append(np.full(len(pts), c_min, dtype=np.int64))
            added += len(pts)
    # the count formula can land exactly on (or just below) the majority;
    # one extra innermost-layer pass then enforces strict reversal
    if n_min + added <= n_maj:
        copies = _round_half_up_ratio(n_maj, 2 * n_min)
        for _ in range(copies):
            signs = rng.choice([-1.0, 1.0], size=pts.shape)
            new_X.append(pts + signs * delta)
            new_y.append(np.full(len(pts), c_min, dtype=np.int64))
    return train.replace(X=np.vstack(new_X), y=np.concatenate(new_y))


def fuzzy_sample(train: Dataset, times: int = 1, seed: int = 0) -> Dataset:
    """Concentric oversampler that reverses a binary class imbalance.

    Each minority sample spawns round((1/n) / 2^i) copies at layer
    i = 1..floor(log2(1/n)), displaced by +-i * delta per feature, where n
    is the minority/majority ratio and delta is the per-feature std times
    ``FUZZY_STEP``.  Applying it twice re-runs the procedure on the (now
    reversed) output.
    """
    if times not in (1, 2):
        raise ValueError("times must be 1 or 2")
    out = train
    for rep in range(times):
        out = _fuzzy_once(out, seed=np.random.default_rng([seed, rep]).integers(2**63))
    return out


def label_engineer(train: Dataset, seed: int = 0, return_kept: bool = False):
    """Keep floor(sqrt(m)) random labels; re-vote the rest by kd-tree lookup.

    Each deleted label becomes the mode of its floor(m^(1/4)) nearest kept
    neighbors (mode ties go to the lowest class id).  Features never change.
    With ``return_kept`` the kept row indices come back alongside the data.
    """
    m = train.m
    if m < 4:
        raise ValueError("label engineering needs m >= 4")
    keep_count = math.isqrt(m)
    votes = math.isqrt(keep_count)       # isqrt twice == floor(m ** 0.25)
    rng = np.random.default_rng(seed)
    keep = rng.choice(m, size=keep_count, replace=False)
    keep_mask = np.zeros(m, dtype=bool)
    keep_mask[keep] = True

    tree = build_kdtree(train.X[keep])
    kept_labels = train.y[keep]
    y_new = train.y.copy()
    for i in np.flatnonzero(~keep_mask):
        idx, _ = tree.query(train.X[i], votes)
        tally = np.bincount(kept_labels[idx], minlength=train.k)
        y_new[i] = int(np.argmax(tally))   # argmax ties -> lowest class id
    out = train.replace(y=y_new)
    if return_kept:
        return out, np.sort(keep)
    return out
