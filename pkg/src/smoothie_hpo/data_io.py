"""Tabular dataset loading and train/test splitting.

Datasets are immutable: feature matrix X (m samples x n features), dense
integer labels y in {0..k-1}, and provenance metadata.  Labels are
re-encoded densely in first-appearance order so that downstream formulas
can index classes 0..k-1 directly.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSplit, EmptyFile, MissingLabelColumn, NonNumericCell


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    k: int
    feature_names: list[str]
    name: str = ""
    label_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.X, dtype=np.float64))
        y = np.ascontiguousarray(np.asarray(self.y, dtype=np.int64))
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError("X must be a non-empty 2-D matrix")
        if y.shape != (X.shape[0],):
            raise ValueError("y length must match sample count")
        if self.k < 2:
            raise ValueError("need at least two classes")
        if y.min() < 0 or y.max() >= self.k:
            raise ValueError("labels must lie in {0..k-1}")
        if not np.isfinite(X).all():
            raise ValueError("X contains NaN or infinity")
        X.setflags(write=False)
        y.setflags(write=False)

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.k)

    def replace(self, X=None, y=None, name=None) -> "Dataset":
        return Dataset(
            X=self.X if X is None else X,
            y=self.y if y is None else y,
            k=self.k,
            feature_names=self.feature_names,
            name=self.name if name is None else name,
            label_names=self.label_names,
        )


@dataclass(frozen=True)
class SplitPolicy:
    kind: str = "ratio"          # "ratio" or "presplit"
    ratio: float = 0.75
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("ratio", "presplit"):
            raise ValueError(f"unknown split kind {self.kind!r}")
        if self.kind == "ratio" and not (0.0 < self.ratio < 1.0):
            raise ValueError("ratio must lie in (0, 1)")


def _parse_cell(token: str, row: int, col: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise NonNumericCell(row, col, token) from None
    if not math.isfinite(value):
        raise NonNumericCell(row, col, token)
    return value


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise EmptyFile(str(path))
    header, data = rows[0], rows[1:]
    if not data:
        raise EmptyFile(f"{path}: header only, no data rows")
    return header, data


def load_csv(path, label_column: str, name: str = "",
             label_encoding: dict[str, int] | None = None) -> Dataset:
    """Load a UTF-8 comma-separated file with a header row.

    Labels are re-encoded to dense 0..k-1 ids in first-appearance order.
    Passing ``label_encoding`` reuses (and extends) an existing encoding,
    which keeps presplit train/test pairs consistent.
    """
    header, data = _read_rows(path)
    if label_column not in header:
        raise MissingLabelColumn(f"{path}: no column named {label_column!r}")
    label_idx = header.index(label_column)
    feature_names = [h for i, h in enumerate(header) if i != label_idx]

    encoding = dict(label_encoding) if label_encoding else {}
    X = np.empty((len(data), len(feature_names)), dtype=np.float64)
    y = np.empty(len(data), dtype=np.int64)
    for r, row in enumerate(data):
        if len(row) != len(header):
            raise NonNumericCell(r, len(row), "<ragged row>")
        label = row[label_idx].strip()
        if label not in encoding:
            encoding[label] = len(encoding)
        y[r] = encoding[label]
        c = 0
        for i, token in enumerate(row):
            if i == label_idx:
                continue
            X[r, c] = _parse_cell(token.strip(), r, i)
            c += 1

    label_names = [lab for lab, _ in sorted(encoding.items(), key=lambda kv: kv[1])]
    return Dataset(X=X, y=y, k=len(encoding), feature_names=feature_names,
                   name=name or str(path), label_names=label_names)


def load_presplit(train_path, test_path, label_column: str,
                  name: str = "") -> tuple[Dataset, Dataset]:
    """Load a presplit pair with one shared label encoding (train first)."""
    train = load_csv(train_path, label_column, name=f"{name or train_path}")
    encoding = {lab: i for i, lab in enumerate(train.label_names)}
    test = load_csv(test_path, label_column, name=f"{name or test_path}",
                    label_encoding=encoding)
    if test.n != train.n or test.feature_names != train.feature_names:
        raise DegenerateSplit("presplit pair disagrees on feature columns")
    if test.k > train.k:
        # test introduced labels unseen in train; widen train's view of k
        train = Dataset(X=train.X, y=train.y, k=test.k,
                        feature_names=train.feature_names, name=train.name,
                        label_names=test.label_names)
    return train, test


def split(d: Dataset, policy: SplitPolicy,
          presplit_test: Dataset | None = None) -> tuple[Dataset, Dataset]:
    """Partition a dataset per policy.

    Ratio splits shuffle rows with the policy seed, then take the first
    floor(m * ratio) rows as train.  Presplit pairs pass through verbatim.
    """
    if policy.kind == "presplit":
        if presplit_test is None:
            raise DegenerateSplit("presplit policy requires a test dataset")
        if presplit_test.n != d.n:
            raise DegenerateSplit("presplit pair disagrees on feature count")
        return d, presplit_test

    n_train = int(math.floor(d.m * policy.ratio))
    if n_train < 1 or n_train >= d.m:
        raise DegenerateSplit(
            f"ratio {policy.ratio} on m={d.m} leaves an empty side")
    rng = np.random.default_rng(policy.seed)
    order = rng.permutation(d.m)
    tr, te = order[:n_train], order[n_train:]
    return (
        d.replace(X=d.X[tr], y=d.y[tr], name=f"{d.name}[train]"),
        d.replace(X=d.X[te], y=d.y[te], name=f"{d.name}[test]"),
    )
