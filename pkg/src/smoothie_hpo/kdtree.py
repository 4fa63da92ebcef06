"""Plain kd-tree: median split on the widest-spread dimension, leaf size 8.

The tree is stored as flat arrays so the query kernel can run under numba.
Queries return the k nearest points ordered by (squared distance, index),
which matches brute force exactly, ties included.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels

LEAF_SIZE = 8


@dataclass
class KDTree:
    points: np.ndarray
    perm: np.ndarray
    node_dim: np.ndarray
    node_val: np.ndarray
    node_left: np.ndarray
    node_right: np.ndarray
    node_start: np.ndarray
    node_end: np.ndarray

    def query(self, q: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Indices and squared distances of the k nearest stored points."""
        q = np.ascontiguousarray(q, dtype=np.float64)
        k = min(int(k), self.points.shape[0])
        idx, d2 = kernels.kdtree_knn(
            self.points, self.perm, self.node_dim, self.node_val,
            self.node_left, self.node_right, self.node_start, self.node_end,
            q, k)
        return np.asarray(idx), np.asarray(d2)


def build_kdtree(points: np.ndarray, leaf_size: int = LEAF_SIZE) -> KDTree:
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("need a non-empty 2-D point array")
    perm = np.arange(pts.shape[0], dtype=np.int64)

    node_dim, node_val = [], []
    node_left, node_right = [], []
    node_start, node_end = [], []

    def new_node():
        node_dim.append(0)
        node_val.append(0.0)
        node_left.append(-1)
        node_right.append(-1)
        node_start.append(0)
        node_end.append(0)
        return len(node_dim) - 1

    def build(start: int, end: int) -> int:
        node = new_node()
        count = end - start
        if count <= leaf_size:
            node_start[node] = start
            node_end[node] = end
            return node
        seg = pts[perm[start:end]]
        spread = seg.max(axis=0) - seg.min(axis=0)
        dim = int(np.argmax(spread))
        if spread[dim] == 0.0:
            # all points identical; keep as one (possibly large) leaf
            node_start[node] = start
            node_end[node] = end
            return node
        order = np.argsort(seg[:, dim], kind="stable")
        perm[start:end] = perm[start:end][order]
        mid = start + count // 2
        node_dim[node] = dim
        node_val[node] = pts[perm[mid], dim]
        left = build(start, mid)
        right = build(mid, end)
        node_left[node] = left
        node_right[node] = right
        return node

    build(0, pts.shape[0])
    return KDTree(
        points=pts,
        perm=perm,
        node_dim=np.asarray(node_dim, dtype=np.int64),
        node_val=np.asarray(node_val, dtype=np.float64),
        node_left=np.asarray(node_left, dtype=np.int64),
        node_right=np.asarray(node_right, dtype=np.int64),
        node_start=np.asarray(node_start, dtype=np.int64),
        node_end=np.asarray(node_end, dtype=np.int64),
    )
