"""Hot numeric kernels, each in a numba ``@njit`` build and a pure-numpy build.

The public names (``pairwise_sq_dists``, ``brute_knn``, ``kdtree_knn``,
``gnb_sample_norms``, ``coverage_fractions``) bind to one build at import
time, controlled by the ``SMOOTHIE_HPO_NUMBA`` env flag (see
:mod:`smoothie_hpo._accel`).  ``KERNEL_PAIRS`` keeps both builds reachable
for the benchmark and for path-equivalence tests.

Tie handling: every nearest-neighbor routine orders candidates by
(squared distance, point index), so kd-tree queries and brute force agree
exactly, including on duplicated points.
"""

import math

import numpy as np

from ._accel import NUMBA_ENABLED, njit

# ---------------------------------------------------------------------------
# pairwise squared distances
# ---------------------------------------------------------------------------


def _pairwise_sq_dists_np(A, B):
    out = np.empty((A.shape[0], B.shape[0]), dtype=np.float64)
    for i in range(A.shape[0]):
        out[i] = ((B - A[i]) ** 2).sum(axis=1)
    return out


@njit(cache=True)
def _pairwise_sq_dists_jit(A, B):
    na, nb = A.shape[0], B.shape[0]
    n = A.shape[1]
    out = np.empty((na, nb), dtype=np.float64)
    for i in range(na):
        for j in range(nb):
            acc = 0.0
            for d in range(n):
                diff = A[i, d] - B[j, d]
                acc += diff * diff
            out[i, j] = acc
    return out


# ---------------------------------------------------------------------------
# brute-force k nearest neighbors (reference path for the kd-tree)
# ---------------------------------------------------------------------------


def _brute_knn_np(X, Q, k):
    m = X.shape[0]
    k = min(k, m)
    idx = np.empty((Q.shape[0], k), dtype=np.int64)
    d2 = np.empty((Q.shape[0], k), dtype=np.float64)
    for qi in range(Q.shape[0]):
        dists = ((X - Q[qi]) ** 2).sum(axis=1)
        order = np.argsort(dists, kind="stable")[:k]
        idx[qi] = order
        d2[qi] = dists[order]
    return idx, d2


@njit(cache=True)
def _brute_knn_jit(X, Q, k):
    m, n = X.shape
    if k > m:
        k = m
    nq = Q.shape[0]
    idx = np.empty((nq, k), dtype=np.int64)
    d2 = np.empty((nq, k), dtype=np.float64)
    for qi in range(nq):
        best_d = np.full(k, np.inf)
        best_i = np.full(k, -1, dtype=np.int64)
        filled = 0
        for j in range(m):
            acc = 0.0
            for d in range(n):
                diff = X[j, d] - Q[qi, d]
                acc += diff * diff
            if filled < k or acc < best_d[filled - 1] or (
                acc == best_d[filled - 1] and j < best_i[filled - 1]
            ):
                if filled < k:
                    pos = filled
                    filled += 1
                else:
                    pos = filled - 1
                while pos > 0 and (
                    acc < best_d[pos - 1]
                    or (acc == best_d[pos - 1] and j < best_i[pos - 1])
                ):
                    best_d[pos] = best_d[pos - 1]
                    best_i[pos] = best_i[pos - 1]
                    pos -= 1
                best_d[pos] = acc
                best_i[pos] = j
        idx[qi] = best_i
        d2[qi] = best_d
    return idx, d2


# ---------------------------------------------------------------------------
# kd-tree k-NN query over the flat-array tree built in smoothie_hpo.kdtree
# ---------------------------------------------------------------------------
# Node layout: internal nodes carry (split_dim, split_val, left, right);
# leaves have left == -1 and own perm[start:end].


def _kdtree_knn_np(pts, perm, node_dim, node_val, node_left, node_right,
                   node_start, node_end, q, k):
    best_d = np.full(k, np.inf)
    best_i = np.full(k, -1, dtype=np.int64)
    filled = 0

    def insert(d, j):
        nonlocal filled
        if filled == k and not (
            d < best_d[k - 1] or (d == best_d[k - 1] and j < best_i[k - 1])
        ):
            return
        pos = filled if filled < k else k - 1
        if filled < k:
            filled += 1
        while pos > 0 and (
            d < best_d[pos - 1] or (d == best_d[pos - 1] and j < best_i[pos - 1])
        ):
            best_d[pos] = best_d[pos - 1]
            best_i[pos] = best_i[pos - 1]
            pos -= 1
        best_d[pos] = d
        best_i[pos] = j

    stack = [(0, 0.0)]
    while stack:
        node, plane_d2 = stack.pop()
        if filled == k and plane_d2 > best_d[k - 1]:
            continue
        while node_left[node] != -1:
            dim = node_dim[node]
            delta = q[dim] - node_val[node]
            if delta < 0.0:
                near, far = node_left[node], node_right[node]
            else:
                near, far = node_right[node], node_left[node]
            stack.append((far, delta * delta))
            node = near
        leaf_pts = perm[node_start[node]:node_end[node]]
        dists = ((pts[leaf_pts] - q) ** 2).sum(axis=1)
        for d, j in zip(dists, leaf_pts):
            insert(d, j)
    return best_i[:filled], best_d[:filled]


@njit(cache=True)
def _kdtree_knn_jit(pts, perm, node_dim, node_val, node_left, node_right,
                    node_start, node_end, q, k):
    n = pts.shape[1]
    best_d = np.full(k, np.inf)
    best_i = np.full(k, -1, dtype=np.int64)
    filled = 0
    stack_node = np.empty(256, dtype=np.int64)
    stack_d2 = np.empty(256, dtype=np.float64)
    stack_node[0] = 0
    stack_d2[0] = 0.0
    top = 1
    while top > 0:
        top -= 1
        node = stack_node[top]
        plane_d2 = stack_d2[top]
        if filled == k and plane_d2 > best_d[k - 1]:
            continue
        while node_left[node] != -1:
            dim = node_dim[node]
            delta = q[dim] - node_val[node]
            if delta < 0.0:
                near = node_left[node]
                far = node_right[node]
            else:
                near = node_right[node]
                far = node_left[node]
            stack_node[top] = far
            stack_d2[top] = delta * delta
            top += 1
            node = near
        for p in range(node_start[node], node_end[node]):
            j = perm[p]
            acc = 0.0
            for d in range(n):
                diff = pts[j, d] - q[d]
                acc += diff * diff
            if filled < k or acc < best_d[filled - 1] or (
                acc == best_d[filled - 1] and j < best_i[filled - 1]
            ):
                pos = filled if filled < k else k - 1
                if filled < k:
                    filled += 1
                while pos > 0 and (
                    acc < best_d[pos - 1]
                    or (acc == best_d[pos - 1] and j < best_i[pos - 1])
                ):
                    best_d[pos] = best_d[pos - 1]
                    best_i[pos] = best_i[pos - 1]
                    pos -= 1
                best_d[pos] = acc
                best_i[pos] = j
    return best_i[:filled], best_d[:filled]


# ---------------------------------------------------------------------------
# Gaussian discriminant smoothness: per-sample Frobenius norm of the
# fourth-order Hessian tensor, via the rank-factored closed form.
# ---------------------------------------------------------------------------
# With P the precision matrix, C0 = P @ Sigma @ P / 2 and a_i = P @ w_i,
# the tensor for sample i is T = P (.) Q_i + G_i (.) P where
# G_i = a_i a_i^T + C0, Q_i = G_i - P/2 and (M (.) N)_ijkl = M_ik N_jl.
# Its squared Frobenius norm factorizes over index pairs:
#   |T|^2 = |P|^2 (|Q|^2 + |G|^2) + 2 <P,G> <P,Q>.


def _gnb_sample_norms_np(A, P, C0):
    p2 = (P * P).sum()
    pc0 = (P * C0).sum()
    c02 = (C0 * C0).sum()
    na2 = (A * A).sum(axis=1)
    aPa = np.einsum("ij,jk,ik->i", A, P, A)
    aC0a = np.einsum("ij,jk,ik->i", A, C0, A)
    pg = aPa + pc0
    g2 = na2 * na2 + 2.0 * aC0a + c02
    pq = pg - 0.5 * p2
    q2 = g2 - pg + 0.25 * p2
    norm2 = p2 * (q2 + g2) + 2.0 * pg * pq
    return np.sqrt(norm2)


@njit(cache=True)
def _gnb_sample_norms_jit(A, P, C0):
    m, n = A.shape
    p2 = 0.0
    pc0 = 0.0
    c02 = 0.0
    for i in range(n):
        for j in range(n):
            p2 += P[i, j] * P[i, j]
            pc0 += P[i, j] * C0[i, j]
            c02 += C0[i, j] * C0[i, j]
    out = np.empty(m, dtype=np.float64)
    for s in range(m):
        na2 = 0.0
        aPa = 0.0
        aC0a = 0.0
        for i in range(n):
            ai = A[s, i]
            na2 += ai * ai
            for j in range(n):
                aPa += ai * P[i, j] * A[s, j]
                aC0a += ai * C0[i, j] * A[s, j]
        pg = aPa + pc0
        g2 = na2 * na2 + 2.0 * aC0a + c02
        pq = pg - 0.5 * p2
        q2 = g2 - pg + 0.25 * p2
        out[s] = math.sqrt(p2 * (q2 + g2) + 2.0 * pg * pq)
    return out


# ---------------------------------------------------------------------------
# Monte-Carlo interval covering: fraction of [a, b] covered by the union of
# (x - k, x + k) windows, one row of sample points per trial.
# ---------------------------------------------------------------------------


def _coverage_fractions_np(points, k, a, b):
    S = np.sort(points, axis=1)
    lo = np.clip(S - k, a, b)
    hi = np.clip(S + k, a, b)
    total = np.zeros(points.shape[0])
    cur_lo = lo[:, 0].copy()
    cur_hi = hi[:, 0].copy()
    for j in range(1, points.shape[1]):
        overlap = lo[:, j] <= cur_hi
        total += np.where(overlap, 0.0, cur_hi - cur_lo)
        cur_lo = np.where(overlap, cur_lo, lo[:, j])
        cur_hi = np.where(overlap, np.maximum(cur_hi, hi[:, j]), hi[:, j])
    total += cur_hi - cur_lo
    return total / (b - a)


@njit(cache=True)
def _coverage_fractions_jit(points, k, a, b):
    trials, p = points.shape
    out = np.empty(trials, dtype=np.float64)
    for t in range(trials):
        row = points[t].copy()
        row.sort()
        cur_lo = max(a, row[0] - k)
        cur_hi = min(b, row[0] + k)
        total = 0.0
        for j in range(1, p):
            lo = max(a, row[j] - k)
            hi = min(b, row[j] + k)
            if lo <= cur_hi:
                if hi > cur_hi:
                    cur_hi = hi
            else:
                total += cur_hi - cur_lo
                cur_lo = lo
                cur_hi = hi
        total += cur_hi - cur_lo
        out[t] = total / (b - a)
    return out


# ---------------------------------------------------------------------------
# public bindings
# ---------------------------------------------------------------------------

KERNEL_PAIRS = {
    "pairwise_sq_dists": (_pairwise_sq_dists_np, _pairwise_sq_dists_jit),
    "brute_knn": (_brute_knn_np, _brute_knn_jit),
    "kdtree_knn": (_kdtree_knn_np, _kdtree_knn_jit),
    "gnb_sample_norms": (_gnb_sample_norms_np, _gnb_sample_norms_jit),
    "coverage_fractions": (_coverage_fractions_np, _coverage_fractions_jit),
}

_SELECT = 1 if NUMBA_ENABLED else 0

pairwise_sq_dists = KERNEL_PAIRS["pairwise_sq_dists"][_SELECT]
brute_knn = KERNEL_PAIRS["brute_knn"][_SELECT]
kdtree_knn = KERNEL_PAIRS["kdtree_knn"][_SELECT]
gnb_sample_norms = KERNEL_PAIRS["gnb_sample_norms"][_SELECT]
coverage_fractions = KERNEL_PAIRS["coverage_fractions"][_SELECT]
