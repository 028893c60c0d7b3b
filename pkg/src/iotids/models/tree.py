"""Gini CART trees compiled with numba.

A fitted tree is a set of flat node arrays. Internal nodes send
``x[feature] <= threshold`` to ``left``; leaves have ``feature == -1`` and
carry the class counts of the bootstrap samples that reached them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

LEAF = -1


@dataclass(frozen=True)
class Tree:
    feature: np.ndarray      # int64, LEAF for leaves
    threshold: np.ndarray    # float64
    left: np.ndarray         # int64
    right: np.ndarray        # int64
    counts: np.ndarray       # int64, (n_nodes, n_classes)
    depth: np.ndarray        # int64

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row of ``X``."""
        return _apply(np.ascontiguousarray(X, dtype=np.float64), self.feature, self.threshold,
                      self.left, self.right)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        leaf_counts = self.counts[self.apply(X)].astype(np.float64)
        return leaf_counts / leaf_counts.sum(axis=1, keepdims=True)

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "counts": self.counts.tolist(),
            "depth": self.depth.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict, n_classes: int) -> "Tree":
        counts = np.asarray(d["counts"], dtype=np.int64).reshape(-1, n_classes)
        return cls(
            np.asarray(d["feature"], dtype=np.int64),
            np.asarray(d["threshold"], dtype=np.float64),
            np.asarray(d["left"], dtype=np.int64),
            np.asarray(d["right"], dtype=np.int64),
            counts,
            np.asarray(d["depth"], dtype=np.int64),
        )


@numba.njit(cache=True)
def _next(state):
    # splitmix64; state is a one-element uint64 array
    state[0] = state[0] + np.uint64(0x9E3779B97F4A7C15)
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def _randint(state, m):
    u = (_next(state) >> np.uint64(11)) * (1.0 / 9007199254740992.0)
    r = int(u * m)
    return r if r < m else m - 1


@numba.njit(cache=True)
def _build(XT, y, sample, global_order, n_classes, max_depth, min_split, min_leaf,
           max_features, seed):
    n = sample.shape[0]
    d = XT.shape[0]
    n_rows = XT.shape[1]
    cap = 2 * n - 1
    if max_depth < 40:
        cap = min(cap, (1 << (max_depth + 1)) - 1)
    feature = np.full(cap, -1, np.int64)
    threshold = np.zeros(cap, np.float64)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    counts = np.zeros((cap, n_classes), np.int64)
    depth_arr = np.zeros(cap, np.int64)
    importance = np.zeros(d, np.float64)

    # Slots are bootstrap draws grouped by row; the tree only depends on the multiset.
    mult = np.zeros(n_rows + 1, np.int64)
    for i in range(n):
        mult[sample[i] + 1] += 1
    offs = np.cumsum(mult)
    slot_y = np.empty(n, np.int64)
    for r in range(n_rows):
        for s in range(offs[r], offs[r + 1]):
            slot_y[s] = y[r]
    # lists[f] holds the node's slots sorted by feature f, node segments aligned across f
    # vals/labs mirror lists so split scans read memory sequentially
    lists = np.empty((d, n), np.int64)
    vals = np.empty((d, n), np.float64)
    labs = np.empty((d, n), np.int64)
    for f in range(d):
        pos = 0
        for t in range(n_rows):
            r = global_order[f, t]
            v = XT[f, r]
            for s in range(offs[r], offs[r + 1]):
                lists[f, pos] = s
                vals[f, pos] = v
                labs[f, pos] = slot_y[s]
                pos += 1
    goes_left = np.zeros(n, np.bool_)
    buf = np.empty(n, np.int64)
    vbuf = np.empty(n, np.float64)
    lbuf = np.empty(n, np.int64)
    feats = np.arange(d)
    cl = np.zeros(n_classes, np.int64)
    cr = np.zeros(n_classes, np.int64)
    state = np.empty(1, np.uint64)
    state[0] = np.uint64(seed)

    st_node = np.empty(cap, np.int64)
    st_start = np.empty(cap, np.int64)
    st_end = np.empty(cap, np.int64)
    st_node[0] = 0
    st_start[0] = 0
    st_end[0] = n
    top = 1
    n_nodes = 1

    while top > 0:
        top -= 1
        node = st_node[top]
        start = st_start[top]
        end = st_end[top]
        m = end - start
        for i in range(start, end):
            counts[node, labs[0, i]] += 1
        sumsq = 0.0
        n_nonzero = 0
        for k in range(n_classes):
            c = counts[node, k]
            sumsq += c * c
            if c > 0:
                n_nonzero += 1
        if (depth_arr[node] >= max_depth or m < min_split or m < 2 * min_leaf
                or n_nonzero <= 1):
            continue
        parent_score = sumsq / m

        best_score = parent_score * (1.0 + 1e-12)
        best_feat = -1
        best_thr = 0.0
        # partial Fisher-Yates picks max_features distinct candidates
        for j in range(max_features):
            r = j + _randint(state, d - j)
            tmp = feats[j]
            feats[j] = feats[r]
            feats[r] = tmp
            f = feats[j]
            lo = vals[f, start]
            hi = vals[f, end - 1]
            if lo == hi:
                continue
            for k in range(n_classes):
                cl[k] = 0
                cr[k] = counts[node, k]
            sl = 0.0
            sr = sumsq
            v1 = lo
            for i in range(m - 1):
                k = labs[f, start + i]
                sl += 2.0 * cl[k] + 1.0
                cl[k] += 1
                sr += -2.0 * cr[k] + 1.0
                cr[k] -= 1
                v0 = v1
                v1 = vals[f, start + i + 1]
                nl = i + 1
                nr = m - nl
                if nl < min_leaf or v0 == v1:
                    continue
                if nr < min_leaf:
                    break
                score = sl / nl + sr / nr
                if score > best_score:
                    best_score = score
                    best_feat = f
                    mid = 0.5 * (v0 + v1)
                    if mid >= v1:
                        mid = v0
                    best_thr = mid
        if best_feat < 0:
            continue

        nl = 0
        for i in range(start, end):
            flag = vals[best_feat, i] <= best_thr
            goes_left[lists[best_feat, i]] = flag
            if flag:
                nl += 1
        # stable partition of every feature's segment
        for f in range(d):
            a = 0
            b = 0
            for i in range(start, end):
                s = lists[f, i]
                if goes_left[s]:
                    lists[f, start + a] = s
                    vals[f, start + a] = vals[f, i]
                    labs[f, start + a] = labs[f, i]
                    a += 1
                else:
                    buf[b] = s
                    vbuf[b] = vals[f, i]
                    lbuf[b] = labs[f, i]
                    b += 1
            for i in range(b):
                lists[f, start + a + i] = buf[i]
                vals[f, start + a + i] = vbuf[i]
                labs[f, start + a + i] = lbuf[i]

        # impurity decrease n*g - nl*gl - nr*gr, with n*g = n - sumsq/n
        importance[best_feat] += (best_score - parent_score) / n
        feature[node] = best_feat
        threshold[node] = best_thr
        lchild = n_nodes
        rchild = n_nodes + 1
        n_nodes += 2
        left[node] = lchild
        right[node] = rchild
        depth_arr[lchild] = depth_arr[node] + 1
        depth_arr[rchild] = depth_arr[node] + 1
        st_node[top] = rchild
        st_start[top] = start + nl
        st_end[top] = end
        top += 1
        st_node[top] = lchild
        st_start[top] = start
        st_end[top] = start + nl
        top += 1

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), counts[:n_nodes].copy(), depth_arr[:n_nodes].copy(),
            importance)


@numba.njit(cache=True)
def _apply(X, feature, threshold, left, right):
    n = X.shape[0]
    out = np.empty(n, np.int64)
    for i in range(n):
        node = 0
        while feature[node] != -1:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out


def presort(X: np.ndarray) -> np.ndarray:
    """Per-feature row order, shape ``(d, n)``; reusable across trees on the same ``X``."""
    return np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T)


def build_tree(
    X: np.ndarray,
    y: np.ndarray,
    sample: np.ndarray,
    n_classes: int,
    *,
    max_depth: int,
    min_samples_split: int,
    min_samples_leaf: int,
    max_features: int,
    seed: int,
    order: np.ndarray | None = None,
    XT: np.ndarray | None = None,
) -> tuple[Tree, np.ndarray]:
    """Grow one tree on the rows ``sample`` (repeats allowed) of ``X``.

    ``order`` and ``XT`` (the transposed contiguous ``X``) may be passed in to
    share the presort across the trees of a forest.

    Returns the tree and its unnormalized per-feature Gini decrease, where each
    split contributes its weighted impurity decrease divided by ``len(sample)``.
    """
    if XT is None:
        XT = np.ascontiguousarray(np.asarray(X, dtype=np.float64).T)
    if order is None:
        order = presort(X)
    max_features = max(1, min(int(max_features), XT.shape[0]))
    out = _build(XT, np.asarray(y, dtype=np.int64), np.asarray(sample, dtype=np.int64), order,
                 int(n_classes), int(max_depth), int(min_samples_split), int(min_samples_leaf),
                 max_features, np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF))
    *arrays, importance = out
    return Tree(*arrays), importance
