"""Regression forests: CART trees on bootstrap samples with random feature
subsets, plus out-of-bag predictions.

Split search runs on a rank-code representation prepared once per training
matrix: every feature value is replaced by its index into the sorted unique
values of that column. Counting by code replaces per-node sorting, which
keeps tree growth fast on wide feature matrices, and the search stays an
exact CART search because every distinct value boundary is still a candidate
split. The grown trees store real-valued thresholds (midpoints between the
adjacent unique values), so prediction works directly on raw features.

Determinism: every tree owns one RNG stream that yields its bootstrap
indices and a seed for the in-kernel feature-subset shuffle, so forests are
reproducible regardless of how callers schedule tree training.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import InvalidParameter
from .numeric import RngStream


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 200
    mtry: int | None = None  # None -> ceil(p / 3)
    min_leaf: int = 5

    def resolve_mtry(self, n_features: int) -> int:
        if self.mtry is not None:
            return max(1, min(int(self.mtry), n_features))
        return max(1, -(-n_features // 3))


class FeatureTable:
    """Rank-code view of a training matrix, reusable across forests."""

    __slots__ = ("codes", "uniq_flat", "uniq_off", "n", "p")

    def __init__(self, x: np.ndarray):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] < 1:
            raise InvalidParameter(f"expected a 2-d design matrix, got shape {x.shape}")
        n, p = x.shape
        codes = np.empty((n, p), dtype=np.int64)
        parts = []
        off = np.zeros(p + 1, dtype=np.int64)
        for f in range(p):
            uniq, inv = np.unique(x[:, f], return_inverse=True)
            codes[:, f] = inv
            parts.append(uniq)
            off[f + 1] = off[f] + uniq.size
        self.codes = np.asfortranarray(codes)
        self.uniq_flat = np.concatenate(parts)
        self.uniq_off = off
        self.n = n
        self.p = p


@njit(cache=True)
def _grow_tree(codes, uniq_flat, uniq_off, y, boot, mtry, min_leaf, seed):
    n = boot.shape[0]
    p = codes.shape[1]
    max_nodes = 2 * n + 1
    feat = np.full(max_nodes, -1, np.int64)
    thr = np.zeros(max_nodes)
    left = np.full(max_nodes, -1, np.int64)
    right = np.full(max_nodes, -1, np.int64)
    value = np.zeros(max_nodes)
    idx = boot.copy()
    stack = np.zeros((max_nodes, 3), np.int64)
    stack[0, 2] = n
    top = 1
    n_nodes = 1
    state = np.uint64(seed)
    perm = np.arange(p)
    u_max = 0
    for f in range(p):
        u = uniq_off[f + 1] - uniq_off[f]
        if u > u_max:
            u_max = u
    cnt = np.zeros(u_max, np.int64)
    csum = np.zeros(u_max)
    csq = np.zeros(u_max)
    occ = np.zeros(u_max, np.int64)
    while top > 0:
        top -= 1
        node = stack[top, 0]
        s = stack[top, 1]
        e = stack[top, 2]
        m = e - s
        tot = 0.0
        tot2 = 0.0
        for i in range(s, e):
            v = y[idx[i]]
            tot += v
            tot2 += v * v
        mean = tot / m
        value[node] = mean
        if m < 2 * min_leaf or tot2 - tot * mean <= 1e-12 * m * (1.0 + mean * mean):
            continue
        best = np.inf
        best_f = -1
        best_thr = 0.0
        best_code = -1
        for j in range(mtry):
            # splitmix64 step for the feature shuffle
            state = state + np.uint64(0x9E3779B97F4A7C15)
            z = state
            z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
            z = z ^ (z >> np.uint64(31))
            r = j + int(z % np.uint64(p - j))
            t = perm[j]
            perm[j] = perm[r]
            perm[r] = t
        for j in range(mtry):
            f = perm[j]
            off = uniq_off[f]
            n_occ = 0
            for i in range(s, e):
                row = idx[i]
                c = codes[row, f]
                if cnt[c] == 0:
                    occ[n_occ] = c
                    n_occ += 1
                cnt[c] += 1
                v = y[row]
                csum[c] += v
                csq[c] += v * v
            if n_occ >= 2:
                # insertion sort of the occupied codes (small lists in deep nodes)
                for a in range(1, n_occ):
                    key = occ[a]
                    b = a - 1
                    while b >= 0 and occ[b] > key:
                        occ[b + 1] = occ[b]
                        b -= 1
                    occ[b + 1] = key
                nl = 0
                al = 0.0
                al2 = 0.0
                for a in range(n_occ - 1):
                    c = occ[a]
                    nl += cnt[c]
                    al += csum[c]
                    al2 += csq[c]
                    if nl < min_leaf or m - nl < min_leaf:
                        continue
                    sse_l = al2 - al * al / nl
                    sse_r = (tot2 - al2) - (tot - al) * (tot - al) / (m - nl)
                    score = sse_l + sse_r
                    if score < best:
                        best = score
                        best_f = f
                        best_thr = 0.5 * (uniq_flat[off + c] + uniq_flat[off + occ[a + 1]])
                        best_code = c
            for a in range(n_occ):
                c = occ[a]
                cnt[c] = 0
                csum[c] = 0.0
                csq[c] = 0.0
        if best_f < 0:
            continue
        i = s
        j2 = e - 1
        while i <= j2:
            if codes[idx[i], best_f] <= best_code:
                i += 1
            else:
                t = idx[i]
                idx[i] = idx[j2]
                idx[j2] = t
                j2 -= 1
        feat[node] = best_f
        thr[node] = best_thr
        lch = n_nodes
        rch = n_nodes + 1
        n_nodes += 2
        left[node] = lch
        right[node] = rch
        stack[top, 0] = lch
        stack[top, 1] = s
        stack[top, 2] = i
        top += 1
        stack[top, 0] = rch
        stack[top, 1] = i
        stack[top, 2] = e
        top += 1
    return feat[:n_nodes], thr[:n_nodes], left[:n_nodes], right[:n_nodes], value[:n_nodes]


@njit(cache=True)
def _accumulate_predictions(feat, thr, left, right, value, offsets, x, out, counts, skip_mask):
    n_trees = offsets.shape[0] - 1
    n = x.shape[0]
    for t in range(n_trees):
        base = offsets[t]
        for i in range(n):
            if skip_mask[t, i]:
                continue
            node = 0
            while feat[base + node] >= 0:
                if x[i, feat[base + node]] <= thr[base + node]:
                    node = left[base + node]
                else:
                    node = right[base + node]
            out[i] += value[base + node]
            counts[i] += 1


@dataclass(frozen=True)
class ForestModel:
    node_feature: np.ndarray
    node_threshold: np.ndarray
    node_left: np.ndarray
    node_right: np.ndarray
    node_value: np.ndarray
    tree_offsets: np.ndarray  # (T+1,)
    bootstrap: np.ndarray  # (T, n) sampled row indices per tree
    n_features: int
    params: ForestParams

    @property
    def n_trees(self) -> int:
        return self.tree_offsets.size - 1


def rforest_fit(
    x: np.ndarray,
    y: np.ndarray,
    params: ForestParams,
    rng: RngStream,
    table: FeatureTable | None = None,
) -> ForestModel:
    """Train a bootstrap forest of CART regression trees.

    ``table`` lets callers reuse the rank-code representation when several
    forests train on the same matrix with different targets.
    """
    y = np.asarray(y, dtype=np.float64)
    if table is None:
        table = FeatureTable(x)
    n, p = table.n, table.p
    if y.shape != (n,):
        raise InvalidParameter(f"targets shaped {y.shape} do not match {n} rows")
    min_leaf = int(params.min_leaf)
    if min_leaf < 1 or n < 2 * min_leaf:
        raise InvalidParameter(f"need at least {2 * max(1, min_leaf)} rows, got {n}")
    mtry = params.resolve_mtry(p)

    feats, thrs, lefts, rights, values = [], [], [], [], []
    offsets = np.zeros(params.n_trees + 1, dtype=np.int64)
    bootstrap = np.empty((params.n_trees, n), dtype=np.int64)
    for t in range(params.n_trees):
        stream = rng.split(t)
        boot = stream.integers(0, n, size=n).astype(np.int64)
        seed = int(stream.integers(0, 2**63))
        fe, th, le, ri, va = _grow_tree(
            table.codes, table.uniq_flat, table.uniq_off, y, boot, mtry, min_leaf, seed
        )
        feats.append(fe)
        thrs.append(th)
        lefts.append(le)
        rights.append(ri)
        values.append(va)
        bootstrap[t] = boot
        offsets[t + 1] = offsets[t] + fe.size
    return ForestModel(
        node_feature=np.concatenate(feats),
        node_threshold=np.concatenate(thrs),
        node_left=np.concatenate(lefts),
        node_right=np.concatenate(rights),
        node_value=np.concatenate(values),
        tree_offsets=offsets,
        bootstrap=bootstrap,
        n_features=p,
        params=params,
    )


def rforest_predict(model: ForestModel, x: np.ndarray) -> np.ndarray:
    """Mean prediction over all trees."""
    x = np.ascontiguousarray(np.atleast_2d(np.asarray(x, dtype=np.float64)))
    if x.shape[1] != model.n_features:
        raise InvalidParameter(f"expected {model.n_features} features, got {x.shape[1]}")
    out = np.zeros(x.shape[0])
    counts = np.zeros(x.shape[0], dtype=np.int64)
    skip = np.zeros((model.n_trees, x.shape[0]), dtype=np.bool_)
    _accumulate_predictions(
        model.node_feature,
        model.node_threshold,
        model.node_left,
        model.node_right,
        model.node_value,
        model.tree_offsets,
        x,
        out,
        counts,
        skip,
    )
    return out / model.n_trees


def rforest_oob_predict(model: ForestModel, x_train: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Out-of-bag mean prediction per training row.

    Returns (predictions, covered): rows that appear in every bootstrap get
    covered=False and a prediction of 0; callers choose how to handle them.
    """
    x = np.ascontiguousarray(np.asarray(x_train, dtype=np.float64))
    n = x.shape[0]
    skip = np.zeros((model.n_trees, n), dtype=np.bool_)
    for t in range(model.n_trees):
        in_bag = np.bincount(model.bootstrap[t], minlength=n) > 0
        skip[t] = in_bag
    out = np.zeros(n)
    counts = np.zeros(n, dtype=np.int64)
    _accumulate_predictions(
        model.node_feature,
        model.node_threshold,
        model.node_left,
        model.node_right,
        model.node_value,
        model.tree_offsets,
        x,
        out,
        counts,
        skip,
    )
    covered = counts > 0
    with np.errstate(invalid="ignore"):
        preds = np.where(covered, out / np.maximum(counts, 1), 0.0)
    return preds, covered
