"""Binary-threshold decision trees.

Two split criteria share one builder: C4.5-style gain ratio for the
stand-alone tree and Gini impurity for the trees of the random forest.
Samples with ``x[feature] <= threshold`` go left.
"""
from __future__ import annotations

import numpy as np

from .base import BinaryModel, register

LEAF = -1


def _entropy2(pos, n):
    """Binary entropy in bits of ``pos`` positives out of ``n`` (vectorized)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        p = pos / n
        q = 1.0 - p
        h = -(np.where(p > 0, p * np.log2(p), 0.0) + np.where(q > 0, q * np.log2(q), 0.0))
    return np.where(n > 0, h, 0.0)


def _gini2(pos, n):
    with np.errstate(divide="ignore", invalid="ignore"):
        p = pos / n
    return np.where(n > 0, 2.0 * p * (1.0 - p), 0.0)


def _split_table(Zs, ypos):
    """Cut statistics for every feature column of `Zs` at once.

    Returns ``(left_n, left_pos, thresholds, valid)``, each of shape
    ``(n - 1, m)``: cutting after sorted position ``i`` of column ``j`` puts
    ``i + 1`` rows left.  ``valid`` marks cuts between distinct values.
    """
    order = np.argsort(Zs, axis=0, kind="stable")
    xs = np.take_along_axis(Zs, order, axis=0)
    cum = np.cumsum(ypos[order], axis=0)[:-1].astype(float)
    lo, hi = xs[:-1], xs[1:]
    valid = lo < hi
    thresholds = 0.5 * (lo + hi)
    # a midpoint can round onto the upper value; keep the cut strictly below it
    thresholds = np.where(thresholds >= hi, lo, thresholds)
    left_n = np.broadcast_to(np.arange(1, Zs.shape[0], dtype=float)[:, None], cum.shape)
    return left_n, cum, thresholds, valid


class _Builder:
    def __init__(self, criterion, min_samples, max_features=None, rng=None):
        self.criterion = criterion
        self.min_samples = min_samples
        self.max_features = max_features
        self.rng = rng
        self.feature, self.threshold, self.left, self.right = [], [], [], []
        self.npos, self.count = [], []

    def _new_node(self, npos, n):
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.npos.append(int(npos))
        self.count.append(int(n))
        return len(self.feature) - 1

    def _best_split(self, Z, ypos):
        n, d = Z.shape
        tot_pos = ypos.sum()
        if self.max_features is not None and self.max_features < d:
            features = np.sort(self.rng.choice(d, self.max_features, replace=False))
        else:
            features = np.arange(d)
        ln, lp, thr, valid = _split_table(Z[:, features], ypos)
        has_cut = valid.any(axis=0)
        if not has_cut.any():
            return None
        rn = n - ln

        if self.criterion == "gini":
            child = (ln * _gini2(lp, ln) + rn * _gini2(tot_pos - lp, rn)) / n
            child = np.where(valid, child, np.inf)
            # ties: lowest cut position within a feature, then lowest feature
            pos = np.argmin(child, axis=0)
            best_child = child[pos, np.arange(features.size)]
            j = int(np.argmin(best_child))
            return int(features[j]), float(thr[pos[j], j])

        # gain ratio: best threshold per feature by information gain, then among
        # features whose gain is at least average, the highest gain ratio
        parent = _entropy2(tot_pos, n)
        child = (ln * _entropy2(lp, ln) + rn * _entropy2(tot_pos - lp, rn)) / n
        gains = np.where(valid, parent - child, -np.inf)
        pos = np.argmax(gains, axis=0)
        cols = np.arange(features.size)
        best_gain = gains[pos, cols]
        ok = best_gain > 0
        if not ok.any():
            return None
        split_info = _entropy2(ln[pos, cols], n)
        ratio = np.where(ok, best_gain / np.where(split_info > 0, split_info, 1.0), -np.inf)
        mean_gain = best_gain[ok].mean()
        ratio = np.where(best_gain + 1e-12 >= mean_gain, ratio, -np.inf)
        j = int(np.argmax(ratio))
        return int(features[j]), float(thr[pos[j], j])

    def build(self, Z, ypos):
        root = self._new_node(ypos.sum(), ypos.size)
        stack = [(root, np.arange(Z.shape[0]))]
        while stack:
            node, idx = stack.pop()
            n = idx.size
            npos = self.npos[node]
            if npos == 0 or npos == n or n < self.min_samples:
                continue
            split = self._best_split(Z[idx], ypos[idx])
            if split is None:
                continue
            j, thr = split
            go_left = Z[idx, j] <= thr
            li, ri = idx[go_left], idx[~go_left]
            self.feature[node] = int(j)
            self.threshold[node] = float(thr)
            left = self._new_node(ypos[li].sum(), li.size)
            right = self._new_node(ypos[ri].sum(), ri.size)
            self.left[node], self.right[node] = left, right
            # right pushed first so the left subtree is expanded first
            stack.append((right, ri))
            stack.append((left, li))
        return TreeStructure(self.feature, self.threshold, self.left, self.right, self.npos, self.count)


class TreeStructure:
    """Flat array representation of a fitted tree."""

    def __init__(self, feature, threshold, left, right, npos, count):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=float)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.npos = np.asarray(npos, dtype=np.int64)
        self.count = np.asarray(count, dtype=np.int64)

    @property
    def n_nodes(self):
        return self.feature.size

    def depth(self):
        depth = np.zeros(self.n_nodes, dtype=int)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def leaves(self, Z):
        node = np.zeros(Z.shape[0], dtype=np.int64)
        active = self.feature[node] != LEAF
        while active.any():
            idx = np.flatnonzero(active)
            cur = node[idx]
            go_left = Z[idx, self.feature[cur]] <= self.threshold[cur]
            node[idx] = np.where(go_left, self.left[cur], self.right[cur])
            active = self.feature[node] != LEAF
        return node

    def leaf_scores(self, Z):
        """(positives - negatives) / count at the reached leaf, in [-1, 1]."""
        leaf = self.leaves(Z)
        return (2.0 * self.npos[leaf] - self.count[leaf]) / self.count[leaf]

    def to_dict(self):
        return {k: getattr(self, k).tolist() for k in ("feature", "threshold", "left", "right", "npos", "count")}

    @classmethod
    def from_dict(cls, d):
        return cls(d["feature"], d["threshold"], d["left"], d["right"], d["npos"], d["count"])


def grow_tree(Z, y, criterion="gain_ratio", min_samples=2, max_features=None, rng=None) -> TreeStructure:
    ypos = (np.asarray(y) == 1).astype(np.int64)
    return _Builder(criterion, min_samples, max_features, rng).build(np.asarray(Z, dtype=float), ypos)


@register
class DecisionTree(BinaryModel):
    """Unpruned gain-ratio tree on midpoint thresholds (a J48 stand-in)."""

    tag = "j48"

    def _fit(self, Z, y):
        self.tree_ = grow_tree(Z, y, "gain_ratio", self.config.tree_min_samples)
        self.diagnostics = {"nodes": self.tree_.n_nodes, "depth": self.tree_.depth(), "pruned": False}

    def _scores(self, Z):
        return self.tree_.leaf_scores(Z)

    def _params(self):
        return {"tree": self.tree_.to_dict()}

    def _load_params(self, p):
        self.tree_ = TreeStructure.from_dict(p["tree"])
