from __future__ import annotations

import numpy as np

from .base import BinaryModel, register
from .tree import TreeStructure, grow_tree


def tree_rng(master_seed: int, index: int) -> np.random.Generator:
    """Generator of tree `index`; depends only on (master seed, index)."""
    return np.random.default_rng([int(master_seed), int(index)])


@register
class RandomForest(BinaryModel):
    """Bagged Gini trees with ``floor(sqrt(d))`` candidate features per split.

    The score is the vote margin ``(votes+ - votes-) / n_trees``; an even
    split of votes is a tie and predicts +1.
    """

    tag = "rf"

    def _fit(self, Z, y):
        n, d = Z.shape
        m = self.config.rf_max_features or max(1, int(np.floor(np.sqrt(d))))
        self.trees_ = []
        for t in range(self.config.rf_trees):
            rng = tree_rng(self.config.seed, t)
            boot = rng.integers(0, n, size=n)
            self.trees_.append(grow_tree(Z[boot], y[boot], "gini", self.config.tree_min_samples, m, rng))
        self.diagnostics = {"trees": len(self.trees_), "max_features": m}

    def votes(self, X):
        """Signed per-tree votes for raw inputs, shape (n_samples, n_trees)."""
        X, _ = self._as_matrix(X)
        Z = self.standardizer.transform(X)
        return self._votes(Z)

    def _votes(self, Z):
        return np.stack([np.where(t.leaf_scores(Z) >= 0, 1, -1) for t in self.trees_], axis=1)

    def _scores(self, Z):
        return self._votes(Z).mean(axis=1)

    def _params(self):
        return {"trees": [t.to_dict() for t in self.trees_]}

    def _load_params(self, p):
        self.trees_ = [TreeStructure.from_dict(t) for t in p["trees"]]
