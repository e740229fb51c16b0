from __future__ import annotations

import numpy as np

from .base import BinaryModel, register


def _sq_distances(Z, train):
    return ((Z[:, None, :] - train[None, :, :]) ** 2).sum(axis=2)


@register
class NearestNeighbor(BinaryModel):
    """1-nearest-neighbour under Euclidean distance on standardized features.

    The score is ``d(nearest -1) - d(nearest +1)``.  When both classes are
    equally near, the lower training row wins.
    """

    tag = "1nn"

    def _fit(self, Z, y):
        self.train_ = Z.copy()
        self.labels_ = y.copy()

    def _scores(self, Z):
        d = np.sqrt(_sq_distances(Z, self.train_))
        pos = self.labels_ == 1
        return d[:, ~pos].min(axis=1) - d[:, pos].min(axis=1)

    def _tie_labels(self, Z):
        d = _sq_distances(Z, self.train_)
        return self.labels_[np.argmin(d, axis=1)]

    def _params(self):
        return {"train": self.train_.tolist(), "labels": self.labels_.tolist()}

    def _load_params(self, p):
        self.train_ = np.asarray(p["train"], dtype=float).reshape(-1, self.n_features)
        self.labels_ = np.asarray(p["labels"], dtype=int)
