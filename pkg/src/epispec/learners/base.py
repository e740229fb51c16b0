from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import DimensionMismatchError, InvalidParametersError

FORMAT_TAG = "epispec.binary-model"
FORMAT_VERSION = 1

_REGISTRY: dict[str, type] = {}


def register(cls):
    """Class decorator adding a learner to the algorithm registry.

    New binary learners (an SVM, an RBF network...) plug in by subclassing
    :class:`BinaryModel`, defining ``tag``, ``_fit``, ``_scores`` and the
    parameter (de)serialization hooks.
    """
    _REGISTRY[cls.tag] = cls
    return cls


def learner_class(tag: str):
    try:
        return _REGISTRY[tag.lower()]
    except KeyError:
        raise InvalidParametersError(f"unknown algorithm {tag!r}; known: {sorted(_REGISTRY)}") from None


def algorithms() -> list[str]:
    return list(_REGISTRY)


@dataclass(frozen=True)
class LearnerConfig:
    """Hyperparameters of every learner plus the master seed."""

    seed: int = 0
    ridge: float = 1e-6
    tree_min_samples: int = 2
    rf_trees: int = 100
    rf_max_features: int | None = None
    mlp_hidden: int = 20
    mlp_learning_rate: float = 0.3
    mlp_momentum: float = 0.2
    mlp_epochs: int = 500
    mlp_init_range: float = 0.5
    mlp_shuffle: bool = True

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "LearnerConfig":
        return cls(**d)


class Standardizer:
    """Per-column z-scoring with statistics frozen at fit time."""

    def __init__(self, mean, scale):
        self.mean = np.asarray(mean, dtype=float)
        self.scale = np.asarray(scale, dtype=float)

    @classmethod
    def fit(cls, X):
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        # constant columns pass through centred
        scale = np.where(std > 0, std, 1.0)
        return cls(mean, scale)

    def transform(self, X):
        return (X - self.mean) / self.scale


def check_training_set(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2:
        raise DimensionMismatchError(f"X must be 2-D, got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise DimensionMismatchError(f"y has shape {y.shape}, expected ({X.shape[0]},)")
    if X.shape[0] < 2:
        raise InvalidParametersError("need at least two training examples")
    if not np.all(np.isfinite(X)):
        raise InvalidParametersError("training data contain non-finite values")
    y = y.astype(int)
    if not set(np.unique(y)) <= {-1, 1}:
        raise InvalidParametersError("binary labels must be -1/+1")
    if len(np.unique(y)) < 2:
        raise InvalidParametersError("both classes must be present in the training set")
    return X, y


class BinaryModel:
    """Trained binary classifier; scores > 0 mean the +1 class.

    Subclasses see standardized inputs only.  A score of exactly zero is a
    tie and maps to +1 unless the subclass overrides ``_tie_labels``.
    """

    tag = "base"

    def __init__(self, standardizer: Standardizer, config: LearnerConfig):
        self.standardizer = standardizer
        self.config = config
        self.diagnostics: dict = {}

    @property
    def n_features(self) -> int:
        return self.standardizer.mean.size

    # ---- training
    @classmethod
    def fit(cls, X, y, config: LearnerConfig = LearnerConfig()):
        X, y = check_training_set(X, y)
        std = Standardizer.fit(X)
        model = cls(std, config)
        model._fit(std.transform(X), y)
        return model

    def _fit(self, Z, y):
        raise NotImplementedError

    # ---- inference
    def _as_matrix(self, X):
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.n_features:
            raise DimensionMismatchError(f"expected {self.n_features} features, got {X.shape[1]}")
        return X, single

    def decision_function(self, X):
        X, single = self._as_matrix(X)
        s = self._scores(self.standardizer.transform(X))
        return float(s[0]) if single else s

    def predict(self, X):
        X, single = self._as_matrix(X)
        Z = self.standardizer.transform(X)
        s = self._scores(Z)
        labels = np.where(s > 0, 1, -1)
        tie = s == 0
        if tie.any():
            labels[tie] = self._tie_labels(Z[tie])
        return int(labels[0]) if single else labels

    def _scores(self, Z):
        raise NotImplementedError

    def _tie_labels(self, Z):
        return np.ones(Z.shape[0], dtype=int)

    # ---- persistence
    def _params(self) -> dict:
        raise NotImplementedError

    def _load_params(self, params: dict):
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_TAG,
            "version": FORMAT_VERSION,
            "algorithm": self.tag,
            "hyperparameters": self.config.to_dict(),
            "standardization": {"mean": self.standardizer.mean.tolist(),
                                "scale": self.standardizer.scale.tolist()},
            "parameters": self._params(),
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_dict(cls, doc: dict):
        if doc.get("format") != FORMAT_TAG:
            raise ValueError("not a serialized binary model")
        if doc.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model version {doc.get('version')}")
        klass = learner_class(doc["algorithm"])
        st = doc["standardization"]
        model = klass(Standardizer(st["mean"], st["scale"]), LearnerConfig.from_dict(doc["hyperparameters"]))
        model._load_params(doc["parameters"])
        model.diagnostics = dict(doc.get("diagnostics", {}))
        return model

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @staticmethod
    def from_json(text: str):
        return BinaryModel.from_dict(json.loads(text))
