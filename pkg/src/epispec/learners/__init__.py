"""From-scratch binary learners behind one fit / predict / decision_scores interface.

Labels are -1 / +1.  Every model standardizes its inputs with statistics
taken from its own training data.
"""
from __future__ import annotations

from .base import BinaryModel, LearnerConfig, Standardizer, algorithms, learner_class, register
from .discriminant import LinearDiscriminant, QuadraticDiscriminant
from .forest import RandomForest
from .knn import NearestNeighbor
from .mlp import MultilayerPerceptron
from .tree import DecisionTree

DISPLAY_NAMES = {"1nn": "1NN", "bp-mlp": "BP-MLP", "lda": "LDA", "qda": "QDA", "j48": "J48", "rf": "RF"}
DEFAULT_ALGORITHMS = ("lda", "bp-mlp", "qda", "1nn", "rf", "j48")


def fit(algorithm: str, X, y, cfg: LearnerConfig = LearnerConfig()) -> BinaryModel:
    return learner_class(algorithm).fit(X, y, cfg)


def predict(model: BinaryModel, x):
    return model.predict(x)


def decision_scores(model: BinaryModel, x):
    return model.decision_function(x)


__all__ = [
    "BinaryModel", "LearnerConfig", "Standardizer", "algorithms", "learner_class", "register",
    "fit", "predict", "decision_scores", "DISPLAY_NAMES", "DEFAULT_ALGORITHMS",
    "NearestNeighbor", "LinearDiscriminant", "QuadraticDiscriminant", "DecisionTree",
    "RandomForest", "MultilayerPerceptron",
]
