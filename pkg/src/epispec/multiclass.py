"""Code-matrix decomposition of a multiclass task into binary subproblems.

Only the all-against-all (AAA) matrix is generated here, but fitting and
decoding accept any {-1, 0, +1} matrix that passes :meth:`CodeMatrix.check`.
"""
from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from . import learners
from .errors import (DimensionMismatchError, InvalidParametersError, SingularCovarianceError,
                     TooFewClassesError, UnknownLabelError)
from .learners import BinaryModel, LearnerConfig


@dataclass(frozen=True, eq=False)
class CodeMatrix:
    entries: np.ndarray
    class_names: tuple

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=int)
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "class_names", tuple(self.class_names))
        self.check()

    def check(self):
        e = self.entries
        if e.ndim != 2 or e.shape[0] != len(self.class_names):
            raise InvalidParametersError("code matrix needs one row per class")
        if not np.isin(e, (-1, 0, 1)).all():
            raise InvalidParametersError("code matrix entries must be -1, 0 or +1")
        if not ((e == 1).any(axis=0).all() and (e == -1).any(axis=0).all()):
            raise InvalidParametersError("every column needs a positive and a negative class")
        if len({tuple(col) for col in e.T}) != e.shape[1]:
            raise InvalidParametersError("code matrix has duplicate columns")

    @property
    def shape(self):
        return self.entries.shape

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["class", *[f"c{j}" for j in range(self.shape[1])]])
            for name, row in zip(self.class_names, self.entries):
                w.writerow([name, *row.tolist()])


def aaa_code_matrix(class_names) -> CodeMatrix:
    """One column per unordered pair (i < j), lexicographic; +1 on i, -1 on j."""
    names = list(class_names)
    r = len(names)
    if r < 2:
        raise TooFewClassesError(f"need at least two classes, got {r}")
    pairs = list(itertools.combinations(range(r), 2))
    m = np.zeros((r, len(pairs)), dtype=int)
    for c, (i, j) in enumerate(pairs):
        m[i, c] = 1
        m[j, c] = -1
    return CodeMatrix(m, names)


def decode(cm: CodeMatrix, outputs, masked: bool = True):
    """Nearest code-matrix row to a vector of binary outputs.

    Returns ``(row index, distances, tie)``.  With ``masked`` the Euclidean
    distance runs only over the row's nonzero entries.  Ties go to the
    lowest row index.
    """
    o = np.asarray(outputs, dtype=float)
    e = cm.entries
    if o.shape[-1] != e.shape[1]:
        raise DimensionMismatchError(f"expected {e.shape[1]} outputs, got {o.shape[-1]}")
    diff = (o[..., None, :] - e) ** 2
    if masked:
        diff = diff * (e != 0)
    dist = np.sqrt(diff.sum(axis=-1))
    best = np.argmin(dist, axis=-1)
    dmin = np.take_along_axis(dist, best[..., None], axis=-1)
    tie = (np.isclose(dist, dmin, rtol=0, atol=1e-12).sum(axis=-1) > 1)
    return best, dist, tie


@dataclass(eq=False)
class MulticlassModel:
    code_matrix: CodeMatrix
    models: list
    algorithm: str
    masked: bool = True
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.models) != self.code_matrix.shape[1]:
            raise InvalidParametersError("need one binary model per code-matrix column")

    @property
    def class_names(self):
        return self.code_matrix.class_names

    def outputs(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.stack([np.atleast_1d(m.predict(X)) for m in self.models], axis=1)

    def predict_detailed(self, X):
        """Class names, decoded row indices and tie flags for the rows of `X`."""
        best, _, tie = decode(self.code_matrix, self.outputs(X), self.masked)
        best = np.atleast_1d(best)
        return [self.class_names[i] for i in best], best, np.atleast_1d(tie)

    def predict(self, X):
        """Class names for the rows of `X` (a single name for a 1-D `x`)."""
        names, _, _ = self.predict_detailed(X)
        return names[0] if np.asarray(X).ndim == 1 else names

    def to_dict(self) -> dict:
        return {
            "format": "epispec.multiclass-model",
            "version": 1,
            "algorithm": self.algorithm,
            "masked_decoding": self.masked,
            "class_names": list(self.class_names),
            "code_matrix": self.code_matrix.entries.tolist(),
            "models": [m.to_dict() for m in self.models],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MulticlassModel":
        if doc.get("format") != "epispec.multiclass-model":
            raise ValueError("not a serialized multiclass model")
        cm = CodeMatrix(doc["code_matrix"], doc["class_names"])
        models = [BinaryModel.from_dict(m) for m in doc["models"]]
        return cls(cm, models, doc["algorithm"], doc.get("masked_decoding", True))


def column_config(cfg: LearnerConfig, column: int) -> LearnerConfig:
    """Learner config of column `column`: master seed plus the column index.

    Column 0 keeps the master seed, so a two-class matrix reproduces the
    plain binary fit exactly.
    """
    return replace(cfg, seed=int(cfg.seed) + column)


def fit_ecoc(cm: CodeMatrix, algorithm: str, X, y, cfg: LearnerConfig = LearnerConfig(),
             masked: bool = True) -> MulticlassModel:
    """Train one binary learner per column on the rows of its +1/-1 classes."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=object)
    names = list(cm.class_names)
    unknown = set(y.tolist()) - set(names)
    if unknown:
        raise UnknownLabelError(f"labels not in the code matrix: {sorted(map(str, unknown))}")
    present = set(y.tolist())
    index = np.array([names.index(v) for v in y], dtype=int)
    models, sizes = [], []
    for c in range(cm.shape[1]):
        col = cm.entries[:, c]
        for r in np.flatnonzero(col):
            if names[r] not in present:
                raise InvalidParametersError(f"column {c}: class {names[r]!r} has no training examples")
        code = col[index]
        rows = code != 0
        try:
            model = learners.fit(algorithm, X[rows], code[rows], column_config(cfg, c))
        except (SingularCovarianceError, InvalidParametersError, DimensionMismatchError) as exc:
            raise type(exc)(f"column {c}: {exc}") from exc
        models.append(model)
        sizes.append(int(rows.sum()))
    return MulticlassModel(cm, models, algorithm, masked, {"training_sizes": sizes})


def predict_ecoc(model: MulticlassModel, x):
    return model.predict(x)
