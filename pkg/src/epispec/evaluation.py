"""Stratified k-fold cross-validation and confusion-matrix metrics."""
from __future__ import annotations

import csv
import json
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import learners
from .errors import InvalidKError, LengthMismatchError, UndefinedMetricError, UnknownLabelError
from .ingest import BINARY_NAMES, MULTICLASS_NAMES
from .learners import LearnerConfig
from .multiclass import aaa_code_matrix, fit_ecoc

TASKS = ("binary", "multiclass")


@dataclass(frozen=True, eq=False)
class FoldAssignment:
    folds: tuple
    seed: int

    @property
    def k(self) -> int:
        return len(self.folds)

    def train_test(self, i: int):
        test = self.folds[i]
        train = np.sort(np.concatenate([f for j, f in enumerate(self.folds) if j != i]))
        return train, test


def stratified_folds(labels, k: int = 10, seed: int = 0) -> FoldAssignment:
    """Seeded per-class shuffle followed by round-robin dealing.

    Classes are dealt in order of first appearance and the dealing position
    carries over from one class to the next, so fold sizes also differ by
    at most one.
    """
    labels = np.asarray(labels, dtype=object)
    n = labels.size
    if int(k) != k or k < 2 or k > n:
        raise InvalidKError(f"k must be an integer in [2, {n}], got {k}")
    k = int(k)
    rng = np.random.default_rng([int(seed), 0x666F6C64])
    _, first = np.unique(labels.astype(str), return_index=True)
    classes = [labels[i] for i in sorted(first)]
    buckets = [[] for _ in range(k)]
    pos = 0
    for cls in classes:
        members = np.flatnonzero(labels == cls)
        if members.size < k:
            warnings.warn(f"class {cls!r} has {members.size} < k={k} members; folds cannot all contain it",
                          RuntimeWarning, stacklevel=2)
        for idx in rng.permutation(members):
            buckets[pos % k].append(int(idx))
            pos += 1
    return FoldAssignment(tuple(np.array(sorted(b), dtype=int) for b in buckets), int(seed))


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """``counts[i, j]`` = examples of true class j predicted as class i."""

    counts: np.ndarray
    class_names: tuple

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    def __add__(self, other):
        if self.class_names != other.class_names:
            raise ValueError("confusion matrices over different classes")
        return ConfusionMatrix(self.counts + other.counts, self.class_names)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts) / self.total) if self.total else float("nan")

    def index(self, cls) -> int:
        if isinstance(cls, (int, np.integer)):
            return int(cls)
        try:
            return self.class_names.index(cls)
        except ValueError:
            raise UnknownLabelError(f"unknown class {cls!r}") from None

    # binary shorthands; the first class is the positive one
    @property
    def tp(self):
        return int(self.counts[0, 0])

    @property
    def fp(self):
        return int(self.counts[0, 1])

    @property
    def fn(self):
        return int(self.counts[1, 0])

    @property
    def tn(self):
        return int(self.counts[1, 1])

    def to_dict(self) -> dict:
        return {"class_names": list(self.class_names), "counts": self.counts.tolist(),
                "orientation": "rows=predicted, columns=true"}


def confusion_matrix(preds, truth, class_names) -> ConfusionMatrix:
    preds, truth = list(preds), list(truth)
    if len(preds) != len(truth):
        raise LengthMismatchError(f"{len(preds)} predictions for {len(truth)} labels")
    names = list(class_names)
    pos = {name: i for i, name in enumerate(names)}
    counts = np.zeros((len(names), len(names)), dtype=np.int64)
    for p, t in zip(preds, truth):
        if p not in pos or t not in pos:
            raise UnknownLabelError(f"label {p if p not in pos else t!r} not among {names}")
        counts[pos[p], pos[t]] += 1
    return ConfusionMatrix(counts, names)


def ccr(cm: ConfusionMatrix, cls) -> float:
    """Percentage of class `cls` examples predicted correctly (true-class denominator)."""
    i = cm.index(cls)
    denom = cm.counts[:, i].sum()
    if denom == 0:
        raise UndefinedMetricError(f"no examples of class {cm.class_names[i]!r}")
    return 100.0 * cm.counts[i, i] / denom


def pv(cm: ConfusionMatrix, cls) -> float:
    """Percentage of predictions of `cls` that are correct (predicted-class denominator)."""
    i = cm.index(cls)
    denom = cm.counts[i, :].sum()
    if denom == 0:
        raise UndefinedMetricError(f"class {cm.class_names[i]!r} was never predicted")
    return 100.0 * cm.counts[i, i] / denom


def _metric_or_none(fn, cm, cls):
    try:
        return fn(cm, cls)
    except UndefinedMetricError:
        return None


def mean_and_sd(errors):
    """Mean and sample (n-1) standard deviation of per-fold error rates."""
    e = np.asarray(errors, dtype=float)
    sd = float(np.std(e, ddof=1)) if e.size > 1 else 0.0
    return float(np.mean(e)), sd


@dataclass(eq=False)
class CvReport:
    task: str
    algorithm: str
    fold_errors: list
    confusion: ConfusionMatrix
    config: dict = field(default_factory=dict)
    fold_sizes: list = field(default_factory=list)
    decoding_ties: int = 0

    @property
    def me(self) -> float:
        return mean_and_sd(self.fold_errors)[0]

    @property
    def sd(self) -> float:
        return mean_and_sd(self.fold_errors)[1]

    def class_metrics(self) -> dict:
        return {name: {"ccr": _metric_or_none(ccr, self.confusion, name),
                       "pv": _metric_or_none(pv, self.confusion, name)}
                for name in self.confusion.class_names}

    def to_dict(self) -> dict:
        return {
            "format": "epispec.cv-report",
            "version": 1,
            "task": self.task,
            "algorithm": self.algorithm,
            "k": len(self.fold_errors),
            "fold_errors_pct": list(self.fold_errors),
            "fold_sizes": list(self.fold_sizes),
            "me_pct": self.me,
            "sd_pct": self.sd,
            "accuracy_pct": 100.0 * self.confusion.accuracy,
            "confusion_matrix": self.confusion.to_dict(),
            "class_metrics": self.class_metrics(),
            "decoding_ties": self.decoding_ties,
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CvReport":
        cmd = d["confusion_matrix"]
        return cls(d["task"], d["algorithm"], list(d["fold_errors_pct"]),
                   ConfusionMatrix(cmd["counts"], cmd["class_names"]), d.get("config", {}),
                   list(d.get("fold_sizes", [])), int(d.get("decoding_ties", 0)))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def fold_seed(seed: int, fold: int) -> int:
    return int(np.random.SeedSequence([int(seed), fold]).generate_state(1)[0])


def _run_fold(task, algorithm, X, y, train, test, cfg, masked, class_names):
    if task == "binary":
        model = learners.fit(algorithm, X[train], y[train], cfg)
        pred = np.atleast_1d(model.predict(X[test]))
        to_name = {1: class_names[0], -1: class_names[1]}
        return [to_name[int(p)] for p in pred], [to_name[int(t)] for t in y[test]], 0
    cm = aaa_code_matrix(class_names)
    model = fit_ecoc(cm, algorithm, X[train], y[train], cfg, masked)
    names, _, tie = model.predict_detailed(X[test])
    return names, list(y[test]), int(np.sum(tie))


def _run_fold_args(args):
    return _run_fold(*args)


def cross_validate(task: str, algorithm: str, X, y, k: int = 10, seed: int = 0,
                   cfg: LearnerConfig = LearnerConfig(), class_names=None, masked: bool = True,
                   folds: FoldAssignment | None = None, config_echo: dict | None = None,
                   jobs: int = 1) -> CvReport:
    """Stratified k-fold CV of one learner.

    For ``task="binary"`` `y` holds -1/+1 and `class_names` is (positive,
    negative), by default ``("Abnormal", "Normal")``.  For
    ``task="multiclass"`` `y` holds class names and the AAA code matrix over
    `class_names` (default: the four Bonn classes) is used.  Every learner
    standardizes on its own training fold.  Fold ``i`` trains with the seed
    ``fold_seed(seed, i)``.
    """
    if task not in TASKS:
        raise ValueError(f"task must be one of {TASKS}")
    X = np.asarray(X, dtype=float)
    if task == "binary":
        y = np.asarray(y, dtype=int)
        class_names = tuple(class_names or BINARY_NAMES)
    else:
        y = np.asarray(y, dtype=object)
        if class_names is None:
            present = set(y.tolist())
            class_names = tuple(n for n in MULTICLASS_NAMES if n in present) \
                if present <= set(MULTICLASS_NAMES) else tuple(sorted(present))
        class_names = tuple(class_names)
    if folds is None:
        folds = stratified_folds(y, k, seed)
    jobs_args = []
    for i in range(folds.k):
        train, test = folds.train_test(i)
        fcfg = replace(cfg, seed=fold_seed(seed, i))
        jobs_args.append((task, algorithm, X, y, train, test, fcfg, masked, class_names))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_fold_args, jobs_args))
    else:
        results = [_run_fold(*a) for a in jobs_args]

    errors, sizes = [], []
    pooled = ConfusionMatrix(np.zeros((len(class_names),) * 2, dtype=np.int64), class_names)
    ties = 0
    for pred, truth, t in results:
        wrong = sum(p != q for p, q in zip(pred, truth))
        errors.append(100.0 * wrong / len(truth))
        sizes.append(len(truth))
        pooled = pooled + confusion_matrix(pred, truth, class_names)
        ties += t
    echo = {"k": folds.k, "seed": int(seed), "masked_decoding": masked, "learner": cfg.to_dict()}
    if config_echo:
        echo["pipeline"] = config_echo
    return CvReport(task, algorithm, errors, pooled, echo, sizes, ties)


def write_fold_csv(reports, path):
    """Per-fold errors as ``fold,algorithm,error_pct`` rows (folds numbered from 1)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["fold", "algorithm", "error_pct"])
        for rep in reports:
            for i, e in enumerate(rep.fold_errors, start=1):
                w.writerow([i, rep.algorithm, repr(float(e))])


def read_fold_csv(path):
    """Inverse of :func:`write_fold_csv`: ``(algorithm names, folds x algorithms matrix)``.

    Raises ValueError when algorithms have different fold counts.
    """
    table: dict[str, dict[int, float]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"fold", "algorithm", "error_pct"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected columns fold,algorithm,error_pct")
        for row in reader:
            table.setdefault(row["algorithm"], {})[int(row["fold"])] = float(row["error_pct"])
    names = list(table)
    sizes = {len(v) for v in table.values()}
    if len(sizes) > 1:
        raise ValueError(f"{path}: algorithms have different fold counts {sorted(sizes)}")
    folds = sorted(next(iter(table.values()))) if table else []
    for name in names:
        if sorted(table[name]) != folds:
            raise ValueError(f"{path}: algorithm {name!r} covers different folds")
    matrix = np.array([[table[a][f] for a in names] for f in folds], dtype=float)
    return names, matrix
