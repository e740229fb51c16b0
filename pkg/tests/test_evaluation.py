import numpy as np
import pytest

from epispec.errors import InvalidKError, LengthMismatchError, UndefinedMetricError, UnknownLabelError
from epispec.evaluation import (ConfusionMatrix, CvReport, ccr, confusion_matrix, cross_validate,
                                fold_seed, mean_and_sd, pv, read_fold_csv, stratified_folds,
                                write_fold_csv)
from epispec.ingest import BINARY_NAMES, MULTICLASS_NAMES
from epispec.learners import BinaryModel, LearnerConfig
from epispec.learners.base import _REGISTRY, register

FAST = LearnerConfig(rf_trees=10, mlp_epochs=60)


@pytest.fixture
def constant_learner():
    @register
    class AlwaysAbnormal(BinaryModel):
        tag = "always+"

        def _fit(self, Z, y):
            pass

        def _scores(self, Z):
            return np.ones(Z.shape[0])

    yield "always+"
    _REGISTRY.pop("always+")


def bonn_labels():
    return np.repeat(np.array(MULTICLASS_NAMES, dtype=object), 100)


def check_folds(fa, labels):
    allidx = np.concatenate(fa.folds)
    assert np.array_equal(np.sort(allidx), np.arange(len(labels)))
    for cls in set(labels.tolist()):
        counts = [int(np.sum(labels[f] == cls)) for f in fa.folds]
        assert max(counts) - min(counts) <= 1


def test_folds_bonn_counts():
    y = bonn_labels()
    fa = stratified_folds(y, 10, seed=0)
    for f in fa.folds:
        assert {c: int(np.sum(y[f] == c)) for c in MULTICLASS_NAMES} == dict.fromkeys(MULTICLASS_NAMES, 10)
    check_folds(fa, y)


def test_folds_k2_exact():
    y = np.array(["+", "+", "-", "-"], dtype=object)
    fa = stratified_folds(y, 2, seed=5)
    for f in fa.folds:
        assert sorted(y[f].tolist()) == ["+", "-"]


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("k", [2, 3, 7, 10])
def test_fold_invariants_random(seed, k):
    rng = np.random.default_rng(seed)
    y = rng.choice(np.array(["a", "b", "c"], dtype=object), size=61, p=[0.5, 0.3, 0.2])
    fa = stratified_folds(y, k, seed)
    check_folds(fa, y)
    sizes = [f.size for f in fa.folds]
    assert max(sizes) - min(sizes) <= 1


def test_folds_deterministic_and_seeded():
    y = bonn_labels()
    a, b, c = stratified_folds(y, 10, 3), stratified_folds(y, 10, 3), stratified_folds(y, 10, 4)
    assert all(np.array_equal(x, z) for x, z in zip(a.folds, b.folds))
    assert not all(np.array_equal(x, z) for x, z in zip(a.folds, c.folds))


@pytest.mark.parametrize("k", [1, 0, 401, 2.5])
def test_invalid_k(k):
    with pytest.raises(InvalidKError):
        stratified_folds(bonn_labels(), k)


def test_small_class_warns():
    y = np.array(["a"] * 10 + ["b"] * 2, dtype=object)
    with pytest.warns(RuntimeWarning, match="'b'"):
        stratified_folds(y, 3)


def test_train_test_partition():
    fa = stratified_folds(bonn_labels(), 10)
    train, test = fa.train_test(3)
    assert train.size == 360 and test.size == 40
    assert not set(train.tolist()) & set(test.tolist())


def test_me_sd_hand_values():
    me, sd = mean_and_sd([0] * 9 + [12.5])
    assert me == pytest.approx(1.25)
    assert sd == pytest.approx(12.5 / np.sqrt(10), abs=1e-12)
    assert sd == pytest.approx(3.95, abs=0.005)
    me, sd = mean_and_sd([2.5, 5.0, 0.0, 2.5])
    assert me == 2.5 and sd == pytest.approx(np.sqrt(12.5 / 3), rel=1e-12)
    assert mean_and_sd([4.0]) == (4.0, 0.0)


def test_confusion_orientation():
    names = MULTICLASS_NAMES
    cm = confusion_matrix(["Ictal"], ["Normal1"], names)
    assert cm.counts[names.index("Ictal"), names.index("Normal1")] == 1
    assert cm.total == 1 and np.count_nonzero(cm.counts) == 1
    truth = list(np.random.default_rng(0).choice(names, 10))
    diag = confusion_matrix(truth, truth, names)
    assert np.trace(diag.counts) == 10 and diag.total == 10
    assert np.count_nonzero(diag.counts - np.diag(np.diag(diag.counts))) == 0


def test_binary_all_abnormal():
    truth = ["Abnormal"] * 5 + ["Normal"] * 5
    cm = confusion_matrix(["Abnormal"] * 10, truth, BINARY_NAMES)
    assert (cm.tp, cm.fp, cm.fn, cm.tn) == (5, 5, 0, 0)


def binary_cm(tp, fp, fn, tn):
    return ConfusionMatrix([[tp, fp], [fn, tn]], BINARY_NAMES)


def test_ccr_pv_arithmetic():
    cm = binary_cm(98, 2, 0, 100)
    assert pv(cm, "Abnormal") == pytest.approx(98.0)
    cm = binary_cm(99, 0, 1, 100)
    assert ccr(cm, "Abnormal") == pytest.approx(99.0)
    cm = binary_cm(90, 4, 10, 96)
    sens, spec = 90 / 100, 96 / 100
    assert ccr(cm, "Abnormal") == pytest.approx(100 * sens)
    assert ccr(cm, "Normal") == pytest.approx(100 * spec)
    assert pv(cm, "Abnormal") == pytest.approx(100 * 90 / 94)
    assert pv(cm, "Normal") == pytest.approx(100 * 96 / 106)
    diag = ConfusionMatrix(np.diag([3, 4, 5, 6]), MULTICLASS_NAMES)
    for c in MULTICLASS_NAMES:
        assert ccr(diag, c) == 100.0 and pv(diag, c) == 100.0


def test_undefined_metric():
    cm = binary_cm(5, 0, 0, 0)
    with pytest.raises(UndefinedMetricError):
        ccr(cm, "Normal")
    with pytest.raises(UndefinedMetricError):
        pv(cm, "Normal")
    rep = CvReport("binary", "x", [0.0], cm)
    assert rep.class_metrics()["Normal"] == {"ccr": None, "pv": None}


def test_confusion_errors():
    with pytest.raises(LengthMismatchError):
        confusion_matrix(["a"], ["a", "b"], ["a", "b"])
    with pytest.raises(UnknownLabelError):
        confusion_matrix(["a"], ["z"], ["a", "b"])
    with pytest.raises(UnknownLabelError):
        ccr(binary_cm(1, 1, 1, 1), "Sideways")


def recount(pred, truth, names):
    m = np.zeros((len(names), len(names)), dtype=int)
    for p, t in zip(pred, truth):
        for i, a in enumerate(names):
            for j, b in enumerate(names):
                if p == a and t == b:
                    m[i, j] += 1
    return m


def test_multiclass_cm_and_metrics_match_recount():
    rng = np.random.default_rng(1)
    names = MULTICLASS_NAMES
    truth = list(rng.choice(names, 200))
    pred = [t if rng.random() < 0.7 else rng.choice(names) for t in truth]
    cm = confusion_matrix(pred, truth, names)
    ref = recount(pred, truth, names)
    assert np.array_equal(cm.counts, ref)
    for i, c in enumerate(names):
        correct = sum(p == t == c for p, t in zip(pred, truth))
        assert ccr(cm, c) == pytest.approx(100 * correct / sum(t == c for t in truth))
        assert pv(cm, c) == pytest.approx(100 * correct / sum(p == c for p in pred))


def separable(n_per=40, seed=0):
    rng = np.random.default_rng(seed)
    names = MULTICLASS_NAMES
    X = np.vstack([rng.standard_normal((n_per, 3)) * 0.3 + 10 * np.eye(4, 3)[i] for i in range(4)])
    y = np.repeat(np.array(names, dtype=object), n_per)
    return X, y


@pytest.mark.parametrize("alg", ["lda", "qda", "1nn", "j48", "rf", "bp-mlp"])
def test_separable_me_zero(alg):
    cfg = LearnerConfig(rf_trees=50, mlp_epochs=60)
    X, y = separable()
    two = np.isin(y, MULTICLASS_NAMES[:2])
    yb = np.where(y[two] == MULTICLASS_NAMES[0], 1, -1)
    rep = cross_validate("binary", alg, X[two], yb, k=5, seed=1, cfg=cfg)
    assert rep.me == 0.0 and rep.sd == 0.0
    rep = cross_validate("multiclass", alg, X, y, k=5, seed=1, cfg=cfg)
    assert rep.me == 0.0 and rep.sd == 0.0
    assert rep.confusion.total == 160


def test_constant_learner_half_error(constant_learner):
    X, y = separable()
    yb = np.repeat([1, -1], 80)
    rep = cross_validate("binary", constant_learner, X, yb, k=10)
    assert rep.me == pytest.approx(50.0)
    assert (rep.confusion.tp, rep.confusion.fp) == (80, 80)


def test_pooled_cm_consistency():
    X, y = separable()
    X = X + np.random.default_rng(3).standard_normal(X.shape) * 3
    rep = cross_validate("multiclass", "lda", X, y, k=10, seed=2)
    assert rep.confusion.total == len(y)
    assert rep.fold_sizes == [16] * 10
    # equal fold sizes: pooled accuracy is exactly 1 - ME
    assert 100 * rep.confusion.accuracy == pytest.approx(100 - rep.me)
    assert rep.me > 0


def test_fold_seeds_fed_to_learners():
    assert fold_seed(0, 0) != fold_seed(0, 1)
    assert fold_seed(5, 2) == fold_seed(5, 2)


def test_parallel_folds_identical():
    X, y = separable()
    X = X + np.random.default_rng(4).standard_normal(X.shape) * 4
    a = cross_validate("multiclass", "rf", X, y, k=4, seed=9, cfg=FAST)
    b = cross_validate("multiclass", "rf", X, y, k=4, seed=9, cfg=FAST, jobs=2)
    assert a.to_json() == b.to_json()


def test_report_round_trip_and_echo(tmp_path):
    X, y = separable()
    yb = np.where(np.isin(y, MULTICLASS_NAMES[2:]), 1, -1)
    rep = cross_validate("binary", "1nn", X, yb, k=4, seed=3, config_echo={"note": "x"})
    d = rep.to_dict()
    assert d["config"]["pipeline"] == {"note": "x"}
    assert d["config"]["learner"]["seed"] == 0 and d["config"]["k"] == 4
    assert d["confusion_matrix"]["orientation"] == "rows=predicted, columns=true"
    back = CvReport.from_dict(d)
    assert back.to_json() == rep.to_json()


def test_fold_csv_round_trip(tmp_path):
    reps = [CvReport("binary", a, [float(i) * j for i in range(10)], binary_cm(1, 0, 0, 1))
            for j, a in enumerate(["lda", "rf", "1nn"], start=1)]
    p = tmp_path / "folds.csv"
    write_fold_csv(reps, p)
    assert p.read_text().splitlines()[0] == "fold,algorithm,error_pct"
    names, m = read_fold_csv(p)
    assert names == ["lda", "rf", "1nn"]
    assert m.shape == (10, 3)
    assert np.array_equal(m[:, 1], np.arange(10) * 2.0)


def test_fold_csv_mismatch(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("fold,algorithm,error_pct\n1,a,0\n2,a,1\n1,b,0\n")
    with pytest.raises(ValueError, match="fold counts"):
        read_fold_csv(p)
    p.write_text("x,y\n1,2\n")
    with pytest.raises(ValueError, match="columns"):
        read_fold_csv(p)
