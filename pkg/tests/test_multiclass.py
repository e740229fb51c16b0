import csv
import itertools

import numpy as np
import pytest

from epispec import learners
from epispec.errors import InvalidParametersError, TooFewClassesError, UnknownLabelError
from epispec.learners import LearnerConfig
from epispec.multiclass import (CodeMatrix, MulticlassModel, aaa_code_matrix, decode, fit_ecoc,
                                predict_ecoc)

NAMES = ("Normal1", "Normal2", "Interictal", "Ictal")


def blobs(counts=(30, 30, 30, 30), seed=0, sep=5.0):
    rng = np.random.default_rng(seed)
    X, y = [], []
    for i, n in enumerate(counts):
        centre = np.zeros(3)
        centre[i % 3] = sep * (1 + i // 3)
        X.append(rng.standard_normal((n, 3)) + centre)
        y += [NAMES[i]] * n
    return np.vstack(X), np.array(y, dtype=object)


@pytest.mark.parametrize("r", [2, 3, 4, 5])
def test_aaa_shape(r):
    cm = aaa_code_matrix([f"c{i}" for i in range(r)])
    assert cm.shape == (r, r * (r - 1) // 2)
    e = cm.entries
    assert np.all((e == 1).sum(axis=0) == 1) and np.all((e == -1).sum(axis=0) == 1)
    pairs = [(int(np.flatnonzero(c == 1)[0]), int(np.flatnonzero(c == -1)[0])) for c in e.T]
    assert pairs == list(itertools.combinations(range(r), 2))


def test_aaa_small_cases():
    assert aaa_code_matrix(["a", "b"]).entries.tolist() == [[1], [-1]]
    with pytest.raises(TooFewClassesError):
        aaa_code_matrix(["a"])


def test_code_matrix_checks():
    with pytest.raises(InvalidParametersError):
        CodeMatrix([[1, 0], [0, 1]], ["a", "b"])
    with pytest.raises(InvalidParametersError):
        CodeMatrix([[1, 1], [-1, -1]], ["a", "b"])
    with pytest.raises(InvalidParametersError):
        CodeMatrix([[2], [-1]], ["a", "b"])
    with pytest.raises(InvalidParametersError):
        CodeMatrix([[1], [-1]], ["a"])


def pairwise_majority(o, r):
    wins = np.zeros(r, dtype=int)
    for c, (i, j) in enumerate(itertools.combinations(range(r), 2)):
        wins[i if o[c] > 0 else j] += 1
    top = np.flatnonzero(wins == wins.max())
    return int(top[0]) if top.size == 1 else None


def test_decoding_equals_majority_vote_exhaustive():
    cm = aaa_code_matrix(NAMES)
    strict = 0
    for bits in itertools.product((-1, 1), repeat=6):
        o = np.array(bits)
        winner = pairwise_majority(o, 4)
        # brute-force masked distance to every row
        dist = [np.sqrt(sum((o[c] - cm.entries[r, c]) ** 2 for c in range(6) if cm.entries[r, c]))
                for r in range(4)]
        best, _, tie = decode(cm, o)
        assert int(best) == int(np.argmin(dist))
        if winner is not None:
            strict += 1
            assert int(best) == winner and not tie
    assert strict > 0


def test_decoding_exact_row_and_ties():
    cm = aaa_code_matrix(NAMES)
    # class 2 wins its pairs (0,2), (1,2) as the -1 side and (2,3) as +1
    o = np.array([1, -1, 1, -1, 1, 1])
    best, dist, tie = decode(cm, o)
    assert best == 2 and dist[2] == 0.0 and not tie
    # classes 0 and 2 both win two pairs: a tie, resolved to the lower row
    cyc = np.array([1, -1, 1, 1, -1, 1])
    best, dist, tie = decode(cm, cyc)
    assert tie and best == int(np.flatnonzero(np.isclose(dist, dist.min()))[0])


def test_decoding_permutation_consistent():
    cm = aaa_code_matrix(NAMES)
    perm = [2, 0, 3, 1]
    pcm = aaa_code_matrix([NAMES[p] for p in perm])
    # column of pair (a, b) in the permuted matrix, with its sign
    colmap = {}
    for c, (i, j) in enumerate(itertools.combinations(range(4), 2)):
        colmap[(perm[i], perm[j])] = (c, 1)
        colmap[(perm[j], perm[i])] = (c, -1)
    for bits in itertools.product((-1, 1), repeat=6):
        o = np.array(bits)
        po = np.zeros(6, dtype=int)
        for c, (i, j) in enumerate(itertools.combinations(range(4), 2)):
            pc, sign = colmap[(i, j)]
            po[pc] = sign * o[c]
        best, _, tie = decode(cm, o)
        pbest, _, ptie = decode(pcm, po)
        if not tie:
            assert pcm.class_names[pbest] == cm.class_names[best]
        assert tie == ptie


def test_unmasked_decoding_differs_from_masked():
    cm = aaa_code_matrix(NAMES)
    o = np.array([1, 1, 1, -1, -1, -1])
    b_m, d_m, _ = decode(cm, o, masked=True)
    b_u, d_u, _ = decode(cm, o, masked=False)
    assert b_m == 0 and b_u == 0
    assert d_u[0] > d_m[0] == 0.0
    assert np.allclose(d_u ** 2 - d_m ** 2, 3.0)


def test_fit_ecoc_training_sizes_and_accuracy():
    X, y = blobs(counts=(20, 25, 30, 35))
    model = fit_ecoc(aaa_code_matrix(NAMES), "lda", X, y)
    n = dict(zip(NAMES, (20, 25, 30, 35)))
    expected = [n[a] + n[b] for a, b in itertools.combinations(NAMES, 2)]
    assert model.diagnostics["training_sizes"] == expected
    assert len(model.models) == 6
    pred = model.predict(X)
    assert np.mean(np.array(pred, dtype=object) == y) > 0.95
    assert predict_ecoc(model, X[0]) in NAMES


def test_bonn_sized_pairs():
    X, y = blobs(counts=(100, 100, 100, 100))
    model = fit_ecoc(aaa_code_matrix(NAMES), "1nn", X, y)
    assert model.diagnostics["training_sizes"] == [200] * 6


@pytest.mark.parametrize("alg", ["lda", "rf", "bp-mlp"])
def test_two_class_reduces_to_binary(alg):
    X, y = blobs(counts=(30, 30, 0, 0), sep=1.5)
    cfg = LearnerConfig(rf_trees=10, mlp_epochs=50, seed=4)
    model = fit_ecoc(aaa_code_matrix(NAMES[:2]), alg, X, y, cfg)
    yb = np.where(y == NAMES[0], 1, -1)
    binary = learners.fit(alg, X, yb, cfg)
    probe = np.random.default_rng(1).standard_normal((40, 3)) * 3
    expect = [NAMES[0] if p == 1 else NAMES[1] for p in binary.predict(probe)]
    assert model.predict(probe) == expect
    assert model.models[0].to_json() == binary.to_json()


def test_absent_class_named():
    X, y = blobs(counts=(10, 10, 10, 0))
    with pytest.raises(InvalidParametersError, match="Ictal"):
        fit_ecoc(aaa_code_matrix(NAMES), "lda", X, y)
    y2 = y.copy()
    y2[0] = "Bogus"
    with pytest.raises(UnknownLabelError, match="Bogus"):
        fit_ecoc(aaa_code_matrix(NAMES[:3]), "lda", X, y2)


def test_column_seeds_differ():
    X, y = blobs(sep=1.0)
    model = fit_ecoc(aaa_code_matrix(NAMES), "rf", X, y, LearnerConfig(rf_trees=3, seed=10))
    assert [m.config.seed for m in model.models] == list(range(10, 16))


def test_serialization_round_trip():
    X, y = blobs(sep=2.0)
    model = fit_ecoc(aaa_code_matrix(NAMES), "j48", X, y)
    back = MulticlassModel.from_dict(model.to_dict())
    probe = np.random.default_rng(2).standard_normal((25, 3)) * 4
    assert back.predict(probe) == model.predict(probe)
    assert back.code_matrix.entries.tolist() == model.code_matrix.entries.tolist()
    with pytest.raises(ValueError):
        MulticlassModel.from_dict({"format": "other"})


def test_code_matrix_csv(tmp_path):
    cm = aaa_code_matrix(NAMES)
    cm.to_csv(tmp_path / "cm.csv")
    rows = list(csv.reader(open(tmp_path / "cm.csv")))
    assert rows[0] == ["class", "c0", "c1", "c2", "c3", "c4", "c5"]
    assert rows[1] == ["Normal1", "1", "1", "1", "0", "0", "0"]
    assert rows[4] == ["Ictal", "0", "0", "-1", "0", "-1", "-1"]


def test_predict_detailed_flags_ties():
    X, y = blobs(sep=1.0)
    model = fit_ecoc(aaa_code_matrix(NAMES), "1nn", X, y)
    names, rows, ties = model.predict_detailed(X[:10])
    assert len(names) == rows.size == ties.size == 10
