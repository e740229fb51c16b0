import itertools
import math

import numpy as np
import pytest
from scipy.stats import norm, rankdata

from epispec.errors import SampleSizeError, TooFewGroupsError
from epispec.stats import (NEMENYI_Q05, friedman, mean_ranks, nemenyi, nemenyi_critical_difference,
                           run_battery, shapiro_coefficients, shapiro_wilk, studentized_range_sf)

# (W, p) from scipy.stats.shapiro, computed once and frozen here
PINNED = {
    "gaussian_50": (np.random.default_rng(7).normal(size=50), 0.9897305848826974, 0.9396875392931234),
    "bimodal_10": (np.array([0, 0, 0, 0, 0, 100, 100, 100, 100, 100.0])
                   + np.random.default_rng(3).normal(0, 1, 10), 0.6848290992700308, 0.0005771799625513295),
    "exponential_30": (np.random.default_rng(11).exponential(size=30), 0.8319674127112813, 0.0002658719353465143),
    "uniform_20": (np.random.default_rng(5).uniform(size=20), 0.9318641456046473, 0.16770465359448866),
    "fold_errors_10": (np.array([0, 0, 2.5, 0, 5, 2.5, 0, 0, 7.5, 2.5]), 0.7913811422761078, 0.011389750804650416),
}


def ordered_block(n=10, k=3):
    # every row ranks columns identically: 1, 2, ..., k
    rng = np.random.default_rng(0)
    base = rng.uniform(0, 5, size=(n, 1))
    return base + np.arange(k)[None, :] * (1 + rng.uniform(0, 1, size=(n, 1)))


@pytest.mark.parametrize("name", sorted(PINNED))
def test_shapiro_matches_reference(name):
    x, w_ref, p_ref = PINNED[name]
    rep = shapiro_wilk(x)
    assert rep.statistic == pytest.approx(w_ref, abs=1e-4)
    assert abs(rep.p_value - p_ref) < 0.01


def test_shapiro_decisions():
    assert not shapiro_wilk(PINNED["gaussian_50"][0]).decision
    assert shapiro_wilk(PINNED["bimodal_10"][0]).decision


def test_shapiro_affine_invariance():
    x = np.arange(1.0, 11.0)
    w = shapiro_wilk(x).statistic
    for a, b in [(3.0, -7.0), (1e-3, 1e4), (250.0, 0.5)]:
        assert shapiro_wilk(a * x + b).statistic == pytest.approx(w, abs=1e-10)
    y = PINNED["exponential_30"][0]
    assert shapiro_wilk(4.5 * y + 2).statistic == pytest.approx(shapiro_wilk(y).statistic, abs=1e-10)


def test_shapiro_w_range_and_order_independence(rng):
    for n in (3, 4, 11, 12, 100, 1000):
        x = rng.standard_normal(n)
        rep = shapiro_wilk(x)
        assert 0 < rep.statistic <= 1 and 0 <= rep.p_value <= 1
        assert shapiro_wilk(rng.permutation(x)).statistic == rep.statistic


def test_shapiro_coefficients_normalized():
    for n in (3, 5, 10, 11, 50, 500):
        a = shapiro_coefficients(n)
        assert a.size == n // 2
        assert 2 * float(a @ a) == pytest.approx(1.0, abs=1e-10)
        assert np.all(np.diff(a) < 0)


def test_shapiro_degenerate_and_sizes():
    rep = shapiro_wilk([2.5] * 10)
    assert rep.decision and "identical" in rep.note
    d = rep.to_dict()
    assert d["statistic"] is None and d["p_value"] is None and d["reject_null"] is True
    with pytest.raises(SampleSizeError):
        shapiro_wilk([1.0, 2.0])
    with pytest.raises(SampleSizeError):
        shapiro_wilk(np.arange(5001.0))


def brute_friedman(block):
    n, k = block.shape
    rank_sums = np.zeros(k)
    for row in block:
        for j in range(k):
            less = sum(row[m] < row[j] for m in range(k))
            equal = sum(row[m] == row[j] for m in range(k))
            rank_sums[j] += less + (equal + 1) / 2
    return 12.0 / (n * k * (k + 1)) * float(np.sum(rank_sums ** 2)) - 3.0 * n * (k + 1)


def test_friedman_ordered_block():
    b = ordered_block()
    rep = friedman(b)
    assert rep.statistic == pytest.approx(20.0, abs=1e-12)
    assert rep.statistic == pytest.approx(brute_friedman(b), abs=1e-9)
    assert rep.p_value < 0.001
    assert rep.p_value == pytest.approx(math.exp(-10.0), rel=1e-12)  # chi2, 2 df
    assert rep.details["df"] == 2


def test_friedman_identical_columns():
    col = np.random.default_rng(2).uniform(0, 10, size=(10, 1))
    rep = friedman(np.repeat(col, 4, axis=1))
    assert rep.statistic == 0.0 and rep.p_value == 1.0 and not rep.decision


def test_friedman_row_invariances(rng):
    b = rng.integers(0, 5, size=(10, 6)).astype(float)
    s = friedman(b).statistic
    assert s == pytest.approx(brute_friedman(b), abs=1e-9)
    assert friedman(b[rng.permutation(10)]).statistic == pytest.approx(s, abs=1e-12)
    shifted = b + rng.normal(0, 100, size=(10, 1))
    assert friedman(shifted).statistic == pytest.approx(s, abs=1e-12)


def test_friedman_tie_option(rng):
    b = rng.integers(0, 3, size=(10, 4)).astype(float)
    plain, corrected = friedman(b), friedman(b, correct_ties=True)
    assert corrected.statistic >= plain.statistic


def test_friedman_errors():
    with pytest.raises(TooFewGroupsError):
        friedman(np.ones((10, 1)))
    with pytest.raises(TooFewGroupsError):
        friedman(np.ones((1, 3)))
    with pytest.raises(ValueError):
        friedman([[1.0, np.nan], [1.0, 2.0]])


def test_mean_ranks():
    b = np.array([[1.0, 2.0, 2.0], [3.0, 1.0, 2.0]])
    assert mean_ranks(b).tolist() == [2.0, 1.75, 2.25]
    assert np.allclose(mean_ranks(b), rankdata(b, axis=1).mean(axis=0))


def test_studentized_range_against_scipy():
    from scipy.stats import studentized_range
    for k in (2, 3, 6, 9):
        for q in (0.5, 2.0, 3.3, 5.0):
            ref = studentized_range.sf(q, k, np.inf)
            assert studentized_range_sf(q, k) == pytest.approx(ref, abs=1e-6)
    # k = 2 reduces to a two-sided normal tail on q / sqrt(2)
    assert studentized_range_sf(2.77, 2) == pytest.approx(2 * norm.sf(2.77 / math.sqrt(2)), abs=1e-9)
    assert studentized_range_sf(0.0, 5) == 1.0


@pytest.mark.parametrize("k", sorted(NEMENYI_Q05))
def test_critical_value_table(k):
    assert studentized_range_sf(NEMENYI_Q05[k] * math.sqrt(2), k) == pytest.approx(0.05, abs=5e-4)


def test_critical_difference():
    # a standard reference value: k=4 classifiers over n=10 folds
    assert nemenyi_critical_difference(4, 10) == pytest.approx(2.569 * math.sqrt(20 / 60), rel=1e-12)


def test_nemenyi_ordered_block():
    tab = nemenyi(ordered_block(), names=["a", "b", "c"])
    p = tab.p
    assert np.allclose(p, p.T) and np.all(np.diag(p) == 1.0)
    assert np.all((p >= 0) & (p <= 1))
    assert p[0, 2] == p[~np.eye(3, dtype=bool)].min()
    assert p[0, 2] < 0.05
    d = tab.to_dict()
    assert [(r["a"], r["b"]) for r in d["pairs"]] == [("a", "b"), ("a", "c"), ("b", "c")]


def test_nemenyi_identical_columns():
    col = np.random.default_rng(4).uniform(size=(10, 1))
    tab = nemenyi(np.repeat(col, 5, axis=1))
    assert np.all(tab.p == 1.0)


def test_nemenyi_never_below_unadjusted(rng):
    # empirical conservativeness check on random blocks
    for _ in range(30):
        k = int(rng.integers(3, 8))
        b = rng.normal(size=(10, k)) + rng.uniform(0, 2, size=k)
        tab = nemenyi(b)
        for i, j in itertools.combinations(range(k), 2):
            z = tab.q[i, j] / math.sqrt(2)
            assert tab.p[i, j] >= 2 * norm.sf(z) - 1e-9


def test_battery_shape():
    rng = np.random.default_rng(0)
    names = [f"alg{i}" for i in range(9)]
    rep = run_battery(names, rng.uniform(0, 10, size=(10, 9)))
    assert len(rep["shapiro_wilk"]) == 9
    assert rep["friedman"]["test"] == "friedman"
    assert len(rep["nemenyi"]["pairs"]) == 36
    with pytest.raises(ValueError):
        run_battery(names[:3], np.ones((10, 4)))


def test_battery_identical_columns_p_one():
    col = np.array([[0, 2.5, 0, 5, 0, 0, 2.5, 0, 0, 0.0]]).T
    rep = run_battery(["x", "y", "z"], np.repeat(col, 3, axis=1))
    assert rep["friedman"]["p_value"] == 1.0
    assert all(r["p_value"] == 1.0 for r in rep["nemenyi"]["pairs"])
