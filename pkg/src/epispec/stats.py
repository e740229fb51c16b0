"""Hypothesis tests over per-fold CV errors: Shapiro-Wilk, Friedman, Nemenyi."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special
from scipy.stats import chi2, norm, rankdata

from .errors import SampleSizeError, TooFewGroupsError

ALPHA = 0.05

# Nemenyi critical values q_0.05 / sqrt(2) (infinite df) by number of groups
NEMENYI_Q05 = {2: 1.960, 3: 2.343, 4: 2.569, 5: 2.728, 6: 2.850, 7: 2.949, 8: 3.031, 9: 3.102, 10: 3.164}


@dataclass
class TestReport:
    name: str
    statistic: float
    p_value: float
    alpha: float = ALPHA
    note: str = ""
    details: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class

    @property
    def decision(self) -> bool:
        """True when the null hypothesis is rejected at `alpha`."""
        return bool(self.p_value < self.alpha)

    def to_dict(self) -> dict:
        stat = self.statistic
        undefined = stat is None or not math.isfinite(stat)
        return {
            "test": self.name,
            "statistic": None if undefined else float(stat),
            # no numeric p when the statistic itself is undefined; the note explains
            "p_value": None if undefined else float(self.p_value),
            "alpha": self.alpha,
            "reject_null": self.decision,
            "note": self.note,
            **self.details,
        }


# ---------------------------------------------------------------------------
# Shapiro-Wilk, Royston's approximation (AS R94)

_C1 = (0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.544, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)


def _poly(coef, x):
    """``coef[0] + coef[1] x + ...``"""
    return float(np.polynomial.polynomial.polyval(x, coef))


def shapiro_coefficients(n: int) -> np.ndarray:
    """Royston's approximate coefficients a_1..a_{n//2} (largest first, positive)."""
    if n == 3:
        return np.array([math.sqrt(0.5)])
    half = n // 2
    m = norm.ppf((np.arange(1, half + 1) - 0.375) / (n + 0.25))
    summ2 = 2.0 * np.sum(m ** 2)
    ssumm2 = math.sqrt(summ2)
    rsn = 1.0 / math.sqrt(n)
    a = -m / ssumm2
    a1 = _poly(_C1, rsn) - m[0] / ssumm2
    if n > 5:
        a2 = -m[1] / ssumm2 + _poly(_C2, rsn)
        fac = math.sqrt((summ2 - 2 * m[0] ** 2 - 2 * m[1] ** 2) / (1 - 2 * a1 ** 2 - 2 * a2 ** 2))
        a[2:] = -m[2:] / fac
        a[1] = a2
    else:
        fac = math.sqrt((summ2 - 2 * m[0] ** 2) / (1 - 2 * a1 ** 2))
        a[1:] = -m[1:] / fac
    a[0] = a1
    return a


def _shapiro_pvalue(w: float, n: int) -> float:
    if n == 3:
        return min(1.0, max(0.0, 6.0 / math.pi * (math.asin(math.sqrt(w)) - math.asin(math.sqrt(0.75)))))
    y = math.log(max(1.0 - w, 1e-300))
    if n <= 11:
        gamma = _poly(_G, n)
        if y >= gamma:
            return 1e-99
        y = -math.log(gamma - y)
        mu = _poly(_C3, n)
        sigma = math.exp(_poly(_C4, n))
    else:
        ln = math.log(n)
        mu = _poly(_C5, ln)
        sigma = math.exp(_poly(_C6, ln))
    return float(norm.sf(y, mu, sigma))


def shapiro_wilk(sample, alpha: float = ALPHA) -> TestReport:
    """Shapiro-Wilk W and its p-value.

    A sample whose values are all equal has no defined W; it is reported as
    non-normal (p = 0) with an explanatory note instead of raising.
    """
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    n = x.size
    if n < 3:
        raise SampleSizeError(f"Shapiro-Wilk needs at least 3 values, got {n}")
    if n > 5000:
        raise SampleSizeError(f"Shapiro-Wilk approximation is valid up to n=5000, got {n}")
    rng = x[-1] - x[0]
    if not rng > 1e-19 * max(1.0, abs(x[0])):
        return TestReport("shapiro-wilk", float("nan"), 0.0, alpha,
                          note="all values identical; W undefined, treated as non-normal",
                          details={"n": n})
    a = shapiro_coefficients(n)
    coef = np.zeros(n)
    coef[:a.size] = -a
    coef[n - a.size:] = a[::-1]
    xs = (x - x.mean()) / rng
    sax = float(coef @ xs)
    ssa = float(coef @ coef)
    ssx = float(xs @ xs)
    # 1 - W in a form that stays accurate when W is close to 1
    ssassx = math.sqrt(ssa * ssx)
    w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx)
    w = 1.0 - w1
    return TestReport("shapiro-wilk", w, _shapiro_pvalue(w, n), alpha, details={"n": n})


# ---------------------------------------------------------------------------
# Friedman and Nemenyi


def _check_block(block):
    b = np.asarray(block, dtype=float)
    if b.ndim != 2:
        raise TooFewGroupsError("results block must be 2-D (rows = folds, columns = classifiers)")
    if b.shape[1] < 2:
        raise TooFewGroupsError(f"need at least 2 classifiers, got {b.shape[1]}")
    if b.shape[0] < 2:
        raise TooFewGroupsError(f"need at least 2 rows, got {b.shape[0]}")
    if not np.all(np.isfinite(b)):
        raise ValueError("results block contains non-finite values")
    return b


def mean_ranks(block) -> np.ndarray:
    """Average within-row ranks (1 = smallest value), ties sharing the mean rank."""
    b = _check_block(block)
    return rankdata(b, axis=1).mean(axis=0)


def friedman(block, alpha: float = ALPHA, correct_ties: bool = False) -> TestReport:
    """Friedman chi-square over a folds x classifiers block.

    ``12 n / (k (k + 1)) * sum_j (Rbar_j - (k + 1) / 2)^2`` referred to
    chi-square with k - 1 degrees of freedom.  With `correct_ties` the
    statistic is divided by the usual tie factor; a block tied in every
    row then gives statistic 0.
    """
    b = _check_block(block)
    n, k = b.shape
    ranks = rankdata(b, axis=1)
    rbar = ranks.mean(axis=0)
    stat = 12.0 * n / (k * (k + 1)) * float(np.sum((rbar - (k + 1) / 2.0) ** 2))
    if correct_ties:
        ties = 0.0
        for row in b:
            _, counts = np.unique(row, return_counts=True)
            ties += float(np.sum(counts ** 3 - counts))
        factor = 1.0 - ties / (n * (k ** 3 - k))
        stat = stat / factor if factor > 0 else 0.0
    p = float(chi2.sf(stat, k - 1)) if stat > 0 else 1.0
    return TestReport("friedman", stat, p, alpha,
                      details={"n": n, "k": k, "df": k - 1, "mean_ranks": rbar.tolist(),
                               "tie_corrected": correct_ties})


def studentized_range_sf(q: float, k: int) -> float:
    """Upper tail of the range of k standard normals (infinite df).

    ``P(Q > q) = k * int phi(z) [Phi(z)^(k-1) - (Phi(z) - Phi(z - q))^(k-1)] dz``,
    integrated numerically; absolute error well below 1e-6.
    """
    if q <= 0:
        return 1.0
    if k < 2:
        raise TooFewGroupsError("studentized range needs k >= 2")

    def integrand(z):
        pz = special.ndtr(z)
        return math.exp(-0.5 * z * z) * (pz ** (k - 1) - (pz - special.ndtr(z - q)) ** (k - 1))

    val, _ = integrate.quad(integrand, -np.inf, np.inf, epsabs=1e-12, epsrel=1e-10, limit=200)
    return float(min(1.0, max(0.0, k * val / math.sqrt(2 * math.pi))))


def nemenyi_critical_difference(k: int, n: int) -> float:
    """Minimum mean-rank gap significant at the 0.05 level."""
    if k not in NEMENYI_Q05:
        raise TooFewGroupsError(f"no tabulated critical value for k={k}")
    return NEMENYI_Q05[k] * math.sqrt(k * (k + 1) / (6.0 * n))


@dataclass
class NemenyiTable:
    names: list
    mean_ranks: np.ndarray
    q: np.ndarray
    p: np.ndarray
    alpha: float = ALPHA
    critical_difference: float | None = None

    def pairs(self) -> list:
        out = []
        for i, j in itertools.combinations(range(len(self.names)), 2):
            out.append(TestReport("nemenyi", float(self.q[i, j]), float(self.p[i, j]), self.alpha,
                                  details={"a": self.names[i], "b": self.names[j],
                                           "rank_difference": float(abs(self.mean_ranks[i] - self.mean_ranks[j]))}))
        return out

    def to_dict(self) -> dict:
        return {
            "test": "nemenyi",
            "alpha": self.alpha,
            "names": list(self.names),
            "mean_ranks": self.mean_ranks.tolist(),
            "critical_difference": self.critical_difference,
            "p_values": self.p.tolist(),
            "pairs": [r.to_dict() for r in self.pairs()],
        }


def nemenyi(block, names=None, alpha: float = ALPHA) -> NemenyiTable:
    """All-pairs Nemenyi post hoc test on mean ranks.

    ``q = |Rbar_a - Rbar_b| / sqrt(k (k + 1) / (12 n))`` with the p-value
    from the studentized range distribution (infinite df).
    """
    b = _check_block(block)
    n, k = b.shape
    names = list(names) if names is not None else [f"c{j}" for j in range(k)]
    rbar = mean_ranks(b)
    se = math.sqrt(k * (k + 1) / (12.0 * n))
    q = np.abs(rbar[:, None] - rbar[None, :]) / se
    p = np.ones((k, k))
    for i, j in itertools.combinations(range(k), 2):
        p[i, j] = p[j, i] = studentized_range_sf(q[i, j], k)
    cd = nemenyi_critical_difference(k, n) if k in NEMENYI_Q05 else None
    return NemenyiTable(names, rbar, q, p, alpha, cd)


def run_battery(names, block, alpha: float = ALPHA) -> dict:
    """Shapiro-Wilk per column, then Friedman and Nemenyi on the whole block."""
    b = _check_block(block)
    if len(names) != b.shape[1]:
        raise ValueError("one name per column required")
    sw = []
    for name, col in zip(names, b.T):
        rep = shapiro_wilk(col, alpha)
        sw.append({"algorithm": name, **rep.to_dict()})
    return {
        "format": "epispec.stats-report",
        "version": 1,
        "alpha": alpha,
        "algorithms": list(names),
        "n_folds": int(b.shape[0]),
        "shapiro_wilk": sw,
        "friedman": friedman(b, alpha).to_dict(),
        "nemenyi": nemenyi(b, names, alpha).to_dict(),
    }
