"""
======================================
Comparing classifiers across the folds
======================================

Ten fold errors per classifier are a small, lumpy sample: errors come in
steps of one misclassified segment and many folds are error-free. This
script shows why such columns fail normality tests, and then runs the
rank-based comparison that does not need normality.

Run with ``python3 demos/stats_battery.py``.
"""
import numpy as np

from epispec.stats import friedman, nemenyi, nemenyi_critical_difference, shapiro_wilk

rng = np.random.default_rng(3)

###############################################################################
# Fold errors on a 40-segment test fold move in steps of 2.5%. The made-up
# classifiers below differ only in their underlying error rate.

def fold_errors(rate):
    return 2.5 * rng.binomial(40, rate, size=10)

names = ["good", "middling", "weak"]
block = np.column_stack([fold_errors(r) for r in (0.02, 0.05, 0.12)])
print("fold errors (%):")
for name, col in zip(names, block.T):
    print(f"  {name:>8}: {col}")

###############################################################################
# Shapiro-Wilk per column. A column of identical values has no defined W;
# it is reported as non-normal with a note instead of a number.

for name, col in zip(names, block.T):
    rep = shapiro_wilk(col)
    print(f"  {name:>8}: W {rep.statistic:.4f}  p {rep.p_value:.4f}")
print("  constant column:", shapiro_wilk(np.zeros(10)).note)

###############################################################################
# Friedman ranks the classifiers within each fold and asks whether the
# mean ranks differ more than chance allows.

fr = friedman(block)
print(f"\nFriedman chi-square {fr.statistic:.3f} on {fr.details['df']} df, p = {fr.p_value:.4f}")
print("mean ranks:", ", ".join(f"{n} {r:.2f}" for n, r in zip(names, fr.details["mean_ranks"])))

###############################################################################
# Nemenyi: every pair, with p from the studentized range distribution.
# The critical difference is the rank gap needed for significance.

tab = nemenyi(block, names)
print(f"critical difference at 0.05: {nemenyi_critical_difference(3, 10):.3f}")
for pair in tab.pairs():
    d = pair.details
    flag = "differ" if pair.decision else "no evidence"
    print(f"  {d['a']} vs. {d['b']}: rank gap {d['rank_difference']:.2f}, p {pair.p_value:.4f} ({flag})")
