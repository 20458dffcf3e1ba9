"""
The knockoff filter
===================

Positive statistics point to the original feature, negative ones to its
knockoff.  Null features produce signs that behave like coin flips, so the
count of large negative statistics estimates how many large positive ones
are false.  The filter picks the smallest threshold whose estimate falls
below the target level.
"""

import numpy as np

from deeppink import filter as kf

W = np.array([5, 4, 3, 2, 1, 1, 1, 1, 1, 1, -0.5])
for rule in kf.RULES:
    rep = kf.select(W, q=0.2, rule=rule)
    print(f"{rule:14s} threshold={rep.threshold}  selected={rep.selected}")

# The plus rule adds one to the numerator, so it never picks a lower threshold.
rng = np.random.default_rng(0)
for _ in range(5):
    W = np.round(rng.normal(size=20) + 1.0, 1)
    print(kf.threshold(W, 0.2, "knockoff"), "<=", kf.threshold(W, 0.2, "knockoff_plus"))

# Scoring a selection against a known support.
rep = kf.select(np.array([3.0, 2.5, 2.0, 1.5, -0.2, 0.1]), q=0.5, rule="knockoff")
m = kf.evaluate(rep, true_support=[0, 1, 2])
print(f"FDP={m.fdp:.2f} power={m.power:.2f} selected={m.n_selected}")
