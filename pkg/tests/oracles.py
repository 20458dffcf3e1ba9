"""Independent reference implementations used only by the tests."""

import numpy as np


def brute_threshold(W, q, rule):
    """Try every nonzero |W_j| with explicit loops and return the smallest passing t."""
    W = [float(w) for w in W]
    best = np.inf
    for t in set(abs(w) for w in W if w != 0):
        neg = sum(1 for w in W if w <= -t)
        pos = sum(1 for w in W if w >= t)
        if rule == "knockoff_plus":
            ok = (1 + neg) / max(1, pos) <= q
        else:
            ok = pos > 0 and neg / pos <= q
        if ok and t < best:
            best = t
    return best


def central_difference(f, theta, h=1e-5):
    g = np.zeros_like(theta)
    for i in range(theta.size):
        up = theta.copy()
        dn = theta.copy()
        up[i] += h
        dn[i] -= h
        g[i] = (f(up) - f(dn)) / (2 * h)
    return g
