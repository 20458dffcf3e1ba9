"""Knockoff statistics, data-dependent thresholds and selection metrics."""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch

RULES = ("knockoff", "knockoff_plus")


@dataclass(frozen=True)
class KnockoffStatistics:
    W: np.ndarray
    q: float

    def __post_init__(self):
        W = np.asarray(self.W, dtype=float).ravel()
        if not np.all(np.isfinite(W)):
            raise ValueError("statistics must be finite")
        _check_q(self.q)
        object.__setattr__(self, "W", W)


@dataclass(frozen=True)
class SelectionReport:
    threshold: float
    selected: tuple
    q: float
    rule: str
    W: np.ndarray = None

    @property
    def n_selected(self):
        return len(self.selected)

    def to_dict(self, column_names=None):
        doc = {
            "q": self.q,
            "rule": self.rule,
            "threshold": None if np.isinf(self.threshold) else float(self.threshold),
            "selected": [int(j) for j in self.selected],
        }
        if column_names is not None:
            doc["selected_names"] = [column_names[j] for j in self.selected]
        if self.W is not None:
            doc["W"] = [float(w) for w in self.W]
        return doc


@dataclass(frozen=True)
class EvalMetrics:
    fdp: float
    power: float
    n_selected: int
    n_true: int
    power_defined: bool = True


def _check_q(q):
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")


def knockoff_statistic(Z, Z_tilde):
    """``W_j = Z_j**2 - Z_tilde_j**2``."""
    Z = np.asarray(Z, dtype=float)
    Zt = np.asarray(Z_tilde, dtype=float)
    if Z.shape != Zt.shape:
        raise DimensionMismatch(f"Z {Z.shape} vs Z_tilde {Zt.shape}")
    return Z ** 2 - Zt ** 2


def threshold(W, q, rule="knockoff_plus"):
    """Smallest ``t`` among the nonzero ``|W_j|`` whose estimated FDP is <= ``q``.

    The knockoff rule estimates FDP by ``#{W <= -t} / #{W >= t}``; knockoff+
    adds one to the numerator and floors the denominator at one.  Returns
    ``inf`` when no candidate qualifies.
    """
    _check_q(q)
    if rule not in RULES:
        raise ValueError(f"unknown rule {rule!r}")
    W = np.asarray(W, dtype=float).ravel()
    cand = np.unique(np.abs(W[W != 0]))
    if cand.size == 0:
        return np.inf
    pos = np.sort(W)
    neg = np.sort(-W)
    # counts of W >= t and W <= -t for every candidate t at once
    n_pos = W.size - np.searchsorted(pos, cand, side="left")
    n_neg = W.size - np.searchsorted(neg, cand, side="left")
    if rule == "knockoff_plus":
        ratio = (1.0 + n_neg) / np.maximum(n_pos, 1)
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(n_pos > 0, n_neg / np.maximum(n_pos, 1), np.inf)
    ok = np.flatnonzero(ratio <= q)
    return float(cand[ok[0]]) if ok.size else np.inf


def select(W, q, rule="knockoff_plus"):
    W = np.asarray(W, dtype=float).ravel()
    T = threshold(W, q, rule)
    chosen = tuple(int(j) for j in np.flatnonzero(W >= T)) if np.isfinite(T) else ()
    return SelectionReport(threshold=T, selected=chosen, q=float(q), rule=rule, W=W)


def evaluate(report, true_support):
    """FDP and power of a selection against the true support.

    ``fdp`` uses a ``max(|S|, 1)`` denominator; with an empty true support the
    power is reported as 0 and ``power_defined`` is False.
    """
    chosen = set(getattr(report, "selected", report))
    truth = set(int(j) for j in true_support)
    false = len(chosen - truth)
    fdp = false / max(len(chosen), 1)
    if truth:
        power = len(chosen & truth) / len(truth)
    else:
        power = 0.0
    return EvalMetrics(fdp=fdp, power=power, n_selected=len(chosen), n_true=len(truth),
                       power_defined=bool(truth))
