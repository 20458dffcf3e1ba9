"""Gaussian model-X knockoff construction.

Given features ``x ~ N(0, Sigma)`` and a gap vector ``s`` with
``2 diag(s) - diag(s) Sigma^{-1} diag(s)`` positive definite, knockoffs are
drawn conditionally on ``x`` as

    x_ko | x ~ N(A x, V),   A = I - diag(s) Sigma^{-1},
                            V = 2 diag(s) - diag(s) Sigma^{-1} diag(s)

so that the stacked vector ``(x, x_ko)`` has covariance
``[[Sigma, Sigma - diag(s)], [Sigma - diag(s), Sigma]]``.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg

from .errors import (DimensionMismatch, NotPositiveDefinite, NumericalFailure,
                     SingularSigma, ZeroVarianceColumn)

PD_TOLERANCE = 1e-8
SHRINK_FACTOR = 0.95

_JITTER_START = 1e-10
_JITTER_STOP = 1e-4


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DesignMatrix:
    """An ``n x p`` design with column names and standardization state.

    ``means`` and ``scales`` hold the constants removed by :func:`standardize`
    (zeros and ones when the matrix is raw).
    """

    values: np.ndarray
    column_names: tuple = None
    centered: bool = False
    scaled: bool = False
    means: np.ndarray = None
    scales: np.ndarray = None

    def __post_init__(self):
        values = _readonly(self.values)
        if values.ndim != 2:
            raise DimensionMismatch(f"design must be 2-D, got shape {values.shape}")
        n, p = values.shape
        if n < 2 or p < 1:
            raise DimensionMismatch(f"design needs n >= 2 and p >= 1, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("design matrix contains non-finite entries")
        names = self.column_names
        if names is None:
            names = tuple(f"X{j + 1}" for j in range(p))
        names = tuple(str(c) for c in names)
        if len(names) != p:
            raise DimensionMismatch(f"{len(names)} column names for {p} columns")
        means = np.zeros(p) if self.means is None else self.means
        scales = np.ones(p) if self.scales is None else self.scales
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "column_names", names)
        object.__setattr__(self, "means", _readonly(means))
        object.__setattr__(self, "scales", _readonly(scales))

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def p(self):
        return self.values.shape[1]


@dataclass(frozen=True)
class ResponseVector:
    values: np.ndarray
    centered: bool = False
    mean: float = 0.0

    def __post_init__(self):
        values = _readonly(np.ravel(self.values))
        if not np.all(np.isfinite(values)):
            raise ValueError("response contains non-finite entries")
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.shape[0]

    def center(self):
        if self.centered:
            return self
        m = float(self.values.mean())
        return ResponseVector(self.values - m, centered=True, mean=self.mean + m)


@dataclass(frozen=True)
class KnockoffModel:
    """Covariance, gap vector and the precomputed conditional sampling factors."""

    sigma: np.ndarray
    omega: np.ndarray
    s: np.ndarray
    mean_map: np.ndarray
    cond_chol: np.ndarray
    jitter: float = 0.0

    @property
    def p(self):
        return self.s.shape[0]

    @property
    def cond_cov(self):
        s = self.s
        return 2.0 * np.diag(s) - s[:, None] * self.omega * s[None, :]

    def joint_covariance(self):
        """The ``2p x 2p`` covariance of ``(x, x_ko)`` implied by the model."""
        cross = self.sigma - np.diag(self.s)
        return np.block([[self.sigma, cross], [cross, self.sigma]])


@dataclass(frozen=True)
class AugmentedDesign:
    original: DesignMatrix
    knockoff: np.ndarray

    def __post_init__(self):
        ko = _readonly(self.knockoff)
        if ko.shape != self.original.values.shape:
            raise DimensionMismatch(
                f"knockoff shape {ko.shape} != design shape {self.original.values.shape}")
        if not np.all(np.isfinite(ko)):
            raise ValueError("knockoff matrix contains non-finite entries")
        object.__setattr__(self, "knockoff", ko)

    @property
    def X(self):
        return self.original.values

    @property
    def n(self):
        return self.original.n

    @property
    def p(self):
        return self.original.p

    def stacked(self):
        """``[X, X_ko]``; column ``j`` is paired with column ``j + p``."""
        return np.hstack([self.original.values, self.knockoff])

    def swap(self, columns):
        """Exchange original and knockoff values for the given column indices."""
        idx = np.asarray(sorted(set(int(j) for j in columns)), dtype=int)
        x = np.array(self.original.values)
        ko = np.array(self.knockoff)
        x[:, idx], ko[:, idx] = ko[:, idx], x[:, idx].copy()
        return AugmentedDesign(replace(self.original, values=x), ko)


def standardize(X, scale=True):
    """Center every column and optionally scale it to unit sample variance.

    Parameters
    ----------
    X : DesignMatrix or array_like
    scale : bool
        Divide by the column sample standard deviation (``ddof=1``).

    Returns
    -------
    DesignMatrix
        With ``means``/``scales`` accumulating the constants that were removed.
    """
    if not isinstance(X, DesignMatrix):
        X = DesignMatrix(X)
    values = np.array(X.values)
    mu = values.mean(axis=0)
    values -= mu
    sd = np.ones(X.p)
    if scale:
        sd = values.std(axis=0, ddof=1)
        tiny = sd <= 1e-12 * np.maximum(1.0, np.abs(mu))
        if np.any(tiny):
            raise ZeroVarianceColumn(int(np.flatnonzero(tiny)[0]))
        values /= sd
    return DesignMatrix(
        values,
        column_names=X.column_names,
        centered=True,
        scaled=scale or X.scaled,
        means=X.means + mu * X.scales,
        scales=X.scales * sd,
    )


def repair_pd(S, what="covariance"):
    """Add escalating diagonal jitter until ``S`` admits a Cholesky factor.

    Jitter starts at ``1e-10 * tr(S)/p`` and grows tenfold up to
    ``1e-4 * tr(S)/p``.  Returns ``(S_repaired, jitter_added)``.
    """
    S = 0.5 * (S + S.T)
    try:
        linalg.cholesky(S, lower=True)
        return S, 0.0
    except linalg.LinAlgError:
        pass
    p = S.shape[0]
    unit = max(np.trace(S) / p, np.finfo(float).tiny)
    eps = _JITTER_START
    while eps <= _JITTER_STOP * (1 + 1e-9):
        jitter = eps * unit
        T = S + jitter * np.eye(p)
        try:
            linalg.cholesky(T, lower=True)
            return T, jitter
        except linalg.LinAlgError:
            eps *= 10.0
    raise NotPositiveDefinite(what, float(linalg.eigvalsh(S)[0]))


def shrinkage_intensity(X):
    """Data-driven weight on the diagonal target.

    Ratio of the summed estimated variances of the off-diagonal sample
    covariances to their summed squares, clipped to ``[0, 1]``.
    """
    n = X.shape[0]
    xc = X - X.mean(axis=0)
    S = xc.T @ xc / (n - 1)
    # variance of each s_ij from the spread of the products x_ki x_kj
    prod_sq = (xc ** 2).T @ (xc ** 2)
    wbar = xc.T @ xc / n
    var_s = n / (n - 1) ** 3 * (prod_sq - n * wbar ** 2)
    off = ~np.eye(X.shape[1], dtype=bool)
    energy = np.sum(S[off] ** 2)
    if energy <= 0:
        return 1.0
    return float(np.clip(np.sum(var_s[off]) / energy, 0.0, 1.0))


def estimate_covariance(X, mode="empirical", sigma=None, gamma=None):
    """Covariance estimate of a centered design.

    Parameters
    ----------
    X : DesignMatrix
    mode : {"known", "empirical", "shrinkage"}
    sigma : array_like, optional
        The supplied matrix for ``mode="known"``.
    gamma : float, optional
        Shrinkage weight toward ``diag(S)``; estimated by
        :func:`shrinkage_intensity` when omitted.

    Returns
    -------
    ndarray
        Symmetric ``p x p`` matrix, jittered if it failed Cholesky.
    """
    if not isinstance(X, DesignMatrix):
        X = DesignMatrix(X)
    p = X.p
    if mode == "known":
        if sigma is None:
            raise ValueError("mode='known' requires sigma")
        S = np.asarray(sigma, dtype=float)
        if S.shape != (p, p):
            raise DimensionMismatch(f"sigma has shape {S.shape}, expected {(p, p)}")
    elif mode in ("empirical", "shrinkage"):
        v = X.values
        if not X.centered:
            v = v - v.mean(axis=0)
        S = v.T @ v / (X.n - 1)
        if mode == "shrinkage":
            if gamma is None:
                gamma = shrinkage_intensity(v)
            if not 0.0 <= gamma <= 1.0:
                raise ValueError("gamma must lie in [0, 1]")
            S = (1.0 - gamma) * S + gamma * np.diag(np.diag(S))
    else:
        raise ValueError(f"unknown covariance mode {mode!r}")
    S, _ = repair_pd(S)
    return S


def _cond_cov(s, omega):
    return 2.0 * np.diag(s) - s[:, None] * omega * s[None, :]


def _min_eig(M):
    return float(linalg.eigvalsh(M)[0])


def equicorrelated_s(sigma, shrink_factor=SHRINK_FACTOR, pd_tolerance=PD_TOLERANCE,
                     max_halvings=60):
    """Equicorrelated knockoff gaps ``s_j = shrink * min(1, 2 lambda_min)``.

    Computed on the correlation scale and mapped back by the feature variances.
    ``s`` is halved until the conditional covariance clears ``pd_tolerance``.
    """
    sigma = np.asarray(sigma, dtype=float)
    d = np.sqrt(np.diag(sigma))
    corr = sigma / np.outer(d, d)
    corr = 0.5 * (corr + corr.T)
    try:
        lam_min = float(linalg.eigvalsh(corr)[0])
    except linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigen-decomposition failed: {exc}") from exc
    if lam_min <= 0:
        raise NotPositiveDefinite("correlation matrix", lam_min)
    s = np.full(sigma.shape[0], shrink_factor * min(1.0, 2.0 * lam_min))
    omega_corr = linalg.inv(corr)
    for _ in range(max_halvings):
        if _min_eig(_cond_cov(s, omega_corr)) >= pd_tolerance * max(1.0, s.max()):
            return s * d ** 2
        s = 0.5 * s
    raise NotPositiveDefinite("knockoff conditional covariance")


def build_knockoff_model(sigma, s, pd_tolerance=PD_TOLERANCE):
    """Precompute ``A = I - diag(s) Sigma^{-1}`` and ``chol(V)``."""
    sigma = np.asarray(sigma, dtype=float)
    s = np.asarray(s, dtype=float).ravel()
    p = sigma.shape[0]
    if sigma.shape != (p, p) or s.shape != (p,):
        raise DimensionMismatch(f"sigma {sigma.shape} and s {s.shape} disagree")
    if np.any(s <= 0):
        raise NotPositiveDefinite("knockoff conditional covariance (s must be > 0)",
                                  float(s.min()))
    sigma = 0.5 * (sigma + sigma.T)
    try:
        cf = linalg.cho_factor(sigma, lower=True)
    except linalg.LinAlgError as exc:
        raise SingularSigma(f"sigma is not invertible: {exc}") from exc
    omega = linalg.cho_solve(cf, np.eye(p))
    omega = 0.5 * (omega + omega.T)
    resid = np.max(np.abs(omega @ sigma - np.eye(p)))
    if not np.isfinite(resid) or resid > 1e-6:
        raise SingularSigma(f"sigma inversion residual {resid:.2e} exceeds 1e-6")
    V = _cond_cov(s, omega)
    V = 0.5 * (V + V.T)
    lam = _min_eig(V)
    if lam < pd_tolerance:
        raise NotPositiveDefinite("knockoff conditional covariance", lam)
    L = linalg.cholesky(V, lower=True)
    A = np.eye(p) - s[:, None] * omega
    return KnockoffModel(sigma=_readonly(sigma), omega=_readonly(omega), s=_readonly(s),
                         mean_map=_readonly(A), cond_chol=_readonly(L))


def sample_knockoffs(X, model, seed):
    """Draw ``X_ko = X A^T + E L^T`` with ``E`` standard normal from ``seed``.

    ``seed`` may be an integer or a ``numpy.random.Generator``.  The response
    never enters this function.
    """
    if not isinstance(X, DesignMatrix):
        X = DesignMatrix(X, centered=True)
    if X.p != model.p:
        raise DimensionMismatch(f"design has {X.p} columns, model has {model.p}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    E = rng.standard_normal((X.n, X.p))
    ko = X.values @ model.mean_map.T + E @ model.cond_chol.T
    return AugmentedDesign(X, ko)


def exchangeability_diagnostic(aug, model, c=6.0):
    """Compare empirical second moments of ``(X, X_ko)`` with the model.

    The pass tolerance is ``c * max(diag Sigma) * sqrt(log(2p) / n)``.
    """
    X = aug.X
    K = aug.knockoff
    n, p = X.shape
    Z = np.hstack([X, K])
    Z = Z - Z.mean(axis=0)
    C = Z.T @ Z / (n - 1)
    target = model.joint_covariance()
    dev_x = float(np.max(np.abs(C[:p, :p] - model.sigma)))
    dev_ko = float(np.max(np.abs(C[p:, p:] - model.sigma)))
    dev_cross = float(np.max(np.abs(C[:p, p:] - target[:p, p:])))
    tol = c * float(np.max(np.diag(model.sigma))) * np.sqrt(np.log(2 * p) / n)
    worst = max(dev_x, dev_ko, dev_cross)
    return {
        "dev_cov_x": dev_x,
        "dev_cov_knockoff": dev_ko,
        "dev_cov_cross": dev_cross,
        "max_deviation": worst,
        "tolerance": float(tol),
        "n": n,
        "p": p,
        "passed": bool(worst <= tol),
    }
