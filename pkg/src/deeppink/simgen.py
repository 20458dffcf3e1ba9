"""Synthetic linear and single-index experiments with known ground truth.

Rows of the design are drawn from ``N(0, Sigma)`` where the *precision*
matrix is ``Omega[j, k] = rho ** |j - k|``.  Each repetition ``r`` of an
experiment with seed ``S`` draws from the sub-streams ``(S, r, purpose)``
described in :mod:`deeppink.rng`, so repetitions are independent of each
other and of execution order.
"""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy import linalg

from . import filter as kfilter
from . import knockoffs
from . import net
from . import rng as rngmod
from .errors import DeepPinkError, DimensionMismatch, NumericalFailure

MODELS = ("linear", "single_index")


@dataclass(frozen=True)
class SimConfig:
    """One simulation design plus the selection and training settings.

    ``s_sparsity=None`` means 30 for the linear model and 10 for the
    single-index model.
    """

    n: int = 1000
    p: int = 50
    s_sparsity: int = None
    amplitude: float = 1.5
    rho: float = 0.5
    sigma_noise: float = 1.0
    model: str = "linear"
    q: float = 0.2
    repetitions: int = 10
    seed: int = 0
    rule: str = "knockoff_plus"
    method: str = "deeppink"
    train: net.TrainConfig = field(default_factory=net.TrainConfig)

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")
        if self.s_sparsity is None:
            object.__setattr__(self, "s_sparsity", 30 if self.model == "linear" else 10)
        if not 0 <= self.s_sparsity <= self.p:
            raise ValueError("s_sparsity must lie in [0, p]")
        if not -1.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (-1, 1)")
        if not self.sigma_noise > 0:
            raise ValueError("sigma_noise must be positive")
        if self.n < 2 or self.p < 1 or self.repetitions < 1:
            raise ValueError("need n >= 2, p >= 1, repetitions >= 1")
        if not 0.0 < self.q < 1.0:
            raise ValueError("q must lie in (0, 1)")
        if self.rule not in kfilter.RULES:
            raise ValueError(f"rule must be one of {kfilter.RULES}")
        if self.method not in ("deeppink", "naive-mlp"):
            raise ValueError("method must be 'deeppink' or 'naive-mlp'")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, doc):
        doc = dict(doc)
        doc["train"] = net.TrainConfig(**doc.get("train", {}))
        return cls(**doc)


@dataclass(frozen=True)
class GroundTruth:
    beta: np.ndarray
    support: tuple


def precision_matrix(p, rho):
    idx = np.arange(p)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def gen_design(cfg, rep_seed):
    """Design ``X`` (rows ``N(0, Omega^{-1})``) and the analytic ``Sigma``.

    ``rep_seed`` is an integer or a ``Generator``.  With ``Omega = L L^T`` a
    row is ``L^{-T} e`` for standard normal ``e``.
    """
    gen = _as_gen(rep_seed, rngmod.DESIGN)
    omega = precision_matrix(cfg.p, cfg.rho)
    try:
        L = linalg.cholesky(omega, lower=True)
    except linalg.LinAlgError as exc:
        raise NumericalFailure(f"precision matrix Cholesky failed: {exc}") from exc
    E = gen.standard_normal((cfg.n, cfg.p))
    X = linalg.solve_triangular(L, E.T, lower=True, trans="T").T
    sigma = linalg.cho_solve((L, True), np.eye(cfg.p))
    sigma = 0.5 * (sigma + sigma.T)
    return knockoffs.DesignMatrix(X), sigma


def gen_beta(cfg, rep_seed):
    """Sparse coefficients: ``s_sparsity`` random positions, random signs."""
    gen = _as_gen(rep_seed, rngmod.BETA)
    support = np.sort(gen.choice(cfg.p, size=cfg.s_sparsity, replace=False))
    signs = gen.choice([-1.0, 1.0], size=cfg.s_sparsity)
    beta = np.zeros(cfg.p)
    beta[support] = cfg.amplitude * signs
    beta.setflags(write=False)
    return GroundTruth(beta=beta, support=tuple(int(j) for j in support))


def link(u):
    return u ** 3 / 2.0


def gen_response(X, truth, cfg, rep_seed):
    """``y = X beta + eps`` or ``y = (X beta)**3 / 2 + eps``, ``eps ~ N(0, sigma^2)``."""
    values = getattr(X, "values", X)
    if values.shape[1] != truth.beta.shape[0]:
        raise DimensionMismatch("design and coefficient vector disagree")
    gen = _as_gen(rep_seed, rngmod.NOISE)
    u = values @ truth.beta
    eps = cfg.sigma_noise * gen.standard_normal(values.shape[0])
    mean = u if cfg.model == "linear" else link(u)
    return knockoffs.ResponseVector(mean + eps)


def _as_gen(rep_seed, purpose):
    if isinstance(rep_seed, np.random.Generator):
        return rep_seed
    return rngmod.stream(rep_seed, purpose)


def rep_seed(cfg, rep):
    """Integer seed of repetition ``rep``; its purposes are sub-streams of it."""
    return rngmod.derive_seed(cfg.seed, rep)


def run_repetition(cfg, rep):
    """Generate, knock off, train, filter and score one repetition."""
    seed = rep_seed(cfg, rep)
    X, sigma = gen_design(cfg, seed)
    truth = gen_beta(cfg, seed)
    y = gen_response(X, truth, cfg, seed)
    Xc = knockoffs.standardize(X, scale=False)
    s = knockoffs.equicorrelated_s(sigma)
    model = knockoffs.build_knockoff_model(sigma, s)
    aug = knockoffs.sample_knockoffs(Xc, model, rngmod.stream(seed, rngmod.KNOCKOFF))
    tcfg = replace(cfg.train, seed=rngmod.derive_seed(seed, rngmod.RUNS))
    W = net.run_ensemble(aug, y.center(), tcfg, pairwise=cfg.method == "deeppink")
    report = kfilter.select(W, cfg.q, cfg.rule)
    metrics = kfilter.evaluate(report, truth.support)
    return {
        "rep": rep,
        "seed": seed,
        "fdp": metrics.fdp,
        "power": metrics.power,
        "n_selected": metrics.n_selected,
        "n_true": metrics.n_true,
        "threshold": None if np.isinf(report.threshold) else report.threshold,
        "selected": list(report.selected),
        "support": list(truth.support),
        "W": W.tolist(),
    }


def _run_one(args):
    cfg, rep = args
    try:
        return run_repetition(cfg, rep)
    except DeepPinkError:
        raise
    except Exception as exc:
        raise RuntimeError(f"repetition {rep} failed: {exc}") from exc


def default_workers():
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def run_experiment(cfg, workers=None):
    """Run every repetition and aggregate empirical FDR and power.

    Records come back in repetition order regardless of ``workers``.
    """
    workers = default_workers() if workers is None else max(1, int(workers))
    jobs = [(cfg, r) for r in range(cfg.repetitions)]
    if workers == 1 or cfg.repetitions == 1:
        records = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, cfg.repetitions)) as pool:
            records = list(pool.map(_run_one, jobs))
    fdp = np.array([r["fdp"] for r in records])
    power = np.array([r["power"] for r in records])
    return {
        "config": cfg.to_dict(),
        "knockoff_covariance": "known",
        "repetitions": records,
        "aggregate": {
            "fdr": float(fdp.mean()),
            "power": float(power.mean()),
            "mean_selected": float(np.mean([r["n_selected"] for r in records])),
            "median_selected": float(np.median([r["n_selected"] for r in records])),
        },
    }
