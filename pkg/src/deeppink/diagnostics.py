"""Self-checks: finite-difference gradient audit and knockoff exchangeability."""

import numpy as np

from . import knockoffs
from . import net
from . import simgen

GRADIENT_TOLERANCE = 1e-4
EXCHANGEABILITY_TOLERANCE = 0.03


def _fd_gradient(network, batch, lam, h):
    theta = np.array(network.params)
    out = np.empty_like(theta)
    for i in range(theta.size):
        old = theta[i]
        theta[i] = old + h
        up = net.loss(network.with_params(theta), batch, lam)
        theta[i] = old - h
        dn = net.loss(network.with_params(theta), batch, lam)
        theta[i] = old
        out[i] = (up - dn) / (2 * h)
    return out


def _kink_gap(network, X, K):
    g = network.w0 * (network.z * X + network.z_tilde * K)
    pre1 = g @ network.w1 + network.b1
    pre2 = np.maximum(pre1, 0.0) @ network.w2 + network.b2
    return min(np.abs(pre1).min(), np.abs(pre2).min())


def gradient_check(seed=0, n_networks=50, max_p=8, batch_size=3, step=1e-5, lam=0.01,
                   kink_margin=1e-6):
    """Compare :func:`net.backward` with central differences on random networks.

    Networks whose pre-activations land within ``kink_margin`` of a ReLU
    kink are redrawn.  Returns a record with the worst relative error.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    checked = 0
    while checked < n_networks:
        p = int(rng.integers(2, max_p + 1))
        base = net.init_network(p, rng)
        theta = np.array(base.params) + rng.normal(0, 0.3, base.params.size)
        network = base.with_params(theta)
        X = rng.normal(size=(batch_size, p))
        K = rng.normal(size=(batch_size, p))
        y = rng.normal(size=batch_size)
        if _kink_gap(network, X, K) < kink_margin:
            continue
        batch = (X, K, y)
        analytic = net.backward(network, batch, lam).params
        numeric = _fd_gradient(network, batch, lam, step)
        diff = np.abs(analytic - numeric)
        rel = diff / np.maximum(np.abs(analytic) + np.abs(numeric), 1e-8)
        # absolute agreement at round-off level counts as exact
        rel[diff < 1e-9] = 0.0
        worst = max(worst, float(rel.max()))
        checked += 1
    return {"networks": checked, "max_relative_error": worst,
            "tolerance": GRADIENT_TOLERANCE, "passed": worst <= GRADIENT_TOLERANCE}


def exchangeability_check(seed=0, n=100000, p=10, rho=0.5, corrupt_s=False):
    """Sample knockoffs for the AR-precision design and compare second moments.

    ``corrupt_s`` builds the sampler with a gap vector that disagrees with
    the one used as the reference, which must be detected.
    """
    cfg = simgen.SimConfig(n=n, p=p, rho=rho, s_sparsity=0, repetitions=1, seed=seed)
    rs = simgen.rep_seed(cfg, 0)
    X, sigma = simgen.gen_design(cfg, rs)
    X = knockoffs.standardize(X, scale=False)
    s = knockoffs.equicorrelated_s(sigma)
    model = knockoffs.build_knockoff_model(sigma, s)
    sampler = knockoffs.build_knockoff_model(sigma, 0.25 * s) if corrupt_s else model
    aug = knockoffs.sample_knockoffs(X, sampler, simgen.rngmod.stream(rs, simgen.rngmod.KNOCKOFF))
    report = knockoffs.exchangeability_diagnostic(aug, model)
    Z = aug.stacked()
    emp = Z.T @ Z / (n - 1)
    block_dev = float(np.max(np.abs(emp - model.joint_covariance())))
    report["joint_max_deviation"] = block_dev
    report["joint_tolerance"] = EXCHANGEABILITY_TOLERANCE
    report["passed"] = bool(report["passed"] and block_dev <= EXCHANGEABILITY_TOLERANCE)
    return report
