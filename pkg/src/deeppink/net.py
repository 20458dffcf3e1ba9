"""Paired-input network with a two-hidden-layer ReLU MLP.

Forward pass for one observation (row-vector convention)::

    h   = z * x + z_tilde * x_tilde        pairwise filters, linear
    g   = w0 * h                           filter-to-MLP weights
    a1  = relu(g @ w1 + b1)                w1[i, k]: input i -> hidden k
    a2  = relu(a1 @ w2 + b2)
    y   = a2 @ w3 + b3

With this orientation the product ``w1 @ w2 @ w3`` is the linear path weight
from each MLP input to the output, so the aggregate importance is
``w0 * (w1 @ w2 @ w3)`` with no transposes.

All parameters live in one flat float64 vector; the named attributes of
:class:`PinkNetwork` are read-only views into it.  The ``pairwise=False``
variant drops the filter layer and feeds ``[x, x_tilde]`` (``2p`` inputs)
straight into ``w1``.
"""

from dataclasses import asdict, dataclass

import numba
import numpy as np

from . import rng as rngmod
from .errors import DimensionMismatch, DivergedTraining

_FILTER_INIT = 1.0 / np.sqrt(2.0)


def _layout(p, pairwise):
    n_in = p if pairwise else 2 * p
    blocks = []
    if pairwise:
        blocks += [("z", (p,), True), ("z_tilde", (p,), True), ("w0", (p,), True)]
    blocks += [("w1", (n_in, p), True), ("b1", (p,), False),
               ("w2", (p, p), True), ("b2", (p,), False),
               ("w3", (p,), True), ("b3", (), False)]
    out = {}
    start = 0
    for name, shape, penalized in blocks:
        size = int(np.prod(shape, dtype=int))
        out[name] = (slice(start, start + size), shape, penalized)
        start += size
    return out, start


class PinkNetwork:
    """Parameters of one network, stored flat.

    Parameters
    ----------
    p : int
        Number of original features.
    params : ndarray
        Flat parameter vector in layout order.
    pairwise : bool
        ``False`` builds the plain MLP baseline on the augmented ``2p`` inputs.
    """

    def __init__(self, p, params, pairwise=True):
        layout, size = _layout(p, pairwise)
        params = np.array(params, dtype=float).ravel()
        if params.shape != (size,):
            raise DimensionMismatch(f"expected {size} parameters for p={p}, got {params.size}")
        params.setflags(write=False)
        self.p = int(p)
        self.pairwise = bool(pairwise)
        self.params = params
        self._layout = layout

    def __getattr__(self, name):
        layout = self.__dict__.get("_layout", {})
        if name in layout:
            sl, shape, _ = layout[name]
            return self.params[sl].reshape(shape)
        raise AttributeError(name)

    @property
    def names(self):
        return list(self._layout)

    def penalty_mask(self):
        mask = np.zeros(self.params.size, dtype=bool)
        for sl, _, penalized in self._layout.values():
            mask[sl] = penalized
        return mask

    def with_params(self, params):
        return PinkNetwork(self.p, params, self.pairwise)

    @classmethod
    def from_arrays(cls, pairwise=True, **arrays):
        """Assemble a network from named arrays (missing biases default to zero)."""
        p = int(np.size(arrays["w3"]))
        layout, size = _layout(p, pairwise)
        flat = np.zeros(size)
        for name, (sl, shape, _) in layout.items():
            if name in arrays:
                a = np.asarray(arrays[name], dtype=float)
                if a.shape != shape and a.size != int(np.prod(shape, dtype=int)):
                    raise DimensionMismatch(f"{name}: shape {a.shape}, expected {shape}")
                flat[sl] = a.ravel()
            elif not name.startswith("b"):
                raise ValueError(f"missing parameter {name}")
        return cls(p, flat, pairwise)

    def to_dict(self):
        return {name: np.asarray(getattr(self, name)).tolist() for name in self._layout}

    def __eq__(self, other):
        return (isinstance(other, PinkNetwork) and self.p == other.p
                and self.pairwise == other.pairwise
                and np.array_equal(self.params, other.params))

    def __repr__(self):
        kind = "pairwise" if self.pairwise else "naive"
        return f"PinkNetwork(p={self.p}, {kind}, {self.params.size} params)"


@dataclass(frozen=True)
class TrainConfig:
    """Optimisation settings for one network (or an ensemble of ``runs``).

    ``l1_lambda=None`` resolves to ``l1_multiplier * sqrt(2 ln p / n)`` at
    training time.
    """

    learning_rate: float = 0.001
    batch_size: int = 10
    epochs: int = 200
    l1_lambda: float = None
    l1_multiplier: float = 1.0
    runs: int = 5
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1 or self.epochs < 1 or self.runs < 1:
            raise ValueError("batch_size, epochs and runs must be >= 1")
        if self.l1_lambda is not None and self.l1_lambda < 0:
            raise ValueError("l1_lambda must be non-negative")
        if self.l1_multiplier < 0:
            raise ValueError("l1_multiplier must be non-negative")

    def resolve_lambda(self, n, p):
        if self.l1_lambda is not None:
            return float(self.l1_lambda)
        return float(self.l1_multiplier * np.sqrt(2.0 * np.log(p) / n))

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class ImportancePair:
    Z: np.ndarray
    Z_tilde: np.ndarray
    w_agg: np.ndarray

    @property
    def W(self):
        return self.Z ** 2 - self.Z_tilde ** 2


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray

    @classmethod
    def zeros(cls, size):
        return cls(np.zeros(size), np.zeros(size))


def init_network(p, seed, pairwise=True):
    """Fresh network: equal filters ``1/sqrt(2)``, He-normal weights, zero biases."""
    if p < 1:
        raise ValueError("p must be >= 1")
    layout, size = _layout(p, pairwise)
    gen = seed if isinstance(seed, np.random.Generator) else rngmod.stream(seed, rngmod.INIT)
    flat = np.zeros(size)
    for name, (sl, shape, _) in layout.items():
        if name in ("z", "z_tilde"):
            flat[sl] = _FILTER_INIT
        elif name.startswith("w"):
            fan_in = shape[0] if len(shape) == 2 else p
            flat[sl] = gen.normal(0.0, np.sqrt(2.0 / fan_in), size=shape).ravel()
    return PinkNetwork(p, flat, pairwise)


def _as_batch(batch, p=None):
    """Accept ``(X, X_tilde, y)`` arrays or a list of ``(x, x_tilde, y)`` triples."""
    if isinstance(batch, tuple) and len(batch) == 3 and np.ndim(batch[0]) == 2:
        X, K, y = batch
    else:
        batch = list(batch)
        if not batch:
            raise ValueError("empty batch")
        X = np.array([b[0] for b in batch], dtype=float)
        K = np.array([b[1] for b in batch], dtype=float)
        y = np.array([b[2] for b in batch], dtype=float)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    K = np.atleast_2d(np.asarray(K, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape != K.shape or X.shape[0] != y.shape[0] or X.shape[0] == 0:
        raise DimensionMismatch(f"batch shapes X{X.shape} K{K.shape} y{y.shape}")
    if p is not None and X.shape[1] != p:
        raise DimensionMismatch(f"batch has {X.shape[1]} features, network has {p}")
    return X, K, y


def _unpack(theta, layout):
    return {name: theta[sl].reshape(shape) for name, (sl, shape, _) in layout.items()}


def _forward_cache(P, X, K, pairwise):
    if pairwise:
        h = P["z"] * X + P["z_tilde"] * K
        g = P["w0"] * h
    else:
        h = None
        g = np.hstack([X, K])
    pre1 = g @ P["w1"] + P["b1"]
    a1 = np.maximum(pre1, 0.0)
    pre2 = a1 @ P["w2"] + P["b2"]
    a2 = np.maximum(pre2, 0.0)
    yhat = a2 @ P["w3"] + P["b3"]
    return h, g, pre1, a1, pre2, a2, yhat


def _loss_and_grad(theta, layout, pairwise, X, K, y, lam, mask):
    """Batch MSE and the gradient of MSE + L1 penalty w.r.t. the flat vector."""
    P = _unpack(theta, layout)
    h, g, pre1, a1, pre2, a2, yhat = _forward_cache(P, X, K, pairwise)
    r = yhat - y
    B = y.shape[0]
    mse = float(r @ r) / B
    grad = np.empty_like(theta)
    G = _unpack(grad, layout)

    dy = (2.0 / B) * r
    G["b3"][...] = dy.sum()
    G["w3"][...] = a2.T @ dy
    d2 = np.outer(dy, P["w3"])
    d2 *= pre2 > 0
    G["w2"][...] = a1.T @ d2
    G["b2"][...] = d2.sum(axis=0)
    d1 = d2 @ P["w2"].T
    d1 *= pre1 > 0
    G["w1"][...] = g.T @ d1
    G["b1"][...] = d1.sum(axis=0)
    if pairwise:
        dg = d1 @ P["w1"].T
        G["w0"][...] = (dg * h).sum(axis=0)
        dh = dg * P["w0"]
        # identical reductions for both members of a pair keep swaps exact
        G["z"][...] = (dh * X).sum(axis=0)
        G["z_tilde"][...] = (dh * K).sum(axis=0)

    if lam:
        grad += lam * np.sign(theta) * mask
    return mse, grad


def forward(net, x, x_tilde):
    """Prediction(s) for one row or a batch of rows."""
    X = np.asarray(x, dtype=float)
    K = np.asarray(x_tilde, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    K = np.atleast_2d(K)
    if X.shape != K.shape or X.shape[1] != net.p:
        raise DimensionMismatch(f"inputs {X.shape}/{K.shape} do not match p={net.p}")
    P = _unpack(net.params, net._layout)
    yhat = _forward_cache(P, X, K, net.pairwise)[-1]
    return float(yhat[0]) if single else yhat


def l1_norm(net):
    """Sum of absolute weights, biases excluded."""
    return float(np.abs(net.params[net.penalty_mask()]).sum())


def loss(net, batch, lam):
    """Mean squared error over ``batch`` plus ``lam`` times the weight L1 norm."""
    X, K, y = _as_batch(batch, net.p)
    yhat = forward(net, X, K)
    return float(np.mean((yhat - y) ** 2)) + lam * l1_norm(net)


def backward(net, batch, lam):
    """Exact gradient of :func:`loss`, returned as a network-shaped record.

    The ReLU derivative and the L1 subgradient are both taken as 0 at 0.
    """
    X, K, y = _as_batch(batch, net.p)
    _, grad = _loss_and_grad(np.asarray(net.params), net._layout, net.pairwise,
                                X, K, y, lam, net.penalty_mask())
    return net.with_params(grad)


def adam_step(params, grads, state, t, cfg):
    """One bias-corrected Adam update; returns ``(new_params, new_state)``."""
    if t < 1:
        raise ValueError("Adam step index starts at 1")
    b1, b2 = cfg.adam_beta1, cfg.adam_beta2
    m = b1 * state.m + (1.0 - b1) * grads
    v = b2 * state.v + (1.0 - b2) * grads * grads
    m_hat = m / (1.0 - b1 ** t)
    v_hat = v / (1.0 - b2 ** t)
    new = params - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)
    return new, AdamState(m, v)


@numba.njit(cache=True, error_model="numpy",
            fastmath={"nsz", "arcp", "contract", "afn", "reassoc"})
def _adam_l1_inplace(theta, grad, m, v, mask, lam, b1, b2, c1, c2, lr, eps):
    # fused L1 subgradient + Adam; c1, c2 are the bias-correction denominators
    for i in range(theta.shape[0]):
        th = theta[i]
        g = grad[i] + lam * mask[i] * ((th > 0.0) - (th < 0.0))
        mi = b1 * m[i] + (1.0 - b1) * g
        vi = b2 * v[i] + (1.0 - b2) * g * g
        m[i] = mi
        v[i] = vi
        theta[i] = th - lr * (mi / c1) / (np.sqrt(vi / c2) + eps)


# overflow is reported once per epoch as DivergedTraining, not as warnings
@np.errstate(over="ignore", invalid="ignore")
def _train_arrays(X, K, y, cfg, seed, pairwise):
    n, p = X.shape
    lam = cfg.resolve_lambda(n, p)
    net = init_network(p, rngmod.stream(seed, rngmod.INIT), pairwise)
    shuffler = rngmod.stream(seed, rngmod.SHUFFLE)
    layout = net._layout
    mask = net.penalty_mask().astype(float)
    theta = np.array(net.params)
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    b1, b2, lr, eps = cfg.adam_beta1, cfg.adam_beta2, cfg.learning_rate, cfg.adam_eps
    bs = cfg.batch_size
    t = 0
    for epoch in range(cfg.epochs):
        order = shuffler.permutation(n)
        total = 0.0
        for start in range(0, n, bs):
            idx = order[start:start + bs]
            mse, grad = _loss_and_grad(theta, layout, pairwise, X[idx], K[idx], y[idx],
                                       0.0, mask)
            total += mse * idx.size
            t += 1
            _adam_l1_inplace(theta, grad, m, v, mask, lam, b1, b2,
                             1.0 - b1 ** t, 1.0 - b2 ** t, lr, eps)
        epoch_loss = total / n + lam * float(np.abs(theta) @ mask)
        if not np.isfinite(epoch_loss) or not np.all(np.isfinite(theta)):
            raise DivergedTraining(epoch + 1, epoch_loss)
    return net.with_params(theta)


def _training_arrays(aug, y):
    yv = np.asarray(getattr(y, "values", y), dtype=float).ravel()
    if yv.shape[0] != aug.n:
        raise DimensionMismatch(f"response length {yv.shape[0]} != {aug.n} rows")
    if not getattr(y, "centered", False):
        yv = yv - yv.mean()
    return np.asarray(aug.X), np.asarray(aug.knockoff), yv


def train(aug, y, cfg, seed=None, pairwise=True):
    """Train one network with minibatch Adam.

    Parameters
    ----------
    aug : AugmentedDesign
    y : ResponseVector or array_like
        Centered here if not already.
    cfg : TrainConfig
    seed : int, optional
        Overrides ``cfg.seed``; initialisation and shuffling draw from
        separate sub-streams of it.
    pairwise : bool
        ``False`` trains the plain-MLP baseline.

    Raises
    ------
    DivergedTraining
        If the epoch loss or any parameter becomes non-finite.
    """
    X, K, yv = _training_arrays(aug, y)
    return _train_arrays(X, K, yv, cfg, cfg.seed if seed is None else seed, pairwise)


def importance(net):
    """Filter-weighted path importances ``Z = z * w``, ``Z_tilde = z_tilde * w``.

    ``w = w0 * (w1 @ w2 @ w3)``.  For the plain-MLP baseline the path product
    has ``2p`` entries; entries ``j`` and ``j + p`` give ``Z_j`` and
    ``Z_tilde_j``, and ``w_agg`` is reported as the pair's original-side path.
    """
    path = net.w1 @ (net.w2 @ net.w3)
    if net.pairwise:
        w = net.w0 * path
        return ImportancePair(net.z * w, net.z_tilde * w, w)
    p = net.p
    return ImportancePair(path[:p].copy(), path[p:].copy(), path[:p].copy())


def run_seeds(cfg):
    """The per-run seeds an ensemble derives from ``cfg.seed``."""
    return [rngmod.derive_seed(cfg.seed, rngmod.RUNS, r) for r in range(cfg.runs)]


def run_ensemble(aug, y, cfg, pairwise=True, aggregate="mean_w", seeds=None,
                 return_networks=False):
    """Train ``cfg.runs`` networks and combine their knockoff statistics.

    Parameters
    ----------
    aggregate : {"mean_w", "mean_importance"}
        ``mean_w`` averages ``Z**2 - Z_tilde**2`` over runs;
        ``mean_importance`` averages ``Z`` and ``Z_tilde`` first.
    seeds : sequence of int, optional
        Explicit per-run seeds (default :func:`run_seeds`).
    """
    if aggregate not in ("mean_w", "mean_importance"):
        raise ValueError(f"unknown aggregate {aggregate!r}")
    seeds = run_seeds(cfg) if seeds is None else list(seeds)
    X, K, yv = _training_arrays(aug, y)
    nets = [_train_arrays(X, K, yv, cfg, s, pairwise) for s in seeds]
    imps = [importance(net) for net in nets]
    if aggregate == "mean_w":
        W = np.mean([imp.W for imp in imps], axis=0)
    else:
        Z = np.mean([imp.Z for imp in imps], axis=0)
        Zt = np.mean([imp.Z_tilde for imp in imps], axis=0)
        W = Z ** 2 - Zt ** 2
    if return_networks:
        return W, nets
    return W


def network_to_json(net, cfg=None, seed=None, importances=None):
    """JSON-ready record of a trained network and its importances."""
    imp = importances if importances is not None else importance(net)
    return {
        "p": net.p,
        "pairwise": net.pairwise,
        "seed": seed,
        "config": None if cfg is None else cfg.to_dict(),
        "weights": net.to_dict(),
        "importance": {
            "Z": imp.Z.tolist(),
            "Z_tilde": imp.Z_tilde.tolist(),
            "w_agg": imp.w_agg.tolist(),
            "W": imp.W.tolist(),
        },
    }


def network_from_json(doc):
    layout, _ = _layout(doc["p"], doc["pairwise"])
    return PinkNetwork.from_arrays(doc["pairwise"], **{k: doc["weights"][k] for k in layout})
