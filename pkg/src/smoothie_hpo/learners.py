"""Minimal from-scratch learners: feedforward softmax classifier (which also
covers logistic regression as the zero-hidden-layer case) and a shared-
covariance Gaussian classifier.

The trainers cache exactly the quantities the smoothness formulas need:
the output-layer weight norm and the per-sample penultimate-activation
norms seen during the final training epoch.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .data_io import Dataset
from .errors import InsufficientClassData, NumericOverflow, SingularCovariance


@dataclass(frozen=True)
class FFConfig:
    layers: int                 # hidden layers; 0 gives the logistic shape
    units_per_layer: int = 4
    epochs: int = 50
    learning_rate: float = 0.03
    batch_size: int = 32
    l2_lambda: float = 0.0
    l1_lambda: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.layers < 0:
            raise ValueError("layers must be >= 0")
        if self.layers > 0 and self.units_per_layer < 1:
            raise ValueError("units_per_layer must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate < 0 or self.l2_lambda < 0 or self.l1_lambda < 0:
            raise ValueError("rates and penalties must be non-negative")


@dataclass(frozen=True)
class LRConfig:
    penalty: str = "l2"         # "l1", "l2", or "l1l2"
    C: float = 1.0              # inverse regularization strength
    epochs: int = 50
    learning_rate: float = 0.03
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.penalty not in ("l1", "l2", "l1l2"):
            raise ValueError(f"unknown penalty {self.penalty!r}")
        if self.C <= 0:
            raise ValueError("C must be positive")

    @property
    def l1_lambda(self) -> float:
        return 1.0 / self.C if "l1" in self.penalty else 0.0

    @property
    def l2_lambda(self) -> float:
        return 1.0 / self.C if self.penalty in ("l2", "l1l2") else 0.0


@dataclass
class FFState:
    weights: list
    biases: list
    cfg: FFConfig
    k: int
    m: int
    activation_norms: np.ndarray    # per-sample |a^(L-1)| over the final epoch
    activation_norm_sup: float
    loss_history: list

    @property
    def out_weight_norm(self) -> float:
        W = self.weights[-1]
        return float(np.sqrt((W * W).sum()))


@dataclass
class LRState:
    W: np.ndarray                   # (n, k)
    bias: np.ndarray
    cfg: LRConfig
    k: int
    m: int
    activation_norms: np.ndarray
    activation_norm_sup: float
    loss_history: list

    @property
    def out_weight_norm(self) -> float:
        return float(np.sqrt((self.W * self.W).sum()))


@dataclass
class GNBState:
    priors: np.ndarray              # (k,)
    means: np.ndarray               # (k, n)
    sigma: np.ndarray               # (n, n), pooled within-class + ridge
    precision: np.ndarray
    ridge: float
    k: int
    m: int


def softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _init_params(n_in: int, cfg: FFConfig, k: int, rng):
    dims = [n_in] + [cfg.units_per_layer] * cfg.layers + [k]
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        r = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-r, r, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def forward(weights, biases, X):
    """Forward pass; returns (activations per layer incl. input, z per layer)."""
    a = X
    acts, zs = [a], []
    last = len(weights) - 1
    for l, (W, b) in enumerate(zip(weights, biases)):
        z = a @ W + b
        zs.append(z)
        a = softmax(z) if l == last else np.maximum(z, 0.0)
        acts.append(a)
    return acts, zs


def loss_and_grads(weights, biases, X, y, l2_lambda=0.0, l1_lambda=0.0):
    """Mean cross-entropy (+ penalties) and gradients for one batch."""
    m = X.shape[0]
    acts, zs = forward(weights, biases, X)
    probs = acts[-1]
    eps = 1e-300                      # guards log(0); exp underflow only
    loss = -np.log(probs[np.arange(m), y] + eps).mean()
    if l2_lambda:
        loss += 0.5 * l2_lambda * sum((W * W).sum() for W in weights)
    if l1_lambda:
        loss += l1_lambda * sum(np.abs(W).sum() for W in weights)

    grads_W = [None] * len(weights)
    grads_b = [None] * len(weights)
    delta = probs.copy()
    delta[np.arange(m), y] -= 1.0
    delta /= m
    for l in range(len(weights) - 1, -1, -1):
        grads_W[l] = acts[l].T @ delta
        grads_b[l] = delta.sum(axis=0)
        if l2_lambda:
            grads_W[l] += l2_lambda * weights[l]
        if l1_lambda:
            grads_W[l] += l1_lambda * np.sign(weights[l])
        if l > 0:
            delta = (delta @ weights[l].T) * (zs[l - 1] > 0.0)
    return loss, grads_W, grads_b


def _train_engine(train: Dataset, cfg: FFConfig, epochs: int):
    rng = np.random.default_rng(cfg.seed)
    weights, biases = _init_params(train.n, cfg, train.k, rng)
    m = train.m
    norms = np.zeros(m)
    loss_history = []
    for epoch in range(epochs):
        order = rng.permutation(m)
        final = epoch == epochs - 1
        epoch_loss = 0.0
        for start in range(0, m, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            Xb, yb = train.X[batch], train.y[batch]
            if final:
                acts, _ = forward(weights, biases, Xb)
                norms[batch] = np.sqrt((acts[-2] * acts[-2]).sum(axis=1))
            loss, gW, gb = loss_and_grads(
                weights, biases, Xb, yb, cfg.l2_lambda, cfg.l1_lambda)
            if not math.isfinite(loss):
                raise NumericOverflow(f"loss diverged at epoch {epoch}")
            epoch_loss += loss * len(batch)
            for l in range(len(weights)):
                weights[l] -= cfg.learning_rate * gW[l]
                biases[l] -= cfg.learning_rate * gb[l]
        loss_history.append(epoch_loss / m)
    return weights, biases, norms, loss_history


def train_ff(train: Dataset, cfg: FFConfig,
             epochs_override: int | None = None) -> FFState:
    """Mini-batch gradient descent on softmax cross-entropy.

    ``epochs_override`` is the probe hook: 1 runs exactly one pass, the
    budget under which smoothness is assessed.
    """
    epochs = cfg.epochs if epochs_override is None else int(epochs_override)
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    weights, biases, norms, history = _train_engine(train, cfg, epochs)
    return FFState(weights=weights, biases=biases, cfg=cfg, k=train.k,
                   m=train.m, activation_norms=norms,
                   activation_norm_sup=float(norms.max()),
                   loss_history=history)


def train_lr(train: Dataset, cfg: LRConfig,
             epochs_override: int | None = None) -> LRState:
    """Logistic regression: the zero-hidden-layer feedforward path."""
    ff_cfg = FFConfig(layers=0, units_per_layer=1, epochs=cfg.epochs,
                      learning_rate=cfg.learning_rate,
                      batch_size=cfg.batch_size, l2_lambda=cfg.l2_lambda,
                      l1_lambda=cfg.l1_lambda, seed=cfg.seed)
    state = train_ff(train, ff_cfg, epochs_override)
    return LRState(W=state.weights[0], bias=state.biases[0], cfg=cfg,
                   k=state.k, m=state.m,
                   activation_norms=state.activation_norms,
                   activation_norm_sup=state.activation_norm_sup,
                   loss_history=state.loss_history)


def fit_gnb(train: Dataset, ridge_factor: float = 1e-6,
            max_doublings: int = 20) -> GNBState:
    """Class means, priors, and pooled within-class covariance with a ridge.

    The ridge starts at ridge_factor * trace(Sigma)/n (or ridge_factor on
    all-zero covariance) and doubles until Cholesky succeeds.
    """
    counts = train.class_counts()
    low = np.flatnonzero(counts < 2)
    if low.size:
        raise InsufficientClassData(
            f"class(es) {low.tolist()} have fewer than 2 samples")
    means = np.stack([train.X[train.y == c].mean(axis=0)
                      for c in range(train.k)])
    dev = train.X - means[train.y]
    sigma0 = (dev.T @ dev) / train.m
    priors = counts / train.m

    scale = np.trace(sigma0) / train.n
    if scale <= 0.0:
        scale = 1.0
    ridge = ridge_factor * scale
    for _ in range(max_doublings + 1):
        sigma = sigma0 + ridge * np.eye(train.n)
        try:
            np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError:
            ridge *= 2.0
            continue
        precision = np.linalg.inv(sigma)
        precision = (precision + precision.T) / 2.0
        return GNBState(priors=priors, means=means, sigma=sigma,
                        precision=precision, ridge=ridge, k=train.k,
                        m=train.m)
    raise SingularCovariance(
        f"covariance not positive definite after {max_doublings} doublings")


def gnb_log_likelihood(state: GNBState, d: Dataset) -> float:
    """Joint Gaussian log-likelihood of labeled data under the fitted state."""
    dev = d.X - state.means[d.y]
    sign, logdet = np.linalg.slogdet(state.sigma)
    if sign <= 0:
        raise SingularCovariance("covariance lost positive definiteness")
    quad = np.einsum("ij,jk,ik->i", dev, state.precision, dev)
    const = d.n * math.log(2.0 * math.pi)
    return float(
        np.log(state.priors[d.y]).sum()
        - 0.5 * (quad + logdet + const).sum()
    )


def _scores(state, X: np.ndarray) -> np.ndarray:
    if isinstance(state, FFState):
        acts, _ = forward(state.weights, state.biases, X)
        return acts[-1]
    if isinstance(state, LRState):
        return softmax(X @ state.W + state.bias)
    if isinstance(state, GNBState):
        out = np.empty((X.shape[0], state.k))
        for c in range(state.k):
            dev = X - state.means[c]
            quad = np.einsum("ij,jk,ik->i", dev, state.precision, dev)
            out[:, c] = math.log(state.priors[c]) - 0.5 * quad
        return out
    raise TypeError(f"cannot predict with {type(state).__name__}")


def predict(state, X: np.ndarray) -> np.ndarray:
    """Class ids by argmax score; exact ties resolve to the lowest id."""
    return np.argmax(_scores(state, X), axis=1).astype(np.int64)


def evaluate(state, test: Dataset, metric: str, positive: int = 1) -> float:
    from .stats import classification_metrics

    y_pred = predict(state, test.X)
    values = classification_metrics(test.y, y_pred, test.k, positive=positive)
    if metric not in values:
        raise ValueError(f"unknown metric {metric!r}")
    return values[metric]
