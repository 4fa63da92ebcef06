"""Loss-landscape smoothness: the Lipschitz constant of the loss gradient,
which upper-bounds the Hessian norm.  Lower values mean flatter landscapes.

Each learner gets its own closed form:

* feedforward: (k-1)/(k m) * sup |a^(L-1)| / |W^(L)|, from the one-epoch
  probe's cached activations (proportionality constant taken as 1);
* logistic regression: the same with the inputs as activations;
* Gaussian discriminant: sup over samples of the Frobenius norm of the
  fourth-order likelihood Hessian in the covariance, no training at all.

A center-difference fallback covers learners without a closed form.
Frobenius norms throughout; any consistent norm preserves the ordering,
which is all the search uses.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .data_io import Dataset
from .errors import NonFinite, ZeroWeightNorm
from .learners import FFState, GNBState, LRState, fit_gnb

# flattest-first selection wins at or below this Hessian-norm bound;
# above it, bumpier-landscape optimizers tend to do better
RECOMMEND_THRESHOLD = 5.6

# boundary between the low (software-metrics-like, mean ~2) and high
# (interleaved/AI-like, mean ~5) smoothness populations
PROFILE_THRESHOLD = 3.5


@dataclass(frozen=True)
class SmoothnessReport:
    beta: float
    learner_kind: str
    components: dict = field(default_factory=dict)
    norm_kind: str = "frobenius"

    def __post_init__(self):
        if not math.isfinite(self.beta) or self.beta < 0:
            raise ValueError(f"beta must be finite and >= 0, got {self.beta}")

    @property
    def raw_beta(self) -> float:
        return self.components.get("raw_beta", self.beta)

    @property
    def reg_addend(self) -> float:
        return self.components.get("reg_addend", 0.0)

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "learner_kind": self.learner_kind,
            "norm_kind": self.norm_kind,
            "components": {
                key: (val.tolist() if isinstance(val, np.ndarray) else val)
                for key, val in self.components.items()
            },
        }


def regularization_addend(reg) -> float:
    """Smoothness increase from the penalty term.

    ``reg`` is None, ``("l2", lam)`` for lam/2 |w|^2, or
    ``("tikhonov", Gamma)`` for |Gamma w|^2, which adds 2 |Gamma|_F^2.
    An L1 term is not differentiable and contributes nothing here.
    """
    if reg is None or reg == "none" or (isinstance(reg, tuple) and reg[0] == "none"):
        return 0.0
    kind, value = reg
    if kind == "l2":
        lam = float(value)
        if lam < 0:
            raise ValueError("l2 strength must be >= 0")
        return lam
    if kind == "tikhonov":
        gamma = np.asarray(value, dtype=np.float64)
        return 2.0 * float((gamma * gamma).sum())
    raise ValueError(f"unknown regularizer {kind!r}")


def _norm_ratio_beta(k, m, sup_norm, weight_norm, addend, learner_kind,
                     extra=None):
    if weight_norm == 0.0:
        raise ZeroWeightNorm(f"{learner_kind} probe has zero weight norm")
    raw = (k - 1) / (k * m) * sup_norm / weight_norm
    components = {
        "k": k,
        "m": m,
        "activation_norm_sup": sup_norm,
        "weight_norm": weight_norm,
        "raw_beta": raw,
        "reg_addend": addend,
    }
    if extra:
        components.update(extra)
    return SmoothnessReport(beta=raw + addend, learner_kind=learner_kind,
                            components=components)


def smoothness_ff(state: FFState, train: Dataset | None = None,
                  reg=None) -> SmoothnessReport:
    """Feedforward smoothness from the probe's cached final-epoch artifacts."""
    addend = (regularization_addend(reg) if reg is not None
              else state.cfg.l2_lambda)
    return _norm_ratio_beta(state.k, state.m, state.activation_norm_sup,
                            state.out_weight_norm, addend, "ff")


def smoothness_lr(state: LRState, train: Dataset | None = None,
                  reg=None) -> SmoothnessReport:
    """Logistic-regression smoothness: input norms over the weight norm."""
    addend = (regularization_addend(reg) if reg is not None
              else state.cfg.l2_lambda)
    return _norm_ratio_beta(state.k, state.m, state.activation_norm_sup,
                            state.out_weight_norm, addend, "lr")


def smoothness_gnb(state: GNBState, train: Dataset) -> SmoothnessReport:
    """Gaussian-discriminant smoothness, straight from data statistics.

    For each sample, with P the precision matrix, w the deviation from its
    class mean, and G = P (w w^T + Sigma/2) P, the Hessian of the
    log-likelihood in the covariance is the fourth-order tensor
    P (.) G - P (.) P / 2 + G (.) P; beta is the largest Frobenius norm of
    its n^2 x n^2 matricization over the training samples.
    """
    dev = train.X - state.means[train.y]
    P = state.precision
    A = np.ascontiguousarray(dev @ P)
    C0 = np.ascontiguousarray(0.5 * P @ state.sigma @ P)
    norms = kernels.gnb_sample_norms(A, np.ascontiguousarray(P), C0)
    sup = float(np.max(norms))
    if not math.isfinite(sup):
        raise NonFinite("tensor norm overflowed; covariance is near-singular")
    return SmoothnessReport(
        beta=sup,
        learner_kind="gnb",
        components={
            "k": state.k,
            "m": state.m,
            "n": train.n,
            "ridge": state.ridge,
            "raw_beta": sup,
            "reg_addend": 0.0,
            "argmax_sample": int(np.argmax(norms)),
        },
    )


def smoothness_of(state, train: Dataset) -> SmoothnessReport:
    if isinstance(state, FFState):
        return smoothness_ff(state, train)
    if isinstance(state, LRState):
        return smoothness_lr(state, train)
    if isinstance(state, GNBState):
        return smoothness_gnb(state, train)
    raise TypeError(f"no smoothness rule for {type(state).__name__}")


def finite_diff_smoothness(E, x: float, h: float) -> float:
    """|E(x+h) - 2 E(x) + E(x-h)| / h^2, the O(h^2) center-difference probe."""
    if h <= 0:
        raise ValueError("h must be positive")
    values = [E(x + h), E(x), E(x - h)]
    if not all(math.isfinite(v) for v in values):
        raise NonFinite(f"probe returned non-finite values at x={x}, h={h}")
    return abs(values[0] - 2.0 * values[1] + values[2]) / (h * h)


def dataset_profile(d: Dataset, threshold: float = PROFILE_THRESHOLD) -> dict:
    """Training-free profile: fit the Gaussian learner, return its beta.

    Note beta is unit-dependent; the label thresholds assume features at
    natural scales comparable to the shipped fixtures.
    """
    state = fit_gnb(d)
    report = smoothness_gnb(state, d)
    label = "SE-like" if report.beta < threshold else "AI-like"
    return {"beta": report.beta, "label": label, "report": report}


def recommend_optimizer(beta: float,
                        threshold: float = RECOMMEND_THRESHOLD) -> str:
    """"smoothie" at or below the threshold (boundary inclusive)."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    return "smoothie" if beta <= threshold else "standard"
