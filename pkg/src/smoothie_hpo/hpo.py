"""The two-stage search: probe many configurations cheaply, fully run the
flattest few, return the metric-best.  Plus the random-search baseline and
the sampling-budget coverage bounds.

Determinism: every random draw in a trial derives from
(master seed, config index), never from scheduling order.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .data_io import Dataset
from .errors import (AllProbesFailed, ExactCoverageImpossible,
                     InvalidGeometry, SmoothieError, SpaceTooSmall)
from .learners import FFConfig, LRConfig, fit_gnb, predict, train_ff, train_lr
from .preprocess import SCALER_KINDS, fit_scaler, fuzzy_sample, label_engineer, smote
from .smoothness import SmoothnessReport, smoothness_ff, smoothness_gnb, smoothness_lr
from .stats import classification_metrics, metric_direction

KIND_ORDER = ("ff", "lr", "gnb")

DEFAULT_TRAIN_PARAMS = {"epochs": 50, "learning_rate": 0.03, "batch_size": 32}


def default_preprocessors() -> list:
    """The shipped 60-option preprocessor grid: 6 scaler choices crossed
    with 10 sampler chains."""
    scalers = [None, "normalize", "standardize", "minmax", "maxabs", "robust"]
    samplers = [
        [],
        [{"kind": "smote", "k_neighbors": 3}],
        [{"kind": "smote", "k_neighbors": 5}],
        [{"kind": "smote", "k_neighbors": 7}],
        [{"kind": "fuzzy", "times": 1}],
        [{"kind": "fuzzy", "times": 2}],
        [{"kind": "label_engineer"}],
        [{"kind": "smote", "k_neighbors": 5}, {"kind": "fuzzy", "times": 1}],
        [{"kind": "fuzzy", "times": 1}, {"kind": "smote", "k_neighbors": 5}],
        [{"kind": "label_engineer"}, {"kind": "smote", "k_neighbors": 5}],
    ]
    chains = []
    for scaler in scalers:
        head = [{"kind": scaler}] if scaler else []
        for tail in samplers:
            chains.append(head + [dict(step) for step in tail])
    return chains


def default_learner_grids() -> dict:
    """90 feedforward shapes + 9 logistic penalties + 1 Gaussian = 100."""
    return {
        "ff": [{"layers": layers, "units": units}
               for layers in range(3, 21) for units in range(2, 7)],
        "lr": [{"penalty": pen, "C": c}
               for pen in ("l1", "l2", "l1l2") for c in (0.1, 1.0, 10.0)],
        "gnb": [{}],
    }


@dataclass(frozen=True)
class ConfigPoint:
    index: int
    preprocessor: tuple          # tuple of step dicts
    learner_kind: str
    learner_params: dict

    def describe(self) -> str:
        steps = "+".join(step["kind"] for step in self.preprocessor) or "raw"
        params = ",".join(f"{k}={v}" for k, v in self.learner_params.items())
        return f"#{self.index} {steps} {self.learner_kind}({params})"

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "preprocessor": [dict(step) for step in self.preprocessor],
            "learner_kind": self.learner_kind,
            "learner_params": dict(self.learner_params),
        }


@dataclass
class SearchSpace:
    preprocessors: list = field(default_factory=default_preprocessors)
    learner_grids: dict = field(default_factory=default_learner_grids)
    train_params: dict = field(default_factory=lambda: dict(DEFAULT_TRAIN_PARAMS))

    def learner_options(self) -> list:
        options = []
        for kind in KIND_ORDER:
            for params in self.learner_grids.get(kind, []):
                options.append((kind, params))
        return options

    @property
    def total_size(self) -> int:
        return len(self.preprocessors) * len(self.learner_options())

    def restrict(self, learner_kind: str) -> "SearchSpace":
        if learner_kind not in self.learner_grids or not self.learner_grids[learner_kind]:
            raise ValueError(f"no learner grid for kind {learner_kind!r}")
        return SearchSpace(
            preprocessors=self.preprocessors,
            learner_grids={learner_kind: self.learner_grids[learner_kind]},
            train_params=self.train_params,
        )

    def config_at(self, index: int) -> ConfigPoint:
        options = self.learner_options()
        i_pre, i_learn = divmod(int(index), len(options))
        kind, params = options[i_learn]
        return ConfigPoint(index=int(index),
                           preprocessor=tuple(self.preprocessors[i_pre]),
                           learner_kind=kind, learner_params=params)


@dataclass(frozen=True)
class SmoothieParams:
    N1: int = 30
    N2: int = 5
    seed: int = 0
    selection_direction: str = "min_beta"

    def __post_init__(self):
        if not (1 <= self.N2 <= self.N1):
            raise ValueError("need 1 <= N2 <= N1")
        if self.selection_direction not in ("min_beta", "max_beta"):
            raise ValueError("selection_direction is min_beta or max_beta")


@dataclass
class TrialResult:
    config: ConfigPoint
    smoothness: SmoothnessReport | None = None
    metrics: dict | None = None
    probe_seconds: float = 0.0
    full_seconds: float = 0.0
    status: str = "ok"
    fail_reason: str = ""
    selected: bool = False

    @property
    def wall_clock(self) -> float:
        return self.probe_seconds + self.full_seconds

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "smoothness": self.smoothness.to_dict() if self.smoothness else None,
            "metrics": self.metrics,
            "probe_seconds": self.probe_seconds,
            "full_seconds": self.full_seconds,
            "wall_clock": self.wall_clock,
            "status": self.status,
            "fail_reason": self.fail_reason,
            "selected": self.selected,
        }


def sample_configs(space: SearchSpace, N1: int, seed: int) -> list:
    """N1 distinct configurations, uniform without replacement, seeded."""
    total = space.total_size
    if N1 > total:
        raise SpaceTooSmall(f"asked for {N1} of {total} configs")
    perm = np.random.default_rng(seed).permutation(total)
    return [space.config_at(i) for i in perm[:N1]]


def _trial_seeds(master_seed: int, config_index: int) -> tuple[int, int]:
    ss = np.random.SeedSequence([int(master_seed), int(config_index)])
    a, b = ss.generate_state(2, dtype=np.uint64)
    return int(a % (2 ** 63)), int(b % (2 ** 63))


def apply_chain(chain, train: Dataset, test: Dataset, seed: int):
    """Run one preprocessor chain: scalers fit on train and replayed on
    test, resamplers on train only."""
    tr, te = train, test
    fitted = []
    for step_i, step in enumerate(chain):
        params = {k: v for k, v in step.items() if k != "kind"}
        kind = step["kind"]
        step_seed = int(np.random.SeedSequence([seed, step_i]).generate_state(1)[0])
        if kind in SCALER_KINDS:
            scaler = fit_scaler(tr.X, kind)
            tr = tr.replace(X=scaler.apply(tr.X))
            te = te.replace(X=scaler.apply(te.X))
            fitted.append(scaler)
        elif kind == "smote":
            tr = smote(tr, params.get("k_neighbors", 5), seed=step_seed)
        elif kind == "fuzzy":
            tr = fuzzy_sample(tr, params.get("times", 1), seed=step_seed)
        elif kind == "label_engineer":
            tr = label_engineer(tr, seed=step_seed)
        else:
            raise ValueError(f"unknown transform kind {kind!r}")
    return tr, te, fitted


def _learner_cfg(config: ConfigPoint, train_params: dict, seed: int):
    tp = {**DEFAULT_TRAIN_PARAMS, **train_params}
    if config.learner_kind == "ff":
        return FFConfig(layers=config.learner_params["layers"],
                        units_per_layer=config.learner_params["units"],
                        epochs=tp["epochs"],
                        learning_rate=tp["learning_rate"],
                        batch_size=tp["batch_size"],
                        l2_lambda=tp.get("l2_lambda", 0.0),
                        seed=seed)
    if config.learner_kind == "lr":
        return LRConfig(penalty=config.learner_params["penalty"],
                        C=config.learner_params["C"],
                        epochs=tp["epochs"],
                        learning_rate=tp["learning_rate"],
                        batch_size=tp["batch_size"],
                        seed=seed)
    if config.learner_kind == "gnb":
        return None
    raise ValueError(f"unknown learner kind {config.learner_kind!r}")


def _train(config: ConfigPoint, tr: Dataset, cfg, epochs_override=None):
    if config.learner_kind == "ff":
        return train_ff(tr, cfg, epochs_override)
    if config.learner_kind == "lr":
        return train_lr(tr, cfg, epochs_override)
    return fit_gnb(tr)


def _probe_smoothness(config: ConfigPoint, state, tr: Dataset):
    if config.learner_kind == "ff":
        return smoothness_ff(state, tr)
    if config.learner_kind == "lr":
        return smoothness_lr(state, tr)
    return smoothness_gnb(state, tr)


def run_probe(config: ConfigPoint, train, test, train_params, master_seed) -> TrialResult:
    """Preprocess, run the one-epoch (or training-free) probe, score it."""
    transform_seed, learner_seed = _trial_seeds(master_seed, config.index)
    start = time.perf_counter()
    try:
        tr, _, _ = apply_chain(config.preprocessor, train, test, transform_seed)
        cfg = _learner_cfg(config, train_params, learner_seed)
        state = _train(config, tr, cfg,
                       epochs_override=None if config.learner_kind == "gnb" else 1)
        report = _probe_smoothness(config, state, tr)
    except (SmoothieError, ValueError) as exc:
        # contract violations (too-small resampled sets etc.) fail the
        # trial, not the search
        return TrialResult(config=config, status="failed",
                           fail_reason=f"{type(exc).__name__}: {exc}",
                           probe_seconds=time.perf_counter() - start)
    return TrialResult(config=config, smoothness=report,
                       probe_seconds=time.perf_counter() - start)


def run_full(trial: TrialResult, train, test, train_params, master_seed,
             positive: int = 1) -> TrialResult:
    """Preprocess, train to the configured budget, evaluate on test."""
    config = trial.config
    transform_seed, learner_seed = _trial_seeds(master_seed, config.index)
    start = time.perf_counter()
    try:
        tr, te, _ = apply_chain(config.preprocessor, train, test, transform_seed)
        cfg = _learner_cfg(config, train_params, learner_seed)
        state = _train(config, tr, cfg)
        y_pred = predict(state, te.X)
        trial.metrics = classification_metrics(te.y, y_pred, te.k,
                                               positive=positive)
    except (SmoothieError, ValueError) as exc:
        trial.status = "failed"
        trial.fail_reason = f"{type(exc).__name__}: {exc}"
    trial.full_seconds = time.perf_counter() - start
    return trial


def _pick_best(trials: list, metric: str) -> TrialResult:
    direction = metric_direction(metric)
    best = None
    for t in sorted(trials, key=lambda t: t.config.index):
        if t.status != "ok" or t.metrics is None:
            continue
        if best is None:
            best = t
        elif direction == "max" and t.metrics[metric] > best.metrics[metric]:
            best = t
        elif direction == "min" and t.metrics[metric] < best.metrics[metric]:
            best = t
    if best is None:
        raise SmoothieError("every full run failed")
    return best


def smoothie(train: Dataset, test: Dataset, space: SearchSpace,
             learner_kind: str, params: SmoothieParams, metric: str,
             positive: int = 1) -> tuple[TrialResult, list]:
    """Probe N1 sampled configurations, fully run the N2 flattest, return
    the metric-best full run plus every trial record.

    Failed probes are excluded from ranking and replaced with fresh
    configurations until N1 valid probes exist or the space is exhausted.
    """
    sub = space.restrict(learner_kind)
    total = sub.total_size
    if params.N1 > total:
        raise SpaceTooSmall(f"N1={params.N1} exceeds space size {total}")
    perm = np.random.default_rng(params.seed).permutation(total)

    trials, valid = [], []
    cursor = 0
    while len(valid) < params.N1 and cursor < total:
        config = sub.config_at(perm[cursor])
        cursor += 1
        trial = run_probe(config, train, test, sub.train_params, params.seed)
        trials.append(trial)
        if trial.status == "ok":
            valid.append(trial)
    if not valid:
        raise AllProbesFailed(f"all {len(trials)} probes failed")

    sign = 1.0 if params.selection_direction == "min_beta" else -1.0
    ranked = sorted(valid, key=lambda t: (sign * t.smoothness.beta,
                                          t.config.index))
    chosen = ranked[:params.N2]
    for trial in chosen:
        trial.selected = True
        run_full(trial, train, test, sub.train_params, params.seed,
                 positive=positive)
    best = _pick_best(chosen, metric)
    return best, trials


def random_search(train: Dataset, test: Dataset, space: SearchSpace,
                  learner_kind: str, N: int, seed: int, metric: str,
                  positive: int = 1) -> tuple[TrialResult, list]:
    """Fully train N sampled configurations; same sampler as smoothie."""
    sub = space.restrict(learner_kind)
    configs = sample_configs(sub, N, seed)
    trials = []
    for config in configs:
        trial = TrialResult(config=config, selected=True)
        run_full(trial, train, test, sub.train_params, seed, positive=positive)
        trials.append(trial)
    best = _pick_best(trials, metric)
    return best, trials


# ---------------------------------------------------------------------------
# sampling-budget coverage bounds
# ---------------------------------------------------------------------------


def coverage_upper(p: int, halfwidths, lengths) -> float:
    """Expected-coverage upper bound 1 - exp(-p * prod(2 k_i / L_i))."""
    if p < 0:
        raise InvalidGeometry("p must be >= 0")
    halfwidths = np.atleast_1d(np.asarray(halfwidths, dtype=np.float64))
    lengths = np.atleast_1d(np.asarray(lengths, dtype=np.float64))
    if halfwidths.shape != lengths.shape or halfwidths.size == 0:
        raise InvalidGeometry("need matching non-empty halfwidths and lengths")
    if np.any(halfwidths <= 0) or np.any(2 * halfwidths > lengths):
        raise InvalidGeometry("need 0 < 2k_i <= L_i in every dimension")
    return 1.0 - math.exp(-p * float(np.prod(2.0 * halfwidths / lengths)))


def coverage_lower(p: int, k: float, a: float, b: float) -> float:
    """Expected-coverage lower bound (b-a-k) - (1-2k)^(p-1) (b-a-3k)."""
    if b <= a:
        raise InvalidGeometry("need b > a")
    if not (0.0 < k < (b - a) / 2.0):
        raise InvalidGeometry("need 0 < k < (b-a)/2")
    if p < 1:
        raise InvalidGeometry("p must be >= 1")
    return (b - a - k) - (1.0 - 2.0 * k) ** (p - 1) * (b - a - 3.0 * k)


def monte_carlo_coverage(p: int, k: float, a: float, b: float,
                         trials: int = 100_000, seed: int = 0) -> float:
    """Empirical mean covered fraction of [a, b] from p uniform windows."""
    rng = np.random.default_rng(seed)
    points = rng.uniform(a, b, size=(trials, p))
    return float(kernels.coverage_fractions(points, k, a, b).mean())


def required_samples(halfwidth_fractions, target: float) -> int:
    """Smallest p whose coverage upper bound reaches the target."""
    fractions = np.atleast_1d(np.asarray(halfwidth_fractions, dtype=np.float64))
    if np.any((fractions <= 0) | (fractions > 1)):
        raise InvalidGeometry("each 2k/L fraction must lie in (0, 1]")
    if target >= 1.0:
        raise ExactCoverageImpossible("coverage approaches 1 only in the limit")
    if target < 0.0:
        raise InvalidGeometry("target must be >= 0")
    if target == 0.0:
        return 0
    volume = float(np.prod(fractions))
    return int(math.ceil(-math.log(1.0 - target) / volume - 1e-9))
