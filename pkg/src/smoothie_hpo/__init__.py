"""smoothie-hpo: hyper-parameter search that probes the smoothness of each
configuration's loss landscape (one training epoch, or pure data
statistics) and fully evaluates only the flattest few.
"""

from .data_io import Dataset, SplitPolicy, load_csv, load_presplit, split
from .hpo import (ConfigPoint, SearchSpace, SmoothieParams, TrialResult,
                  coverage_lower, coverage_upper, monte_carlo_coverage,
                  random_search, required_samples, sample_configs, smoothie)
from .learners import (FFConfig, FFState, GNBState, LRConfig, LRState,
                       evaluate, fit_gnb, predict, train_ff, train_lr)
from .preprocess import (fit_apply_scaler, fuzzy_sample, label_engineer,
                         smote)
from .smoothness import (SmoothnessReport, dataset_profile,
                         finite_diff_smoothness, recommend_optimizer,
                         regularization_addend, smoothness_ff,
                         smoothness_gnb, smoothness_lr)
from .stats import (Confusion, bh_adjust, kruskal_wallis, mann_whitney,
                    metrics, normalized_regret, normalized_score,
                    rank_treatments)

__version__ = "0.1.0"

__all__ = [
    "Dataset", "SplitPolicy", "load_csv", "load_presplit", "split",
    "ConfigPoint", "SearchSpace", "SmoothieParams", "TrialResult",
    "sample_configs", "smoothie", "random_search",
    "coverage_upper", "coverage_lower", "monte_carlo_coverage",
    "required_samples",
    "FFConfig", "FFState", "LRConfig", "LRState", "GNBState",
    "train_ff", "train_lr", "fit_gnb", "predict", "evaluate",
    "fit_apply_scaler", "smote", "fuzzy_sample", "label_engineer",
    "SmoothnessReport", "smoothness_ff", "smoothness_lr", "smoothness_gnb",
    "regularization_addend", "finite_diff_smoothness", "dataset_profile",
    "recommend_optimizer",
    "Confusion", "metrics", "normalized_regret", "normalized_score",
    "kruskal_wallis", "mann_whitney", "bh_adjust", "rank_treatments",
    "__version__",
]
