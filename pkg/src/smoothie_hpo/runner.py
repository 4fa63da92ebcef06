"""Declarative experiment execution: validate a JSON config, run
repeats x methods x learners over the configured datasets, and emit a
self-describing JSON report with per-trial smoothness records and a
timing ledger that separates probe time from full-run time.
"""

import json
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

import numpy as np

from .data_io import Dataset, SplitPolicy, load_csv, load_presplit, split
from .errors import ConfigError, SmoothieError
from .fixtures import make_dataset
from .hpo import (SearchSpace, SmoothieParams, default_learner_grids,
                  default_preprocessors, random_search, smoothie,
                  DEFAULT_TRAIN_PARAMS)
from .stats import rank_treatments, metric_direction

REPORT_SCHEMA = "smoothie-hpo-report/1"

_TOP_KEYS = {"output", "master_seed", "repeats", "methods", "learners",
             "metrics", "n1", "n2", "random_evals", "selection_direction",
             "positive_class", "datasets", "space", "jobs", "alpha"}
_DATASET_KEYS = {"name", "path", "train_path", "test_path", "label_column",
                 "split", "synthetic"}
_SPLIT_KEYS = {"kind", "ratio", "seed"}
_SPACE_KEYS = {"train_params", "ff_layers", "ff_units", "lr_penalties",
               "lr_C", "preprocessors"}
_TRAIN_PARAM_KEYS = {"epochs", "learning_rate", "batch_size", "l2_lambda"}

_METHODS = ("smoothie", "random")
_LEARNERS = ("ff", "lr", "gnb")


def _fail(path: str, message: str):
    raise ConfigError(f"{path}: {message}")


def _reject_unknown(d: dict, allowed: set, path: str):
    unknown = sorted(set(d) - allowed)
    if unknown:
        _fail(path, f"unknown key(s) {unknown}")


def _expect(d: dict, key: str, types, path: str, default=None, required=False):
    if key not in d:
        if required:
            _fail(path, f"missing required key {key!r}")
        return default
    value = d[key]
    if not isinstance(value, types):
        _fail(f"{path}.{key}", f"expected {types}, got {type(value).__name__}")
    return value


def validate_config(cfg: dict) -> dict:
    """Strict validation; returns the config with defaults filled in."""
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    _reject_unknown(cfg, _TOP_KEYS, "config")
    out = {
        "output": _expect(cfg, "output", str, "config", default="report.json"),
        "master_seed": _expect(cfg, "master_seed", int, "config", default=0),
        "repeats": _expect(cfg, "repeats", int, "config", default=20),
        "methods": _expect(cfg, "methods", list, "config",
                           default=["smoothie", "random"]),
        "learners": _expect(cfg, "learners", list, "config", default=["ff"]),
        "metrics": _expect(cfg, "metrics", list, "config",
                           default=["accuracy"]),
        "n1": _expect(cfg, "n1", int, "config", default=30),
        "n2": _expect(cfg, "n2", int, "config", default=5),
        "selection_direction": _expect(cfg, "selection_direction", str,
                                       "config", default="min_beta"),
        "positive_class": _expect(cfg, "positive_class", (str, type(None)),
                                  "config", default=None),
        "jobs": _expect(cfg, "jobs", int, "config", default=1),
        "alpha": _expect(cfg, "alpha", (int, float), "config", default=0.05),
    }
    out["random_evals"] = _expect(cfg, "random_evals", int, "config",
                                  default=out["n1"])
    if out["repeats"] < 1:
        _fail("config.repeats", "must be >= 1")
    if not (1 <= out["n2"] <= out["n1"]):
        _fail("config.n2", "need 1 <= n2 <= n1")
    for method in out["methods"]:
        if method not in _METHODS:
            _fail("config.methods", f"unknown method {method!r}")
    for learner in out["learners"]:
        if learner not in _LEARNERS:
            _fail("config.learners", f"unknown learner {learner!r}")
    if out["selection_direction"] not in ("min_beta", "max_beta"):
        _fail("config.selection_direction", "min_beta or max_beta")
    if not out["metrics"]:
        _fail("config.metrics", "need at least one metric")

    datasets = _expect(cfg, "datasets", list, "config", required=True)
    if not datasets:
        _fail("config.datasets", "need at least one dataset")
    out_datasets = []
    for i, spec in enumerate(datasets):
        path = f"config.datasets[{i}]"
        if not isinstance(spec, dict):
            _fail(path, "must be an object")
        _reject_unknown(spec, _DATASET_KEYS, path)
        name = _expect(spec, "name", str, path, required=True)
        entry = {"name": name}
        has_presplit = "train_path" in spec or "test_path" in spec
        has_path = "path" in spec
        has_synth = "synthetic" in spec
        if sum([has_presplit, has_path, has_synth]) != 1:
            _fail(path, "need exactly one of path, train_path/test_path, "
                        "or synthetic")
        if has_presplit:
            entry["train_path"] = _expect(spec, "train_path", str, path,
                                          required=True)
            entry["test_path"] = _expect(spec, "test_path", str, path,
                                         required=True)
            entry["label_column"] = _expect(spec, "label_column", str, path,
                                            required=True)
        elif has_path:
            entry["path"] = spec["path"]
            entry["label_column"] = _expect(spec, "label_column", str, path,
                                            required=True)
        else:
            synth = _expect(spec, "synthetic", dict, path, required=True)
            if "kind" not in synth:
                _fail(f"{path}.synthetic", "missing 'kind'")
            entry["synthetic"] = synth
        if not has_presplit:
            split_spec = _expect(spec, "split", dict, path,
                                 default={"kind": "ratio", "ratio": 0.75,
                                          "seed": 0})
            _reject_unknown(split_spec, _SPLIT_KEYS, f"{path}.split")
            kind = _expect(split_spec, "kind", str, f"{path}.split",
                           default="ratio")
            if kind != "ratio":
                _fail(f"{path}.split.kind",
                      "inline datasets support only ratio splits")
            ratio = _expect(split_spec, "ratio", (int, float), f"{path}.split",
                            default=0.75)
            if not (0.0 < ratio < 1.0):
                _fail(f"{path}.split.ratio", "must lie in (0, 1)")
            entry["split"] = {"kind": "ratio", "ratio": float(ratio),
                              "seed": _expect(split_spec, "seed", int,
                                              f"{path}.split", default=0)}
        out_datasets.append(entry)
    out["datasets"] = out_datasets

    space = _expect(cfg, "space", dict, "config", default={})
    _reject_unknown(space, _SPACE_KEYS, "config.space")
    tp = _expect(space, "train_params", dict, "config.space", default={})
    _reject_unknown(tp, _TRAIN_PARAM_KEYS, "config.space.train_params")
    out["space"] = {
        "train_params": {**DEFAULT_TRAIN_PARAMS, **tp},
        "ff_layers": space.get("ff_layers"),
        "ff_units": space.get("ff_units"),
        "lr_penalties": space.get("lr_penalties"),
        "lr_C": space.get("lr_C"),
        "preprocessors": space.get("preprocessors"),
    }
    return out


def build_space(space_cfg: dict) -> SearchSpace:
    grids = default_learner_grids()
    layers = space_cfg.get("ff_layers")
    units = space_cfg.get("ff_units")
    if layers or units:
        grids["ff"] = [{"layers": l, "units": u}
                       for l in (layers or range(3, 21))
                       for u in (units or range(2, 7))]
    pens = space_cfg.get("lr_penalties")
    cs = space_cfg.get("lr_C")
    if pens or cs:
        grids["lr"] = [{"penalty": p, "C": c}
                       for p in (pens or ("l1", "l2", "l1l2"))
                       for c in (cs or (0.1, 1.0, 10.0))]
    pre = space_cfg.get("preprocessors")
    preprocessors = pre if pre is not None else default_preprocessors()
    return SearchSpace(preprocessors=preprocessors, learner_grids=grids,
                       train_params=dict(space_cfg.get("train_params",
                                                       DEFAULT_TRAIN_PARAMS)))


def _load_dataset(entry: dict) -> tuple:
    """Returns (full_or_train, test_or_None)."""
    if "synthetic" in entry:
        d = make_dataset({**entry["synthetic"], "name": entry["name"]})
        return d, None
    if "path" in entry:
        return load_csv(entry["path"], entry["label_column"],
                        name=entry["name"]), None
    train, test = load_presplit(entry["train_path"], entry["test_path"],
                                entry["label_column"], name=entry["name"])
    return train, test


def _positive_class(dataset: Dataset, positive_class) -> int:
    if positive_class is None:
        return 1
    if positive_class in dataset.label_names:
        return dataset.label_names.index(positive_class)
    raise ConfigError(
        f"config.positive_class: label {positive_class!r} not present in "
        f"dataset {dataset.name!r}")


def _repeat_seed(master_seed: int, dataset_i: int, repeat: int) -> int:
    ss = np.random.SeedSequence([master_seed, dataset_i, repeat])
    return int(ss.generate_state(1, dtype=np.uint64)[0] % (2 ** 63))


def _run_unit(task, space, cfg):
    dataset_i, entry, repeat, learner, method, train, test = task
    seed = _repeat_seed(cfg["master_seed"], dataset_i, repeat)
    metric = cfg["metrics"][0]
    positive = _positive_class(train, cfg["positive_class"])
    record = {
        "dataset": entry["name"],
        "repeat": repeat,
        "learner": learner,
        "method": method,
        "seed": seed,
        "status": "ok",
    }
    start = time.perf_counter()
    try:
        if method == "smoothie":
            params = SmoothieParams(
                N1=cfg["n1"], N2=cfg["n2"], seed=seed,
                selection_direction=cfg["selection_direction"])
            best, trials = smoothie(train, test, space, learner, params,
                                    metric, positive=positive)
        else:
            best, trials = random_search(train, test, space, learner,
                                         cfg["random_evals"], seed, metric,
                                         positive=positive)
        record["best"] = best.to_dict()
        record["trials"] = [t.to_dict() for t in trials]
        record["timing"] = {
            "probe_seconds": sum(t.probe_seconds for t in trials),
            "full_seconds": sum(t.full_seconds for t in trials),
            "full_runs": sum(1 for t in trials if t.metrics is not None),
            "failed_trials": sum(1 for t in trials if t.status == "failed"),
        }
        if record["timing"]["failed_trials"]:
            record["status"] = "partial"
    except SmoothieError as exc:
        record["status"] = "failed"
        record["error"] = f"{type(exc).__name__}: {exc}"
        record["trials"] = []
    record["wall_seconds"] = time.perf_counter() - start
    return record


def compute_statistics(runs: list, metrics: list, alpha: float = 0.05) -> dict:
    """Win/tie/loss ranking per (metric, dataset) over treatment groups.

    A treatment is "method(learner)"; its observations are the best-run
    metric values across repeats.
    """
    stats = {}
    for metric in metrics:
        per_dataset = {}
        datasets = sorted({r["dataset"] for r in runs})
        for ds in datasets:
            groups = {}
            for r in runs:
                if r["dataset"] != ds or r.get("best") is None:
                    continue
                value = r["best"]["metrics"].get(metric)
                if value is None:
                    continue
                label = f'{r["method"]}({r["learner"]})'
                groups.setdefault(label, []).append(value)
            groups = {k: v for k, v in groups.items() if v}
            if len(groups) < 2:
                continue
            ranked = rank_treatments(groups, alpha=alpha,
                                     direction=metric_direction(metric))
            per_dataset[ds] = {
                "best_set": sorted(ranked["best_set"]),
                "outcomes": ranked["outcomes"],
                "medians": ranked["medians"],
                "wins": ranked["wins"],
                "ties": ranked["ties"],
                "losses": ranked["losses"],
                "kw": ranked["kw"],
            }
        if per_dataset:
            stats[metric] = per_dataset
    return stats


def run_experiment(cfg: dict) -> dict:
    """Execute a validated config; returns the report dict."""
    space = build_space(cfg["space"])
    tasks = []
    for dataset_i, entry in enumerate(cfg["datasets"]):
        full, pre_test = _load_dataset(entry)
        for repeat in range(cfg["repeats"]):
            if pre_test is not None:
                train, test = full, pre_test
            else:
                ss = np.random.SeedSequence([entry["split"]["seed"],
                                             cfg["master_seed"], dataset_i,
                                             repeat])
                split_seed = int(ss.generate_state(1, dtype=np.uint64)[0]
                                 % (2 ** 63))
                policy = SplitPolicy(kind="ratio",
                                     ratio=entry["split"]["ratio"],
                                     seed=split_seed)
                train, test = split(full, policy)
            for learner in cfg["learners"]:
                for method in cfg["methods"]:
                    tasks.append((dataset_i, entry, repeat, learner, method,
                                  train, test))

    if cfg["jobs"] > 1:
        with ThreadPoolExecutor(max_workers=cfg["jobs"]) as pool:
            runs = list(pool.map(lambda t: _run_unit(t, space, cfg), tasks))
    else:
        runs = [_run_unit(t, space, cfg) for t in tasks]

    report = {
        "schema": REPORT_SCHEMA,
        "created": datetime.now(timezone.utc).isoformat(),
        "master_seed": cfg["master_seed"],
        "config": {k: v for k, v in cfg.items() if k != "output"},
        "runs": runs,
        "statistics": compute_statistics(runs, cfg["metrics"], cfg["alpha"]),
    }
    return report


def write_report(report: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_report(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
