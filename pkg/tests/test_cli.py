import csv
import json

import numpy as np
import pytest

from smoothie_hpo.cli import main
from smoothie_hpo.errors import ConfigError
from smoothie_hpo.fixtures import make_blobs, make_checkerboard
from smoothie_hpo.runner import (compute_statistics, load_report,
                                 run_experiment, validate_config)


def dataset_to_csv(d, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(d.feature_names + ["label"])
        for row, label in zip(d.X, d.y):
            writer.writerow(list(row) + [int(label)])
    return path


def minimal_config(tmp_path, **overrides):
    cfg = {
        "output": str(tmp_path / "report.json"),
        "master_seed": 7,
        "repeats": 1,
        "methods": ["smoothie"],
        "learners": ["gnb"],
        "metrics": ["accuracy"],
        "n1": 4,
        "n2": 2,
        "datasets": [{
            "name": "synth",
            "synthetic": {"kind": "blobs", "m": 60, "seed": 0},
            "split": {"kind": "ratio", "ratio": 0.75, "seed": 1},
        }],
        "space": {
            "preprocessors": [[], [{"kind": "standardize"}],
                              [{"kind": "minmax"}], [{"kind": "maxabs"}],
                              [{"kind": "robust"}]],
            "train_params": {"epochs": 2},
        },
    }
    cfg.update(overrides)
    return cfg


def write_config(tmp_path, cfg):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return str(path)


class TestValidation:
    def test_unknown_top_key(self, tmp_path):
        cfg = minimal_config(tmp_path)
        cfg["oops"] = 1
        with pytest.raises(ConfigError, match="unknown key"):
            validate_config(cfg)

    def test_missing_datasets(self, tmp_path):
        cfg = minimal_config(tmp_path)
        del cfg["datasets"]
        with pytest.raises(ConfigError, match="datasets"):
            validate_config(cfg)

    def test_bad_ratio(self, tmp_path):
        cfg = minimal_config(tmp_path)
        cfg["datasets"][0]["split"]["ratio"] = 1.5
        with pytest.raises(ConfigError, match="ratio"):
            validate_config(cfg)

    def test_n2_exceeds_n1(self, tmp_path):
        cfg = minimal_config(tmp_path, n1=2, n2=5)
        with pytest.raises(ConfigError, match="n2"):
            validate_config(cfg)

    def test_unknown_method(self, tmp_path):
        cfg = minimal_config(tmp_path, methods=["gradient_descent"])
        with pytest.raises(ConfigError, match="method"):
            validate_config(cfg)

    def test_defaults_filled(self, tmp_path):
        cfg = validate_config({
            "datasets": [{"name": "d",
                          "synthetic": {"kind": "blobs", "m": 40}}]})
        assert cfg["repeats"] == 20
        assert cfg["n1"] == 30 and cfg["n2"] == 5
        assert cfg["random_evals"] == 30


class TestRunCommand:
    def test_minimal_run_report_structure(self, tmp_path):
        cfg = minimal_config(tmp_path)
        code = main(["run", "--config", write_config(tmp_path, cfg)])
        assert code == 0
        report = load_report(cfg["output"])
        assert report["schema"] == "smoothie-hpo-report/1"
        (run,) = report["runs"]
        probes = [t for t in run["trials"] if t["smoothness"] is not None]
        fulls = [t for t in run["trials"] if t["metrics"] is not None]
        assert len(probes) == cfg["n1"]
        assert len(fulls) == cfg["n2"]
        assert run["timing"]["probe_seconds"] >= 0
        assert run["best"]["metrics"]["accuracy"] >= 0.5

    def test_repeats_derive_distinct_seeds(self, tmp_path):
        cfg = minimal_config(tmp_path, repeats=20)
        report = run_experiment(validate_config(cfg))
        seeds = [r["seed"] for r in report["runs"]]
        assert len(set(seeds)) == 20

    def test_config_error_exit_code(self, tmp_path):
        cfg = minimal_config(tmp_path)
        cfg["bogus"] = True
        code = main(["run", "--config", write_config(tmp_path, cfg)])
        assert code == 2

    def test_invalid_json_exit_code(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        assert main(["run", "--config", str(path)]) == 2

    def test_partial_failure_exit_code(self, tmp_path):
        # a three-class dataset with only fuzzy chains: every probe fails
        cfg = minimal_config(tmp_path)
        cfg["datasets"][0]["synthetic"] = {"kind": "blobs", "m": 60, "k": 3,
                                           "seed": 0}
        cfg["space"]["preprocessors"] = [[{"kind": "fuzzy", "times": 1}]]
        cfg["n1"] = 1
        cfg["n2"] = 1
        code = main(["run", "--config", write_config(tmp_path, cfg)])
        assert code == 3
        report = load_report(cfg["output"])
        assert report["runs"][0]["status"] == "failed"

    def test_jobs_do_not_change_results(self, tmp_path):
        cfg = minimal_config(tmp_path, repeats=2,
                             methods=["smoothie", "random"])
        serial = run_experiment(validate_config(cfg))
        cfg["jobs"] = 4
        parallel = run_experiment(validate_config(cfg))

        def fingerprint(report):
            out = []
            for r in report["runs"]:
                out.append((r["dataset"], r["repeat"], r["learner"],
                            r["method"], r["best"]["config"]["index"],
                            r["best"]["metrics"]["accuracy"]))
            return out
        assert fingerprint(serial) == fingerprint(parallel)


class TestProfileCommand:
    def test_blobs_profile(self, tmp_path, capsys):
        path = dataset_to_csv(make_blobs(m=160, seed=11),
                              tmp_path / "blobs.csv")
        assert main(["profile", str(path)]) == 0
        out = capsys.readouterr().out
        assert "SE-like" in out
        assert "use smoothie" in out

    def test_checkerboard_profile(self, tmp_path, capsys):
        path = dataset_to_csv(make_checkerboard(m=160, seed=11),
                              tmp_path / "board.csv")
        assert main(["profile", str(path)]) == 0
        out = capsys.readouterr().out
        assert "AI-like" in out
        assert "use standard" in out

    def test_component_breakdown_printed(self, tmp_path, capsys):
        path = dataset_to_csv(make_blobs(m=80, seed=3), tmp_path / "d.csv")
        main(["profile", str(path)])
        out = capsys.readouterr().out
        assert "smoothness beta" in out
        assert "ridge" in out and "m:" in out


class TestBudgetCommand:
    def test_thirty_samples(self, capsys):
        assert main(["budget", "--dims", "1", "--fraction", "0.1",
                     "--target", "0.95"]) == 0
        assert "30" in capsys.readouterr().out

    def test_zero_target(self, capsys):
        assert main(["budget", "--fraction", "0.1", "--target", "0"]) == 0
        assert "0" in capsys.readouterr().out

    def test_unreachable_target(self, capsys):
        assert main(["budget", "--fraction", "0.1", "--target", "1.0"]) == 2


class TestCompareCommand:
    def test_compare_reproduces_embedded_statistics(self, tmp_path, capsys):
        cfg = minimal_config(tmp_path, repeats=6,
                             methods=["smoothie", "random"])
        report = run_experiment(validate_config(cfg))
        from smoothie_hpo.runner import write_report
        path = tmp_path / "r.json"
        write_report(report, path)

        loaded = load_report(path)
        recomputed = compute_statistics(loaded["runs"], ["accuracy"],
                                        alpha=0.05)
        assert recomputed == loaded["statistics"]

        out_path = tmp_path / "stats.json"
        csv_path = tmp_path / "summary.csv"
        assert main(["compare", str(path), "--out", str(out_path),
                     "--csv", str(csv_path)]) == 0
        assert "totals" in capsys.readouterr().out
        assert json.loads(out_path.read_text())["accuracy"]
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == "metric,treatment,wins,ties,losses"
        assert len(lines) > 1

    def test_compare_accepts_external_runs(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        runs = []
        for method, shift in (("ours", 0.2), ("external_tool", 0.0)):
            for rep in range(10):
                runs.append({
                    "dataset": "d1", "repeat": rep, "learner": "ff",
                    "method": method, "status": "ok",
                    "best": {"metrics": {
                        "accuracy": float(0.6 + shift + 0.01 * rng.normal())}},
                })
        path = tmp_path / "external.json"
        path.write_text(json.dumps({"runs": runs}), encoding="utf-8")
        assert main(["compare", str(path)]) == 0
        out = capsys.readouterr().out
        assert "ours(ff)" in out and "external_tool(ff)" in out
        assert "win" in out


def test_selftest_command():
    assert main(["selftest"]) == 0
