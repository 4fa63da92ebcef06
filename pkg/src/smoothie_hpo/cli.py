"""Command-line entry point.

Subcommands: run (execute an experiment config), profile (dataset
smoothness + optimizer recommendation), budget (invert the coverage bound
into a sample count), compare (joint win/tie/loss ranking of report
files), selftest (oracle suite), bench (numba vs numpy kernels and the
probe/full cost split).

Exit codes: 0 success, 2 config error, 3 partial trial failures (the
report is still written).
"""

import argparse
import json
import sys

from .data_io import load_csv
from .errors import ConfigError, ExactCoverageImpossible, SmoothieError
from .hpo import required_samples
from .runner import (compute_statistics, load_report, run_experiment,
                     validate_config, write_report)
from .smoothness import (PROFILE_THRESHOLD, RECOMMEND_THRESHOLD,
                         dataset_profile, recommend_optimizer)


def _cmd_run(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = validate_config(raw)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg["master_seed"] = args.seed
    if args.jobs is not None:
        cfg["jobs"] = args.jobs
    if args.direction is not None:
        cfg["selection_direction"] = args.direction
    out_path = args.out or cfg["output"]
    try:
        report = run_experiment(cfg)
    except SmoothieError as exc:
        print(f"experiment failed: {exc}", file=sys.stderr)
        return 2
    write_report(report, out_path)
    failed = sum(1 for r in report["runs"] if r["status"] != "ok")
    total_probe = sum(r.get("timing", {}).get("probe_seconds", 0.0)
                      for r in report["runs"])
    total_full = sum(r.get("timing", {}).get("full_seconds", 0.0)
                     for r in report["runs"])
    print(f"wrote {out_path}: {len(report['runs'])} runs "
          f"({failed} with failures), probe {total_probe:.2f}s / "
          f"full {total_full:.2f}s")
    return 3 if failed else 0


def _cmd_profile(args) -> int:
    label_column = args.label_column
    if label_column is None:
        with open(args.dataset, encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
        label_column = header[-1]
    d = load_csv(args.dataset, label_column)
    profile = dataset_profile(d, threshold=args.profile_threshold)
    rec = recommend_optimizer(profile["beta"], threshold=args.threshold)
    print(f"dataset: {d.name} (m={d.m}, n={d.n}, k={d.k})")
    print(f"smoothness beta: {profile['beta']:.6g}")
    for key, val in profile["report"].components.items():
        print(f"  {key}: {val}")
    print(f"profile: {profile['label']} "
          f"(threshold {args.profile_threshold})")
    print(f"recommendation: use {rec} (threshold {args.threshold})")
    return 0


def _cmd_budget(args) -> int:
    fractions = args.fraction
    if len(fractions) == 1 and args.dims > 1:
        fractions = fractions * args.dims
    try:
        p = required_samples(fractions, args.target)
    except ExactCoverageImpossible as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"recommended initial samples: {p}")
    return 0


def _cmd_compare(args) -> int:
    runs = []
    for path in args.reports:
        report = load_report(path)
        runs.extend(report.get("runs", []))
    if not runs:
        print("no runs found in the given reports", file=sys.stderr)
        return 2
    metrics = args.metric or sorted({
        m for r in runs if r.get("best")
        for m in r["best"].get("metrics", {})})
    stats = compute_statistics(runs, metrics, alpha=args.alpha)
    totals = {}
    for metric, per_dataset in stats.items():
        print(f"== metric: {metric}")
        for ds, entry in per_dataset.items():
            print(f"  {ds}: best {entry['best_set']}")
            for name, outcome in sorted(entry["outcomes"].items()):
                med = entry["medians"][name]
                print(f"    {name:24s} {outcome:4s} (median {med:.4g})")
                key = (metric, name)
                counts = totals.setdefault(key, {"win": 0, "tie": 0, "loss": 0})
                counts[outcome] += 1
    print("== totals (wins/ties/losses per treatment)")
    for (metric, name), counts in sorted(totals.items()):
        print(f"  {metric:10s} {name:24s} "
              f"{counts['win']} wins, {counts['tie']} ties, "
              f"{counts['loss']} losses")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(stats, fh, indent=2, sort_keys=True, default=list)
            fh.write("\n")
    if args.csv:
        import csv as csv_mod
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv_mod.writer(fh)
            writer.writerow(["metric", "treatment", "wins", "ties", "losses"])
            for (metric, name), counts in sorted(totals.items()):
                writer.writerow([metric, name, counts["win"], counts["tie"],
                                 counts["loss"]])
    return 0


def _cmd_selftest(args) -> int:
    from .selftest import run_selftest
    return 0 if run_selftest() else 1


def _cmd_bench(args) -> int:
    from .bench import cost_benchmark, format_kernel_rows, kernel_benchmark
    if args.which in ("kernels", "all"):
        print(format_kernel_rows(kernel_benchmark()))
    if args.which in ("cost", "all"):
        res = cost_benchmark(epochs=args.epochs)
        frac = res["probe_seconds"] / max(res["full_seconds"], 1e-12)
        print(f"probe total   {res['probe_seconds']:.3f}s")
        print(f"full total    {res['full_seconds']:.3f}s "
              f"(probe/full = {frac:.1%})")
        print(f"smoothie wall {res['smoothie_wall']:.3f}s "
              f"({res['smoothie_full_runs']} full runs)")
        print(f"random wall   {res['random_wall']:.3f}s "
              f"({res['random_full_runs']} full runs)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smoothie-hpo",
        description="two-stage hyper-parameter search guided by "
                    "loss-landscape smoothness probes")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--jobs", type=int, default=None)
    p_run.add_argument("--direction", choices=("min_beta", "max_beta"),
                       default=None)
    p_run.set_defaults(func=_cmd_run)

    p_prof = sub.add_parser("profile", help="dataset smoothness profile")
    p_prof.add_argument("dataset")
    p_prof.add_argument("--label-column", default=None,
                        help="defaults to the last header column")
    p_prof.add_argument("--threshold", type=float,
                        default=RECOMMEND_THRESHOLD,
                        help="optimizer recommendation cutoff")
    p_prof.add_argument("--profile-threshold", type=float,
                        default=PROFILE_THRESHOLD,
                        help="SE-like/AI-like labeling cutoff")
    p_prof.set_defaults(func=_cmd_profile)

    p_budget = sub.add_parser("budget", help="invert the coverage bound")
    p_budget.add_argument("--dims", type=int, default=1)
    p_budget.add_argument("--fraction", type=float, action="append",
                          required=True,
                          help="window fraction 2k/L per dimension")
    p_budget.add_argument("--target", type=float, required=True)
    p_budget.set_defaults(func=_cmd_budget)

    p_cmp = sub.add_parser("compare", help="rank treatments across reports")
    p_cmp.add_argument("reports", nargs="+")
    p_cmp.add_argument("--metric", action="append", default=None)
    p_cmp.add_argument("--alpha", type=float, default=0.05)
    p_cmp.add_argument("--out", default=None,
                       help="write the full statistics as JSON")
    p_cmp.add_argument("--csv", default=None,
                       help="write the win/tie/loss summary table as CSV")
    p_cmp.set_defaults(func=_cmd_compare)

    p_self = sub.add_parser("selftest", help="run the built-in oracle suites")
    p_self.set_defaults(func=_cmd_selftest)

    p_bench = sub.add_parser("bench", help="kernel and cost benchmarks")
    p_bench.add_argument("--which", choices=("kernels", "cost", "all"),
                         default="all")
    p_bench.add_argument("--epochs", type=int, default=50)
    p_bench.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
