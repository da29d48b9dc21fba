"""Command-line pipeline: generate day files, build the windowed dataset
export, and run the classical benchmark.

    lobshift generate --config configs/desk.yaml --out runs/desk
    lobshift dataset  --in runs/desk --out runs/desk/export --horizon 10 --normalize
    lobshift bench    --dataset runs/desk/export --model ridge --report report.json
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench as bench_mod
from . import dataset as dataset_mod
from .generate import generate_dataset, load_manifest, manifest_days
from .scenario import ScenarioConfig, load_config, with_overrides


def _cmd_generate(args) -> int:
    config = load_config(args.config) if args.config else ScenarioConfig()
    overrides = {}
    if args.days is not None:
        overrides["n_days"] = args.days
    if args.seed is not None:
        overrides["root_seed"] = args.seed
    if overrides:
        config = with_overrides(config, **overrides)
    manifest = generate_dataset(config, args.out, parallel=args.parallel)
    ok = sum(1 for d in manifest["days"] if d["status"] == "ok")
    failed = len(manifest["days"]) - ok
    print(f"generated {ok} day files ({failed} failed) in {args.out}")
    return 0 if failed == 0 else 1


def _cmd_dataset(args) -> int:
    manifest = load_manifest(args.in_dir)
    days = [d for d in manifest_days(manifest) if d.status == "ok"]
    if not days:
        print("no usable days in manifest", file=sys.stderr)
        return 1
    in_dir = Path(args.in_dir)
    day_windows = {}
    scenarios = {}
    for day in days:
        times, feats, mids = dataset_mod.read_day_csv(in_dir / day.file)
        day_windows[day.day_index] = dataset_mod.build_windows(
            times,
            feats,
            mids,
            day.day_index,
            day.scenario,
            day.t_s,
            h=args.horizon,
            stride=args.stride,
            trend_alpha=args.trend_alpha,
        )
        scenarios[day.day_index] = day.scenario
    splits = dataset_mod.make_splits(
        day_windows, scenarios, manifest["root_seed"], holdout_fraction=args.holdout
    )
    stats = dataset_mod.fit_norm(splits.train) if args.normalize else None
    descriptor = dataset_mod.export_tensors(
        args.out,
        splits,
        stats,
        h=args.horizon,
        stride=args.stride,
        trend_alpha=args.trend_alpha,
        source_root_seed=manifest["root_seed"],
    )
    counts = {name: entry["n"] for name, entry in descriptor["splits"].items()}
    print(f"exported windows to {args.out}: {counts}")
    return 0


def _cmd_bench(args) -> int:
    report = bench_mod.run_bench(
        args.dataset,
        model=args.model,
        ridge_lambda=args.ridge_lambda,
        report_path=args.report,
        figure_csv=args.figure_csv,
    )
    print(report.to_table())
    if args.report:
        print(f"report written to {args.report}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lobshift")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="simulate trading days and write day CSVs + manifest")
    gen.add_argument("--config", type=str, default=None, help="YAML scenario config")
    gen.add_argument("--out", type=str, required=True, help="output directory")
    gen.add_argument("--days", type=int, default=None, help="override n_days")
    gen.add_argument("--seed", type=int, default=None, help="override root seed")
    gen.add_argument("--parallel", type=int, default=1, help="worker processes")
    gen.set_defaults(func=_cmd_generate)

    ds = sub.add_parser("dataset", help="build windowed tensors + splits from day files")
    ds.add_argument("--in", dest="in_dir", type=str, required=True, help="generate output dir")
    ds.add_argument("--out", type=str, required=True, help="export directory")
    ds.add_argument("--horizon", type=int, default=10, help="label horizon in records")
    ds.add_argument("--stride", type=int, default=1, help="window start stride")
    ds.add_argument("--holdout", type=float, default=0.2, help="ordinary-day holdout fraction")
    ds.add_argument("--normalize", action="store_true", help="z-score with train statistics")
    ds.add_argument("--trend-alpha", type=float, default=None, help="emit trend labels at this threshold")
    ds.set_defaults(func=_cmd_dataset)

    be = sub.add_parser("bench", help="fit/evaluate a classical baseline on an export")
    be.add_argument("--dataset", type=str, required=True, help="export directory")
    be.add_argument("--model", choices=["persistence", "ridge"], default="persistence")
    be.add_argument("--lambda", dest="ridge_lambda", type=float, default=1.0)
    be.add_argument("--report", type=str, default=None, help="write the JSON report here")
    be.add_argument("--figure-csv", type=str, default=None, help="per-day pre/post RMSE CSV")
    be.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
