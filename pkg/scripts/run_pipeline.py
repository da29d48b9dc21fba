#!/usr/bin/env python3
"""End-to-end desk-scale experiment: simulate days, build the windowed
dataset, and score both classical baselines.

    python scripts/run_pipeline.py --out runs/demo --seed 7 [--days 20]

Leaves behind day CSVs + manifest, the tensor export, two reports, and a
per-day pre/post-shock RMSE CSV for plotting.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from lobshift.cli import main as cli_main

CONFIG = Path(__file__).parent.parent / "configs" / "desk.yaml"


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", required=True)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--days", type=int, default=None)
    parser.add_argument("--stride", type=int, default=15)
    parser.add_argument("--parallel", type=int, default=2)
    parser.add_argument("--ridge-lambda", type=float, default=1.0)
    args = parser.parse_args()

    out = Path(args.out)
    days_dir = out / "days"
    export_dir = out / "export"

    gen = ["generate", "--config", str(CONFIG), "--out", str(days_dir),
           "--seed", str(args.seed), "--parallel", str(args.parallel)]
    if args.days is not None:
        gen += ["--days", str(args.days)]
    if cli_main(gen) != 0:
        return 1
    if cli_main(["dataset", "--in", str(days_dir), "--out", str(export_dir),
                 "--horizon", "10", "--stride", str(args.stride),
                 "--holdout", "0.2", "--normalize"]) != 0:
        return 1
    for model in ("persistence", "ridge"):
        extra = ["--lambda", str(args.ridge_lambda)] if model == "ridge" else []
        rc = cli_main(["bench", "--dataset", str(export_dir), "--model", model,
                       "--report", str(out / f"report_{model}.json"),
                       "--figure-csv", str(out / f"figure_{model}.csv"), *extra])
        if rc != 0:
            return rc
        print()
    print(f"artifacts in {out}/: days/, export/, report_*.json, figure_*.csv")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
