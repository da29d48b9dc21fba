#!/usr/bin/env python3
"""Replicate the degradation study across seeds: for each root seed, build a
fresh desk-scale dataset, train ridge on ordinary days only, and tabulate the
per-split RMSE. A seed "holds" when rmse_large > rmse_small > rmse_iid.

    python scripts/seed_sweep.py --out runs/sweep --seeds 101 202 303 404 505
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from lobshift.bench import run_bench
from lobshift.cli import main as cli_main

CONFIG = Path(__file__).parent.parent / "configs" / "desk.yaml"


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", required=True)
    parser.add_argument("--seeds", type=int, nargs="+", default=[101, 202, 303, 404, 505])
    parser.add_argument("--stride", type=int, default=15)
    parser.add_argument("--ridge-lambda", type=float, default=1.0)
    args = parser.parse_args()

    out = Path(args.out)
    rows = []
    for seed in args.seeds:
        days = out / f"days_{seed}"
        export = out / f"export_{seed}"
        if cli_main(["generate", "--config", str(CONFIG), "--out", str(days),
                     "--seed", str(seed), "--parallel", "2"]) != 0:
            return 1
        if cli_main(["dataset", "--in", str(days), "--out", str(export),
                     "--horizon", "10", "--stride", str(args.stride),
                     "--holdout", "0.2", "--normalize"]) != 0:
            return 1
        report = run_bench(export, model="ridge", ridge_lambda=args.ridge_lambda,
                           report_path=out / f"report_{seed}.json")
        r = report.rmse
        rows.append((seed, r["test_iid"], r["test_small"], r["test_large"]))

    print(f"\n{'seed':>6} {'iid':>10} {'small':>10} {'large':>10}  ordering")
    holds = 0
    for seed, iid, small, large in rows:
        ordered = large > small > iid
        holds += ordered
        print(f"{seed:>6} {iid:>10.4f} {small:>10.4f} {large:>10.4f}  {'holds' if ordered else 'VIOLATED'}")
    print(f"\nrmse_large > rmse_small > rmse_iid in {holds}/{len(rows)} seeds")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
