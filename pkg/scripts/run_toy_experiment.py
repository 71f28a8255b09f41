#!/usr/bin/env python3
"""Fit the toy problem under one or more losses and summarise the curves.

    python scripts/run_toy_experiment.py --preset quick --loss ls rlogis --out runs/toy
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from bootsgd.cli import main as cli_main


def summarise(path: Path) -> dict:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    col = lambda name: np.array([float(r[name]) for r in rows])
    f = col("f_true")
    return {
        "max_abs_type3": float(np.max(np.abs(col("h_type3")))),
        "rmse_type1": float(np.sqrt(np.mean((col("h_type1") - f) ** 2))),
        "rmse_type3": float(np.sqrt(np.mean((col("h_type3") - f) ** 2))),
        "mean_ci_width": float(np.mean(col("ci_hi") - col("ci_lo"))),
        "truth_in_ci": float(np.mean((col("ci_lo") <= f) & (f <= col("ci_hi")))),
    }


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--preset", default="quick", choices=["quick", "paper"])
    p.add_argument("--loss", nargs="+", default=["ls", "rlogis"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="runs/toy")
    args = p.parse_args()

    print(f"{'loss':8s} {'max|h3|':>9s} {'rmse1':>8s} {'rmse3':>8s} {'ci width':>9s} {'f in ci':>8s}")
    for loss in args.loss:
        out = Path(args.out) / loss
        code = cli_main(["fit", "--preset", args.preset, "--seed", str(args.seed), "--loss", loss,
                         "--jobs", str(args.jobs), "--robust-agg", "--out", str(out)])
        if code:
            raise SystemExit(code)
        s = summarise(out / "curves.csv")
        print(f"{loss:8s} {s['max_abs_type3']:9.2f} {s['rmse_type1']:8.2f} {s['rmse_type3']:8.2f} "
              f"{s['mean_ci_width']:9.2f} {s['truth_in_ci']:8.2f}")


if __name__ == "__main__":
    main()
