#!/usr/bin/env python3
"""Empirical argument stability against the closed-form bounds, over B.

Linear models on the unit ball, constant step min(0.1, 1/L), T = n.
Writes one CSV row per (loss, n, B).
"""

import argparse
import csv

from bootsgd.bootstrap import BootstrapConfig, Constant
from bootsgd.datagen import Dataset, generate_linear_dataset
from bootsgd.losses import LossKind, loss_constants
from bootsgd.models import Linear
from bootsgd.stability import make_neighbor, sweep_B


def neighbour_pairs(n, dim, count, seed, classification):
    pairs = []
    for p in range(count):
        full = generate_linear_dataset(n + 1, dim, seed + p, classification=classification)
        S = Dataset(full.x[:n], full.y[:n], seed=seed + p)
        pairs.append((S, make_neighbor(S, full[n])))
    return pairs


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, nargs="+", default=[50, 100])
    p.add_argument("--B", type=int, nargs="+", default=[1, 2, 4, 8, 16, 32])
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--pairs", type=int, default=50)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="stability_sweep.csv")
    args = p.parse_args()

    rows = []
    for loss in (LossKind.LOGISTIC_CLASSIFICATION, LossKind.LOGISTIC_REGRESSION):
        eta = min(0.1, 1.0 / loss_constants(loss, 1.0).L)
        for n in args.n:
            pairs = neighbour_pairs(n, args.dim, args.pairs, args.seed,
                                    loss is LossKind.LOGISTIC_CLASSIFICATION)
            cfg = BootstrapConfig(B=1, T=n, step_schedule=Constant(eta), loss=loss,
                                  model=Linear(args.dim), master_seed=args.seed)
            for row in sweep_B(pairs, cfg, args.B, args.trials):
                rows.append({"loss": loss.value, "n": n, **row})
                print(f"{loss.value:7s} n={n:4d} B={row['B']:3d}  "
                      f"l1 {row['l1_empirical']:.4f} (bound {row['l1_bound']:.3f})  "
                      f"l2 {row['l2_empirical']:.4f} (bound {row['l2_bound']:.3f})")

    with open(args.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


if __name__ == "__main__":
    main()
