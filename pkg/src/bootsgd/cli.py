"""Command-line entry point: ``bootsgd {tables,fit,stability,datagen}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import datagen, orderstats
from .bootstrap import (BootstrapConfig, Constant, InverseSqrt, aggregate_type1, huber_weight,
                        one_step_w_estimate, order_interval, run_bootstrap_sgd, run_sgd)
from .datagen import Dataset, generate_dataset, generate_linear_dataset, read_dataset_csv
from .losses import LossKind, loss_constants
from .models import Linear, RbfKernel, predict_batch
from .stability import empirical_argument_stability, make_neighbor, sweep_B

log = logging.getLogger("bootsgd")

CURVE_COLUMNS = ["x", "f_true", "h_full_train", "h_type1", "h_type2", "h_type3", "ci_lo", "ci_hi"]


@dataclass(frozen=True)
class RunConfig:
    n: int = 1000
    B: int = 101
    m: int | None = None
    passes: int = 400
    eta_c: float = 10.0
    sigma: float = 1.0 / math.sqrt(20.0)
    alpha: float = 0.05
    r: int | None = None
    s: int | None = None
    grid: tuple[float, float, int] = (0.0, 33.0, 512)
    loss: LossKind = LossKind.LEAST_SQUARES
    seed: int = 0
    data_path: str | None = None
    robust_agg: bool = False
    out: str = "."
    n_jobs: int = 1

    def __post_init__(self):
        if self.grid[2] < 2:
            raise ValueError("grid count must be >= 2")
        if (self.r is None) != (self.s is None):
            raise ValueError("--r and --s must be given together")
        if self.r is not None and not 1 <= self.r <= self.s <= self.B:
            raise ValueError(f"need 1 <= r <= s <= B, got r={self.r}, s={self.s}, B={self.B}")


PRESETS = {
    "paper": RunConfig(),
    "quick": RunConfig(n=200, B=31, passes=50, grid=(0.0, 33.0, 256)),
}


def _format(v: float) -> str:
    return repr(float(v))


def _parse_grid(text: str) -> tuple[float, float, int]:
    try:
        lo, hi, count = text.split(":")
        return float(lo), float(hi), int(count)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like lo:hi:count, got {text!r}")


def _parse_int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v]


def _loss(text: str) -> LossKind:
    return LossKind(text)


# ---------------------------------------------------------------- tables

def cmd_tables(kind: str, out: Path) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    kinds = ["ci", "tolerance"] if kind == "both" else [kind]
    written = []
    for k in kinds:
        path = out / ("table1.csv" if k == "ci" else "table2.csv")
        rows = orderstats.write_table_csv(k, path)
        flagged = sum(1 for r in rows if r["note"])
        log.info("wrote %s (%d rows, %d flagged)", path, len(rows), flagged)
        written.append(path)
    return written


# ---------------------------------------------------------------- fit

def _load_dataset(cfg: RunConfig) -> Dataset:
    if cfg.data_path is not None:
        return read_dataset_csv(cfg.data_path)
    return generate_dataset(cfg.n, cfg.seed)


def _interval_pair(cfg: RunConfig) -> tuple[int, int, float | None]:
    if cfg.r is not None:
        level = orderstats.median_ci_level(cfg.B, cfg.r, cfg.s) if cfg.r < cfg.s else None
        return cfg.r, cfg.s, level
    design = orderstats.design_median_ci(cfg.B, cfg.alpha)
    if design is None:
        raise ValueError(f"no symmetric order-statistic pair reaches level {1 - cfg.alpha} with B={cfg.B}")
    return design.r, design.s, design.level


def cmd_fit(cfg: RunConfig) -> dict:
    """Fit the bootstrap ensemble and write ``curves.csv`` and ``run.json``."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    data = _load_dataset(cfg)
    n = len(data)
    m = n if cfg.m is None else cfg.m
    r, s, level = _interval_pair(cfg)
    boot = BootstrapConfig(B=cfg.B, T=cfg.passes * m, step_schedule=InverseSqrt(cfg.eta_c),
                           loss=cfg.loss, model=RbfKernel(cfg.sigma, data.x),
                           master_seed=cfg.seed, m=cfg.m)
    ensemble = run_bootstrap_sgd(data, boot, n_jobs=cfg.n_jobs)
    reference = run_sgd(data, boot)
    t_train = time.perf_counter() - t0

    lo_g, hi_g, count = cfg.grid
    grid = np.linspace(lo_g, hi_g, count)
    preds = ensemble.predictions(grid)
    curves = {
        "x": grid,
        "f_true": [datagen.true_function(x) if datagen.DOMAIN[0] <= x <= datagen.DOMAIN[1] else None
                   for x in grid],
        "h_full_train": predict_batch(reference, grid),
        "h_type1": predict_batch(aggregate_type1(ensemble), grid),
        "h_type2": preds.mean(axis=0),
        "h_type3": np.median(preds, axis=0),
    }
    curves["ci_lo"], curves["ci_hi"] = order_interval(preds, r, s)
    columns = list(CURVE_COLUMNS)
    if cfg.robust_agg:
        robust = one_step_w_estimate(ensemble, reference, huber_weight(ensemble, reference))
        curves["h_wrobust"] = predict_batch(robust, grid)
        columns.append("h_wrobust")

    with open(out / "curves.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for i in range(count):
            w.writerow(["" if curves[c][i] is None else _format(curves[c][i]) for c in columns])

    elapsed = time.perf_counter() - t0
    summary = {
        "config": {
            **boot.describe(),
            "n": n, "passes": cfg.passes, "eta_c": cfg.eta_c, "sigma": cfg.sigma,
            "alpha": cfg.alpha, "r": r, "s": s, "interval_level": level,
            "grid": list(cfg.grid), "data": cfg.data_path or {"generate": {"n": cfg.n, "seed": cfg.seed}},
            "robust_agg": cfg.robust_agg,
        },
        "data_summary": {"y_min": float(data.y.min()), "y_max": float(data.y.max())},
        "timing_seconds": {"train": round(t_train, 3), "total": round(elapsed, 3)},
    }
    with open(out / "run.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    log.info("fit done in %.1fs: B=%d, n=%d, T=%d, (r,s)=(%d,%d)", elapsed, cfg.B, n, boot.T, r, s)
    return summary


# ---------------------------------------------------------------- stability

def _neighbor_pair(model: str, n: int, dim: int, seed: int, loss: LossKind, identical: bool):
    if model == "linear":
        full = generate_linear_dataset(n + 1, dim, seed,
                                       classification=loss is LossKind.LOGISTIC_CLASSIFICATION)
    else:
        full = generate_dataset(n + 1, seed)
    S = Dataset(full.x[:n], full.y[:n], x_range=full.x_range, seed=seed)
    if identical:
        return S, S
    return S, make_neighbor(S, full[n])


def cmd_stability(args) -> dict:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    loss = args.loss
    pairs = [_neighbor_pair(args.model, args.n, args.dim, args.seed + p, loss, args.identical)
             for p in range(args.pairs)]
    S0 = pairs[0][0]
    # linear inputs lie in the unit ball; the Gaussian kernel has K(x, x) = 1
    spec = Linear(S0.input_dim) if args.model == "linear" else RbfKernel(args.sigma, S0.x)
    m = args.n if args.m is None else args.m
    T = args.passes * m
    if args.eta_c is not None:
        schedule = InverseSqrt(args.eta_c)
    else:
        L = loss_constants(loss, 1.0).L
        schedule = Constant(args.eta if args.eta is not None else min(0.1, 1.0 / L))
    config = BootstrapConfig(B=args.B, T=T, step_schedule=schedule, loss=loss, model=spec,
                             master_seed=args.seed, m=args.m)
    report = empirical_argument_stability(pairs[0][0], pairs[0][1], config, trials=args.trials)
    report.to_json(out / "stability.json")

    rows = sweep_B(pairs, config, args.B_sweep, args.trials)
    columns = list(rows[0])
    with open(out / "stability_sweep.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (_format(v) if isinstance(v, float) else v) for k, v in row.items()})
    log.info("stability: l1=%.3g (bound %.3g), l2=%.3g (bound %.3g)", report.l1_empirical,
             report.l1_bound, report.l2_empirical, report.l2_bound)
    return {"report": report.to_dict(), "sweep": rows}


# ---------------------------------------------------------------- datagen

def cmd_datagen(n: int, seed: int, path: Path) -> Dataset:
    data = generate_dataset(n, seed)
    path.parent.mkdir(parents=True, exist_ok=True)
    data.to_csv(path)
    return data


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bootsgd", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("tables", help="regenerate the order-statistics tables as CSV")
    t.add_argument("--kind", choices=["ci", "tolerance", "both"], default="both")
    t.add_argument("--out", default=".")

    f = sub.add_parser("fit", help="bootstrap SGD on the toy problem; writes curves.csv and run.json")
    f.add_argument("--preset", choices=sorted(PRESETS), default="paper")
    f.add_argument("--seed", type=int)
    f.add_argument("--n", type=int)
    f.add_argument("--B", type=int)
    f.add_argument("--m", type=int)
    f.add_argument("--passes", type=int)
    f.add_argument("--eta-c", type=float)
    f.add_argument("--sigma", type=float)
    f.add_argument("--alpha", type=float)
    f.add_argument("--r", type=int)
    f.add_argument("--s", type=int)
    f.add_argument("--grid", type=_parse_grid, help="lo:hi:count")
    f.add_argument("--loss", type=_loss, choices=list(LossKind), metavar="{ls,clogis,rlogis}")
    f.add_argument("--data", help="read a two-column x,y CSV instead of generating data")
    f.add_argument("--robust-agg", action="store_true", help="add the one-step W-estimator column")
    f.add_argument("--jobs", type=int, default=1)
    f.add_argument("--out", default=".")

    s = sub.add_parser("stability", help="coupled-trajectory stability estimates and bounds")
    s.add_argument("--model", choices=["linear", "rbf"], default="linear")
    s.add_argument("--dim", type=int, default=5)
    s.add_argument("--n", type=int, default=100)
    s.add_argument("--m", type=int)
    s.add_argument("--B", type=int, default=1)
    s.add_argument("--B-sweep", type=_parse_int_list, default=[1, 8, 32])
    s.add_argument("--passes", type=int, default=1)
    s.add_argument("--eta", type=float, help="constant step (default min(0.1, 1/L))")
    s.add_argument("--eta-c", type=float, help="use eta_t = c / sqrt(t) instead")
    s.add_argument("--sigma", type=float, default=1.0 / math.sqrt(20.0))
    s.add_argument("--loss", type=_loss, default=LossKind.LOGISTIC_REGRESSION,
                   choices=list(LossKind), metavar="{ls,clogis,rlogis}")
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--pairs", type=int, default=1, help="neighbouring pairs averaged in the sweep")
    s.add_argument("--identical", action="store_true", help="use S~ = S (smoke test)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default=".")

    d = sub.add_parser("datagen", help="write the toy dataset as CSV")
    d.add_argument("--n", type=int, default=1000)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out", default="data.csv")
    return p


def run_config_from_args(args) -> RunConfig:
    base = PRESETS[args.preset]
    overrides = {
        "seed": args.seed, "n": args.n, "B": args.B, "m": args.m, "passes": args.passes,
        "eta_c": args.eta_c, "sigma": args.sigma, "alpha": args.alpha, "r": args.r, "s": args.s,
        "grid": args.grid, "loss": args.loss, "data_path": args.data,
    }
    cfg = replace(base, **{k: v for k, v in overrides.items() if v is not None})
    return replace(cfg, robust_agg=args.robust_agg, out=args.out, n_jobs=args.jobs)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "tables":
            cmd_tables(args.kind, Path(args.out))
        elif args.command == "fit":
            cmd_fit(run_config_from_args(args))
        elif args.command == "stability":
            cmd_stability(args)
        else:
            cmd_datagen(args.n, args.seed, Path(args.out))
    except (ValueError, OSError) as exc:
        print(f"bootsgd: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
