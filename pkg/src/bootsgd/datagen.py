"""Seeded synthetic data: the piecewise toy regression problem on [0, 33].

The truth is linear, oscillating-polynomial, constant and quadratic on four
consecutive right-closed intervals, and each interval has its own noise law
(uniform, median-centred exponential, standard Cauchy, Gaussian), all with
median zero.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DOMAIN = (0.0, 33.0)
_BREAKS = (3.0, 6.0, 30.0)
# rate 0.5 exponential: median = ln 2 / 0.5
EXP_RATE = 0.5
EXP_MEDIAN = math.log(2.0) / EXP_RATE


@dataclass(frozen=True, eq=False)
class Dataset:
    """Ordered training examples ``(x_i, y_i)``.

    ``x`` has shape ``(n,)`` for scalar inputs or ``(n, d)``.
    """

    x: np.ndarray
    y: np.ndarray
    x_range: tuple[float, float] | None = None
    seed: int | None = field(default=None, compare=False)

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        y = np.array(self.y, dtype=float).reshape(-1)
        if x.shape[0] != y.shape[0]:
            raise ValueError("x and y lengths differ")
        if y.shape[0] == 0:
            raise ValueError("dataset must be nonempty")
        if self.x_range is not None:
            lo, hi = self.x_range
            if np.any(x < lo) or np.any(x > hi):
                raise ValueError("inputs outside the declared x_range")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.y.shape[0]

    def __getitem__(self, i):
        return self.x[i], float(self.y[i])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)
                and self.x_range == other.x_range)

    @property
    def input_dim(self) -> int:
        return 1 if self.x.ndim == 1 else self.x.shape[1]

    def to_csv(self, path) -> None:
        """Write ``x,y`` (or ``x0..x{d-1},y``) with shortest round-trip floats."""
        X = self.x if self.x.ndim == 2 else self.x[:, None]
        header = ["x"] if self.x.ndim == 1 else [f"x{k}" for k in range(X.shape[1])]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header + ["y"])
            for row, yi in zip(X, self.y):
                w.writerow([repr(float(v)) for v in row] + [repr(float(yi))])


def read_dataset_csv(path, x_range=None) -> Dataset:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if not body:
        raise ValueError(f"{path}: no data rows")
    arr = np.array([[float(v) for v in r] for r in body])
    x = arr[:, 0] if len(header) == 2 else arr[:, :-1]
    return Dataset(x, arr[:, -1], x_range=x_range)


def _check_domain(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(~((x >= DOMAIN[0]) & (x <= DOMAIN[1]))):
        raise ValueError(f"x must lie in [{DOMAIN[0]}, {DOMAIN[1]}]")
    return x


def _region(x: np.ndarray) -> np.ndarray:
    # 0: [0,3], 1: (3,6], 2: (6,30], 3: (30,33]
    return np.searchsorted(np.asarray(_BREAKS), x, side="left")


def true_function(x):
    """Piecewise regression function; vectorised."""
    x = _check_domain(x)
    out = np.select(
        [x <= 3.0, x <= 6.0, x <= 30.0],
        [0.7 * x, 10.0 + x + np.sin(10.0 * x) * x ** 4 / 100.0, np.full_like(x, 5.0)],
        -20.0 - 0.4 * (x - 27.0) ** 2,
    )
    return float(out) if out.ndim == 0 else out


def _noise_from_uniform(region, u, z):
    return np.select(
        [region == 0, region == 1, region == 2],
        [2.0 * u - 1.0,
         -np.log1p(-u) / EXP_RATE - EXP_MEDIAN,
         np.tan(np.pi * (u - 0.5))],
        2.0 * z,
    )


def sample_noise(x: float, rng: np.random.Generator) -> float:
    """One noise draw for input ``x`` using the region's law."""
    x = _check_domain(x)
    region = _region(np.atleast_1d(x))
    u = rng.random()
    z = rng.standard_normal() if region[0] == 3 else 0.0
    return float(_noise_from_uniform(region, u, z)[0])


def generate_dataset(n: int, seed: int) -> Dataset:
    """``n`` i.i.d. examples with ``x ~ U[0, 33]`` and ``y = f(x) + noise(x)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    x = rng.uniform(DOMAIN[0], DOMAIN[1], size=n)
    u = rng.random(n)
    z = rng.standard_normal(n)
    y = true_function(x) + _noise_from_uniform(_region(x), u, z)
    return Dataset(x, y, x_range=DOMAIN, seed=seed)


def generate_linear_dataset(n: int, dim: int, seed: int, radius: float = 1.0,
                            noise: float = 0.1, classification: bool = False) -> Dataset:
    """Inputs uniform in the ball of ``radius``; linear truth plus noise.

    Used for stability experiments where ``sup ||x||`` must be known. With
    ``classification=True`` targets are the signs (in {-1, +1}).
    """
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal((n, dim))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    r = radius * rng.random(n) ** (1.0 / dim)
    X = direction * r[:, None]
    w_true = rng.standard_normal(dim)
    w_true /= np.linalg.norm(w_true)
    y = X @ w_true + noise * rng.standard_normal(n)
    if classification:
        y = np.where(y >= 0.0, 1.0, -1.0)
    return Dataset(X, y, seed=seed)
