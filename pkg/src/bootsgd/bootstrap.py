"""Bootstrap SGD: resampling, per-replicate training and aggregation.

Replicate ``b`` owns a random stream derived from ``(master_seed, b)`` via
:class:`numpy.random.SeedSequence`. The stream first yields the ``m``
bootstrap indices and then the ``T`` within-sample draws, so results do not
depend on how replicates are scheduled across threads.

Indices are 0-based: ``indices[b, k] == i`` means example ``i`` of the
dataset (the ``(i+1)``-th in 1-based notation).
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import _sgd
from .datagen import Dataset
from .losses import LossKind
from .models import (Linear, ModelSpec, ModelState, RbfKernel, as_points, model_distance,
                     same_spec)

# spawn key for the plain (non-bootstrap) SGD run on the full training set
FULL_TRAIN_KEY = 2 ** 40


@dataclass(frozen=True)
class InverseSqrt:
    """``eta_t = c / sqrt(t)`` for ``t = 1, 2, ...``."""

    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("step constant must be positive")

    def etas(self, T: int) -> np.ndarray:
        return self.c / np.sqrt(np.arange(1, T + 1, dtype=float))


@dataclass(frozen=True)
class Constant:
    eta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("step size must be positive")

    def etas(self, T: int) -> np.ndarray:
        return np.full(T, float(self.eta))


StepSchedule = Union[InverseSqrt, Constant]


@dataclass(frozen=True)
class BootstrapConfig:
    B: int
    T: int
    step_schedule: StepSchedule
    loss: LossKind
    model: ModelSpec
    master_seed: int = 0
    m: int | None = None  # bootstrap sample size; None means n

    def __post_init__(self):
        if self.B < 1 or self.T < 1:
            raise ValueError("B and T must be >= 1")
        if self.m is not None and self.m < 1:
            raise ValueError("m must be >= 1")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    def sample_size(self, n: int) -> int:
        return n if self.m is None else self.m

    def replace(self, **changes) -> "BootstrapConfig":
        return dataclasses.replace(self, **changes)

    def describe(self) -> dict:
        sched = self.step_schedule
        model = self.model
        return {
            "B": self.B,
            "T": self.T,
            "m": self.m,
            "step_schedule": {"kind": type(sched).__name__, **dataclasses.asdict(sched)},
            "loss": self.loss.value,
            "model": ({"family": "linear", "dim": model.dim} if isinstance(model, Linear)
                      else {"family": "rbf", "sigma": model.sigma, "n_anchors": model.size}),
            "master_seed": self.master_seed,
        }


@dataclass(frozen=True, eq=False)
class BootstrapEnsemble:
    """Trained replicates; row ``b`` of ``coefficients`` is ``w_{T+1}^{(b)}``."""

    spec: ModelSpec
    coefficients: np.ndarray
    indices: np.ndarray
    config: BootstrapConfig

    @property
    def B(self) -> int:
        return self.coefficients.shape[0]

    @property
    def members(self) -> list[ModelState]:
        return [ModelState(self.spec, c) for c in self.coefficients]

    def predictions(self, X) -> np.ndarray:
        """Member predictions, shape ``(B, k)``."""
        return self.coefficients @ self.spec.features(X).T

    @classmethod
    def from_members(cls, members, indices=None, config=None) -> "BootstrapEnsemble":
        spec = members[0].spec
        for m in members[1:]:
            if not same_spec(spec, m.spec):
                raise ValueError("members must share one spec")
        coef = np.vstack([m.coefficients for m in members])
        return cls(spec, coef, indices, config)


def replicate_rng(master_seed: int, b: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(b,)))


def _replicate_draws(n: int, m: int, T: int, master_seed: int, b: int):
    rng = replicate_rng(master_seed, b)
    idx = rng.integers(0, n, size=m)
    j = rng.integers(0, m, size=T)
    return idx, j


def draw_bootstrap_indices(n: int, m: int, B: int, seed: int) -> np.ndarray:
    """``(B, m)`` matrix of i.i.d. uniform indices in ``[0, n)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = np.empty((B, m), dtype=np.int64)
    for b in range(B):
        out[b] = replicate_rng(seed, b).integers(0, n, size=m)
    return out


def replicate_sample_sequence(n: int, m: int, T: int, seed: int, b: int = 0) -> np.ndarray:
    """Dataset indices ``i_{b, j_{b,t}}`` visited by replicate ``b``, t = 1..T."""
    idx, j = _replicate_draws(n, m, T, seed, b)
    return idx[j]


def _design(dataset: Dataset, spec: ModelSpec) -> np.ndarray:
    # Gram matrix for kernels, input matrix for linear models
    if isinstance(spec, RbfKernel):
        return spec.gram
    return np.ascontiguousarray(spec.features(dataset.x))


def _train(design: np.ndarray, y: np.ndarray, spec: ModelSpec, loss: LossKind,
           samples: np.ndarray, etas: np.ndarray) -> np.ndarray:
    samples = np.ascontiguousarray(samples, dtype=np.int64)
    loop = _sgd.kernel_sgd if isinstance(spec, RbfKernel) else _sgd.linear_sgd
    return loop(design, y, samples, etas, loss.code, np.zeros(spec.size))


def _validate(dataset: Dataset, config: BootstrapConfig) -> None:
    if config.loss is LossKind.LOGISTIC_CLASSIFICATION and not np.all(np.abs(dataset.y) == 1.0):
        raise ValueError("classification loss needs targets in {-1, +1}")
    spec = config.model
    if isinstance(spec, RbfKernel):
        if spec.size != len(dataset) or not np.array_equal(spec.anchors, as_points(dataset.x)):
            raise ValueError("kernel anchors must be the dataset inputs")
    elif dataset.input_dim != spec.dim:
        raise ValueError("dataset input dimension does not match the linear model")


def run_bootstrap_sgd(dataset: Dataset, config: BootstrapConfig, n_jobs: int = 1) -> BootstrapEnsemble:
    """Train ``B`` replicates from ``w_1 = 0`` and collect ``w_{T+1}^{(b)}``."""
    _validate(dataset, config)
    n = len(dataset)
    m = config.sample_size(n)
    etas = config.step_schedule.etas(config.T)
    spec = config.model
    design = _design(dataset, spec)

    def one(b):
        idx, j = _replicate_draws(n, m, config.T, config.master_seed, b)
        return idx, _train(design, dataset.y, spec, config.loss, idx[j], etas)

    if n_jobs > 1 and config.B > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(one, range(config.B)))
    else:
        results = [one(b) for b in range(config.B)]
    indices = np.vstack([r[0] for r in results])
    coef = np.vstack([r[1] for r in results])
    return BootstrapEnsemble(spec, coef, indices, config)


def run_sgd(dataset: Dataset, config: BootstrapConfig) -> ModelState:
    """Plain SGD on the full training set (uniform draws over all n examples)."""
    _validate(dataset, config)
    n = len(dataset)
    rng = replicate_rng(config.master_seed, FULL_TRAIN_KEY)
    samples = rng.integers(0, n, size=config.T)
    etas = config.step_schedule.etas(config.T)
    coef = _train(_design(dataset, config.model), dataset.y, config.model, config.loss,
                  samples, etas)
    return ModelState(config.model, coef)


def aggregate_type1(ensemble: BootstrapEnsemble) -> ModelState:
    """Parameter average."""
    return ModelState(ensemble.spec, ensemble.coefficients.mean(axis=0))


def aggregate_type2(ensemble: BootstrapEnsemble, X) -> np.ndarray:
    """Average of member predictions at each point of ``X``."""
    return ensemble.predictions(X).mean(axis=0)


def aggregate_type3(ensemble: BootstrapEnsemble, X) -> np.ndarray:
    """Pointwise median of member predictions (midpoint rule for even B)."""
    return np.median(ensemble.predictions(X), axis=0)


def order_interval(values: np.ndarray, r: int, s: int) -> tuple[np.ndarray, np.ndarray]:
    """r-th and s-th order statistics (1-based) along axis 0."""
    B = values.shape[0]
    if not 1 <= r <= s <= B:
        raise ValueError(f"need 1 <= r <= s <= B, got r={r}, s={s}, B={B}")
    part = np.partition(values, (r - 1, s - 1), axis=0)
    return part[r - 1], part[s - 1]


def pointwise_order_interval(ensemble: BootstrapEnsemble, X, r: int, s: int):
    return order_interval(ensemble.predictions(X), r, s)


WeightFunction = Callable[[ModelState], float]


def huber_weight(ensemble: BootstrapEnsemble, reference: ModelState) -> WeightFunction:
    """``u(d) = min(1, kappa / ||d||)`` with kappa the median member distance.

    The argument is the displacement model ``w^{(b)} - w^{(tr)}``; norms are
    Hilbert-space norms (RKHS for kernels).
    """
    zero = ModelState.zeros(ensemble.spec)
    dists = np.array([model_distance(ModelState(ensemble.spec, c - reference.coefficients), zero)
                      for c in ensemble.coefficients])
    kappa = float(np.median(dists))
    if kappa == 0.0:
        positive = dists[dists > 0]
        kappa = float(positive.min()) if positive.size else 1.0

    def u(displacement: ModelState) -> float:
        d = model_distance(displacement, zero)
        return 1.0 if d <= kappa else kappa / d

    return u


def one_step_w_estimate(ensemble: BootstrapEnsemble, reference: ModelState,
                        weight: WeightFunction | None = None) -> ModelState:
    """Weighted mean of members, weights ``u(w^{(b)} - w^{(tr)})`` in (0, 1]."""
    if not same_spec(ensemble.spec, reference.spec):
        raise ValueError("reference model must share the ensemble's spec")
    if weight is None:
        weight = huber_weight(ensemble, reference)
    u = np.array([weight(ModelState(ensemble.spec, c - reference.coefficients))
                  for c in ensemble.coefficients])
    if np.any(~(u > 0)) or np.any(u > 1):
        raise ValueError("weights must lie in (0, 1]")
    if np.all(u == 1.0):
        return aggregate_type1(ensemble)
    return ModelState(ensemble.spec, (u @ ensemble.coefficients) / u.sum())
