"""Linear and Gaussian-RBF kernel models.

Kernel models are stored as coefficient vectors over a fixed set of anchor
points (the training inputs), ``h(x) = sum_j alpha_j K(x_j, x)``. A single
SGD step on example ``(x_i, y_i)`` moves only ``alpha_i`` because the
functional gradient of ``h(x_i)`` is ``K(x_i, .)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Union

import numpy as np
from scipy.spatial.distance import cdist

from .losses import LossKind, loss_derivative


def as_points(X, dim: int | None = None) -> np.ndarray:
    """Coerce a batch of inputs to a 2-D ``(k, d)`` float array.

    A 1-D array is read as ``k`` scalar inputs.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        X = X[:, None]
    elif X.ndim != 2:
        raise ValueError(f"inputs must be at most 2-D, got shape {X.shape}")
    if dim is not None and X.shape[1] != dim:
        raise ValueError(f"input dimension {X.shape[1]} does not match model dimension {dim}")
    return X


def _as_point(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != dim:
        raise ValueError(f"input dimension {x.shape[0]} does not match model dimension {dim}")
    return x


def kernel_matrix(anchors, sigma: float, other=None) -> np.ndarray:
    """Gaussian kernel ``exp(-||a - b||^2 / (2 sigma^2))``.

    With ``other=None`` returns the symmetric Gram matrix of ``anchors``.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    A = as_points(anchors)
    if other is not None:
        # rows follow `other`, columns follow `anchors`
        sq = cdist(as_points(other, A.shape[1]), A, "sqeuclidean")
        return np.exp(-sq / (2.0 * sigma * sigma))
    K = np.exp(-cdist(A, A, "sqeuclidean") / (2.0 * sigma * sigma))
    np.fill_diagonal(K, 1.0)
    return K


@dataclass(frozen=True)
class Linear:
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")

    @property
    def size(self) -> int:
        return self.dim

    def features(self, X) -> np.ndarray:
        return as_points(X, self.dim)


@dataclass(frozen=True, eq=False)
class RbfKernel:
    sigma: float
    anchors: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        A = as_points(self.anchors)
        if A.shape[0] == 0:
            raise ValueError("kernel model needs at least one anchor")
        A.setflags(write=False)
        object.__setattr__(self, "anchors", A)

    @property
    def size(self) -> int:
        return self.anchors.shape[0]

    @property
    def dim(self) -> int:
        return self.anchors.shape[1]

    @cached_property
    def gram(self) -> np.ndarray:
        K = kernel_matrix(self.anchors, self.sigma)
        K.setflags(write=False)
        return K

    def features(self, X) -> np.ndarray:
        return kernel_matrix(self.anchors, self.sigma, other=X)

    def with_anchors(self, anchors) -> "RbfKernel":
        return RbfKernel(self.sigma, anchors)

    def anchor_index(self, x) -> int:
        x = _as_point(x, self.dim)
        hits = np.flatnonzero(np.all(self.anchors == x, axis=1))
        if hits.size == 0:
            raise ValueError("sample input is not one of the kernel anchors")
        return int(hits[0])


ModelSpec = Union[Linear, RbfKernel]


def same_spec(a: ModelSpec, b: ModelSpec) -> bool:
    if a is b:
        return True
    if isinstance(a, Linear) and isinstance(b, Linear):
        return a.dim == b.dim
    if isinstance(a, RbfKernel) and isinstance(b, RbfKernel):
        return a.sigma == b.sigma and np.array_equal(a.anchors, b.anchors)
    return False


@dataclass(frozen=True, eq=False)
class ModelState:
    spec: ModelSpec
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float).reshape(-1)
        if c.shape[0] != self.spec.size:
            raise ValueError(f"expected {self.spec.size} coefficients, got {c.shape[0]}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def zeros(cls, spec: ModelSpec) -> "ModelState":
        return cls(spec, np.zeros(spec.size))


def predict(model: ModelState, x) -> float:
    """Prediction at a single input point."""
    spec = model.spec
    if isinstance(spec, Linear):
        return float(_as_point(x, spec.dim) @ model.coefficients)
    row = spec.features(_as_point(x, spec.dim)[None, :])[0]
    return float(row @ model.coefficients)


def predict_batch(model: ModelState, X) -> np.ndarray:
    return model.spec.features(X) @ model.coefficients


def sgd_step(model: ModelState, kind: LossKind, x, y: float, eta: float,
             anchor_index: int | None = None) -> ModelState:
    """One plain SGD step on the example ``(x, y)``.

    Reference implementation; the bootstrap driver uses the compiled loops
    in :mod:`bootsgd._sgd`, which must agree with it step for step.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    spec = model.spec
    coef = model.coefficients.copy()
    if isinstance(spec, Linear):
        xv = _as_point(x, spec.dim)
        g = loss_derivative(kind, xv @ coef, y)
        coef -= eta * g * xv
    else:
        i = spec.anchor_index(x) if anchor_index is None else anchor_index
        p = spec.gram[i] @ coef
        coef[i] -= eta * loss_derivative(kind, p, y)
    return ModelState(spec, coef)


def average_models(models: Sequence[ModelState]) -> ModelState:
    if len(models) == 0:
        raise ValueError("cannot average an empty list of models")
    spec = models[0].spec
    for m in models[1:]:
        if not same_spec(spec, m.spec):
            raise ValueError("models must share one spec")
    return ModelState(spec, np.mean([m.coefficients for m in models], axis=0))


def model_distance(a: ModelState, b: ModelState) -> float:
    """Hilbert-space distance between two models.

    Euclidean for linear models; RKHS norm for kernel models, which also
    handles expansions over different anchor sets (neighbouring datasets).
    """
    sa, sb = a.spec, b.spec
    if isinstance(sa, Linear) and isinstance(sb, Linear):
        if sa.dim != sb.dim:
            raise ValueError("linear models of different dimension")
        return float(np.linalg.norm(a.coefficients - b.coefficients))
    if isinstance(sa, RbfKernel) and isinstance(sb, RbfKernel):
        if sa.sigma != sb.sigma:
            raise ValueError("kernel models with different bandwidths")
        if same_spec(sa, sb):
            d = a.coefficients - b.coefficients
            return math.sqrt(max(float(d @ sa.gram @ d), 0.0))
        # merge coincident anchors first so shared terms cancel exactly
        union, inverse = np.unique(np.vstack([sa.anchors, sb.anchors]), axis=0,
                                   return_inverse=True)
        inverse = inverse.reshape(-1)
        d = np.zeros(union.shape[0])
        np.add.at(d, inverse[: sa.size], a.coefficients)
        np.subtract.at(d, inverse[sa.size:], b.coefficients)
        K = kernel_matrix(union, sa.sigma)
        return math.sqrt(max(float(d @ K @ d), 0.0))
    raise ValueError("cannot compare linear and kernel models")


def coefficient_distance(a: ModelState, b: ModelState) -> float:
    return float(np.linalg.norm(a.coefficients - b.coefficients))
