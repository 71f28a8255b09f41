"""Scalar losses in prediction space and their regularity constants.

Each loss is written as ``ell(p, y)`` where ``p`` is the model prediction.
Derivatives are taken with respect to ``p``; the chain rule through the
model's parameter gradient is applied in :mod:`bootsgd.models`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

_LN4 = math.log(4.0)


class LossKind(enum.Enum):
    LEAST_SQUARES = "ls"
    LOGISTIC_CLASSIFICATION = "clogis"
    LOGISTIC_REGRESSION = "rlogis"

    @property
    def code(self) -> int:
        """Integer tag used by the compiled SGD loops."""
        return _CODES[self]


_CODES = {
    LossKind.LEAST_SQUARES: 0,
    LossKind.LOGISTIC_CLASSIFICATION: 1,
    LossKind.LOGISTIC_REGRESSION: 2,
}


@dataclass(frozen=True)
class LossConstants:
    """Regularity constants for ``w -> ell(<w, x>, y)`` with ``||x|| <= R``.

    ``G`` / ``L`` refer to the map on parameters, ``G_ell`` / ``L_ell`` to the
    map ``a -> ell(a, y)``. Non-Lipschitz losses carry ``math.inf``.
    """

    G: float
    L: float
    G_ell: float
    L_ell: float
    input_radius: float

    @property
    def lipschitz(self) -> bool:
        return math.isfinite(self.G)


def _check_target(kind: LossKind, target) -> None:
    if kind is LossKind.LOGISTIC_CLASSIFICATION:
        t = np.asarray(target)
        if not np.all((t == 1.0) | (t == -1.0)):
            raise ValueError("classification loss needs targets in {-1, +1}")


def _softplus(u):
    # log(1 + exp(u)) without overflow
    return np.logaddexp(0.0, u)


def loss_value(kind: LossKind, prediction, target):
    """Evaluate the loss; vectorises over numpy arrays."""
    _check_target(kind, target)
    p = np.asarray(prediction, dtype=float)
    y = np.asarray(target, dtype=float)
    if kind is LossKind.LEAST_SQUARES:
        out = 0.5 * (y - p) ** 2
    elif kind is LossKind.LOGISTIC_CLASSIFICATION:
        out = _softplus(-y * p)
    else:
        # -ln(4 e^u / (1 + e^u)^2) = |u| + 2 log1p(e^{-|u|}) - ln 4, u = y - p
        a = np.abs(y - p)
        out = a + 2.0 * np.log1p(np.exp(-a)) - _LN4
        out = np.maximum(out, 0.0)
    return out[()] if out.ndim == 0 else out


def loss_derivative(kind: LossKind, prediction, target):
    """Derivative of the loss with respect to the prediction."""
    _check_target(kind, target)
    p = np.asarray(prediction, dtype=float)
    y = np.asarray(target, dtype=float)
    if kind is LossKind.LEAST_SQUARES:
        out = p - y
    elif kind is LossKind.LOGISTIC_CLASSIFICATION:
        # -y / (1 + exp(y p)) = -y * sigmoid(-y p)
        out = -y * _sigmoid(-y * p)
    else:
        out = np.tanh(0.5 * (p - y))
    return out[()] if out.ndim == 0 else out


def _sigmoid(u):
    return np.exp(-np.logaddexp(0.0, -u))


def loss_constants(kind: LossKind, input_radius: float) -> LossConstants:
    """Constants for linear models whose inputs satisfy ``||x|| <= input_radius``.

    For a bounded kernel, pass ``input_radius = sup_x sqrt(K(x, x))``
    (1 for the Gaussian kernel).
    """
    if not input_radius > 0:
        raise ValueError(f"input_radius must be positive, got {input_radius}")
    R = float(input_radius)
    if kind is LossKind.LEAST_SQUARES:
        return LossConstants(G=math.inf, L=R * R, G_ell=math.inf, L_ell=1.0, input_radius=R)
    if kind is LossKind.LOGISTIC_CLASSIFICATION:
        return LossConstants(G=R, L=R * R / 4.0, G_ell=1.0, L_ell=0.25, input_radius=R)
    return LossConstants(G=R, L=R * R / 2.0, G_ell=1.0, L_ell=0.5, input_radius=R)
