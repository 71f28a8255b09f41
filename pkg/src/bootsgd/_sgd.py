"""Compiled inner loops for SGD over linear and kernel coefficient vectors.

Loss codes follow ``LossKind.code``: 0 least squares, 1 classification
logistic, 2 regression logistic.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _dloss(code, p, y):
    if code == 0:
        return p - y
    if code == 1:
        u = y * p
        # -y / (1 + e^u), branch keeps exp from overflowing
        if u >= 0.0:
            e = math.exp(-u)
            return -y * e / (1.0 + e)
        return -y / (1.0 + math.exp(u))
    return math.tanh(0.5 * (p - y))


@njit(cache=True, nogil=True)
def kernel_sgd(gram, y, samples, etas, code, alpha):
    """Run ``len(samples)`` steps in place on ``alpha``.

    ``samples[t]`` is the anchor index visited at step t; the prediction at
    that anchor is ``gram[s] @ alpha`` and only ``alpha[s]`` moves.
    """
    n = alpha.shape[0]
    for t in range(samples.shape[0]):
        s = samples[t]
        row = gram[s]
        p = 0.0
        for k in range(n):
            p += row[k] * alpha[k]
        alpha[s] -= etas[t] * _dloss(code, p, y[s])
    return alpha


@njit(cache=True, nogil=True)
def linear_sgd(X, y, samples, etas, code, w):
    d = w.shape[0]
    for t in range(samples.shape[0]):
        s = samples[t]
        x = X[s]
        p = 0.0
        for k in range(d):
            p += x[k] * w[k]
        g = etas[t] * _dloss(code, p, y[s])
        for k in range(d):
            w[k] -= g * x[k]
    return w


def warm_up():
    """Trigger compilation on tiny inputs."""
    g = np.ones((1, 1))
    y = np.zeros(1)
    s = np.zeros(1, dtype=np.int64)
    e = np.ones(1)
    for code in (0, 1, 2):
        kernel_sgd(g, y + (1.0 if code == 1 else 0.0), s, e, code, np.zeros(1))
        linear_sgd(g, y + (1.0 if code == 1 else 0.0), s, e, code, np.zeros(1))
