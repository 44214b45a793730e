"""Truncated Taylor arithmetic used for analytic schedule derivatives.

A jet is an array ``c`` of shape ``(order + 1, *batch)`` with
``c[k] = f^(k)(t) / k!``. Only the handful of operations the protocols need
are provided.
"""
import math

import numpy as np


def from_derivatives(derivs):
    derivs = np.asarray(derivs, dtype=float)
    fact = np.array([math.factorial(k) for k in range(derivs.shape[0])], dtype=float)
    return derivs / fact.reshape((-1,) + (1,) * (derivs.ndim - 1))


def to_derivatives(c):
    fact = np.array([math.factorial(k) for k in range(c.shape[0])], dtype=float)
    return c * fact.reshape((-1,) + (1,) * (c.ndim - 1))


def mul(f, g):
    out = np.zeros(np.broadcast_shapes(f.shape, g.shape))
    for k in range(out.shape[0]):
        for i in range(k + 1):
            out[k] += f[i] * g[k - i]
    return out


def reciprocal(f):
    r = np.zeros_like(f, dtype=float)
    r[0] = 1.0 / f[0]
    for k in range(1, f.shape[0]):
        acc = np.zeros_like(f[0], dtype=float)
        for i in range(1, k + 1):
            acc = acc + f[i] * r[k - i]
        r[k] = -acc * r[0]
    return r


def sqrt(f):
    """Jet of sqrt(f); entries are NaN where f[0] < 0."""
    s = np.zeros_like(f, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        s[0] = np.sqrt(f[0])
        for k in range(1, f.shape[0]):
            acc = np.zeros_like(f[0], dtype=float)
            for i in range(1, k):
                acc = acc + s[i] * s[k - i]
            s[k] = (f[k] - acc) / (2.0 * s[0])
    return s


def derivative(f):
    """Jet of f' (one order shorter)."""
    k = np.arange(1, f.shape[0], dtype=float).reshape((-1,) + (1,) * (f.ndim - 1))
    return f[1:] * k


def truncate(f, order):
    return f[: order + 1]
