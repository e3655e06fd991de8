"""Truncated power series arithmetic (coefficients lowest order first)."""

import numpy as np
from scipy.special import binom


def const(c, order):
    out = np.zeros(order + 1)
    out[0] = c
    return out


def binomial(alpha, order):
    """(1 + x)^alpha."""
    k = np.arange(order + 1)
    return binom(alpha, k)


def mul(a, b):
    return np.convolve(a, b)[: len(a)]


def div(a, b):
    if b[0] == 0:
        raise ZeroDivisionError("series division by a series with zero constant term")
    out = np.zeros_like(a, dtype=float)
    for n in range(len(a)):
        out[n] = (a[n] - np.dot(b[1 : n + 1], out[n - 1 :: -1][:n])) / b[0]
    return out


def power(a, alpha):
    """a^alpha for a series with positive constant term (J.C.P. Miller recurrence)."""
    if a[0] <= 0:
        raise ValueError("power needs a positive constant term")
    out = np.zeros_like(a, dtype=float)
    out[0] = a[0] ** alpha
    for n in range(1, len(a)):
        k = np.arange(1, n + 1)
        out[n] = np.sum(((alpha + 1) * k - n) * a[k] * out[n - k]) / (n * a[0])
    return out


def integral(a, c0=0.0):
    """Antiderivative with constant term c0, truncated to the input length."""
    out = np.empty_like(a, dtype=float)
    out[0] = c0
    out[1:] = a[:-1] / np.arange(1, len(a))
    return out


def evaluate(a, x):
    return np.polynomial.polynomial.polyval(x, a)
