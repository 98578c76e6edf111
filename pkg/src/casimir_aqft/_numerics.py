"""Quadrature and extrapolation helpers shared by the compute modules."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss


class AccuracyError(RuntimeError):
    """Raised when a requested tolerance cannot be met.

    The best available estimate is kept on the exception so callers can
    still report it.
    """

    def __init__(self, message: str, value=None, err: float | None = None):
        super().__init__(message)
        self.value = value
        self.err = err


class DomainError(ValueError):
    """Argument outside the region where a kernel or observable is defined."""


@lru_cache(maxsize=None)
def _gauss_ref(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [a, b]."""
    x, w = _gauss_ref(n)
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * x, half * w


def gauss_panels(breaks, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss rule over consecutive breakpoints."""
    breaks = np.asarray(breaks, dtype=float)
    x, w = _gauss_ref(n)
    a, b = breaks[:-1, None], breaks[1:, None]
    nodes = 0.5 * (a + b) + 0.5 * (b - a) * x
    weights = 0.5 * (b - a) * w
    return nodes.ravel(), weights.ravel()


def gauss_variable(lo: np.ndarray, hi: np.ndarray, n: int):
    """Gauss rules on many intervals at once; empty intervals get zero weight.

    Returns nodes and weights of shape ``lo.shape + (n,)``.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    width = np.maximum(hi - lo, 0.0)
    x, w = _gauss_ref(n)
    nodes = lo[..., None] + 0.5 * width[..., None] * (x + 1.0)
    weights = 0.5 * width[..., None] * w
    return nodes, weights


_STENCIL = np.arange(-3, 5, dtype=float)
_LAGRANGE = np.linalg.inv(np.vander(_STENCIL, 8, increasing=True))
_LAGRANGE_D = _LAGRANGE[1:] * np.arange(1, 8)[:, None]


class UniformTable:
    """Eight-point local Lagrange interpolation on a uniform grid.

    Meant for smooth functions that vanish flatly at ``hi`` and either
    vanish flatly at ``lo`` (``left="zero"``) or are even about ``lo = 0``
    (``left="even"``).  Values outside [lo, hi] are zero.
    """

    def __init__(self, func, lo: float, hi: float, n: int = 1025, left: str = "zero"):
        self.lo, self.hi, self.n = float(lo), float(hi), n
        self.h = (self.hi - self.lo) / (n - 1)
        y = np.asarray(func(np.linspace(self.lo, self.hi, n)))
        if left == "even":
            head = y[4:0:-1]
        elif left == "zero":
            head = np.zeros(4, dtype=y.dtype)
        else:
            raise ValueError(left)
        self.y = np.concatenate([head, y, np.zeros(4, dtype=y.dtype)])

    def _coefficients(self, basis):
        # polynomial coefficients in t for every cell, built once per basis
        key = id(basis)
        cache = self.__dict__.setdefault("_coef", {})
        if key not in cache:
            idx = np.arange(self.n - 1)[:, None] + np.arange(1, 9)
            cache[key] = np.ascontiguousarray(self.y[idx] @ basis.T)
        return cache[key]

    def _eval(self, x, basis, scale):
        x = np.asarray(x, dtype=float)
        u = (x - self.lo) / self.h
        i = np.clip(np.floor(u), 0, self.n - 2).astype(np.intp)
        t = u - i
        coef = self._coefficients(basis)[i]
        out = coef[..., -1]
        for j in range(basis.shape[0] - 2, -1, -1):
            out = out * t + coef[..., j]
        out = out * scale
        return np.where((x >= self.lo) & (x <= self.hi), out, 0.0)

    def __call__(self, x):
        return self._eval(x, _LAGRANGE, 1.0)

    def derivative(self, x):
        return self._eval(x, _LAGRANGE_D, 1.0 / self.h)


def richardson_zero(hs, values) -> tuple[complex, float]:
    """Polynomial (Neville) extrapolation of ``values(h)`` to ``h = 0``.

    Returns the highest-order estimate and the gap to the next lower order,
    which serves as the extrapolation error estimate.
    """
    hs = [float(h) for h in hs]
    table = [complex(v) for v in values]
    if len(table) == 1:
        return table[0], 0.0
    lower = table[-1]
    for k in range(1, len(hs)):
        lower = table[-1]
        table = [(hs[i] * table[i + 1] - hs[i + k] * table[i]) / (hs[i] - hs[i + k])
                 for i in range(len(table) - 1)]
    return table[0], abs(table[0] - lower)


def fsum_complex(values) -> complex:
    """Correctly rounded sum of complex values (real and imaginary separately)."""
    arr = np.asarray(values, dtype=complex).ravel()
    return complex(math.fsum(arr.real), math.fsum(arr.imag))

