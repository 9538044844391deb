"""One-dimensional vector statistics and norms.

Conventions used throughout the package:

* all moments are population moments (divisor ``n``, no Bessel correction);
* reductions go through numpy, whose pairwise summation keeps the identity
  suite stable at 1e-10 relative tolerance for vectors up to ``10**6``
  elements;
* ``sign(0) == 0``, which keeps downstream closed forms defined at zero
  correlation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatchError, InvalidInputError, UndefinedValueError

__all__ = [
    "SummaryStats",
    "as_vector",
    "center",
    "inner",
    "is_constant",
    "lp_mean",
    "lp_norm",
    "mad",
    "mean",
    "pearson",
    "sign",
    "std",
    "summary",
    "variance",
]

# Absolute tolerance of the one-dimensional minimization behind lp_mean.
LP_MEAN_TOLERANCE = 1e-10


def as_vector(values) -> np.ndarray:
    """Validate *values* as a finite 1-D float vector and return a read-only copy.

    Raises:
        InvalidInputError: empty input, wrong dimensionality, or non-finite
            elements.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise InvalidInputError(f"expected a 1-D vector, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidInputError("vector must contain at least one element")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("vector elements must be finite")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def is_constant(x) -> bool:
    """True when every element equals the first one (exact comparison)."""
    arr = as_vector(x)
    return bool(np.all(arr == arr[0]))


def mean(x) -> float:
    """Arithmetic mean."""
    return float(np.mean(as_vector(x)))


def mad(x) -> float:
    """Mean absolute deviation from the mean."""
    arr = as_vector(x)
    return float(np.mean(np.abs(np.mean(arr) - arr)))


def variance(x) -> float:
    """Population variance (divisor ``n``)."""
    arr = as_vector(x)
    centered = arr - np.mean(arr)
    # Centered two-pass form; equals (||x||^2 - n*mu^2)/n without the
    # cancellation. Clamped so rounding can never leave a negative value.
    return max(0.0, float(np.mean(centered * centered)))


def std(x) -> float:
    """Population standard deviation, sqrt of :func:`variance`."""
    return math.sqrt(variance(x))


def center(x) -> np.ndarray:
    """Subtract the mean; the result sums to zero."""
    arr = as_vector(x)
    return arr - np.mean(arr)


def lp_norm(x, p) -> float:
    """L_p norm for ``p >= 1`` or ``p = inf`` (Chebyshev)."""
    arr = as_vector(x)
    p = float(p)
    if not p >= 1.0:
        raise InvalidInputError(f"lp_norm requires p >= 1, got {p}")
    if math.isinf(p):
        return float(np.max(np.abs(arr)))
    if p == 1.0:
        return float(np.sum(np.abs(arr)))
    if p == 2.0:
        return float(np.sqrt(np.dot(arr, arr)))
    return float(np.sum(np.abs(arr) ** p) ** (1.0 / p))


def inner(x, y) -> float:
    """Euclidean inner product of equal-length vectors."""
    xv = as_vector(x)
    yv = as_vector(y)
    if xv.size != yv.size:
        raise DimensionMismatchError(
            f"inner product needs equal lengths, got {xv.size} and {yv.size}"
        )
    return float(np.dot(xv, yv))


def pearson(x, y) -> float:
    """Pearson correlation of two non-constant, equal-length vectors.

    Raises:
        UndefinedValueError: if either vector is constant.
    """
    xv = as_vector(x)
    yv = as_vector(y)
    if xv.size != yv.size:
        raise DimensionMismatchError(
            f"correlation needs equal lengths, got {xv.size} and {yv.size}"
        )
    xc = xv - np.mean(xv)
    yc = yv - np.mean(yv)
    nx = float(np.sqrt(np.dot(xc, xc)))
    ny = float(np.sqrt(np.dot(yc, yc)))
    if nx == 0.0 or ny == 0.0:
        raise UndefinedValueError("correlation is undefined for a constant vector")
    r = float(np.dot(xc, yc)) / (nx * ny)
    return min(1.0, max(-1.0, r))


def lp_mean(y, p) -> float:
    """Minimizer of ``sum(|y_i - theta|**p)`` over theta.

    ``p = 1`` returns the median (midpoint of the two central order
    statistics for even ``n``), ``p = 2`` the mean, and ``p = inf`` the
    midrange.  Other ``p > 1`` are solved by driving the monotone
    derivative of the objective to zero (Illinois false position with a
    bisection fallback) to absolute tolerance ``LP_MEAN_TOLERANCE``.
    """
    arr = as_vector(y)
    p = float(p)
    if not p >= 1.0:
        raise InvalidInputError(f"lp_mean requires p >= 1, got {p}")
    if p == 1.0:
        return float(np.median(arr))
    if p == 2.0:
        return float(np.mean(arr))
    lo = float(np.min(arr))
    hi = float(np.max(arr))
    if lo == hi:
        return lo
    if math.isinf(p):
        return 0.5 * (lo + hi)

    expo = p - 1.0

    def grad(theta: float) -> float:
        d = theta - arr
        return float(np.sum(np.copysign(np.abs(d) ** expo, d)))

    g_lo = grad(lo)
    g_hi = grad(hi)
    if g_lo >= 0.0:
        return lo
    if g_hi <= 0.0:
        return hi
    side = 0
    for _ in range(200):
        if hi - lo <= LP_MEAN_TOLERANCE:
            break
        mid = (lo * g_hi - hi * g_lo) / (g_hi - g_lo)
        if not lo < mid < hi:
            mid = 0.5 * (lo + hi)
        g_mid = grad(mid)
        if g_mid > 0.0:
            hi, g_hi = mid, g_mid
            if side == 1:
                g_lo *= 0.5
            side = 1
        elif g_mid < 0.0:
            lo, g_lo = mid, g_mid
            if side == -1:
                g_hi *= 0.5
            side = -1
        else:
            return mid
    return 0.5 * (lo + hi)


def sign(value) -> float:
    """Scalar sign with ``sign(0) = 0``."""
    if value > 0:
        return 1.0
    if value < 0:
        return -1.0
    return 0.0


@dataclass(frozen=True)
class SummaryStats:
    """Population moments of one vector: mean, std, variance, mad."""

    mean: float
    std: float
    variance: float
    mad: float


def summary(x) -> SummaryStats:
    """Compute :class:`SummaryStats` in one pass over the validated vector."""
    arr = as_vector(x)
    mu = float(np.mean(arr))
    dev = arr - mu
    var = max(0.0, float(np.mean(dev * dev)))
    return SummaryStats(
        mean=mu,
        std=math.sqrt(var),
        variance=var,
        mad=float(np.mean(np.abs(dev))),
    )
