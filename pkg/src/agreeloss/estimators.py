"""Extremum estimation under the agreement losses.

Closed forms:

* constant fits minimize either agreement loss at ``mean(y) +/- std(y)``;
  the minimum is ``std/(std + mad)`` for the element-wise loss and exactly
  ``1/2`` for the norm-ratio loss;
* the norm-ratio linear fit has slope ``sign(rho) * ||y_c|| / ||x_c||``
  and intercept ``mean(y) - slope * mean(x)``, reaching
  ``(1 - |rho|) / 2``;
* ordinary least squares is included for reference.

The element-wise loss has no known linear closed form, so
:func:`fit_linear_lw` minimizes numerically with the embedded Nelder-Mead
simplex, warm-started from both closed-form solutions above.

Scalar profiles of both losses along constant predictions, together with
their first and second derivatives, are exposed for plotting and for
verifying the fits against finite differences.  Both profiles have a kink
at ``theta = mean(y)``; derivative calls there raise
:class:`NonDifferentiablePointError` carrying the one-sided limits.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    ConvergenceError,
    DegenerateFitWarning,
    InvalidInputError,
    NonDifferentiablePointError,
    SingularDesignError,
    UndefinedValueError,
)
from .losses import SeriesPair, l_w
from .vector_stats import as_vector, is_constant, mad, mean, pearson, sign, std

__all__ = [
    "CLOSED_FORM",
    "ConstantFitResult",
    "LinearFitResult",
    "MinimizeResult",
    "MinimizerConfig",
    "NUMERICAL",
    "fit_constant_lnr2",
    "fit_constant_lw",
    "fit_linear_lnr2",
    "fit_linear_lw",
    "fit_linear_ols",
    "lnr2_constant_derivative",
    "lnr2_constant_profile",
    "lnr2_constant_second_derivative",
    "lw_constant_derivative",
    "lw_constant_profile",
    "lw_constant_second_derivative",
    "minimize",
]

CLOSED_FORM = "closed_form"
NUMERICAL = "numerical"


@dataclass(frozen=True)
class MinimizerConfig:
    """Settings of the embedded simplex minimizer."""

    max_iterations: int = 10_000
    x_tolerance: float = 1e-10
    f_tolerance: float = 1e-10
    initial_simplex_scale: float = 0.1
    restarts: int = 2

    def __post_init__(self):
        if self.max_iterations < 1:
            raise InvalidInputError("max_iterations must be at least 1")
        if self.x_tolerance <= 0.0 or self.f_tolerance <= 0.0:
            raise InvalidInputError("tolerances must be positive")
        if self.initial_simplex_scale <= 0.0:
            raise InvalidInputError("initial_simplex_scale must be positive")
        if self.restarts < 0:
            raise InvalidInputError("restarts must be non-negative")


@dataclass(frozen=True)
class MinimizeResult:
    point: np.ndarray
    value: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class ConstantFitResult:
    """Both minimizers of a constant-prediction fit and the minimum loss."""

    theta_plus: float
    theta_minus: float
    min_loss: float
    loss_name: str


@dataclass(frozen=True)
class LinearFitResult:
    slope: float
    intercept: float
    achieved_loss: float
    method: str
    degenerate: bool = False

    def predict(self, x) -> np.ndarray:
        return self.slope * as_vector(x) + self.intercept


def _eval(objective, point: np.ndarray) -> float:
    value = float(objective(point))
    return math.inf if math.isnan(value) else value


def _initial_simplex(x0: np.ndarray, scale: float) -> list[np.ndarray]:
    points = [x0.copy()]
    for i in range(x0.size):
        p = x0.copy()
        step = scale * (abs(p[i]) if p[i] != 0.0 else 1.0)
        p[i] += step
        points.append(p)
    return points


def _nelder_mead(objective, x0, scale, budget, x_tol, f_tol):
    """One simplex descent; returns (best_point, best_value, iters, converged)."""
    points = _initial_simplex(x0, scale)
    values = [_eval(objective, p) for p in points]
    iters = 0
    while True:
        order = sorted(range(len(points)), key=lambda i: values[i])
        points = [points[i] for i in order]
        values = [values[i] for i in order]
        x_spread = max(float(np.max(np.abs(p - points[0]))) for p in points[1:])
        f_spread = values[-1] - values[0]
        if x_spread <= x_tol and f_spread <= f_tol:
            return points[0], values[0], iters, True
        if iters >= budget:
            return points[0], values[0], iters, False
        iters += 1

        centroid = np.mean(points[:-1], axis=0)
        worst = points[-1]
        reflected = centroid + (centroid - worst)
        f_reflected = _eval(objective, reflected)
        if values[0] <= f_reflected < values[-2]:
            points[-1], values[-1] = reflected, f_reflected
            continue
        if f_reflected < values[0]:
            expanded = centroid + 2.0 * (centroid - worst)
            f_expanded = _eval(objective, expanded)
            if f_expanded < f_reflected:
                points[-1], values[-1] = expanded, f_expanded
            else:
                points[-1], values[-1] = reflected, f_reflected
            continue
        if f_reflected < values[-1]:
            contracted = centroid + 0.5 * (reflected - centroid)
            f_contracted = _eval(objective, contracted)
            if f_contracted <= f_reflected:
                points[-1], values[-1] = contracted, f_contracted
                continue
        else:
            contracted = centroid + 0.5 * (worst - centroid)
            f_contracted = _eval(objective, contracted)
            if f_contracted < values[-1]:
                points[-1], values[-1] = contracted, f_contracted
                continue
        # Shrink toward the best vertex.
        for i in range(1, len(points)):
            points[i] = points[0] + 0.5 * (points[i] - points[0])
            values[i] = _eval(objective, points[i])


def minimize(objective, start, config: MinimizerConfig | None = None) -> MinimizeResult:
    """Derivative-free minimization by Nelder-Mead simplex descent.

    Deterministic for identical inputs.  After each converged descent the
    simplex is rebuilt around the best point at half the scale
    (``config.restarts`` times) to escape premature collapse.

    Raises:
        InvalidInputError: the objective is not finite at ``start``.
    """
    cfg = config if config is not None else MinimizerConfig()
    x0 = np.asarray(start, dtype=float).reshape(-1)
    if x0.size == 0:
        raise InvalidInputError("start point must have at least one coordinate")
    if not np.all(np.isfinite(x0)):
        raise InvalidInputError("start point must be finite")
    f0 = _eval(objective, x0)
    if not math.isfinite(f0):
        raise InvalidInputError("objective is not finite at the start point")

    best_x, best_f = x0, f0
    remaining = cfg.max_iterations
    total_iters = 0
    converged = False
    scale = cfg.initial_simplex_scale
    for _ in range(cfg.restarts + 1):
        x_run, f_run, used, ok = _nelder_mead(
            objective, best_x, scale, remaining, cfg.x_tolerance, cfg.f_tolerance
        )
        total_iters += used
        remaining -= used
        if f_run <= best_f:
            best_x, best_f = x_run, f_run
        converged = ok
        # Stop on exhausted budget; a converged final run stays converged.
        if not ok or remaining <= 0:
            break
        scale *= 0.5
    return MinimizeResult(
        point=best_x, value=best_f, iterations=total_iters, converged=converged
    )


def _require_nonconstant(y: np.ndarray, what: str = "observations") -> None:
    if bool(np.all(y == y[0])):
        raise UndefinedValueError(f"{what} must be non-constant")


def fit_constant_lw(y) -> ConstantFitResult:
    """Constant fit under the element-wise agreement loss.

    Minimizers are ``mean(y) +/- std(y)``; the minimum equals
    ``std/(std + mad)``.
    """
    arr = as_vector(y)
    _require_nonconstant(arr)
    mu = mean(arr)
    sd = std(arr)
    md = mad(arr)
    return ConstantFitResult(
        theta_plus=mu + sd,
        theta_minus=mu - sd,
        min_loss=sd / (sd + md),
        loss_name="lw",
    )


def fit_constant_lnr2(y) -> ConstantFitResult:
    """Constant fit under the norm-ratio loss; the minimum is exactly 1/2."""
    arr = as_vector(y)
    _require_nonconstant(arr)
    mu = mean(arr)
    sd = std(arr)
    return ConstantFitResult(
        theta_plus=mu + sd,
        theta_minus=mu - sd,
        min_loss=0.5,
        loss_name="lnr2",
    )


def lw_constant_profile(theta: float, y) -> float:
    """Element-wise agreement loss of the constant prediction ``theta``.

    ``(u^2 + sd^2) / (u^2 + sd^2 + 2|u| mad)`` with ``u = theta - mean(y)``.
    Equals 1 at ``theta = mean(y)`` and tends to 1 as ``theta -> +/-inf``.
    """
    arr = as_vector(y)
    _require_nonconstant(arr)
    u = float(theta) - mean(arr)
    sd2 = std(arr) ** 2
    return (u * u + sd2) / (u * u + sd2 + 2.0 * abs(u) * mad(arr))


def lnr2_constant_profile(theta: float, y) -> float:
    """Norm-ratio loss of the constant prediction ``theta``.

    ``(u^2 + sd^2) / (|u| + sd)^2`` with ``u = theta - mean(y)``.
    """
    arr = as_vector(y)
    _require_nonconstant(arr)
    u = float(theta) - mean(arr)
    sd = std(arr)
    return (u * u + sd * sd) / (abs(u) + sd) ** 2


def lw_constant_derivative(theta: float, y) -> float:
    """First derivative of :func:`lw_constant_profile` in ``theta``.

    Undefined at the kink ``theta = mean(y)``; the raised error carries the
    one-sided limits ``+/- 2 mad / sd^2``.
    """
    arr = as_vector(y)
    _require_nonconstant(arr)
    mu = mean(arr)
    sd = std(arr)
    md = mad(arr)
    u = float(theta) - mu
    if u == 0.0:
        limit = 2.0 * md / (sd * sd)
        raise NonDifferentiablePointError(
            "derivative does not exist at theta = mean(y)",
            left_limit=limit,
            right_limit=-limit,
        )
    num = 2.0 * md * (u * u - sd * sd) * sign(u)
    den = (u * u + sd * sd + 2.0 * abs(u) * md) ** 2
    return num / den


def lw_constant_second_derivative(theta: float, y) -> float:
    """Second derivative of :func:`lw_constant_profile` away from the kink."""
    arr = as_vector(y)
    _require_nonconstant(arr)
    mu = mean(arr)
    sd = std(arr)
    md = mad(arr)
    u = float(theta) - mu
    if u == 0.0:
        limit = 8.0 * md * md / sd**4
        raise NonDifferentiablePointError(
            "second derivative does not exist at theta = mean(y)",
            left_limit=limit,
            right_limit=limit,
        )
    sd2 = sd * sd
    num = 4.0 * md * (2.0 * md * sd2 + u * (3.0 * sd2 - u * u) * sign(u))
    den = (u * u + sd2 + 2.0 * abs(u) * md) ** 3
    return num / den


def lnr2_constant_derivative(theta: float, y) -> float:
    """First derivative of :func:`lnr2_constant_profile` in ``theta``.

    Undefined at the kink; the raised error carries the one-sided limits
    ``+/- 2 / sd``.
    """
    arr = as_vector(y)
    _require_nonconstant(arr)
    mu = mean(arr)
    sd = std(arr)
    u = float(theta) - mu
    if u == 0.0:
        raise NonDifferentiablePointError(
            "derivative does not exist at theta = mean(y)",
            left_limit=2.0 / sd,
            right_limit=-2.0 / sd,
        )
    return 2.0 * sd * (u - sign(u) * sd) / (sd + abs(u)) ** 3


def lnr2_constant_second_derivative(theta: float, y) -> float:
    """Second derivative of :func:`lnr2_constant_profile` away from the kink.

    Equals ``1/(4 sd^2)`` at the minimizers ``mean(y) +/- std(y)``.
    """
    arr = as_vector(y)
    _require_nonconstant(arr)
    mu = mean(arr)
    sd = std(arr)
    u = float(theta) - mu
    if u == 0.0:
        limit = 8.0 / (sd * sd)
        raise NonDifferentiablePointError(
            "second derivative does not exist at theta = mean(y)",
            left_limit=limit,
            right_limit=limit,
        )
    return 4.0 * sd * (2.0 * sd - abs(u)) / (sd + abs(u)) ** 4


def _validated_xy(x, y):
    xv = as_vector(x)
    yv = as_vector(y)
    if xv.size != yv.size:
        raise InvalidInputError(
            f"predictor and response differ in length: {xv.size} != {yv.size}"
        )
    return xv, yv


def fit_linear_ols(x, y) -> LinearFitResult:
    """Ordinary least squares; ``achieved_loss`` is the training MSE."""
    xv, yv = _validated_xy(x, y)
    if is_constant(xv):
        raise SingularDesignError("least squares requires a non-constant predictor")
    xc = xv - np.mean(xv)
    yc = yv - np.mean(yv)
    slope = float(np.dot(xc, yc) / np.dot(xc, xc))
    intercept = float(np.mean(yv) - slope * np.mean(xv))
    residual = slope * xv + intercept - yv
    return LinearFitResult(
        slope=slope,
        intercept=intercept,
        achieved_loss=float(np.mean(residual * residual)),
        method=CLOSED_FORM,
    )


def fit_linear_lnr2(x, y) -> LinearFitResult:
    """Closed-form linear fit under the norm-ratio loss.

    Slope ``sign(rho) * ||y_c|| / ||x_c||``, intercept
    ``mean(y) - slope * mean(x)``, achieved loss ``(1 - |rho|) / 2``.

    At exactly zero correlation the sign convention collapses the slope to
    zero; the result is flagged ``degenerate`` and a
    :class:`DegenerateFitWarning` is emitted.  The reported loss is still
    the limiting optimum ``1/2``, which the degenerate point itself does
    not attain on re-scoring.
    """
    xv, yv = _validated_xy(x, y)
    if is_constant(xv):
        raise SingularDesignError("linear fit requires a non-constant predictor")
    if is_constant(yv):
        raise UndefinedValueError("linear fit requires non-constant observations")
    rho = pearson(xv, yv)
    if rho == 0.0:
        warnings.warn(
            "zero correlation: slope sign is undefined, returning the flat fit",
            DegenerateFitWarning,
            stacklevel=2,
        )
        return LinearFitResult(
            slope=0.0,
            intercept=float(np.mean(yv)),
            achieved_loss=0.5,
            method=CLOSED_FORM,
            degenerate=True,
        )
    xc = xv - np.mean(xv)
    yc = yv - np.mean(yv)
    scale = math.sqrt(float(np.dot(yc, yc)) / float(np.dot(xc, xc)))
    slope = sign(rho) * scale
    intercept = float(np.mean(yv) - slope * np.mean(xv))
    return LinearFitResult(
        slope=slope,
        intercept=intercept,
        achieved_loss=(1.0 - abs(rho)) / 2.0,
        method=CLOSED_FORM,
    )


def fit_linear_lw(x, y, config: MinimizerConfig | None = None) -> LinearFitResult:
    """Numerical linear fit under the element-wise agreement loss.

    No closed form is known for this loss, so the fit runs the embedded
    simplex minimizer from two warm starts (the least-squares and the
    norm-ratio solutions) and keeps the better outcome.

    Raises:
        ConvergenceError: no descent converged within the iteration budget;
            the error carries the best iterate found.
    """
    cfg = config if config is not None else MinimizerConfig()
    xv, yv = _validated_xy(x, y)
    if is_constant(xv):
        raise SingularDesignError("linear fit requires a non-constant predictor")
    if is_constant(yv):
        raise UndefinedValueError("linear fit requires non-constant observations")

    def objective(theta: np.ndarray) -> float:
        z = theta[0] * xv + theta[1]
        if not np.all(np.isfinite(z)):
            return math.inf
        return l_w(SeriesPair(z, yv))

    ols = fit_linear_ols(xv, yv)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateFitWarning)
        nr2 = fit_linear_lnr2(xv, yv)
    starts = [(ols.slope, ols.intercept), (nr2.slope, nr2.intercept)]

    best: MinimizeResult | None = None
    any_converged = False
    for start in starts:
        result = minimize(objective, np.asarray(start, dtype=float), cfg)
        any_converged = any_converged or result.converged
        if best is None or result.value < best.value:
            best = result
    assert best is not None
    if not any_converged:
        raise ConvergenceError(
            f"simplex minimization did not converge within {cfg.max_iterations} iterations",
            point=best.point,
            value=best.value,
        )
    return LinearFitResult(
        slope=float(best.point[0]),
        intercept=float(best.point[1]),
        achieved_loss=best.value,
        method=NUMERICAL,
    )
