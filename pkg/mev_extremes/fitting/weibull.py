from __future__ import annotations

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, special

from ..blocks import DEFAULT_THRESHOLD_H0
from ..distributions import WeibullTail
from ..errors import DegenerateFit, DomainError, InsufficientData
from .types import FitReport

logger = logging.getLogger(__name__)

MIN_LS_POINTS = 3
MIN_MLE_POINTS = 5
MIN_PWM_POINTS = 3
MLE_MAX_ITER = 2_000
# Shapes outside this range mean the likelihood ran off to a boundary.
MLE_SHAPE_RANGE = (0.02, 50.0)


def fit_weibull_ls(points: Sequence[Tuple[float, float]] | np.ndarray, h0: float = DEFAULT_THRESHOLD_H0) -> FitReport:
    """Least squares of ln(-ln psi) on ln h: slope = w, intercept = -w ln C."""
    arr = np.asarray(points, dtype=float).reshape(-1, 2)
    n = arr.shape[0]
    if n < MIN_LS_POINTS:
        raise InsufficientData("least-squares tail fit", needed=MIN_LS_POINTS, got=n)
    h, psi = arr[:, 0], arr[:, 1]
    if np.any(h <= h0):
        raise DomainError(f"all h must exceed h0={h0:g}")
    if np.any(~((psi > 0) & (psi < 1))):
        raise DomainError("all psi_hat must lie in (0, 1)")

    x = np.log(h)
    y = np.log(-np.log(psi))
    dx = x - x.mean()
    sxx = float(np.dot(dx, dx))
    if sxx == 0.0:
        raise DegenerateFit("all h are equal; the log-log regression is undefined")
    slope = float(np.dot(dx, y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    if not slope > 0:
        raise DegenerateFit(f"non-positive fitted shape w={slope!r}")

    resid = y - (intercept + slope * x)
    tail = WeibullTail(scale_C=math.exp(-intercept / slope), shape_w=slope, threshold_h0=h0)
    return FitReport(
        params=tail,
        method="ls",
        n_points=n,
        converged=True,
        objective=float(np.dot(resid, resid)),
        diagnostics={"intercept": intercept},
    )


def truncated_negloglik(scale_C: float, shape_w: float, x: np.ndarray, h0: float) -> float:
    """Negative log-likelihood of the Weibull density conditioned on h > h0."""
    if not (scale_C > 0 and shape_w > 0):
        return math.inf
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        z = (x / scale_C) ** shape_w
        z0 = (h0 / scale_C) ** shape_w
        ll = (
            x.size * (math.log(shape_w) - math.log(scale_C))
            + (shape_w - 1.0) * np.sum(np.log(x / scale_C))
            - np.sum(z)
            + x.size * z0
        )
    return float(-ll) if np.isfinite(ll) else math.inf


def _profile_scale(shape_w: float, x: np.ndarray, h0: float) -> float:
    # d/dC' of the log-likelihood in C' = C^w vanishes at C' = mean(x^w - h0^w)
    c_prime = float(np.mean(x**shape_w - h0**shape_w))
    return c_prime ** (1.0 / shape_w)


def fit_weibull_mle(
    values: Sequence[float] | np.ndarray,
    h0: float = DEFAULT_THRESHOLD_H0,
    *,
    fixed_shape: Optional[float] = None,
) -> FitReport:
    """Maximum likelihood for the left-truncated stretched exponential.

    Failure to converge is soft: the report comes back with converged=False and the
    optimizer's diagnostics, and the caller decides what to do with it.
    """
    arr = np.asarray(values, dtype=float)
    x = arr[arr > h0]
    n = int(x.size)
    if n < MIN_MLE_POINTS:
        raise InsufficientData("truncated maximum-likelihood tail fit", needed=MIN_MLE_POINTS, got=n)

    if fixed_shape is not None:
        scale = _profile_scale(fixed_shape, x, h0)
        return FitReport(
            params=WeibullTail(scale, fixed_shape, h0),
            method="mle",
            n_points=n,
            converged=True,
            objective=truncated_negloglik(scale, fixed_shape, x, h0),
            diagnostics={"fixed_shape": True},
        )

    # coarse profile scan for a starting point
    shapes = np.geomspace(0.2, 5.0, 25)
    profile = [truncated_negloglik(_profile_scale(w, x, h0), w, x, h0) for w in shapes]
    w0 = float(shapes[int(np.argmin(profile))])
    c0 = _profile_scale(w0, x, h0)
    start_nll = truncated_negloglik(c0, w0, x, h0)

    if np.ptp(np.log(x)) < 1e-6:
        return _not_converged(c0, w0, h0, n, start_nll, "values are numerically identical; the likelihood has no interior maximum")

    def objective(theta: np.ndarray) -> float:
        return truncated_negloglik(math.exp(theta[0]), math.exp(theta[1]), x, h0)

    theta0 = np.array([math.log(c0), math.log(w0)])
    simplex = np.array([theta0, theta0 + [0.1, 0.0], theta0 + [0.0, 0.1]])
    res = optimize.minimize(
        objective,
        theta0,
        method="Nelder-Mead",
        options={
            "initial_simplex": simplex,
            "maxiter": MLE_MAX_ITER,
            "xatol": 1e-8,
            "fatol": 1e-10 * max(1.0, abs(start_nll)),
        },
    )
    scale, shape = math.exp(res.x[0]), math.exp(res.x[1])
    lo, hi = MLE_SHAPE_RANGE
    if not res.success or not math.isfinite(res.fun) or not (lo <= shape <= hi) or not math.isfinite(scale):
        return _not_converged(
            scale if math.isfinite(scale) and scale > 0 else c0,
            shape if lo <= shape <= hi else w0,
            h0,
            n,
            float(res.fun),
            str(res.message),
            iterations=int(res.nit),
        )

    logger.debug("truncated MLE: C=%.6g w=%.6g nll=%.6g after %d iterations", scale, shape, res.fun, res.nit)
    return FitReport(
        params=WeibullTail(scale, shape, h0),
        method="mle",
        n_points=n,
        converged=True,
        objective=float(res.fun),
        diagnostics={"iterations": int(res.nit), "message": str(res.message)},
    )


def _not_converged(
    scale: float,
    shape: float,
    h0: float,
    n: int,
    objective: float,
    message: str,
    *,
    iterations: int = 0,
) -> FitReport:
    logger.warning("truncated MLE did not converge on %d points: %s", n, message)
    return FitReport(
        params=WeibullTail(scale, shape, h0),
        method="mle",
        n_points=n,
        converged=False,
        objective=objective,
        diagnostics={"error": "NonConvergence", "message": message, "iterations": iterations},
    )


def fit_weibull_pwm(values: Sequence[float] | np.ndarray, h0: float = 0.0) -> FitReport:
    """Probability-weighted-moment fit of a Weibull to the whole wet-day sample.

    With b0 = mean(x) and b1 = E[x (1 - F(x))], b0 / b1 = 2^(1 + 1/w) and
    b0 = C * Gamma(1 + 1/w). There is no renormalization for a threshold, so the
    values must be the complete positive sample (h0 = 0).
    """
    if h0 != 0:
        raise DomainError(f"the PWM fit uses the whole wet-day sample; h0 must be 0, got {h0!r}")
    arr = np.asarray(values, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError("PWM fit needs finite non-negative values")
    x = np.sort(arr[arr > 0])
    n = int(x.size)
    if n < MIN_PWM_POINTS:
        raise InsufficientData("probability-weighted-moment tail fit", needed=MIN_PWM_POINTS, got=n)

    b0 = float(np.mean(x))
    b1 = float(np.dot(x, n - np.arange(1, n + 1))) / (n * (n - 1))
    ratio = b0 / (2.0 * b1)
    if not (ratio > 1.0 and math.isfinite(ratio)):
        raise DegenerateFit("probability-weighted moments give no finite shape (values nearly identical)")
    shape = math.log(2.0) / math.log(ratio)
    scale = b0 / float(special.gamma(1.0 + 1.0 / shape))
    if not (math.isfinite(scale) and scale > 0):
        raise DegenerateFit(f"non-finite PWM scale for w={shape!r}")

    logger.debug("PWM: C=%.6g w=%.6g on %d values", scale, shape, n)
    return FitReport(
        params=WeibullTail(scale, shape, 0.0),
        method="pwm",
        n_points=n,
        converged=True,
        objective=truncated_negloglik(scale, shape, x, 0.0),
        diagnostics={"b0": b0, "b1": b1},
    )
