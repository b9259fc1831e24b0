from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np
from scipy import optimize
from scipy.special import logsumexp

from ..distributions import GUMBEL_SWITCH, GevParams
from ..errors import InsufficientData, NonConvergence
from .types import FitReport

logger = logging.getLogger(__name__)

MIN_GEV_POINTS = 10
MIN_GUMBEL_POINTS = 5
GEV_MAX_ITER = 2_000
GEV_REL_TOL = 1e-10
EULER_GAMMA = 0.5772156649015329


def gev_negloglik(mu: float, sigma: float, k: float, x: np.ndarray) -> float:
    """Negative log-likelihood of the GEV density; inf when any point falls outside the support."""
    if not sigma > 0:
        return math.inf
    z = (x - mu) / sigma
    if abs(k) < GUMBEL_SWITCH:
        with np.errstate(over="ignore"):
            val = x.size * math.log(sigma) + np.sum(z) + np.sum(np.exp(-z))
        return float(val) if np.isfinite(val) else math.inf
    t = 1.0 + k * z
    if np.any(t <= 0):
        return math.inf
    with np.errstate(over="ignore"):
        val = x.size * math.log(sigma) + (1.0 + 1.0 / k) * np.sum(np.log(t)) + np.sum(t ** (-1.0 / k))
    return float(val) if np.isfinite(val) else math.inf


def gumbel_moment_start(x: np.ndarray) -> GevParams:
    sigma0 = float(np.std(x, ddof=1)) * math.sqrt(6.0) / math.pi
    return GevParams(location_mu=float(np.mean(x)) - EULER_GAMMA * sigma0, scale_sigma=sigma0, shape_k=0.0)


def _require_maxima(maxima: Sequence[float] | np.ndarray, needed: int, what: str) -> np.ndarray:
    x = np.asarray(maxima, dtype=float)
    x = x[np.isfinite(x)]
    if x.size < needed:
        raise InsufficientData(what, needed=needed, got=int(x.size))
    if np.ptp(x) == 0:
        raise NonConvergence(f"{what}: all maxima are equal, the likelihood is degenerate")
    return x


def fit_gev(maxima: Sequence[float] | np.ndarray) -> FitReport:
    """GEV maximum likelihood by Nelder-Mead over (mu, ln sigma, k) from Gumbel moment estimates."""
    x = _require_maxima(maxima, MIN_GEV_POINTS, "GEV fit")
    start = gumbel_moment_start(x)

    def objective(theta: np.ndarray) -> float:
        return gev_negloglik(theta[0], math.exp(theta[1]), theta[2], x)

    theta0 = np.array([start.location_mu, math.log(start.scale_sigma), 0.0])
    simplex = np.array(
        [
            theta0,
            theta0 + [0.1 * start.scale_sigma, 0.0, 0.0],
            theta0 + [0.0, 0.1, 0.0],
            theta0 + [0.0, 0.0, 0.1],
        ]
    )
    f0 = objective(theta0)
    res = optimize.minimize(
        objective,
        theta0,
        method="Nelder-Mead",
        options={
            "initial_simplex": simplex,
            "maxiter": GEV_MAX_ITER,
            "xatol": 1e-7,
            "fatol": GEV_REL_TOL * max(1.0, abs(f0)),
        },
    )
    diagnostics = {"iterations": int(res.nit), "message": str(res.message)}
    if not res.success or not math.isfinite(res.fun):
        raise NonConvergence(f"GEV fit failed on {x.size} maxima: {res.message}")

    params = GevParams(location_mu=float(res.x[0]), scale_sigma=math.exp(res.x[1]), shape_k=float(res.x[2]))
    logger.debug("GEV fit: mu=%.6g sigma=%.6g k=%.6g", params.location_mu, params.scale_sigma, params.shape_k)
    return FitReport(
        params=params,
        method="gev_mle",
        n_points=int(x.size),
        converged=True,
        objective=float(res.fun),
        diagnostics=diagnostics,
    )


def _gumbel_scale_score(sigma: float, x: np.ndarray) -> float:
    # profile score for sigma: mean(x) - sum(x e^{-x/sigma}) / sum(e^{-x/sigma}) - sigma
    weights = np.exp(-x / sigma - logsumexp(-x / sigma))
    return float(np.mean(x) - np.dot(weights, x) - sigma)


def fit_gumbel(maxima: Sequence[float] | np.ndarray) -> FitReport:
    """Gumbel (k = 0) maximum likelihood via the profile score equation for sigma."""
    x = _require_maxima(maxima, MIN_GUMBEL_POINTS, "Gumbel fit")
    spread = float(np.ptp(x))
    lo, hi = spread / (2.0 * x.size), 2.0 * spread + float(np.std(x))
    for _ in range(60):
        if _gumbel_scale_score(lo, x) > 0:
            break
        lo /= 2.0
    else:
        raise NonConvergence("Gumbel fit: could not bracket the scale")
    sigma = optimize.brentq(_gumbel_scale_score, lo, hi, args=(x,), xtol=1e-14 * spread, rtol=1e-14)
    mu = -sigma * (float(logsumexp(-x / sigma)) - math.log(x.size))
    params = GevParams(location_mu=mu, scale_sigma=sigma, shape_k=0.0)
    return FitReport(
        params=params,
        method="gumbel_mle",
        n_points=int(x.size),
        converged=True,
        objective=gev_negloglik(mu, sigma, 0.0, x),
        diagnostics={"bracket": f"[{lo:.6g}, {hi:.6g}]"},
    )
