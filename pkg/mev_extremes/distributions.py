"""Closed-form probability functions for Weibull-tailed parents and their block maxima.

All functions accept scalars or numpy arrays for the value argument and return a
float for scalar input, an ndarray otherwise.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import DomainError, ValidationError

logger = logging.getLogger(__name__)

ArrayLike = float | np.ndarray

GUMBEL_SWITCH = 1e-8
CDF_FLOOR = 1e-300
CDF_CEIL = 1.0 - 1e-16


@dataclass(frozen=True)
class WeibullTail:
    """Stretched-exponential exceedance tail Psi(h) = exp(-(h/C)^w) above threshold h0."""

    scale_C: float
    shape_w: float
    threshold_h0: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.scale_C) and self.scale_C > 0):
            raise ValidationError(f"scale_C must be a positive finite number, got {self.scale_C!r}")
        if not (math.isfinite(self.shape_w) and self.shape_w > 0):
            raise ValidationError(f"shape_w must be a positive finite number, got {self.shape_w!r}")
        if not (self.threshold_h0 >= 0):
            raise ValidationError(f"threshold_h0 must be >= 0, got {self.threshold_h0!r}")

    @property
    def c_prime(self) -> float:
        """Scale of the preconditioned (exponential) variable z = h^w."""
        return self.scale_C**self.shape_w


@dataclass(frozen=True)
class GevParams:
    """GEV location/scale/shape; shape_k > 0 is Frechet-type, k < 0 upper-bounded, k = 0 Gumbel."""

    location_mu: float
    scale_sigma: float
    shape_k: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.scale_sigma) and self.scale_sigma > 0):
            raise ValidationError(f"scale_sigma must be a positive finite number, got {self.scale_sigma!r}")
        if not (math.isfinite(self.location_mu) and math.isfinite(self.shape_k)):
            raise ValidationError("location_mu and shape_k must be finite")

    @property
    def is_gumbel(self) -> bool:
        return abs(self.shape_k) < GUMBEL_SWITCH

    @property
    def alpha(self) -> float:
        return math.inf if self.is_gumbel else 1.0 / abs(self.shape_k)

    @property
    def support_boundary(self) -> Optional[float]:
        if self.is_gumbel:
            return None
        return self.location_mu - self.scale_sigma / self.shape_k

    # Renormalisation constants of the limit theorem.
    @property
    def b_n(self) -> float:
        return self.location_mu

    @property
    def a_n(self) -> float:
        return self.scale_sigma


def _unwrap(arr: np.ndarray) -> ArrayLike:
    return float(arr) if arr.ndim == 0 else arr


def _require_nonnegative(y: np.ndarray, name: str) -> None:
    if np.any(y < 0) or np.any(np.isnan(y)):
        raise DomainError(f"{name} must be >= 0")


def _require_cardinality(n: float, *, integer: bool = False, minimum: float = 1) -> None:
    if not (n >= minimum) or not math.isfinite(n):
        raise DomainError(f"cardinality n must be >= {minimum}, got {n!r}")
    if integer and float(n) != int(n):
        raise DomainError(f"cardinality n must be an integer here, got {n!r}")


def _require_open_probability(p: np.ndarray) -> None:
    if np.any(~((p > 0) & (p < 1))):
        raise DomainError("probability must lie in the open interval (0, 1)")


def weibull_exceedance(h: ArrayLike, tail: WeibullTail) -> ArrayLike:
    h = np.asarray(h, dtype=float)
    _require_nonnegative(h, "h")
    return _unwrap(np.exp(-((h / tail.scale_C) ** tail.shape_w)))


def weibull_quantile(p: ArrayLike, tail: WeibullTail) -> ArrayLike:
    """Level exceeded with probability p."""
    p = np.asarray(p, dtype=float)
    _require_open_probability(p)
    return _unwrap(tail.scale_C * (-np.log(p)) ** (1.0 / tail.shape_w))


def weibull_sample(rng: np.random.Generator, tail: WeibullTail, count: int) -> np.ndarray:
    """i.i.d. draws by inversion of uniform variates; u = 1 - U lies in (0, 1]."""
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count!r}")
    u = 1.0 - rng.random(int(count))
    return tail.scale_C * (-np.log(u)) ** (1.0 / tail.shape_w)


def block_maxima_sample(rng: np.random.Generator, tail: WeibullTail, n: int, count: int) -> np.ndarray:
    """Exact n-sample maxima by inverting exact_block_cdf: F(y) = U^(1/n)."""
    _require_cardinality(n, integer=True)
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count!r}")
    u = rng.random(int(count))
    with np.errstate(divide="ignore"):
        # 1 - u^(1/n) without cancellation near u = 1
        psi = -np.expm1(np.log(u) / n)
        return tail.scale_C * (-np.log(psi)) ** (1.0 / tail.shape_w)


def mode_u_n(n: float, tail: WeibullTail) -> float:
    """U_n: the level exceeded with probability 1/n (the expected largest of n draws)."""
    _require_cardinality(n)
    return tail.scale_C * math.log(n) ** (1.0 / tail.shape_w)


def exact_block_cdf(y: ArrayLike, n: int, tail: WeibullTail) -> ArrayLike:
    y = np.asarray(y, dtype=float)
    _require_nonnegative(y, "y")
    _require_cardinality(n, integer=True)
    psi = np.exp(-((y / tail.scale_C) ** tail.shape_w))
    with np.errstate(divide="ignore"):
        return _unwrap(np.exp(int(n) * np.log1p(-psi)))


def penultimate_cdf(y: ArrayLike, n: float, tail: WeibullTail) -> ArrayLike:
    """Preconditioned penultimate CDF exp(-exp(-[(y/C)^w - ln n])); n may be real."""
    y = np.asarray(y, dtype=float)
    _require_nonnegative(y, "y")
    _require_cardinality(n)
    return _unwrap(np.exp(-float(n) * np.exp(-((y / tail.scale_C) ** tail.shape_w))))


def general_penultimate_cdf(y: ArrayLike, n: float, exceedance: Callable[[np.ndarray], np.ndarray]) -> ArrayLike:
    """Cauchy-approximated maximum CDF exp(-n * Psi(y)) for any parent survival function."""
    y = np.asarray(y, dtype=float)
    _require_cardinality(n)
    return _unwrap(np.exp(-float(n) * np.asarray(exceedance(y), dtype=float)))


def ultimate_gumbel_params(n: float, tail: WeibullTail) -> GevParams:
    """Gumbel limit of the n-maximum: b_n = U_n, a_n = 1 / (d/dy (y/C)^w at U_n)."""
    _require_cardinality(n)
    if n <= 1:
        raise DomainError(f"ultimate approximation needs n > 1, got {n!r}")
    u_n = mode_u_n(n, tail)
    w = tail.shape_w
    a_n = tail.c_prime / (w * u_n ** (w - 1.0))
    return GevParams(location_mu=u_n, scale_sigma=a_n, shape_k=0.0)


def cauchy_rel_error(n: int) -> float:
    """Relative error of the penultimate approximation at the mode U_n."""
    _require_cardinality(n, integer=True, minimum=2)
    exact = math.exp(int(n) * math.log1p(-1.0 / int(n)))
    return abs(math.exp(-1.0) - exact) / exact


def gev_cdf(s: ArrayLike, params: GevParams) -> ArrayLike:
    s = np.asarray(s, dtype=float)
    z = (s - params.location_mu) / params.scale_sigma
    if params.is_gumbel:
        return _unwrap(np.exp(-np.exp(-z)))
    k = params.shape_k
    t = np.maximum(1.0 + k * z, 0.0)
    with np.errstate(divide="ignore"):
        return _unwrap(np.exp(-(t ** (-1.0 / k))))


def gev_quantile(p: ArrayLike, params: GevParams) -> ArrayLike:
    p = np.asarray(p, dtype=float)
    _require_open_probability(p)
    log_neg_log = np.log(-np.log(p))
    if params.is_gumbel:
        return _unwrap(params.location_mu - params.scale_sigma * log_neg_log)
    k = params.shape_k
    return _unwrap(params.location_mu + params.scale_sigma * np.expm1(-k * log_neg_log) / k)


def reduced_variate(p: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """Gumbel-plot coordinate -ln(-ln p) after clamping p into [CDF_FLOOR, CDF_CEIL].

    Returns (reduced variates, clamped flags).
    """
    p = np.asarray(p, dtype=float)
    if np.any(np.isnan(p)):
        raise DomainError("cannot transform NaN probabilities")
    clipped = np.clip(p, CDF_FLOOR, CDF_CEIL)
    clamped = clipped != p
    if np.any(clamped):
        logger.debug("clamped %d probabilities before the double-log transform", int(np.sum(clamped)))
    rv = -np.log(-np.log(clipped))
    if rv.ndim == 0:
        return float(rv), bool(clamped)
    return rv, clamped
