from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ..blocks import DEFAULT_THRESHOLD_H0, empirical_exceedance
from .gev import fit_gev, fit_gumbel, gev_negloglik
from .types import FitMethod, FitReport, TailMethod
from .weibull import fit_weibull_ls, fit_weibull_mle, fit_weibull_pwm, truncated_negloglik

FIT_METHOD_CHOICES: tuple[TailMethod, ...] = ("ls", "mle", "pwm")


def fit_tail(
    values: Sequence[float] | np.ndarray,
    h0: float = DEFAULT_THRESHOLD_H0,
    *,
    method: TailMethod = "ls",
    n_total: Optional[int] = None,
) -> FitReport:
    """Fit a WeibullTail to the values above h0.

    `n_total` is the number of wet days the values came from; LS then regresses on the
    unconditional exceedance. MLE conditions on h > h0 and ignores it. PWM fits the
    whole wet-day sample and only accepts h0 = 0.
    """
    if method == "ls":
        return fit_weibull_ls(empirical_exceedance(values, h0, n_total=n_total), h0)
    if method == "mle":
        return fit_weibull_mle(values, h0)
    if method == "pwm":
        return fit_weibull_pwm(values, h0)
    raise ValueError(f"Unknown fit method {method!r}. Choose one of: {', '.join(FIT_METHOD_CHOICES)}")


__all__ = [
    "FIT_METHOD_CHOICES",
    "FitMethod",
    "FitReport",
    "TailMethod",
    "fit_gev",
    "fit_gumbel",
    "fit_tail",
    "fit_weibull_ls",
    "fit_weibull_mle",
    "fit_weibull_pwm",
    "gev_negloglik",
    "truncated_negloglik",
]
