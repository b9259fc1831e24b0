from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Literal

from ..distributions import GevParams, WeibullTail

FitMethod = Literal["ls", "mle", "pwm", "gev_mle", "gumbel_mle"]
TailMethod = Literal["ls", "mle", "pwm"]


@dataclass(frozen=True)
class FitReport:
    params: WeibullTail | GevParams
    method: FitMethod
    n_points: int
    converged: bool
    objective: float  # residual sum of squares (ls) or negative log-likelihood (mle, pwm)
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.converged and not math.isfinite(self.objective):
            raise ValueError("a converged fit must have a finite objective")

    @property
    def loglik(self) -> float:
        if self.method == "ls":
            raise AttributeError("least-squares fits carry no likelihood")
        return -self.objective

    def to_dict(self) -> Dict[str, Any]:
        if isinstance(self.params, WeibullTail):
            params = {"C": self.params.scale_C, "w": self.params.shape_w, "h0": self.params.threshold_h0}
        else:
            params = {"mu": self.params.location_mu, "sigma": self.params.scale_sigma, "k": self.params.shape_k}
        return {
            "method": self.method,
            "params": params,
            "n_points": self.n_points,
            "converged": self.converged,
            "objective": self.objective,
            "diagnostics": {k: v for k, v in self.diagnostics.items() if isinstance(v, (str, int, float, bool))},
        }
