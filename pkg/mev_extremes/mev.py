"""The MEV mixture estimator and its return-level inversion."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Hashable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from .blocks import DEFAULT_THRESHOLD_H0, BlockSummary, group_partition, window_partition
from .distributions import ArrayLike, WeibullTail, _unwrap, penultimate_cdf
from .errors import DomainError, InsufficientData, MevError, ValidationError
from .fitting import FitReport, TailMethod, fit_tail

logger = logging.getLogger(__name__)

RETURN_PERIOD_CEILING = 1e15
_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class MevComponent:
    n: float
    tail: WeibullTail


@dataclass(frozen=True)
class ExcludedWindow:
    block_id: str
    years: Tuple[int, ...]
    reason: str


@dataclass(frozen=True, eq=False)
class MevModel:
    """Discrete metastatistics factor: point masses (n_j, C_j, w_j) with weights.

    `excluded` records windows that could not be fitted when the model was built
    from data; it is not part of the serialised document.
    """

    components: Tuple[MevComponent, ...]
    weights: Tuple[float, ...] = ()
    excluded: Tuple[ExcludedWindow, ...] = field(default=())

    def __post_init__(self) -> None:
        comps = tuple(self.components)
        if not comps:
            raise ValidationError("an MEV model needs at least one component")
        object.__setattr__(self, "components", comps)
        weights = tuple(float(w) for w in self.weights) or tuple([1.0 / len(comps)] * len(comps))
        if len(weights) != len(comps):
            raise ValidationError(f"{len(weights)} weights for {len(comps)} components")
        if any(w < 0 for w in weights) or abs(math.fsum(weights) - 1.0) > _WEIGHT_TOL:
            raise ValidationError("weights must be non-negative and sum to 1")
        for c in comps:
            if not (c.n >= 1):
                raise ValidationError(f"component cardinality must be >= 1, got {c.n!r}")
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return len(self.components)

    @property
    def cardinalities(self) -> np.ndarray:
        return np.array([c.n for c in self.components], dtype=float)

    @property
    def scales(self) -> np.ndarray:
        return np.array([c.tail.scale_C for c in self.components], dtype=float)

    @property
    def shapes(self) -> np.ndarray:
        return np.array([c.tail.shape_w for c in self.components], dtype=float)

    @property
    def weight_array(self) -> np.ndarray:
        return np.array(self.weights, dtype=float)

    @property
    def mean_n(self) -> float:
        return mean_cardinality(self)

    @staticmethod
    def single(n: float, tail: WeibullTail) -> "MevModel":
        return MevModel(components=(MevComponent(n=float(n), tail=tail),))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "components": [{"n": c.n, "C": c.tail.scale_C, "w": c.tail.shape_w} for c in self.components],
            "weights": list(self.weights),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @staticmethod
    def from_dict(obj: Mapping[str, Any]) -> "MevModel":
        try:
            comps = tuple(
                MevComponent(n=float(c["n"]), tail=WeibullTail(float(c["C"]), float(c["w"])))
                for c in obj["components"]
            )
        except (KeyError, TypeError) as e:
            raise ValidationError(f"MEV model document is malformed: {e}") from e
        return MevModel(components=comps, weights=tuple(obj.get("weights", ())))

    @staticmethod
    def from_json(text: str) -> "MevModel":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValidationError(f"MEV model is not valid JSON: {e}") from e
        return MevModel.from_dict(obj)


def mean_cardinality(model: MevModel) -> float:
    return float(np.dot(model.weight_array, model.cardinalities))


def mev_cdf(y: ArrayLike, model: MevModel) -> ArrayLike:
    """zeta_bar(y) = sum_j weight_j * penultimate_cdf(y, n_j, tail_j)."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 0) or np.any(np.isnan(y)):
        raise DomainError("y must be >= 0")
    yy = y.reshape(-1, 1)
    terms = np.exp(-model.cardinalities * np.exp(-((yy / model.scales) ** model.shapes)))
    out = terms @ model.weight_array
    return _unwrap(out.reshape(y.shape))


def mev_cdf_homogeneous(y: ArrayLike, tail: WeibullTail, mean_n: float) -> ArrayLike:
    """Fixed-parameter shortcut: the penultimate CDF at the mean cardinality."""
    return penultimate_cdf(y, mean_n, tail)


def _return_level_bracket(model: MevModel, return_period: float) -> float:
    n_max = float(model.cardinalities.max())
    c_max = float(model.scales.max())
    w_min = float(model.shapes.min())
    return c_max * (math.log(n_max * return_period) + 50.0) ** (1.0 / w_min)


def return_level(return_period: float, model: MevModel, *, rtol: float = 1e-10) -> float:
    """Level y with zeta_bar(y) = 1 - 1/T_r, by bisection."""
    if not (return_period > 1):
        raise DomainError(f"return period must be > 1 year, got {return_period!r}")
    target = 1.0 - 1.0 / return_period

    def gap(y: float) -> float:
        return float(mev_cdf(y, model)) - target

    if gap(0.0) >= 0:
        # every component already exceeds the target at y = 0 (tiny cardinalities)
        logger.warning("zeta_bar(0) >= %.6g; return level for T_r=%g clipped to 0", target, return_period)
        return 0.0
    hi = _return_level_bracket(model, return_period)
    return float(optimize.bisect(gap, 0.0, hi, xtol=1e-12, rtol=rtol, maxiter=400))


class ReturnPeriod(NamedTuple):
    years: float
    saturated: bool


def return_period(y: float, model: MevModel) -> ReturnPeriod:
    """1 / (1 - zeta_bar(y)); saturates at RETURN_PERIOD_CEILING when 1 - zeta_bar < 1e-15."""
    if not (y >= 0):
        raise DomainError(f"y must be >= 0, got {y!r}")
    exceed = 1.0 - float(mev_cdf(y, model))
    if exceed < 1.0 / RETURN_PERIOD_CEILING:
        return ReturnPeriod(years=RETURN_PERIOD_CEILING, saturated=True)
    return ReturnPeriod(years=1.0 / exceed, saturated=False)


@dataclass(frozen=True)
class WindowFit:
    block: BlockSummary
    report: Optional[FitReport]
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.report is not None and self.report.converged


def _fit_block(block: BlockSummary, fit_method: TailMethod, h0: float) -> WindowFit:
    try:
        report = fit_tail(block.tail_values, h0, method=fit_method, n_total=block.n_wet)
    except MevError as e:
        logger.warning("window %s excluded: %s: %s", block.block_id, type(e).__name__, e)
        return WindowFit(block=block, report=None, reason=f"{type(e).__name__}: {e}")
    if not report.converged:
        reason = f"NonConvergence: {report.diagnostics.get('message', '')}"
        logger.warning("window %s excluded: %s", block.block_id, reason)
        return WindowFit(block=block, report=report, reason=reason)
    return WindowFit(block=block, report=report)


def window_tail_fits(
    blocks: Sequence[BlockSummary],
    width: int,
    *,
    fit_method: TailMethod = "ls",
    h0: float = DEFAULT_THRESHOLD_H0,
) -> List[WindowFit]:
    """Fit one WeibullTail per non-overlapping window of `width` blocks."""
    return [_fit_block(window, fit_method, h0) for window in window_partition(blocks, width)]


def grouped_tail_fits(
    blocks: Sequence[BlockSummary],
    groups: Sequence[Hashable],
    *,
    fit_method: TailMethod = "ls",
    h0: float = DEFAULT_THRESHOLD_H0,
) -> List[WindowFit]:
    """Fit one WeibullTail per group of blocks sharing a key (e.g. a known parameter regime)."""
    return [_fit_block(group, fit_method, h0) for group in group_partition(blocks, groups)]


def build_mev_model(
    blocks: Sequence[BlockSummary],
    window_width: int = 1,
    fit_method: TailMethod = "ls",
    *,
    h0: float = DEFAULT_THRESHOLD_H0,
    groups: Optional[Sequence[Hashable]] = None,
) -> MevModel:
    """Per-window tail fits shared by each of the window's years, with per-year cardinality.

    With `groups`, one fit per group key replaces the consecutive windows and
    `window_width` is ignored.
    """
    if not blocks:
        raise ValidationError("cannot build an MEV model from zero blocks")
    if groups is None:
        fits = window_tail_fits(blocks, window_width, fit_method=fit_method, h0=h0)
    else:
        fits = grouped_tail_fits(blocks, groups, fit_method=fit_method, h0=h0)
    components: List[MevComponent] = []
    excluded: List[ExcludedWindow] = []
    for wf in fits:
        if not wf.ok:
            excluded.append(ExcludedWindow(wf.block.block_id, wf.block.years, wf.reason))
            continue
        tail = wf.report.params  # type: ignore[union-attr]
        for year, n_j in zip(wf.block.years, wf.block.n_wet_per_year):
            if n_j < 1:
                excluded.append(ExcludedWindow(str(year), (year,), "no wet days"))
                continue
            components.append(MevComponent(n=float(n_j), tail=tail))
    if not components:
        raise InsufficientData("no window produced a usable tail fit", needed=1, got=0)
    return MevModel(components=tuple(components), excluded=tuple(excluded))


def averaged_parameter_model(model: MevModel) -> MevModel:
    """One component with weight-averaged C and w at the mean cardinality."""
    wts = model.weight_array
    tail = WeibullTail(float(np.dot(wts, model.scales)), float(np.dot(wts, model.shapes)))
    return MevModel.single(mean_cardinality(model), tail)


def return_level_table(models: Mapping[str, MevModel], periods: Sequence[float]) -> List[Dict[str, Any]]:
    rows: List[Dict[str, Any]] = []
    for label, model in models.items():
        for period in periods:
            rows.append({"label": label, "return_period": float(period), "level_mm": return_level(period, model)})
    return rows
