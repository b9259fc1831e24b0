"""Synthetic experiments comparing MEV, GEV and Gumbel estimates against a brute-force truth.

Each experiment draws `n_years` years of `n_wet_per_year` Weibull wet-day amounts, with
the (C, w) pair changing every `regime_length` years. Over many replicates the median
non-exceedance curve of every estimator is set against the empirical distribution of
a very large sample of block maxima drawn from the same regime cycle.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .blocks import BlockSummary, summarize_values
from .config import ExperimentSpec
from .distributions import gev_cdf, reduced_variate, weibull_sample
from .errors import DomainError, MevError, TooManyFailures, ValidationError
from .fitting import fit_gev, fit_gumbel
from .mev import averaged_parameter_model, build_mev_model, mev_cdf
from .streams import ordered_map, replicate_rng

logger = logging.getLogger(__name__)

MAX_DROP_FRACTION = 0.2
MIN_TRUTH_MAXIMA = 10_000
GRID_PROBABILITIES = (0.01, 0.9999)
ESTIMATOR_LABELS: Tuple[str, ...] = ("MEV", "MEV-avg", "GEV", "Gumbel")

_TRUTH_STREAM = 0
_REPLICATE_STREAM = 1


@dataclass(frozen=True, eq=False)
class GumbelPlotSeries:
    """Points (y, -ln(-ln zeta)) of one curve on a Gumbel plot."""

    label: str
    y: np.ndarray
    reduced_variate: np.ndarray
    clamped: np.ndarray = field(default_factory=lambda: np.array([], dtype=bool))

    def __post_init__(self) -> None:
        y = np.asarray(self.y, dtype=float)
        rv = np.asarray(self.reduced_variate, dtype=float)
        clamped = np.asarray(self.clamped, dtype=bool)
        if clamped.size == 0:
            clamped = np.zeros(y.shape, dtype=bool)
        if y.ndim != 1 or y.shape != rv.shape or y.shape != clamped.shape:
            raise ValidationError(f"series {self.label!r}: y, reduced_variate and clamped must be 1-D and aligned")
        if not np.all(np.isfinite(rv)):
            raise ValidationError(f"series {self.label!r}: reduced variates must be finite")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "reduced_variate", rv)
        object.__setattr__(self, "clamped", clamped)

    def __len__(self) -> int:
        return int(self.y.size)

    @property
    def points(self) -> List[Tuple[float, float]]:
        return list(zip(self.y.tolist(), self.reduced_variate.tolist()))

    @staticmethod
    def from_cdf(label: str, y: np.ndarray, zeta: np.ndarray) -> "GumbelPlotSeries":
        rv, clamped = reduced_variate(np.asarray(zeta, dtype=float))
        return GumbelPlotSeries(label=label, y=y, reduced_variate=np.atleast_1d(rv), clamped=np.atleast_1d(clamped))

    def level_at(self, rv: float | np.ndarray) -> float | np.ndarray:
        """y at the given reduced variate(s), linear between points; needs increasing reduced variates."""
        return np.interp(rv, self.reduced_variate, self.y)

    def thinned(self, max_points: int) -> "GumbelPlotSeries":
        if len(self) <= max_points:
            return self
        idx = np.unique(np.linspace(0, len(self) - 1, max_points).round().astype(int))
        return GumbelPlotSeries(self.label, self.y[idx], self.reduced_variate[idx], self.clamped[idx])


def _yearly_cardinalities(spec: ExperimentSpec, rng: np.random.Generator, count: int) -> np.ndarray:
    if spec.cardinality_range is None:
        return np.full(count, spec.n_wet_per_year, dtype=int)
    lo, hi = spec.cardinality_range
    return rng.integers(lo, hi + 1, size=count)


def generate_experiment(spec: ExperimentSpec, rng: np.random.Generator) -> List[np.ndarray]:
    """One array of wet-day amounts per synthetic year."""
    counts = _yearly_cardinalities(spec, rng, spec.n_years)
    return [weibull_sample(rng, spec.tail_for_year(i), int(counts[i])) for i in range(spec.n_years)]


def experiment_blocks(spec: ExperimentSpec, yearly: Sequence[np.ndarray], *, first_year: int = 1) -> List[BlockSummary]:
    return [
        summarize_values(values, year=first_year + i, threshold_h0=spec.threshold_h0)
        for i, values in enumerate(yearly)
    ]


def experiment_groups(spec: ExperimentSpec) -> Optional[List[int]]:
    """Per-year regime keys for `pooling="regime"`; None means consecutive windows."""
    if spec.pooling == "window":
        return None
    return [spec.regime_index(i) for i in range(spec.n_years)]


def _mixture_maxima(spec: ExperimentSpec, rng: np.random.Generator, count: int) -> np.ndarray:
    # maximum i comes from year (i mod n_years) of the regime cycle; exact inversion of (1 - Psi)^n
    year_idx = np.arange(count) % spec.n_years
    tails = [spec.tail_for_year(i) for i in range(spec.n_years)]
    scales = np.array([t.scale_C for t in tails])[year_idx]
    shapes = np.array([t.shape_w for t in tails])[year_idx]
    n = _yearly_cardinalities(spec, rng, count)
    u = rng.random(count)
    with np.errstate(divide="ignore"):
        psi = -np.expm1(np.log(u) / n)
        return scales * (-np.log(psi)) ** (1.0 / shapes)


def truth_curve(spec: ExperimentSpec, n_maxima: int, rng: np.random.Generator) -> GumbelPlotSeries:
    """Sorted brute-force maxima; point j of N sits at reduced variate -ln(-ln((j - 0.5)/N))."""
    if n_maxima < MIN_TRUTH_MAXIMA:
        raise DomainError(f"truth curve needs at least {MIN_TRUTH_MAXIMA} maxima, got {n_maxima!r}")
    maxima = np.sort(_mixture_maxima(spec, rng, int(n_maxima)), kind="stable")
    p = (np.arange(1, n_maxima + 1) - 0.5) / n_maxima
    rv, clamped = reduced_variate(p)
    return GumbelPlotSeries(label="truth", y=maxima, reduced_variate=rv, clamped=clamped)


def evaluation_grid(truth: GumbelPlotSeries, points: int = 200) -> np.ndarray:
    """Log-spaced y values between the truth curve's 1% and 99.99% quantiles."""
    if points < 2:
        raise DomainError(f"evaluation grid needs at least 2 points, got {points!r}")
    lo, hi = np.quantile(truth.y, GRID_PROBABILITIES)
    if not (lo > 0 and hi > lo):
        raise ValidationError(f"truth quantiles do not span a positive range: [{lo!r}, {hi!r}]")
    return np.geomspace(lo, hi, points)


def estimator_median_curves(samples: Mapping[str, np.ndarray]) -> Dict[str, np.ndarray]:
    """Pointwise lower median over replicates (rows) for each estimator."""
    out: Dict[str, np.ndarray] = {}
    for label, stack in samples.items():
        stack = np.asarray(stack, dtype=float)
        if stack.ndim != 2 or stack.shape[0] == 0:
            raise DomainError(f"{label}: expected a non-empty (replicates, grid) matrix")
        out[label] = np.sort(stack, axis=0)[(stack.shape[0] - 1) // 2]
    return out


def _replicate_curves(spec: ExperimentSpec, grid: np.ndarray, index: int) -> Optional[Dict[str, np.ndarray]]:
    rng = replicate_rng(spec.seed, index, stream=_REPLICATE_STREAM)
    blocks = experiment_blocks(spec, generate_experiment(spec, rng))
    maxima = [b.annual_max for b in blocks]
    try:
        model = build_mev_model(
            blocks, spec.window_width, spec.fit_method, h0=spec.threshold_h0, groups=experiment_groups(spec)
        )
        gev = fit_gev(maxima).params
        gumbel = fit_gumbel(maxima).params
    except MevError as e:
        logger.warning("replicate %d dropped: %s: %s", index, type(e).__name__, e)
        return None
    return {
        "MEV": np.asarray(mev_cdf(grid, model)),
        "MEV-avg": np.asarray(mev_cdf(grid, averaged_parameter_model(model))),
        "GEV": np.asarray(gev_cdf(grid, gev)),
        "Gumbel": np.asarray(gev_cdf(grid, gumbel)),
    }


def check_drop_rate(what: str, dropped: int, total: int) -> None:
    if total == 0 or dropped > MAX_DROP_FRACTION * total:
        raise TooManyFailures(what, dropped=dropped, total=total)
    if dropped:
        logger.warning("%s: dropped %d of %d replicates", what, dropped, total)


@dataclass(frozen=True, eq=False)
class ComparisonResult:
    experiment: str
    grid: np.ndarray
    medians: Dict[str, GumbelPlotSeries]
    truth: GumbelPlotSeries
    replicates: int
    dropped: int

    def series_list(self, *, truth_points: int = 2_000) -> List[GumbelPlotSeries]:
        return [self.truth.thinned(truth_points), *(self.medians[label] for label in ESTIMATOR_LABELS)]

    def summary(self) -> Dict[str, object]:
        return {
            "experiment": self.experiment,
            "replicates": self.replicates,
            "dropped": self.dropped,
            "grid_points": int(self.grid.size),
            "truth_maxima": len(self.truth),
        }


def compare_estimators(
    spec: ExperimentSpec,
    *,
    workers: Optional[int] = None,
    grid: Optional[np.ndarray] = None,
) -> ComparisonResult:
    """Median MEV, MEV-avg, GEV and Gumbel curves over `spec.replicates` runs, plus the truth curve.

    Each replicate has its own random stream, so the medians do not depend on `workers`.
    """
    truth = truth_curve(spec, spec.truth_maxima, replicate_rng(spec.seed, 0, stream=_TRUTH_STREAM))
    grid = evaluation_grid(truth, spec.grid_points) if grid is None else np.asarray(grid, dtype=float)

    logger.info("%s: running %d replicates on a %d-point grid", spec.name, spec.replicates, grid.size)
    results = ordered_map(
        lambda r: _replicate_curves(spec, grid, r),
        range(spec.replicates),
        workers=workers if workers is not None else spec.workers,
    )
    kept = [r for r in results if r is not None]
    dropped = len(results) - len(kept)
    check_drop_rate(spec.name, dropped, len(results))

    medians = estimator_median_curves({label: np.vstack([r[label] for r in kept]) for label in ESTIMATOR_LABELS})
    series = {label: GumbelPlotSeries.from_cdf(label, grid, medians[label]) for label in ESTIMATOR_LABELS}
    logger.info("%s: %d replicates kept", spec.name, len(kept))
    return ComparisonResult(
        experiment=spec.name,
        grid=grid,
        medians=series,
        truth=truth,
        replicates=len(results),
        dropped=dropped,
    )
