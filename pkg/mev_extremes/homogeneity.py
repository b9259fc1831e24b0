"""Monte Carlo envelope test of whether a record's tail parameters stayed constant.

The whole-interval tail fit is the homogeneity null. Synthetic records with the
observed yearly wet-day counts are drawn from it and re-estimated window by window,
and the spread of those estimates forms percentile bands that the observed windowed
estimates are checked against.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .blocks import DEFAULT_THRESHOLD_H0, BlockSummary, summarize_values
from .distributions import WeibullTail, reduced_variate, weibull_sample
from .errors import DomainError, MevError, ValidationError
from .fitting import TailMethod
from .mev import MevModel, build_mev_model, mev_cdf, return_level
from .montecarlo import GumbelPlotSeries, check_drop_rate
from .streams import ordered_map, replicate_rng

logger = logging.getLogger(__name__)

DEFAULT_PERCENTILES: Tuple[float, ...] = (5.0, 50.0, 95.0)
DEFAULT_WIDTHS: Tuple[int, ...] = (10, 5, 2, 1)
CONSISTENT_FRACTION = 0.9
GRID_PROBABILITIES = (0.01, 0.9999)

_ENVELOPE_STREAM = 2


def percentile_bands(samples: np.ndarray, percentiles: Sequence[float] = DEFAULT_PERCENTILES) -> Dict[float, np.ndarray]:
    """Linear-interpolation percentiles down the replicate axis (rows) at every grid point (columns).

    A 1-D input is treated as the samples of a single grid point.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.size == 0:
        raise DomainError("no samples to take percentiles of")
    if arr.shape[0] < 2:
        raise DomainError(f"percentile bands need at least 2 samples per grid point, got {arr.shape[0]}")
    levels = [float(p) for p in percentiles]
    if not levels or any(not (0.0 <= p <= 100.0) for p in levels):
        raise DomainError(f"percentiles must lie in [0, 100], got {list(percentiles)!r}")
    values = np.percentile(arr, levels, axis=0, method="linear")
    return {p: values[i] for i, p in enumerate(levels)}


@dataclass(frozen=True, eq=False)
class EnvelopeResult:
    y_grid: np.ndarray
    percentiles: Tuple[float, ...]
    bands: Dict[int, Dict[float, np.ndarray]]  # width -> percentile -> reduced variates
    observed: Dict[int, GumbelPlotSeries]
    inside_fraction: Dict[int, float]
    whole_width: int
    replicates: int
    dropped: Dict[int, int] = field(default_factory=dict)

    @property
    def widths(self) -> List[int]:
        return list(self.observed)

    @property
    def whole_interval(self) -> GumbelPlotSeries:
        return self.observed[self.whole_width]

    def verdicts(self, threshold: float = CONSISTENT_FRACTION) -> Dict[int, str]:
        return {w: ("consistent" if f >= threshold else "inconsistent") for w, f in self.inside_fraction.items()}

    def columns(self) -> Dict[str, np.ndarray]:
        cols: Dict[str, np.ndarray] = {"y": self.y_grid}
        for width in self.widths:
            for p in self.percentiles:
                cols[f"band_{p:g}_w{width}"] = self.bands[width][p]
            cols[f"observed_w{width}"] = self.observed[width].reduced_variate
        return cols

    def summary(self, threshold: float = CONSISTENT_FRACTION) -> Dict[str, object]:
        return {
            "replicates": self.replicates,
            "whole_width": self.whole_width,
            "threshold": threshold,
            "inside_fraction": {str(w): f for w, f in self.inside_fraction.items()},
            "verdicts": {str(w): v for w, v in self.verdicts(threshold).items()},
            "dropped": {str(w): d for w, d in self.dropped.items()},
        }


def _null_grid(null_model: MevModel, points: int) -> np.ndarray:
    lo, hi = (return_level(1.0 / (1.0 - p), null_model) for p in GRID_PROBABILITIES)
    lo = max(lo, hi * 1e-6)
    return np.geomspace(lo, hi, points)


def synthetic_blocks(
    blocks: Sequence[BlockSummary],
    tail: WeibullTail,
    rng: np.random.Generator,
    *,
    threshold_h0: float,
) -> List[BlockSummary]:
    """Same years and wet-day counts as `blocks`, amounts drawn from `tail`."""
    out: List[BlockSummary] = []
    for b in blocks:
        values = weibull_sample(rng, tail, b.n_wet) if b.n_wet > 0 else np.array([])
        out.append(summarize_values(values, year=b.years[0], threshold_h0=threshold_h0))
    return out


def _windowed_cdfs(
    blocks: Sequence[BlockSummary],
    widths: Sequence[int],
    grid: np.ndarray,
    fit_method: TailMethod,
    h0: float,
) -> Dict[int, Optional[np.ndarray]]:
    out: Dict[int, Optional[np.ndarray]] = {}
    for width in widths:
        try:
            model = build_mev_model(blocks, width, fit_method, h0=h0)
        except MevError as e:
            logger.debug("width %d: %s: %s", width, type(e).__name__, e)
            out[width] = None
            continue
        out[width] = np.asarray(mev_cdf(grid, model))
    return out


def envelope_test(
    blocks: Sequence[BlockSummary],
    widths: Sequence[int] = DEFAULT_WIDTHS,
    replicates: int = 200,
    seed: int = 12345,
    *,
    fit_method: TailMethod = "ls",
    h0: float = DEFAULT_THRESHOLD_H0,
    percentiles: Sequence[float] = DEFAULT_PERCENTILES,
    grid_points: int = 200,
    workers: Optional[int] = None,
) -> EnvelopeResult:
    """Percentile envelopes of windowed MEV estimates under the whole-interval null.

    The whole interval is always analysed as an extra width. Replicate i uses the
    random stream derived from (seed, i), so results do not depend on `workers`.
    """
    blocks = list(blocks)
    if replicates < 2:
        raise DomainError(f"envelope test needs at least 2 replicates, got {replicates!r}")
    if any(len(b.years) != 1 for b in blocks):
        raise ValidationError("envelope test expects one block per calendar year")
    whole = len(blocks)
    all_widths: List[int] = list(dict.fromkeys([*(int(w) for w in widths), whole]))
    if any(w < 1 for w in all_widths):
        raise DomainError(f"window widths must be >= 1, got {list(widths)!r}")
    if max(all_widths) > whole:
        raise ValidationError(f"widths {list(widths)!r} exceed the {whole} years available")

    null_model = build_mev_model(blocks, whole, fit_method, h0=h0)
    null_tail = null_model.components[0].tail
    logger.info("homogeneity null: C=%.6g w=%.6g over %d years", null_tail.scale_C, null_tail.shape_w, whole)
    grid = _null_grid(null_model, grid_points)

    def run(index: int) -> Dict[int, Optional[np.ndarray]]:
        rng = replicate_rng(seed, index, stream=_ENVELOPE_STREAM)
        synthetic = synthetic_blocks(blocks, null_tail, rng, threshold_h0=h0)
        return _windowed_cdfs(synthetic, all_widths, grid, fit_method, h0)

    results = ordered_map(run, range(replicates), workers=workers)
    observed_cdfs = _windowed_cdfs(blocks, all_widths, grid, fit_method, h0)

    lo_p, hi_p = min(percentiles), max(percentiles)
    bands: Dict[int, Dict[float, np.ndarray]] = {}
    observed: Dict[int, GumbelPlotSeries] = {}
    inside: Dict[int, float] = {}
    dropped: Dict[int, int] = {}
    for width in all_widths:
        kept = [r[width] for r in results if r[width] is not None]
        dropped[width] = replicates - len(kept)
        check_drop_rate(f"width {width}", dropped[width], replicates)
        zeta_bands = percentile_bands(np.vstack(kept), percentiles)
        bands[width] = {p: np.atleast_1d(reduced_variate(z)[0]) for p, z in zeta_bands.items()}

        obs = observed_cdfs[width]
        if obs is None:
            raise ValidationError(f"width {width}: the observed record could not be estimated")
        observed[width] = GumbelPlotSeries.from_cdf(f"observed_w{width}", grid, obs)
        rv = observed[width].reduced_variate
        ok = (rv >= bands[width][lo_p]) & (rv <= bands[width][hi_p])
        inside[width] = float(np.mean(ok))
        logger.info("width %d: %.1f%% of grid inside the %g-%g%% band", width, 100 * inside[width], lo_p, hi_p)

    return EnvelopeResult(
        y_grid=grid,
        percentiles=tuple(float(p) for p in percentiles),
        bands=bands,
        observed=observed,
        inside_fraction=inside,
        whole_width=whole,
        replicates=replicates,
        dropped=dropped,
    )
