from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Hashable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, InsufficientData, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD_H0 = 10.0


def _years_of(dates: np.ndarray) -> np.ndarray:
    return dates.astype("datetime64[Y]").astype(int) + 1970


@dataclass
class DailySeries:
    """Dated daily precipitation depths (mm) for one station.

    - `dates` is a strictly increasing datetime64[D] array; `amounts` holds the matching depths.
    - `missing` lists days the record marks as not observed. They are kept out of
      `dates`/`amounts` so they never count as dry days.
    """

    dates: np.ndarray
    amounts: np.ndarray
    station: str = ""
    meta: Dict[str, Any] = field(default_factory=dict)
    missing: np.ndarray = field(default_factory=lambda: np.array([], dtype="datetime64[D]"))

    def __post_init__(self) -> None:
        self.dates = np.asarray(self.dates, dtype="datetime64[D]")
        self.amounts = np.asarray(self.amounts, dtype=float)
        self.missing = np.asarray(self.missing, dtype="datetime64[D]")
        if self.dates.shape != self.amounts.shape or self.dates.ndim != 1:
            raise ValidationError("dates and amounts must be 1-D arrays of equal length")
        if self.dates.size > 1 and np.any(np.diff(self.dates).astype(int) <= 0):
            raise ValidationError("dates must be strictly increasing")
        if np.any(~np.isfinite(self.amounts)) or np.any(self.amounts < 0):
            raise ValidationError("amounts must be finite and >= 0")

    def __len__(self) -> int:
        return int(self.dates.size)

    @property
    def records(self) -> List[Tuple[np.datetime64, float]]:
        return list(zip(self.dates.tolist(), self.amounts.tolist()))

    @property
    def years(self) -> np.ndarray:
        return _years_of(self.dates)

    def gaps(self) -> np.ndarray:
        """Calendar days between the first and last record that have no record at all."""
        if self.dates.size < 2:
            return np.array([], dtype="datetime64[D]")
        full = np.arange(self.dates[0], self.dates[-1] + 1, dtype="datetime64[D]")
        return np.setdiff1d(full, self.dates)


@dataclass(frozen=True, eq=False)
class BlockSummary:
    """One block (a calendar year, or a window of consecutive years)."""

    block_id: str
    n_wet: int
    annual_max: float  # NaN when degenerate
    tail_values: np.ndarray
    years: Tuple[int, ...] = ()
    n_wet_per_year: Tuple[int, ...] = ()
    n_days: int = 0
    degenerate: bool = False

    def __post_init__(self) -> None:
        if self.n_wet < len(self.tail_values):
            raise ValidationError(f"block {self.block_id!r}: n_wet < number of tail values")


def summarize_values(
    values: np.ndarray,
    *,
    year: int,
    threshold_h0: float = DEFAULT_THRESHOLD_H0,
    wet_threshold: float = 0.0,
) -> BlockSummary:
    """Summarise one year of daily amounts (dry days may be included)."""
    values = np.asarray(values, dtype=float)
    wet = values[values > wet_threshold]
    n_wet = int(wet.size)
    degenerate = n_wet == 0
    return BlockSummary(
        block_id=str(year),
        n_wet=n_wet,
        annual_max=float("nan") if degenerate else float(wet.max()),
        tail_values=wet[wet > threshold_h0],
        years=(int(year),),
        n_wet_per_year=(n_wet,),
        n_days=int(values.size),
        degenerate=degenerate,
    )


def partition_years(
    series: DailySeries,
    *,
    threshold_h0: float = DEFAULT_THRESHOLD_H0,
    wet_threshold: float = 0.0,
) -> List[BlockSummary]:
    """One BlockSummary per calendar year present in the series."""
    if len(series) == 0:
        raise ValidationError("cannot partition an empty series")
    if threshold_h0 < 0 or wet_threshold < 0:
        raise DomainError("thresholds must be >= 0")

    years = series.years
    out: List[BlockSummary] = []
    for year in np.unique(years):
        block = summarize_values(
            series.amounts[years == year],
            year=int(year),
            threshold_h0=threshold_h0,
            wet_threshold=wet_threshold,
        )
        if block.degenerate:
            logger.warning("year %d has no wet days; block flagged degenerate", year)
        out.append(block)
    return out


@dataclass(frozen=True)
class WindowPartition:
    """Merged windows plus the trailing blocks that did not fill a window."""

    windows: List[BlockSummary]
    dropped: List[BlockSummary]
    width: int

    def __iter__(self) -> Iterator[BlockSummary]:
        return iter(self.windows)

    def __len__(self) -> int:
        return len(self.windows)

    def __getitem__(self, idx: int) -> BlockSummary:
        return self.windows[idx]


def merge_blocks(blocks: Sequence[BlockSummary], *, label: Optional[str] = None) -> BlockSummary:
    years = tuple(y for b in blocks for y in b.years)
    n_per_year = tuple(n for b in blocks for n in b.n_wet_per_year)
    maxima = [b.annual_max for b in blocks if not b.degenerate]
    n_wet = sum(b.n_wet for b in blocks)
    if label is None:
        label = blocks[0].block_id if len(blocks) == 1 else f"{years[0]}-{years[-1]}"
    return BlockSummary(
        block_id=label,
        n_wet=n_wet,
        annual_max=max(maxima) if maxima else float("nan"),
        tail_values=np.concatenate([b.tail_values for b in blocks]),
        years=years,
        n_wet_per_year=n_per_year,
        n_days=sum(b.n_days for b in blocks),
        degenerate=n_wet == 0,
    )


def window_partition(blocks: Sequence[BlockSummary], width: int) -> WindowPartition:
    """Merge consecutive non-overlapping groups of `width` blocks; a short trailing group is dropped."""
    if width < 1:
        raise DomainError(f"window width must be >= 1, got {width!r}")
    if width > len(blocks):
        raise ValidationError(f"window width {width} exceeds the number of blocks ({len(blocks)})")

    n_full = len(blocks) // width
    windows = [merge_blocks(blocks[i * width : (i + 1) * width]) for i in range(n_full)]
    dropped = list(blocks[n_full * width :])
    if dropped:
        logger.warning(
            "width %d: dropped %d trailing block(s) %s",
            width,
            len(dropped),
            ", ".join(b.block_id for b in dropped),
        )
    return WindowPartition(windows=windows, dropped=dropped, width=width)


def group_partition(blocks: Sequence[BlockSummary], keys: Sequence[Hashable]) -> List[BlockSummary]:
    """Merge the blocks that share a key, in order of each key's first appearance.

    Years in a group need not be consecutive; the group is labelled by its key.
    """
    if len(keys) != len(blocks):
        raise ValidationError(f"{len(keys)} group keys for {len(blocks)} blocks")
    members: Dict[Hashable, List[BlockSummary]] = {}
    for key, block in zip(keys, blocks):
        members.setdefault(key, []).append(block)
    return [merge_blocks(group, label=f"group {key}") for key, group in members.items()]


def empirical_exceedance(
    values: Sequence[float] | np.ndarray,
    threshold: float,
    *,
    n_total: Optional[int] = None,
) -> np.ndarray:
    """Plotting-position exceedance points (h, psi_hat) for values above `threshold`.

    Sorted ascending with a stable sort; point j of N gets psi_hat = 1 - (j - 0.5)/N.
    With `n_total` (e.g. the wet-day count the values were taken from) psi_hat is
    rescaled by N/n_total, turning the conditional exceedance into the unconditional one.
    Returns an (N, 2) array.
    """
    arr = np.asarray(values, dtype=float)
    kept = np.sort(arr[arr > threshold], kind="stable")
    n = kept.size
    if n < 3:
        raise InsufficientData(f"too few values above threshold {threshold:g}", needed=3, got=n)
    j = np.arange(1, n + 1)
    psi = 1.0 - (j - 0.5) / n
    if n_total is not None:
        if n_total < n:
            raise ValidationError(f"n_total ({n_total}) is smaller than the retained count ({n})")
        psi = psi * (n / n_total)
    return np.column_stack([kept, psi])


def series_from_yearly_values(
    yearly: Sequence[np.ndarray],
    *,
    first_year: int = 2001,
    station: str = "synthetic",
) -> DailySeries:
    """Lay each year's wet-day values on consecutive days from Jan 1; the rest of the year is dry."""
    dates: List[np.ndarray] = []
    amounts: List[np.ndarray] = []
    for i, values in enumerate(yearly):
        year = first_year + i
        start = np.datetime64(f"{year:04d}-01-01", "D")
        end = np.datetime64(f"{year + 1:04d}-01-01", "D")
        days = np.arange(start, end, dtype="datetime64[D]")
        values = np.asarray(values, dtype=float)
        if values.size > days.size:
            raise ValidationError(f"year {year}: {values.size} values do not fit in {days.size} days")
        day_amounts = np.zeros(days.size)
        day_amounts[: values.size] = values
        dates.append(days)
        amounts.append(day_amounts)
    return DailySeries(
        dates=np.concatenate(dates),
        amounts=np.concatenate(amounts),
        station=station,
        meta={"synthetic": True, "first_year": first_year},
    )
