from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from .blocks import DailySeries
from .config import StationConfig
from .errors import DomainError, DuplicateDate, EmptyInterval, NegativeAmount, ParseError

logger = logging.getLogger(__name__)

MISSING_MARKERS = ("", "NA", "NaN", "nan")


def _first(mask: pd.Series) -> Optional[int]:
    hits = np.flatnonzero(mask.to_numpy())
    return int(hits[0]) if hits.size else None


def parse_daily_csv(path: str | Path, config: Optional[StationConfig] = None) -> DailySeries:
    """Read a daily precipitation CSV (ISO dates, non-negative mm).

    A blank amount marks a day that was not observed; such days and any calendar
    gaps between the first and last record end up in `DailySeries.missing`.
    Row numbers in errors count the header as row 1.
    """
    config = config or StationConfig()
    path = Path(path)
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError as e:
        raise ParseError(f"{path}: file is empty") from e
    except pd.errors.ParserError as e:
        raise ParseError(f"{path}: {e}") from e

    for col in (config.date_column, config.amount_column):
        if col not in df.columns:
            raise ParseError(f"missing column {col!r} (found {', '.join(map(str, df.columns))})", row=1)

    raw_dates = df[config.date_column].str.strip()
    raw_amounts = df[config.amount_column].str.strip()

    dates = pd.to_datetime(raw_dates, format="%Y-%m-%d", errors="coerce")
    bad = _first(dates.isna())
    if bad is not None:
        raise ParseError(f"invalid date {raw_dates.iloc[bad]!r}", row=bad + 2)

    dup = _first(dates.duplicated())
    if dup is not None:
        raise DuplicateDate(raw_dates.iloc[dup], row=dup + 2)

    blank = raw_amounts.isin(MISSING_MARKERS)
    amounts = pd.to_numeric(raw_amounts.mask(blank), errors="coerce")
    bad = _first(amounts.isna() & ~blank)
    if bad is not None:
        raise ParseError(f"invalid amount {raw_amounts.iloc[bad]!r}", row=bad + 2)
    bad = _first(~blank & ~np.isfinite(amounts.fillna(0.0)))
    if bad is not None:
        raise ParseError(f"non-finite amount {raw_amounts.iloc[bad]!r}", row=bad + 2)
    bad = _first(amounts < 0)
    if bad is not None:
        raise NegativeAmount(float(amounts.iloc[bad]), row=bad + 2)

    frame = pd.DataFrame({"date": dates.to_numpy().astype("datetime64[D]"), "amount": amounts, "blank": blank})
    frame = frame.sort_values("date", kind="stable")
    observed = frame[~frame["blank"]]
    series = DailySeries(
        dates=observed["date"].to_numpy(dtype="datetime64[D]"),
        amounts=observed["amount"].to_numpy(dtype=float),
        station=config.station or path.stem,
        meta={"source": str(path), "rows": int(len(frame))},
    )
    series.missing = np.union1d(frame.loc[frame["blank"], "date"].to_numpy(dtype="datetime64[D]"), series.gaps())
    if series.missing.size:
        logger.info("%s: %d day(s) missing", path.name, series.missing.size)
    logger.debug("%s: %d records, %d wet", path.name, len(series), int(np.sum(series.amounts > config.wet_threshold)))
    return series


def select_interval(series: DailySeries, start_year: int, end_year: int) -> DailySeries:
    """Records whose year lies in [start_year, end_year]."""
    if start_year > end_year:
        raise DomainError(f"interval {start_year}-{end_year} ends before it starts")
    years = series.years
    keep = (years >= start_year) & (years <= end_year)
    if not keep.any():
        raise EmptyInterval(start_year, end_year)
    missing_years = series.missing.astype("datetime64[Y]").astype(int) + 1970
    return DailySeries(
        dates=series.dates[keep],
        amounts=series.amounts[keep],
        station=series.station,
        meta={**series.meta, "interval": (int(start_year), int(end_year))},
        missing=series.missing[(missing_years >= start_year) & (missing_years <= end_year)],
    )
