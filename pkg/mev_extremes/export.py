"""Plot-data and table writers. Output is byte-stable for identical inputs."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, List, Literal, Mapping, Sequence

import numpy as np

from .blocks import DailySeries
from .errors import NonFiniteValue, ValidationError
from .montecarlo import GumbelPlotSeries

ExportFormat = Literal["csv", "json"]
EXPORT_FORMAT_CHOICES: tuple[ExportFormat, ...] = ("csv", "json")
GUMBEL_PLOT_HEADER = ("label", "y_mm", "reduced_variate", "comment")


def fmt(value: float) -> str:
    return format(float(value), ".10g")


def _rounded(value: float) -> float:
    return float(fmt(value))


def _check_finite(series: GumbelPlotSeries) -> None:
    if not (np.all(np.isfinite(series.y)) and np.all(np.isfinite(series.reduced_variate))):
        raise NonFiniteValue(f"series {series.label!r} holds non-finite points")


def _open_for_write(path: str | Path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path.open("w", encoding="utf-8", newline="")


def _check_format(format: str) -> None:
    if format not in EXPORT_FORMAT_CHOICES:
        raise ValueError(f"Unknown format {format!r}. Choose one of: {', '.join(EXPORT_FORMAT_CHOICES)}")


def export_gumbel_plot(
    series_list: Sequence[GumbelPlotSeries],
    path: str | Path,
    format: ExportFormat = "csv",
) -> Path:
    """Write Gumbel-plot points; clamped points carry `clamped` in the comment column."""
    _check_format(format)
    for s in series_list:
        _check_finite(s)

    path = Path(path)
    if format == "json":
        doc = {
            "series": [
                {
                    "label": s.label,
                    "points": [
                        [_rounded(y), _rounded(rv), "clamped" if c else ""]
                        for y, rv, c in zip(s.y.tolist(), s.reduced_variate.tolist(), s.clamped.tolist())
                    ],
                }
                for s in series_list
            ]
        }
        write_json(doc, path)
        return path

    with _open_for_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(GUMBEL_PLOT_HEADER)
        for s in series_list:
            for y, rv, c in zip(s.y.tolist(), s.reduced_variate.tolist(), s.clamped.tolist()):
                writer.writerow([s.label, fmt(y), fmt(rv), "clamped" if c else ""])
    return path


def write_columns(
    columns: Mapping[str, Sequence[float] | np.ndarray],
    path: str | Path,
    format: ExportFormat = "csv",
) -> Path:
    """One CSV column per mapping entry (or one JSON array per key); all columns must have equal length."""
    _check_format(format)
    names = list(columns)
    arrays = [np.asarray(columns[name], dtype=float) for name in names]
    if len({a.size for a in arrays}) > 1:
        raise ValidationError("columns must all have the same length")
    if format == "json":
        return write_json({"columns": names, "values": {name: a for name, a in zip(names, arrays)}}, path)
    with _open_for_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for row in zip(*(a.tolist() for a in arrays)):
            writer.writerow([fmt(v) for v in row])
    return Path(path)


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (float, np.floating)):
        return fmt(value)
    return str(value)


def write_rows(
    rows: Iterable[Mapping[str, Any]],
    path: str | Path,
    fieldnames: Sequence[str],
    format: ExportFormat = "csv",
) -> Path:
    _check_format(format)
    if format == "json":
        return write_json({"rows": [{name: row.get(name) for name in fieldnames} for row in rows]}, path)
    with _open_for_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_cell(row.get(name)) for name in fieldnames])
    return Path(path)


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            raise NonFiniteValue(f"cannot write non-finite number {obj!r} to JSON")
        return _rounded(obj)
    return obj


def write_json(obj: Any, path: str | Path) -> Path:
    path = Path(path)
    with _open_for_write(path) as fh:
        fh.write(json.dumps(_jsonable(obj), indent=2, sort_keys=True))
        fh.write("\n")
    return path


def export_daily_csv(
    series: DailySeries,
    path: str | Path,
    *,
    date_column: str = "date",
    amount_column: str = "amount",
) -> Path:
    """Write a series in the input schema; missing days are written with a blank amount."""
    missing = np.setdiff1d(series.missing, series.dates)
    dates = np.concatenate([series.dates, missing])
    amounts: List[str] = [fmt(a) for a in series.amounts.tolist()] + [""] * missing.size
    order = np.argsort(dates, kind="stable")
    with _open_for_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([date_column, amount_column])
        for i in order.tolist():
            writer.writerow([str(dates[i]), amounts[i]])
    return Path(path)

