from __future__ import annotations

import json

import numpy as np
import pytest

from mev_extremes.errors import NonFiniteValue, ValidationError
from mev_extremes.export import export_daily_csv, export_gumbel_plot, write_columns, write_json, write_rows
from mev_extremes.ingest import parse_daily_csv
from mev_extremes.montecarlo import GumbelPlotSeries


@pytest.fixture
def series() -> GumbelPlotSeries:
    return GumbelPlotSeries("MEV", np.array([12.5, 100.0 / 3.0]), np.array([0.1, 2.0]))


def test_csv_layout(tmp_path, series):
    path = export_gumbel_plot([series], tmp_path / "plot.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines == ["label,y_mm,reduced_variate,comment", "MEV,12.5,0.1,", "MEV,33.33333333,2,"]


def test_output_is_byte_stable(tmp_path, series):
    a = export_gumbel_plot([series, series], tmp_path / "a.csv").read_bytes()
    b = export_gumbel_plot([series, series], tmp_path / "b.csv").read_bytes()
    assert a == b


def test_clamped_points_are_flagged(tmp_path):
    clamped = GumbelPlotSeries.from_cdf("GEV", np.array([10.0, 500.0]), np.array([0.5, 1.0]))
    lines = export_gumbel_plot([clamped], tmp_path / "c.csv").read_text(encoding="utf-8").splitlines()
    assert lines[1].endswith(",")
    assert lines[2].startswith("GEV,500,")
    assert lines[2].endswith(",clamped")


def test_json_layout(tmp_path, series):
    path = export_gumbel_plot([series], tmp_path / "plot.json", format="json")
    doc = json.loads(path.read_text(encoding="utf-8"))
    assert doc == {"series": [{"label": "MEV", "points": [[12.5, 0.1, ""], [33.33333333, 2.0, ""]]}]}


def test_non_finite_points_are_rejected(tmp_path):
    bad = GumbelPlotSeries("x", np.array([np.inf]), np.array([1.0]))
    with pytest.raises(NonFiniteValue):
        export_gumbel_plot([bad], tmp_path / "bad.csv")
    with pytest.raises(NonFiniteValue):
        write_json({"v": float("nan")}, tmp_path / "bad.json")


def test_unknown_format(tmp_path, series):
    with pytest.raises(ValueError, match="Unknown format"):
        export_gumbel_plot([series], tmp_path / "x.xml", format="xml")  # type: ignore[arg-type]


def test_write_columns(tmp_path):
    path = write_columns({"y": [1.0, 2.0], "band_5_w1": [0.25, 0.5]}, tmp_path / "cols.csv")
    assert path.read_text(encoding="utf-8") == "y,band_5_w1\n1,0.25\n2,0.5\n"
    with pytest.raises(ValidationError):
        write_columns({"a": [1.0], "b": [1.0, 2.0]}, tmp_path / "bad.csv")


def test_daily_csv_round_trip(tmp_path, write_csv):
    original = parse_daily_csv(write_csv(["date,amount", "1841-01-01,0", "1841-01-02,12.25", "1841-01-03,", "1841-01-05,7.5"]))
    path = export_daily_csv(original, tmp_path / "out.csv")
    again = parse_daily_csv(path)
    np.testing.assert_array_equal(again.dates, original.dates)
    np.testing.assert_array_equal(again.amounts, original.amounts)
    np.testing.assert_array_equal(again.missing, original.missing)
    assert path.read_text(encoding="utf-8").splitlines()[3] == "1841-01-03,"


def test_tables_as_json(tmp_path):
    cols = write_columns({"y": [1.0, 2.0], "p50": [0.5, 0.75]}, tmp_path / "cols.json", format="json")
    doc = json.loads(cols.read_text(encoding="utf-8"))
    assert doc["columns"] == ["y", "p50"]
    assert doc["values"]["p50"] == [0.5, 0.75]

    rows = write_rows([{"width": 5, "status": "ok", "extra": 1}], tmp_path / "rows.json", ["width", "status"], format="json")
    assert json.loads(rows.read_text(encoding="utf-8")) == {"rows": [{"width": 5, "status": "ok"}]}
