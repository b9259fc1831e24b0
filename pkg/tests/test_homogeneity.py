from __future__ import annotations

from typing import List

import numpy as np
import pytest

from mev_extremes.blocks import BlockSummary, partition_years, series_from_yearly_values
from mev_extremes.config import ExperimentSpec
from mev_extremes.distributions import WeibullTail
from mev_extremes.errors import DomainError, ValidationError
from mev_extremes.homogeneity import envelope_test, percentile_bands
from mev_extremes.montecarlo import generate_experiment


def test_percentile_of_small_sample():
    bands = percentile_bands(np.array([1.0, 2.0, 3.0, 4.0, 5.0]), [50])
    assert bands[50.0].tolist() == [3.0]


def test_constant_samples_give_constant_bands():
    bands = percentile_bands(np.full((10, 4), 0.7))
    for values in bands.values():
        np.testing.assert_allclose(values, 0.7)


def test_uniform_fifth_percentile(rng):
    bands = percentile_bands(rng.random((10_000, 1)), [5])
    assert bands[5.0][0] == pytest.approx(0.05, abs=0.01)


def test_two_samples_interpolate_between_them():
    bands = percentile_bands(np.array([[0.2, 0.4], [0.6, 0.8]]), [0, 5, 50, 95, 100])
    np.testing.assert_allclose(bands[0.0], [0.2, 0.4])
    np.testing.assert_allclose(bands[50.0], [0.4, 0.6])
    np.testing.assert_allclose(bands[100.0], [0.6, 0.8])
    np.testing.assert_allclose(bands[5.0], [0.22, 0.42])


def test_percentile_band_errors():
    with pytest.raises(DomainError):
        percentile_bands(np.empty((0, 3)))
    with pytest.raises(DomainError):
        percentile_bands(np.ones((4, 2)), [101])
    with pytest.raises(DomainError):
        percentile_bands(np.ones((1, 2)))


@pytest.fixture
def homogeneous_blocks(make_series):
    return partition_years(make_series(years=20, n_wet=100, tail=WeibullTail(10.0, 0.8), seed=21))


def test_envelope_structure(homogeneous_blocks):
    result = envelope_test(homogeneous_blocks, widths=[5, 2, 1], replicates=20, seed=3, grid_points=30)
    assert result.widths == [5, 2, 1, 20]
    assert result.whole_width == 20
    assert result.y_grid.size == 30
    for width in result.widths:
        low, mid, high = (result.bands[width][p] for p in (5.0, 50.0, 95.0))
        assert np.all(low <= mid) and np.all(mid <= high)
        assert 0.0 <= result.inside_fraction[width] <= 1.0
        assert result.dropped[width] <= 4
    assert set(result.verdicts()) == {5, 2, 1, 20}
    assert list(result.columns())[:5] == ["y", "band_5_w5", "band_50_w5", "band_95_w5", "observed_w5"]


def test_whole_interval_sits_inside_its_own_null(homogeneous_blocks):
    result = envelope_test(homogeneous_blocks, widths=[5], replicates=40, seed=8, grid_points=50)
    assert result.inside_fraction[result.whole_width] >= 0.8
    assert result.whole_interval.label == "observed_w20"


def test_envelope_ignores_worker_count(homogeneous_blocks):
    a = envelope_test(homogeneous_blocks, widths=[10, 5], replicates=8, seed=5, grid_points=20, workers=1)
    b = envelope_test(homogeneous_blocks, widths=[10, 5], replicates=8, seed=5, grid_points=20, workers=3)
    for width in a.widths:
        for p in a.percentiles:
            np.testing.assert_array_equal(a.bands[width][p], b.bands[width][p])
    assert a.inside_fraction == b.inside_fraction


def test_envelope_argument_checks(homogeneous_blocks):
    with pytest.raises(ValidationError):
        envelope_test(homogeneous_blocks, widths=[25], replicates=4)
    with pytest.raises(DomainError):
        envelope_test(homogeneous_blocks, widths=[5], replicates=1)
    with pytest.raises(DomainError):
        envelope_test(homogeneous_blocks, widths=[0], replicates=4)


def test_summary_is_json_ready(homogeneous_blocks):
    result = envelope_test(homogeneous_blocks, widths=[10], replicates=4, seed=1, grid_points=10)
    summary = result.summary()
    assert set(summary["inside_fraction"]) == {"10", "20"}
    assert summary["verdicts"]["20"] in {"consistent", "inconsistent"}


def _experiment_input(name: str, seed: int) -> List[BlockSummary]:
    spec = ExperimentSpec.preset(name)
    yearly = generate_experiment(spec, np.random.default_rng(seed))
    return partition_years(series_from_yearly_values(yearly))


@pytest.mark.slow
def test_homogeneous_record_stays_inside_every_band():
    result = envelope_test(_experiment_input("experiment1", 101), widths=[10, 5, 2, 1], replicates=200, seed=7)
    for width in (10, 5, 2, 1):
        assert result.inside_fraction[width] >= 0.9


@pytest.mark.slow
def test_five_year_regimes_leave_the_five_year_band():
    result = envelope_test(_experiment_input("experiment2", 102), widths=[5], replicates=200, seed=7)
    assert result.inside_fraction[5] < 0.7
    assert result.verdicts()[5] == "inconsistent"


@pytest.mark.slow
def test_two_year_regimes_leave_the_two_year_band():
    result = envelope_test(_experiment_input("experiment3", 103), widths=[5, 2], replicates=200, seed=7)
    assert result.inside_fraction[2] < 0.7


@pytest.mark.slow
def test_whole_interval_null_coverage_over_independent_records(make_series):
    fractions = []
    for trial in range(20):
        blocks = partition_years(make_series(years=50, n_wet=100, seed=1_000 + trial))
        result = envelope_test(blocks, widths=[], replicates=100, seed=trial, grid_points=100)
        fractions.append(result.inside_fraction[result.whole_width])
    assert np.mean(fractions) >= 0.85
