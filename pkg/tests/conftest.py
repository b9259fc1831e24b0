from __future__ import annotations

from pathlib import Path
from typing import Callable, List, Sequence

import numpy as np
import pytest

from mev_extremes.blocks import DailySeries, series_from_yearly_values
from mev_extremes.distributions import WeibullTail, weibull_sample


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def make_series() -> Callable[..., DailySeries]:
    """Synthetic record: `years` years of `n_wet` Weibull wet days each."""

    def build(
        years: int = 20,
        n_wet: int = 100,
        tail: WeibullTail = WeibullTail(10.0, 0.8),
        *,
        seed: int = 7,
        first_year: int = 2001,
    ) -> DailySeries:
        gen = np.random.default_rng(seed)
        yearly = [weibull_sample(gen, tail, n_wet) for _ in range(years)]
        return series_from_yearly_values(yearly, first_year=first_year)

    return build


@pytest.fixture
def write_csv(tmp_path: Path) -> Callable[[Sequence[str]], Path]:
    def write(lines: Sequence[str], name: str = "daily.csv") -> Path:
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return write


@pytest.fixture
def daily_rows() -> Callable[[str, List[float]], List[str]]:
    """CSV lines for consecutive days from `start`."""

    def rows(start: str, amounts: List[float]) -> List[str]:
        days = np.arange(np.datetime64(start, "D"), np.datetime64(start, "D") + len(amounts))
        return ["date,amount", *(f"{d},{a:g}" for d, a in zip(days.tolist(), amounts))]

    return rows
