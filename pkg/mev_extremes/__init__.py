"""Metastatistical extreme value (MEV) analysis of daily rainfall maxima."""

from .blocks import BlockSummary, DailySeries, partition_years, window_partition
from .config import AnalysisSettings, ExperimentSpec, StationConfig, load_config
from .distributions import GevParams, WeibullTail
from .errors import MevError
from .fitting import FitReport, fit_gev, fit_gumbel, fit_tail
from .mev import MevComponent, MevModel, build_mev_model, mev_cdf, return_level, return_period

__all__ = [
    "AnalysisSettings",
    "BlockSummary",
    "DailySeries",
    "ExperimentSpec",
    "FitReport",
    "GevParams",
    "MevComponent",
    "MevError",
    "MevModel",
    "StationConfig",
    "WeibullTail",
    "build_mev_model",
    "fit_gev",
    "fit_gumbel",
    "fit_tail",
    "load_config",
    "mev_cdf",
    "partition_years",
    "return_level",
    "return_period",
    "window_partition",
]
