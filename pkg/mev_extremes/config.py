from __future__ import annotations

import json

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic import ValidationError as PydanticValidationError

from .distributions import WeibullTail
from .errors import ValidationError
from .fitting.types import TailMethod

EXPERIMENT1_TABLE: List[Tuple[float, float]] = [(10.0, 0.8)]
MIXTURE_TABLE: List[Tuple[float, float]] = [(8.0, 0.75), (10.0, 0.8), (12.0, 0.7), (9.0, 0.85), (11.0, 0.75)]


class StationConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    input_path: Optional[Path] = None
    date_column: str = "date"
    amount_column: str = "amount"
    station: str = ""
    threshold_h0: float = Field(default=10.0, ge=0)
    wet_threshold: float = Field(default=0.0, ge=0)
    intervals: List[Tuple[int, int]] = Field(default_factory=list)
    seed: int = 12345
    replicates: int = Field(default=200, ge=2)
    widths: List[int] = Field(default_factory=lambda: [10, 5, 2, 1])
    fit_method: TailMethod = "ls"
    return_periods: List[float] = Field(default_factory=lambda: [10.0, 100.0, 1000.0])

    @field_validator("intervals")
    @classmethod
    def _ordered_intervals(cls, v: List[Tuple[int, int]]) -> List[Tuple[int, int]]:
        for start, end in v:
            if start > end:
                raise ValueError(f"interval {start}-{end} ends before it starts")
        for (_, prev_end), (start, _) in zip(v, v[1:]):
            if start <= prev_end:
                raise ValueError("intervals must be ordered and non-overlapping")
        return v

    @field_validator("widths")
    @classmethod
    def _positive_widths(cls, v: List[int]) -> List[int]:
        if not v or any(w < 1 for w in v):
            raise ValueError("widths must be a non-empty list of integers >= 1")
        return v

    @field_validator("return_periods")
    @classmethod
    def _periods_above_one(cls, v: List[float]) -> List[float]:
        if any(t <= 1 for t in v):
            raise ValueError("return periods must be > 1 year")
        return v

    @model_validator(mode="after")
    def _pwm_needs_zero_threshold(self) -> "StationConfig":
        if self.fit_method == "pwm" and self.threshold_h0 != 0:
            raise ValueError("fit_method 'pwm' fits the whole wet-day sample and needs threshold_h0 = 0")
        return self


class ExperimentSpec(BaseModel):
    """Synthetic block-maxima experiment: yearly Weibull draws with regime-cycled parameters.

    `regime_length=None` keeps one regime for the whole run. With `pooling="regime"` the
    MEV estimate fits one tail per parameter-table entry, pooling every year drawn from
    it; `pooling="window"` fits consecutive windows of `window_width` years instead.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str = "experiment1"
    n_years: int = Field(default=50, ge=1)
    n_wet_per_year: int = Field(default=100, ge=1, le=366)
    regime_length: Optional[int] = Field(default=None, ge=1)
    parameter_table: List[Tuple[float, float]] = Field(default_factory=lambda: list(EXPERIMENT1_TABLE), min_length=1)
    cardinality_range: Optional[Tuple[int, int]] = None
    seed: int = 12345
    replicates: int = Field(default=200, ge=1)
    truth_maxima: int = Field(default=1_000_000, ge=10_000)
    grid_points: int = Field(default=200, ge=2)
    window_width: int = Field(default=1, ge=1)
    threshold_h0: float = Field(default=0.0, ge=0)
    fit_method: TailMethod = "pwm"
    pooling: Literal["regime", "window"] = "regime"
    workers: Optional[int] = Field(default=None, ge=1)

    @field_validator("parameter_table")
    @classmethod
    def _valid_tails(cls, v: List[Tuple[float, float]]) -> List[Tuple[float, float]]:
        for scale, shape in v:
            if scale <= 0 or shape <= 0:
                raise ValueError(f"invalid tail parameters (C={scale}, w={shape})")
        return v

    @model_validator(mode="after")
    def _valid_cardinality_range(self) -> "ExperimentSpec":
        if self.cardinality_range is not None:
            lo, hi = self.cardinality_range
            if not (1 <= lo <= hi <= 366):
                raise ValueError(f"cardinality_range must satisfy 1 <= lo <= hi <= 366, got {self.cardinality_range}")
        if self.window_width > self.n_years:
            raise ValueError("window_width cannot exceed n_years")
        if self.fit_method == "pwm" and self.threshold_h0 != 0:
            raise ValueError("fit_method 'pwm' fits the whole wet-day sample and needs threshold_h0 = 0")
        return self

    def tails(self) -> List[WeibullTail]:
        return [WeibullTail(scale, shape) for scale, shape in self.parameter_table]

    def regime_index(self, year_index: int) -> int:
        """Parameter-table entry used in year `year_index` (0-based)."""
        regime = 0 if self.regime_length is None else year_index // self.regime_length
        return regime % len(self.parameter_table)

    def tail_for_year(self, year_index: int) -> WeibullTail:
        scale, shape = self.parameter_table[self.regime_index(year_index)]
        return WeibullTail(scale, shape)

    @property
    def max_scale(self) -> float:
        return max(scale for scale, _ in self.parameter_table)

    @staticmethod
    def preset(name: str, **overrides: Any) -> "ExperimentSpec":
        presets: Dict[str, Dict[str, Any]] = {
            "experiment1": {"regime_length": None, "parameter_table": EXPERIMENT1_TABLE},
            "experiment2": {"regime_length": 5, "parameter_table": MIXTURE_TABLE},
            "experiment3": {"regime_length": 2, "parameter_table": MIXTURE_TABLE},
        }
        if name not in presets:
            raise ValidationError(f"Unknown experiment preset {name!r}. Choose one of: {', '.join(presets)}")
        return ExperimentSpec(name=name, **{**presets[name], **overrides})


class AnalysisSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    station: StationConfig = Field(default_factory=StationConfig)
    experiment: ExperimentSpec = Field(default_factory=ExperimentSpec)


def load_config(path: str | Path) -> AnalysisSettings:
    """Read a `.toml` or `.json` settings document."""
    path = Path(path)
    suffix = path.suffix.lower()
    raw = path.read_bytes()
    try:
        if suffix == ".toml":
            obj = tomllib.loads(raw.decode("utf-8"))
        elif suffix == ".json":
            obj = json.loads(raw.decode("utf-8"))
        else:
            raise ValidationError(f"Unsupported config format {suffix!r} (use .toml or .json)")
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        raise ValidationError(f"{path}: {e}") from e

    exp = obj.get("experiment") if isinstance(obj, dict) else None
    if isinstance(exp, dict) and "preset" in exp:
        exp = dict(exp)
        preset = ExperimentSpec.preset(exp.pop("preset"))
        obj = {**obj, "experiment": {**preset.model_dump(), **exp}}
    try:
        return AnalysisSettings.model_validate(obj)
    except PydanticValidationError as e:
        raise ValidationError(f"{path}: invalid configuration:\n{e}") from e
