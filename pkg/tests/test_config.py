from __future__ import annotations

from pathlib import Path

import pytest

from mev_extremes.config import AnalysisSettings, ExperimentSpec, StationConfig, load_config
from mev_extremes.errors import ValidationError

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def test_defaults():
    settings = AnalysisSettings()
    assert settings.station.threshold_h0 == 10.0
    assert settings.station.widths == [10, 5, 2, 1]
    assert settings.experiment.n_years == 50
    assert settings.experiment.n_wet_per_year == 100
    assert settings.experiment.regime_length is None


@pytest.mark.parametrize("name, regime", [("experiment1", None), ("experiment2", 5), ("experiment3", 2)])
def test_presets(name, regime):
    spec = ExperimentSpec.preset(name)
    assert spec.name == name
    assert spec.regime_length == regime


def test_unknown_preset():
    with pytest.raises(ValidationError, match="Unknown experiment preset"):
        ExperimentSpec.preset("experiment9")


def test_load_toml_with_preset(tmp_path):
    path = tmp_path / "cfg.toml"
    path.write_text('[experiment]\npreset = "experiment3"\nreplicates = 12\n\n[station]\nthreshold_h0 = 5.0\n')
    settings = load_config(path)
    assert settings.experiment.regime_length == 2
    assert settings.experiment.replicates == 12
    assert settings.station.threshold_h0 == 5.0


def test_load_json(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text('{"station": {"intervals": [[1841, 1880], [1887, 2006]]}}')
    assert load_config(path).station.intervals == [(1841, 1880), (1887, 2006)]


@pytest.mark.parametrize(
    "body",
    [
        "[station]\nunknown = 1\n",
        "[station]\nintervals = [[1900, 1950], [1940, 1960]]\n",
        "[station]\nthreshold_h0 = -1.0\n",
        "[experiment]\nparameter_table = []\n",
        "[experiment]\ncardinality_range = [120, 80]\n",
        "not toml at all [",
    ],
)
def test_invalid_documents(tmp_path, body):
    path = tmp_path / "bad.toml"
    path.write_text(body)
    with pytest.raises(ValidationError):
        load_config(path)


def test_unsupported_suffix(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text("station: {}")
    with pytest.raises(ValidationError, match="Unsupported config format"):
        load_config(path)


@pytest.mark.parametrize("name", ["station.toml", "experiment2.toml", "experiment1_variable_n.toml"])
def test_shipped_configs_load(name):
    settings = load_config(CONFIG_DIR / name)
    assert isinstance(settings.station, StationConfig)


def test_experiment_fits_pwm_per_regime_by_default():
    spec = ExperimentSpec.preset("experiment3")
    assert (spec.fit_method, spec.pooling, spec.threshold_h0) == ("pwm", "regime", 0.0)
    assert [spec.regime_index(i) for i in range(12)] == [0, 0, 1, 1, 2, 2, 3, 3, 4, 4, 0, 0]
    assert ExperimentSpec.preset("experiment1").regime_index(37) == 0


def test_pwm_needs_zero_threshold():
    with pytest.raises(ValueError, match="threshold_h0 = 0"):
        ExperimentSpec(threshold_h0=5.0)
    with pytest.raises(ValueError, match="threshold_h0 = 0"):
        StationConfig(fit_method="pwm")
    assert ExperimentSpec(fit_method="ls", threshold_h0=5.0).threshold_h0 == 5.0
    assert StationConfig(fit_method="pwm", threshold_h0=0.0).fit_method == "pwm"
