from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from mev_extremes.distributions import GevParams, WeibullTail, gev_quantile, weibull_exceedance, weibull_sample
from mev_extremes.errors import DegenerateFit, DomainError, InsufficientData, NonConvergence
from mev_extremes.fitting import (
    fit_gev,
    fit_gumbel,
    fit_tail,
    fit_weibull_ls,
    fit_weibull_mle,
    fit_weibull_pwm,
    truncated_negloglik,
)


def test_ls_recovers_noise_free_parameters():
    tail = WeibullTail(8.0, 0.75)
    h = np.linspace(11.0, 100.0, 50)
    points = np.column_stack([h, weibull_exceedance(h, tail)])
    report = fit_weibull_ls(points, h0=10.0)
    assert report.converged
    assert report.params.scale_C == pytest.approx(8.0, rel=1e-10)
    assert report.params.shape_w == pytest.approx(0.75, rel=1e-10)
    assert report.objective < 1e-18
    assert report.method == "ls"


def test_ls_error_cases():
    with pytest.raises(InsufficientData):
        fit_weibull_ls([[11.0, 0.5], [12.0, 0.4]], h0=10.0)
    with pytest.raises(DegenerateFit):
        fit_weibull_ls([[20.0, 0.5], [20.0, 0.4], [20.0, 0.3]], h0=10.0)
    with pytest.raises(DomainError):
        fit_weibull_ls([[9.0, 0.5], [12.0, 0.4], [15.0, 0.3]], h0=10.0)
    with pytest.raises(DegenerateFit):
        fit_weibull_ls([[11.0, 0.1], [12.0, 0.4], [15.0, 0.6]], h0=10.0)


def test_truncated_mle_on_large_sample(rng):
    tail = WeibullTail(10.0, 0.8)
    draws = weibull_sample(rng, tail, 300_000)
    above = draws[draws > 10.0][:100_000]
    assert above.size == 100_000
    report = fit_weibull_mle(above, h0=10.0)
    assert report.converged
    assert report.params.scale_C == pytest.approx(10.0, rel=0.02)
    assert report.params.shape_w == pytest.approx(0.8, rel=0.02)
    assert report.loglik == pytest.approx(-report.objective)


def test_truncated_mle_fixed_shape_is_closed_form(rng):
    x = weibull_sample(rng, WeibullTail(10.0, 0.8), 5_000)
    report = fit_weibull_mle(x, h0=10.0, fixed_shape=0.8)
    above = x[x > 10.0]
    expected = float(np.mean(above**0.8 - 10.0**0.8)) ** (1 / 0.8)
    assert report.params.scale_C == pytest.approx(expected)
    assert report.params.shape_w == 0.8


def test_truncated_mle_identical_values_is_soft_failure():
    report = fit_weibull_mle(np.full(20, 25.0), h0=10.0)
    assert not report.converged
    assert report.diagnostics["error"] == "NonConvergence"


def test_truncated_mle_needs_five_points():
    with pytest.raises(InsufficientData):
        fit_weibull_mle([11.0, 12.0, 13.0, 14.0, 5.0], h0=10.0)


def test_gev_recovers_parameters(rng):
    truth = GevParams(location_mu=50.0, scale_sigma=10.0, shape_k=0.1)
    sample = gev_quantile(rng.random(10_000), truth)
    report = fit_gev(sample)
    assert report.method == "gev_mle"
    assert report.params.location_mu == pytest.approx(50.0, rel=0.05)
    assert report.params.scale_sigma == pytest.approx(10.0, rel=0.05)
    assert abs(report.params.shape_k - 0.1) <= 0.05


def test_gev_rejects_degenerate_input():
    with pytest.raises(InsufficientData):
        fit_gev([1.0, 2.0, 3.0])
    with pytest.raises(NonConvergence):
        fit_gev(np.full(30, 42.0))


def test_gumbel_recovers_parameters(rng):
    truth = GevParams(location_mu=30.0, scale_sigma=6.0)
    report = fit_gumbel(gev_quantile(rng.random(5_000), truth))
    assert report.params.shape_k == 0.0
    assert report.params.location_mu == pytest.approx(30.0, rel=0.05)
    assert report.params.scale_sigma == pytest.approx(6.0, rel=0.05)


def test_gumbel_fit_is_affine_equivariant(rng):
    x = gev_quantile(rng.random(200), GevParams(location_mu=30.0, scale_sigma=6.0))
    base = fit_gumbel(x).params
    moved = fit_gumbel(2.5 * x + 7.0).params
    assert moved.location_mu == pytest.approx(2.5 * base.location_mu + 7.0, rel=1e-8)
    assert moved.scale_sigma == pytest.approx(2.5 * base.scale_sigma, rel=1e-8)


def test_fit_tail_ls_with_wet_day_total(rng):
    values = weibull_sample(rng, WeibullTail(10.0, 0.8), 20_000)
    report = fit_tail(values, 10.0, method="ls", n_total=values.size)
    assert report.params.scale_C == pytest.approx(10.0, rel=0.05)
    assert report.params.shape_w == pytest.approx(0.8, rel=0.05)
    with pytest.raises(AttributeError):
        report.loglik


def test_fit_tail_dispatch():
    values = np.linspace(11.0, 60.0, 40)
    assert fit_tail(values, 10.0, method="mle").method == "mle"
    with pytest.raises(ValueError, match="Unknown fit method"):
        fit_tail(values, 10.0, method="moments")  # type: ignore[arg-type]


def test_report_to_dict_is_plain(rng):
    report = fit_gumbel(gev_quantile(rng.random(50), GevParams(30.0, 6.0)))
    doc = report.to_dict()
    assert doc["method"] == "gumbel_mle"
    assert set(doc["params"]) == {"mu", "sigma", "k"}
    assert doc["converged"] is True


def test_pwm_recovers_parameters(rng):
    report = fit_weibull_pwm(weibull_sample(rng, WeibullTail(10.0, 0.8), 100_000))
    assert report.method == "pwm"
    assert report.converged
    assert report.params.scale_C == pytest.approx(10.0, rel=0.02)
    assert report.params.shape_w == pytest.approx(0.8, rel=0.02)
    assert report.loglik == pytest.approx(-report.objective)


def test_pwm_is_scale_equivariant(rng):
    x = weibull_sample(rng, WeibullTail(10.0, 0.8), 500)
    base = fit_weibull_pwm(x).params
    moved = fit_weibull_pwm(3.0 * x).params
    assert moved.scale_C == pytest.approx(3.0 * base.scale_C, rel=1e-10)
    assert moved.shape_w == pytest.approx(base.shape_w, rel=1e-10)


def test_pwm_error_cases(rng):
    with pytest.raises(DomainError):
        fit_weibull_pwm(weibull_sample(rng, WeibullTail(10.0, 0.8), 50), h0=10.0)
    with pytest.raises(InsufficientData):
        fit_weibull_pwm([3.0, 0.0, 4.0])
    with pytest.raises(DegenerateFit):
        fit_weibull_pwm(np.full(10, 7.0))
    assert fit_tail(weibull_sample(rng, WeibullTail(10.0, 0.8), 50), 0.0, method="pwm").method == "pwm"


@pytest.mark.parametrize("scale, shape, h0", [(10.0, 0.8, 10.0), (8.0, 1.5, 5.0), (12.0, 0.7, 0.5)])
def test_truncated_density_integrates_to_one(scale, shape, h0):
    def density(h: float) -> float:
        return math.exp(-truncated_negloglik(scale, shape, np.array([h]), h0))

    total, _ = integrate.quad(density, h0, np.inf, limit=200)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_truncated_mle_is_a_local_optimum(rng):
    x = weibull_sample(rng, WeibullTail(10.0, 0.8), 4_000)
    above = x[x > 10.0]
    report = fit_weibull_mle(above, h0=10.0)
    best = report.objective
    tail = report.params
    for dc in (0.9, 1.0, 1.1):
        for dw in (0.9, 1.0, 1.1):
            if dc == dw == 1.0:
                continue
            assert truncated_negloglik(tail.scale_C * dc, tail.shape_w * dw, above, 10.0) > best


def test_ls_is_scale_equivariant(rng):
    values = weibull_sample(rng, WeibullTail(10.0, 0.8), 2_000)
    base = fit_tail(values, 10.0, method="ls", n_total=values.size).params
    moved = fit_tail(2.5 * values, 25.0, method="ls", n_total=values.size).params
    assert moved.scale_C == pytest.approx(2.5 * base.scale_C, rel=1e-10)
    assert moved.shape_w == pytest.approx(base.shape_w, rel=1e-10)
