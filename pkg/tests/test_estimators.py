import math

import numpy as np
import pytest

from src.experiments import Estimators


def test_mean_interval():
    result = Estimators.mean([1.0, 2.0, 3.0, 4.0], flags={"capped": 1})
    assert result.estimate == 2.5
    assert result.replicas == 4
    assert result.ci_low < 2.5 < result.ci_high
    assert result.flags == {"capped": 1}


def test_mean_of_constant_has_zero_width():
    result = Estimators.mean([3.0] * 5)
    assert result.std_error == 0.0
    assert result.ci_low == result.ci_high == 3.0


def test_mean_of_nothing_is_nan():
    result = Estimators.mean([])
    assert math.isnan(result.estimate)
    assert result.replicas == 0


def test_proportion_wilson_interval_inside_unit_interval():
    result = Estimators.proportion([True] * 10)
    assert result.estimate == 1.0
    assert 0.0 <= result.ci_low < 1.0
    assert result.ci_high == 1.0


def test_jackknife_covariance():
    x = [0.0, 1.0, 0.0, 1.0, 1.0, 0.0]
    out = Estimators.jackknife_covariance(x, x)
    assert out["cov"] == pytest.approx(0.25)
    assert out["se"] > 0.0
    assert math.isnan(Estimators.jackknife_covariance([1.0], [1.0])["cov"])


def test_log_linear_fit_recovers_rate():
    t = np.array([1.0, 2.0, 3.0, 4.0])
    fit = Estimators.log_linear_fit(t, 2.0 * np.exp(-0.7 * t))
    assert fit.slope == pytest.approx(-0.7)
    assert fit.decay_rate == pytest.approx(0.7)
    assert fit.prefactor == pytest.approx(2.0)
    assert fit.slope_negative


def test_log_linear_fit_drops_zero_points():
    fit = Estimators.log_linear_fit([1.0, 2.0, 3.0], [0.5, 0.0, 0.125])
    assert fit.points_used == 2
    assert fit.excluded == [2.0]
    assert Estimators.log_linear_fit([1.0, 2.0], [0.5, 0.0]) is None


def test_ks_exponential_accepts_exponential_samples():
    samples = np.random.default_rng(3).exponential(4.0, 500)
    report = Estimators.ks_exponential(samples)
    assert report.samples == 500
    assert report.passes()


def test_ks_exponential_rejects_constant_samples():
    assert not Estimators.ks_exponential([1.0] * 200).passes()


def test_increase_test():
    a = Estimators.mean([1.0, 1.1, 0.9, 1.0])
    b = Estimators.mean([3.0, 3.1, 2.9, 3.0])
    out = Estimators.increase_test(a, b)
    assert out["point_increase"] and out["significant"]
    assert not Estimators.increase_test(b, a)["point_increase"]


def test_ks_exponential_rejection_rate_under_the_null():
    rng = np.random.default_rng(2024)
    repeats = 400
    rejected = sum(Estimators.ks_exponential(rng.exponential(3.0, size=200)).p_value < 0.05
                   for _ in range(repeats))
    # the mean is fitted, so the test is conservative
    assert rejected / repeats <= 0.05 + 3 * math.sqrt(0.05 * 0.95 / repeats)


def test_ks_exponential_rejects_a_peaked_law():
    rng = np.random.default_rng(2025)
    rejected = sum(Estimators.ks_exponential(rng.weibull(3.0, size=200)).p_value < 0.05 for _ in range(50))
    assert rejected >= 45
