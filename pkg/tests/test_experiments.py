import math

import pytest

from src.dynamics import ObservedTrajectory, SpikeLog
from src.errors import CoverageError, ParameterError
from src.experiments import (
    EXPERIMENTS,
    ExperimentConfig,
    STREAM_LAYERS,
    ThermalizationExperiment,
    concentration_report,
    covariance_decay,
    edge_identity_check,
    margin_self_test,
    estimate_alpha,
    estimate_dual_rho,
    estimate_rho,
    extinction_law_experiment,
    gamma_sweep,
    replica_key,
    sample_extinction_times,
    sigma_tail,
    site_sum,
    spike_average,
    superlinear_mean_growth,
    superlinearity_check,
    survival_bracket,
    time_average,
)
from src.graphical import Configuration


# -- observables ----------------------------------------------------------------

def test_spike_average_counts_sites_in_interval():
    log = SpikeLog()
    for site, t in [(0, 0.5), (1, 1.0), (0, 1.5), (3, 1.6), (0, 4.0)]:
        log.record(site, t)
    assert spike_average(log, [0, 1], 1.0, 2.0) == pytest.approx(1.0)
    assert spike_average(log, [0, 1, 3], 1.0, 2.0, window=range(-2, 3)) == pytest.approx(1.0)
    with pytest.raises(ParameterError):
        spike_average(log, [0], 1.0, 0.0)


def test_time_average_integrates_pieces():
    traj = ObservedTrajectory([0, 1], Configuration(frozenset({0, 1})))
    traj.record(1.0, 1, "spike", 0)
    traj.record(3.0, 0, "leak", 0)
    traj.close(4.0)
    # S = 2 on [0, 1), 1 on [1, 3), 0 on [3, 4]
    assert time_average(traj, 0.0, 4.0, site_sum([0, 1])) == pytest.approx((2.0 + 2.0) / 4.0)
    assert time_average(traj, 2.0, 2.0, site_sum([0])) == pytest.approx(0.5)
    with pytest.raises(CoverageError):
        time_average(traj, 3.0, 2.0, site_sum([0]))


# -- streams --------------------------------------------------------------------

def test_experiment_families_use_distinct_streams():
    layers = {replica_key(1, 0, family).layer for family in STREAM_LAYERS}
    assert len(layers) == len(STREAM_LAYERS)


def test_registry_names():
    expected = {"rho", "dual_rho", "margin", "alpha", "superlinearity", "edge_identity", "edge_gap",
                "edge_tail", "extinction_law", "mean_growth", "thermalization", "covariance",
                "sigma_tail", "sweep"}
    assert set(EXPERIMENTS) == expected


# -- densities ------------------------------------------------------------------

def test_rho_estimate_is_reproducible_and_in_range():
    a = estimate_rho(0.3, 1.0, 8, seed=11, block=1)
    b = estimate_rho(0.3, 1.0, 8, seed=11, block=1)
    assert a.estimate == b.estimate
    assert 0.0 <= a.estimate <= 1.0
    assert a.replicas == 8
    for name in ("block_estimate", "dual_survival_estimate", "duality_gap", "margin", "raw"):
        assert name in a.extras


def test_dual_rho_in_range():
    est = estimate_dual_rho(0.3, 1.0, 6, seed=3)
    assert 0.0 <= est.estimate <= 1.0


def test_doubling_the_margin_leaves_the_estimate_unchanged():
    report = margin_self_test(0.3, 2.0, 200, seed=9)
    assert report["passes"]
    assert report["p_value"] > 0.01
    assert abs(report["frequency"] - report["frequency_doubled_margin"]) < 0.2


# -- edges ----------------------------------------------------------------------

def test_alpha_estimate_runs():
    est = estimate_alpha(0.2, 2.0, 4, seed=5)
    assert est.replicas <= 4
    assert "margin_violations" in est.flags


def test_superlinearity_is_exactly_zero_without_extra_kills():
    report = superlinearity_check(0.2, 0.0, 3.0, 10, seed=4)
    assert report["difference"] == 0.0
    raw = report["raw"]
    assert (raw["alpha_gamma"] == raw["alpha_raised"]).all()
    assert report["passes"]


def test_superlinearity_bound_on_coupled_marks():
    lam = 0.1
    report = superlinearity_check(0.05, lam, 5.0, 200, seed=21)
    assert report["difference"] >= lam - 3 * report["difference_std_error"]
    # extra kills never push the edge further right
    raw = report["raw"]
    assert (raw["alpha_gamma"] >= raw["alpha_raised"]).all()
    assert report["passes"]


def test_edge_identities_hold():
    report = edge_identity_check(0.4, 2.0, 4, seed=8)
    assert report["passes"]
    assert report["edge_violations"] == report["content_violations"] == report["ordering_violations"] == 0


# -- extinction -----------------------------------------------------------------

def test_sample_extinction_times_table():
    raw = sample_extinction_times(1.0, 1, 10, seed=2)
    assert list(raw.columns) == ["replica", "tau", "end_time", "status"]
    assert list(raw["replica"]) == list(range(10))
    assert raw["tau"].notna().all()


def test_capped_runs_are_counted_not_dropped_silently():
    report = extinction_law_experiment(0.05, 3, 10, seed=4, max_events=5)
    assert report["flags"]["cap_hits"] > 0
    assert len(report["raw"]) == 10


def test_extinction_law_report():
    report = extinction_law_experiment(1.0, 1, 40, seed=6, contrast_n=0)
    assert report["mean_tau"] > 0.0
    assert report["rescaled_mean"] == pytest.approx(1.0)
    assert report["contrast"]["n"] == 0


def test_mean_growth_single_point_has_no_verdict():
    report = superlinear_mean_growth(1.0, [1], 10, seed=1)
    assert report["passes"] is None
    assert len(report["ratio"]) == 1


# -- decay ----------------------------------------------------------------------

def test_covariance_decay_finite_mode():
    report = covariance_decay(0.5, 1.0, [0.5, 1.0], 10, seed=9, mode="finite", n=2)
    assert len(report["covariance"]) == 2
    assert isinstance(report["monotone"], bool)


def test_sigma_tail_is_non_increasing():
    report = sigma_tail(1.0, [0.5, 1.0, 2.0], 20.0, 30, seed=10)
    tail = report["tail"]
    assert all(b <= a for a, b in zip(tail, tail[1:]))


# -- phase sweep ----------------------------------------------------------------

def test_survival_bracket():
    assert survival_bracket([0.1, 0.2, 0.3], [0.9, 0.5, 0.05], 0.1) == (0.2, 0.3)
    assert survival_bracket([0.1, 0.2], [0.9, 0.5], 0.1) is None


def test_dual_sweep_is_monotone_on_nested_copies():
    report = gamma_sweep([0.0, 0.5, 2.0], 3.0, 10, seed=12)
    assert report["monotone"]
    assert all(0.0 <= s <= 1.0 for s in report["survival"])


# -- thermalization -------------------------------------------------------------

def test_thermalization_summary_fields():
    config = ExperimentConfig.from_dict({
        "gamma": 0.5,
        "replicas": 4,
        "r_schedule": [[2, 1.0], [3, 2.0]],
        "F": [0],
        "t_offset": 0.5,
        "rho_t_star": 1.0,
        "rho_replicas": 4,
        "rho_block": 0,
        "tau_bound_replicas": 2,
    })
    result = ThermalizationExperiment(config).run().get_result()
    for name in ("rho_hat", "concentration_fraction", "survivor_fraction", "schedule", "envelope_fraction",
                 "concentration_at_rho_ci_low", "concentration_at_rho_ci_high"):
        assert name in result.summary
    assert len(result.summary["schedule"]) == 2
    assert set(result.raw["n"]) == {2, 3}
    assert not math.isnan(result.summary["survivor_fraction"])


def test_concentration_verdict_uses_both_ends_of_rho_ci():
    per_site = [0.30] * 50
    wide = concentration_report(per_site, 0.30, (0.28, 0.32), delta=0.05)
    assert wide["fraction"] == 1.0
    assert wide["passes"]

    narrow = concentration_report(per_site, 0.30, (0.28, 0.32), delta=0.01)
    # every value sits on rho_hat but 0.02 from either CI end
    assert narrow["fraction"] == 1.0
    assert narrow["fraction_at_ci_low"] == 0.0
    assert narrow["fraction_at_ci_high"] == 0.0
    assert narrow["envelope_fraction"] == 1.0
    assert not narrow["passes"]


def test_concentration_report_without_survivors():
    report = concentration_report([], 0.3, (0.28, 0.32), delta=0.05)
    assert not report["passes"]
    assert math.isnan(report["fraction"])
