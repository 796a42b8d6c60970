import math

import numpy as np
import pytest

from src.dynamics import (
    AuxiliaryProcess,
    MembraneState,
    ObservedTrajectory,
    RunStatus,
    Window,
    WindowKind,
    required_margin,
    replay_skeleton,
    simulate_extinction,
    simulate_membrane,
    simulate_windowed,
    simulate_windowed_infinite,
    SpikeLog,
    step_auxiliary,
)
from src.dynamics.auxiliary import run_until_extinction
from src.errors import CoverageError, ParameterError
from src.graphical import Configuration, build_diagram, forward_trajectory
from src.randomness import StreamKey, StreamRole, UniformBuffer, derive_stream


def test_extinction_run_is_reproducible(key):
    a = simulate_extinction(4, None, 0.3, key)
    b = simulate_extinction(4, None, 0.3, key)
    assert a.status == RunStatus.EXTINCT
    assert a.tau == b.tau
    assert np.array_equal(a.spike_log.times, b.spike_log.times)


def test_extinct_run_ends_empty(key):
    run = simulate_extinction(3, None, 0.5, key)
    assert run.final.is_empty()
    assert run.end_time == run.tau
    assert not run.capped


def test_zero_gamma_without_cap_rejected(key):
    with pytest.raises(ParameterError):
        simulate_extinction(2, None, 0.0, key)


def test_zero_gamma_single_site_dies_at_first_spike(key):
    run = simulate_extinction(0, None, 0.0, key)
    assert run.status == RunStatus.EXTINCT
    assert len(run.spike_log) == 1


def test_time_cap_stops_at_the_cap(key):
    run = simulate_extinction(10, None, 0.0, key, max_time=2.0)
    assert run.status == RunStatus.HORIZON
    assert run.end_time == 2.0
    assert run.tau is None


def test_event_cap(key):
    run = simulate_extinction(10, None, 0.0, key, max_events=50)
    assert run.status == RunStatus.EVENT_CAP
    assert run.events == 50


def test_single_site_mean_extinction_time():
    gamma = 0.5
    taus = [simulate_extinction(0, None, gamma, StreamKey(99, r)).tau for r in range(2000)]
    # exponential with mean 1/(1 + gamma); standard error about 0.015
    assert abs(np.mean(taus) - 1.0 / (1.0 + gamma)) < 0.07


def test_observed_trajectory_covers_time_cap_after_extinction(key):
    run = simulate_extinction(1, None, 2.0, key, max_time=500.0, observe=[0])
    assert run.status == RunStatus.EXTINCT
    assert run.trajectory.end_time == 500.0
    assert run.trajectory.state_at(400.0).is_empty()
    with pytest.raises(CoverageError):
        run.trajectory.state_at(501.0)


def test_step_auxiliary_on_empty_configuration(key):
    step = step_auxiliary(Configuration.empty(-2, 2), 0.1, derive_stream(key))
    assert step.extinct
    assert math.isinf(step.dwell)


def test_step_auxiliary_changes_one_site_neighborhood(key):
    start = Configuration(frozenset({0}), -2, 2)
    step = step_auxiliary(start, 0.1, derive_stream(key))
    assert step.event.site == 0
    assert step.configuration.active in (frozenset(), frozenset({-1, 1}))


def test_membrane_indicator_follows_auxiliary_run(key):
    potentials = MembraneState({i: 1 + (i % 3) for i in range(-3, 4)}, -3, 3)
    membrane = simulate_membrane(3, potentials, 0.2, 6.0, key)
    auxiliary = simulate_extinction(3, None, 0.2, key, max_time=6.0)
    assert membrane.state.indicator().active == auxiliary.final.active
    assert np.array_equal(membrane.spike_log.times, auxiliary.spike_log.times)


def test_membrane_rejects_negative_potential():
    with pytest.raises(ParameterError):
        MembraneState({0: -1}, -1, 1)


def test_replay_skeleton_matches_sweep(key):
    d = build_diagram((-4, 4), 3.0, 0.4, key)
    start = Configuration(frozenset({-2, 0, 3}), -4, 4)
    replayed = replay_skeleton(d, AuxiliaryProcess(start, d.gamma, d.lo, d.hi))
    swept = forward_trajectory(d, start)
    assert [(t, c.active) for t, c in replayed] == [(t, c.active) for t, c in swept]


def test_required_margin():
    assert required_margin(10.0, 2.5) == 25
    with pytest.raises(ParameterError):
        required_margin(1.0, 0.0)


def test_light_cone_window_carries_margin():
    w = Window.light_cone([-1, 2], 3.0, 2.0)
    assert (w.lo, w.hi, w.margin) == (-7, 8, 6)
    assert w.kind == WindowKind.LIGHT_CONE


def test_wide_light_cone_is_not_flagged(key):
    run = simulate_windowed_infinite(0.3, 2.0, [0], key, speed=6.0)
    assert not run.flagged
    assert run.trajectory.state_at(2.0).active == run.final.restrict(0, 0).active


def test_narrow_light_cone_gets_flagged():
    flagged = [simulate_windowed_infinite(0.3, 4.0, [0], StreamKey(5, r), speed=0.5).flagged for r in range(10)]
    assert any(flagged)


def test_finite_window_is_never_flagged(key):
    run = simulate_windowed(Window.finite(3), 0.2, 5.0, [-1, 0, 1], key)
    assert not run.flagged
    assert run.flag_time is None


def test_observation_set_must_be_inside_window(key):
    with pytest.raises(ParameterError):
        simulate_windowed(Window.finite(2), 0.2, 1.0, [5], key)


def _python_extinction(n, gamma, key, max_events, observe):
    init = Configuration.full(-n, n)
    process = AuxiliaryProcess(init, gamma, -n, n)
    process.spike_log = SpikeLog()
    process.trajectory = ObservedTrajectory(observe, init)
    buffer = UniformBuffer(derive_stream(key.with_role(StreamRole.FORWARD_MARKS)))
    status, events = run_until_extinction(process, buffer, max_events)
    return process, status, events


def test_compiled_run_matches_python_process_event_for_event(key):
    # long enough to cross several uniform refills and spike-log flushes
    run = simulate_extinction(8, None, 0.02, key, max_events=20000, observe=[-1, 0, 1])
    process, status, events = _python_extinction(8, 0.02, key, 20000, [-1, 0, 1])
    assert run.status == status
    assert run.events == events
    assert len(run.spike_log) > 4096
    assert np.array_equal(run.spike_log.sites, process.spike_log.sites)
    assert np.allclose(run.spike_log.times, process.spike_log.times, rtol=1e-12, atol=0.0)
    assert run.final.active == process.configuration().active
    compiled = [(r["site"], r["kind"], r["state_delta"]) for r in run.trajectory.to_records()]
    python = [(r["site"], r["kind"], r["state_delta"]) for r in process.trajectory.to_records()]
    assert compiled == python


def test_compiled_extinction_times_match_python_process():
    for r in range(20):
        key = StreamKey(31, r)
        run = simulate_extinction(2, None, 0.4, key, record_spikes=False)
        process, status, _ = _python_extinction(2, 0.4, key, None, [])
        assert status == RunStatus.EXTINCT
        assert run.tau == pytest.approx(process.time, rel=1e-12)


def test_empty_initial_configuration_is_extinct_at_zero(key):
    run = simulate_extinction(3, Configuration.empty(-3, 3), 0.2, key)
    assert run.tau == 0.0
    assert run.events == 0


def test_windowed_spike_log_inside_window(key):
    run = simulate_windowed(Window.finite(4), 0.2, 30.0, [0], key, record_spikes=True)
    assert len(run.spike_log) > 0
    assert run.spike_log.sites.min() >= -4 and run.spike_log.sites.max() <= 4
    assert np.all(np.diff(run.spike_log.times) > 0)
