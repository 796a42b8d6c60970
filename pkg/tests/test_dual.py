import math

import pytest

from src.dynamics import (
    CoupledDualEngine,
    RunStatus,
    replay_dual_skeleton,
    simulate_dual,
    simulate_dual_coupled,
    simulate_dual_family,
    simulate_dual_gamma_grid,
    simulate_dual_halfline_edge,
)
from src.errors import ParameterError
from src.graphical import Configuration, build_diagram, dual_forward_state
from src.randomness import StreamKey, StreamRole, UniformBuffer, derive_stream


def test_dual_is_reproducible(key):
    start = Configuration(frozenset({0}))
    a = simulate_dual(start, 0.4, 20.0, key)
    b = simulate_dual(start, 0.4, 20.0, key)
    assert a.sigma == b.sigma
    assert a.final == b.final


def test_dual_extinction_sets_sigma(key):
    traj = simulate_dual(Configuration(frozenset({0})), 5.0, 50.0, key)
    assert traj.status == RunStatus.EXTINCT
    assert traj.sigma is not None and traj.sigma <= 50.0
    assert traj.final.is_empty()
    assert math.isnan(traj.right.final)


def test_empty_dual_is_extinct_at_zero(key):
    traj = simulate_dual(Configuration(frozenset()), 0.1, 5.0, key)
    assert traj.sigma == 0.0


def test_zero_gamma_dual_survives(key):
    traj = simulate_dual(Configuration(frozenset({0, 1})), 0.0, 10.0, key)
    assert traj.survived
    assert not traj.final.is_empty()


def test_replay_dual_skeleton_matches_dual_sweep(key):
    d = build_diagram((-4, 4), 3.0, 0.5, key)
    start = Configuration(frozenset({-1, 2}), -4, 4)
    for t, config in replay_dual_skeleton(d, start):
        assert config.active == dual_forward_state(d, start, t).active


def test_gamma_grid_copies_are_nested(key):
    gammas = [0.0, 0.2, 0.5, 1.0]
    trajs = simulate_dual_gamma_grid(Configuration(frozenset({0})), gammas, 15.0, key)
    for low, high in zip(trajs, trajs[1:]):
        assert high.final.issubset(low.final)
        if low.sigma is not None:
            assert high.sigma is not None and high.sigma <= low.sigma


def test_coupled_raised_edge_stays_left(key):
    for r in range(5):
        edges = simulate_dual_coupled(0.2, 0.3, 5.0, key.for_replica(r), margin=60)
        if edges.raised.survived:
            assert edges.difference_at(5.0) >= 0.0


def test_halfline_edge_starts_at_zero(key):
    traj = simulate_dual_halfline_edge(0.2, 3.0, key, margin=40)
    assert traj.right.values[0] == 0.0
    assert not traj.flagged


def test_family_edge_identity(key):
    m = 6
    single, left, right = simulate_dual_family(
        [[0], range(-m, 1), range(0, m + 1)], 0.3, 3.0, key, lo=-m, hi=m, record_states=True,
    )
    for t, eta0 in single.states:
        if eta0.is_empty():
            break
        eta_minus = left.state_at(t)
        eta_plus = right.state_at(t)
        assert eta0.rightmost == eta_minus.rightmost
        assert eta0.leftmost == eta_plus.leftmost
        assert eta0.active == eta_minus.restrict(eta0.leftmost, eta0.rightmost).active


def test_engine_rejects_site_outside_window():
    with pytest.raises(ParameterError):
        CoupledDualEngine([[5]], [(0.1, [0])], lo=-2, hi=2)


def test_engine_rejects_unknown_copy_in_layer():
    with pytest.raises(ParameterError):
        CoupledDualEngine([[0]], [(0.1, [1])])


def test_negative_gamma_rejected(key):
    with pytest.raises(ParameterError):
        simulate_dual(Configuration(frozenset({0})), -0.1, 1.0, key)


def test_first_event_from_single_site_is_a_kill_with_competing_rate():
    # from {0}: clocks at -1, 0, +1 change the state (rate 3), the kill at 0 has rate gamma
    gamma, runs = 10.0, 4000
    buffer = UniformBuffer(derive_stream(StreamKey(master_seed=31).with_role(StreamRole.DUAL_MARKS)))
    kills = extinct = 0
    for _ in range(runs):
        engine = CoupledDualEngine([[0]], [(gamma, [0])])
        assert engine.total_rate() == pytest.approx(3.0 + gamma)
        killed = []
        apply_kill = engine.apply_kill
        engine.apply_kill = lambda layer, i: (killed.append(i), apply_kill(layer, i))
        assert engine.step(buffer)
        assert killed in ([], [0])
        kills += len(killed)
        extinct += engine.is_extinct()
    p = gamma / (gamma + 3.0)
    assert kills / runs == pytest.approx(p, abs=4 * math.sqrt(p * (1 - p) / runs))
    # the clock at 0 also empties the set
    q = (gamma + 1.0) / (gamma + 3.0)
    assert extinct / runs == pytest.approx(q, abs=4 * math.sqrt(q * (1 - q) / runs))
