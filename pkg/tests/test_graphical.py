import pytest

from src.errors import DiagramError, ParameterError, TimeOrderError
from src.graphical import (
    Configuration,
    Diagram,
    backward_dual_state,
    build_diagram,
    dual_forward_state,
    dump_diagram,
    enumerate_valid_paths,
    forward_state,
    forward_trajectory,
    load_diagram,
    mirror_diagram,
    shift_diagram,
)

from conftest import LEAK, SPIKE


def sites(config):
    return set(config.active)


# -- configurations -------------------------------------------------------------

def test_configuration_edges_and_restrict():
    c = Configuration(frozenset({-2, 0, 3}), -5, 5)
    assert c.leftmost == -2 and c.rightmost == 3
    assert sites(c.restrict(-1, 5)) == {0, 3}
    assert Configuration.empty(-1, 1).leftmost is None


def test_configuration_rejects_sites_outside_window():
    with pytest.raises(ParameterError):
        Configuration(frozenset({4}), -3, 3)


def test_configuration_bits_round_trip_on_window():
    c = Configuration(frozenset({-1, 1}), -1, 1)
    assert Configuration.from_bits(c.to_bits(), -1, 1) == c


# -- forward and dual sweeps on a hand-built diagram ----------------------------

def test_forward_sweep_by_hand(toy_diagram):
    start = Configuration(frozenset({0}), -1, 1)
    assert sites(forward_state(toy_diagram, start, 0.5)) == {0}
    assert sites(forward_state(toy_diagram, start, 1.0)) == {-1, 1}
    assert sites(forward_state(toy_diagram, start, 2.0)) == {-1}
    assert sites(forward_state(toy_diagram, start, 3.0)) == {0}


def test_spike_at_inactive_site_is_noop(toy_diagram):
    start = Configuration(frozenset({1}), -1, 1)
    # the spike at 0 finds 0 inactive, then 1 leaks
    assert sites(forward_state(toy_diagram, start, 1.5)) == {1}
    assert forward_state(toy_diagram, start, 2.0).is_empty()


def test_forward_trajectory_lists_every_event(toy_diagram):
    start = Configuration(frozenset({0}), -1, 1)
    traj = forward_trajectory(toy_diagram, start)
    assert [t for t, _ in traj] == [0.0, 1.0, 2.0, 3.0]
    assert sites(traj[-1][1]) == {0}


def test_backward_dual_by_hand(toy_diagram):
    B = Configuration(frozenset({0}), -1, 1)
    assert sites(backward_dual_state(toy_diagram, B, 3.0, 3.0)) == {-1, 0}
    assert sites(backward_dual_state(toy_diagram, B, 3.0, 0.0)) == {0}


def test_duality_on_toy_diagram(toy_diagram):
    for a in range(-1, 2):
        for b in range(-1, 2):
            A = Configuration(frozenset({a}), -1, 1)
            B = Configuration(frozenset({b}), -1, 1)
            forward = forward_state(toy_diagram, A, 3.0).intersects(B)
            dual = backward_dual_state(toy_diagram, B, 3.0, 3.0).intersects(A)
            assert forward == dual, (a, b)


def test_and_rule_breaks_duality(toy_diagram):
    A = Configuration(frozenset({0}), -1, 1)
    B = Configuration(frozenset({-1}), -1, 1)
    # forward: {0} -> {-1, 1} at t=1, and -1 survives until t=2
    assert forward_state(toy_diagram, A, 2.0).intersects(B)
    assert backward_dual_state(toy_diagram, B, 2.0, 2.0).intersects(A)
    assert not backward_dual_state(toy_diagram, B, 2.0, 2.0, rule="and").intersects(A)


def test_backward_dual_time_order(toy_diagram):
    B = Configuration(frozenset({0}), -1, 1)
    with pytest.raises(TimeOrderError):
        backward_dual_state(toy_diagram, B, 1.0, 2.0)
    with pytest.raises(TimeOrderError):
        forward_state(toy_diagram, B, 10.0)


def test_mirror_reads_backward_dual_forward(toy_diagram):
    B = Configuration(frozenset({0}), -1, 1)
    mirrored = mirror_diagram(toy_diagram, 3.0)
    assert sites(dual_forward_state(mirrored, B, 3.0)) == sites(backward_dual_state(toy_diagram, B, 3.0, 3.0))


def test_paths_match_sweep(toy_diagram):
    for bits in range(8):
        A = Configuration.from_bits(bits, -1, 1)
        for t in (0.0, 1.0, 2.5, 4.0):
            assert enumerate_valid_paths(toy_diagram, A, t) == forward_state(toy_diagram, A, t)


def test_sub_window_clips_activation(toy_diagram):
    start = Configuration(frozenset({0}), 0, 1)
    assert sites(forward_state(toy_diagram, start, 1.0, window=(0, 1))) == {1}
    with pytest.raises(ParameterError):
        forward_state(toy_diagram, start, 1.0, window=(0, 3))


# -- sampled diagrams -----------------------------------------------------------

def test_build_diagram_is_deterministic(key):
    assert build_diagram((-4, 4), 3.0, 0.3, key) == build_diagram((-4, 4), 3.0, 0.3, key)
    assert build_diagram((-4, 4), 3.0, 0.3, key) != build_diagram((-4, 4), 3.0, 0.3, key.for_replica(1))


def test_nested_windows_share_marks(key):
    wide = build_diagram((-6, 6), 4.0, 0.2, key)
    narrow = build_diagram((-2, 3), 4.0, 0.2, key)
    assert list(narrow.events()) == [e for e in wide.events() if -2 <= e[0] <= 3]


def test_zero_gamma_has_no_leaks(key):
    d = build_diagram((-3, 3), 5.0, 0.0, key)
    assert d.count(LEAK) == 0 and d.count(SPIKE) > 0


def test_shift_diagram_translates_states(key):
    d = build_diagram((-3, 3), 3.0, 0.5, key)
    A = Configuration(frozenset({-1, 2}), -3, 3)
    shifted = forward_state(shift_diagram(d, 5), A.shift(5), 2.0)
    assert shifted == forward_state(d, A, 2.0).shift(5)


def test_duplicate_timestamps_rejected():
    with pytest.raises(DiagramError):
        Diagram.from_events(0, 1, 2.0, 0.1, [(0, 1.0, SPIKE), (1, 1.0, LEAK)])


# -- dump and load --------------------------------------------------------------

def test_dump_load_keeps_diagram(tmp_path, key):
    d = build_diagram((-3, 3), 2.0, 0.7, key)
    path = dump_diagram(d, tmp_path / "failures" / "case.txt")
    assert load_diagram(path) == d


def test_load_rejects_malformed_dump(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("window -1 1\nhorizon 2.0\ngamma 0.1\n0 0.5 sneeze\n")
    with pytest.raises(DiagramError):
        load_diagram(path)


def test_load_rejects_missing_header(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("0 0.5 spike\n")
    with pytest.raises(DiagramError):
        load_diagram(path)
