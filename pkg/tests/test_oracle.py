import math

import numpy as np
import pytest

from src.errors import ParameterError, SingularSystemError, StateSpaceCapError
from src.graphical import Configuration
from src.oracle import (
    build_generator,
    dump_matrix,
    extinction_cdf_expm,
    is_empty,
    mean_extinction_exact,
    mean_extinction_uniformized,
    site_active,
    transient_distribution,
    transient_event_probability,
    truncation_terms,
)


def full(lo, hi):
    return Configuration.full(lo, hi)


def test_generator_structure():
    for variant in ("auxiliary", "dual"):
        matrix = build_generator(2, 0.3, variant=variant)
        assert matrix.n_states == 32
        assert matrix.structure_problems() == []


def test_single_site_mean_and_cdf():
    gamma = 0.5
    matrix = build_generator(0, gamma)
    start = full(0, 0)
    assert mean_extinction_exact(matrix, start) == pytest.approx(1.0 / (1.0 + gamma), rel=1e-12)
    assert extinction_cdf_expm(matrix, start, 1.2) == pytest.approx(1.0 - math.exp(-1.5 * 1.2), abs=1e-10)


def test_two_site_means_by_hand():
    # from a single site: every spike hands activity to the other site, so the
    # mean is 1/gamma; from both sites the first event always leaves one
    gamma = 0.5
    matrix = build_generator((0, 1), gamma)
    single = Configuration(frozenset({0}), 0, 1)
    assert mean_extinction_exact(matrix, single) == pytest.approx(1.0 / gamma, rel=1e-10)
    assert mean_extinction_exact(matrix, full(0, 1)) == pytest.approx(1.0 / 3.0 + 2.0, rel=1e-10)


def test_dual_variant_two_sites_by_hand():
    gamma = 0.5
    matrix = build_generator((0, 1), gamma, variant="dual")
    assert mean_extinction_exact(matrix, full(0, 1)) == pytest.approx(7.0 / 3.0, rel=1e-10)


@pytest.mark.parametrize("n,gamma", [(1, 0.3), (2, 1.0)])


def test_full_window_extinction_agrees_with_dual(n, gamma):
    forward = build_generator(n, gamma)
    dual = build_generator(n, gamma, variant="dual")
    start = full(-n, n)
    assert mean_extinction_exact(forward, start) == pytest.approx(mean_extinction_exact(dual, start), rel=1e-9)
    assert extinction_cdf_expm(forward, start, 2.0) == pytest.approx(extinction_cdf_expm(dual, start, 2.0), abs=1e-9)


@pytest.mark.parametrize("n,gamma", [(1, 0.5), (2, 0.2)])


def test_solvers_agree(n, gamma):
    matrix = build_generator(n, gamma)
    start = full(-n, n)
    direct = mean_extinction_exact(matrix, start)
    assert mean_extinction_exact(matrix, start, method="gmres") == pytest.approx(direct, rel=1e-6)
    assert mean_extinction_uniformized(matrix, start) == pytest.approx(direct, rel=1e-6)


def test_empty_start_has_zero_mean():
    matrix = build_generator(1, 0.2)
    assert mean_extinction_exact(matrix, Configuration.empty(-1, 1)) == 0.0
    assert mean_extinction_uniformized(matrix, 0) == 0.0


def test_zero_gamma_is_singular():
    matrix = build_generator(1, 0.0)
    with pytest.raises(SingularSystemError):
        mean_extinction_exact(matrix, full(-1, 1))


def test_state_space_cap():
    with pytest.raises(StateSpaceCapError):
        build_generator(3, 0.1, max_sites=5)


def test_unknown_variant_and_method():
    with pytest.raises(ParameterError):
        build_generator(1, 0.1, variant="membrane")
    with pytest.raises(ParameterError):
        mean_extinction_exact(build_generator(1, 0.1), full(-1, 1), method="lu")


def test_transient_distribution_sums_to_one():
    matrix = build_generator(1, 0.4)
    dist = transient_distribution(matrix, full(-1, 1), 1.5)
    assert dist.sum() == pytest.approx(1.0, abs=1e-9)
    assert np.all(dist >= -1e-12)


def test_transient_probability_matches_expm():
    matrix = build_generator(2, 0.6)
    start = full(-2, 2)
    by_uniformization = transient_event_probability(matrix, start, 3.0, is_empty())
    assert by_uniformization == pytest.approx(extinction_cdf_expm(matrix, start, 3.0), abs=1e-8)


def test_site_active_predicate_on_single_site():
    matrix = build_generator(0, 1.0)
    p = transient_event_probability(matrix, full(0, 0), 0.7, site_active(0))
    assert p == pytest.approx(math.exp(-2.0 * 0.7), abs=1e-9)


def test_site_activity_from_full_window_is_non_increasing():
    # monotone dynamics started from the top state
    for gamma in (0.2, 1.0):
        matrix = build_generator(2, gamma)
        start = full(-2, 2)
        probs = [transient_event_probability(matrix, start, t, site_active(0)) for t in np.linspace(0.0, 6.0, 25)]
        assert probs[0] == pytest.approx(1.0)
        assert all(b <= a + 1e-9 for a, b in zip(probs, probs[1:]))
        assert probs[-1] < probs[0]


def test_truncation_terms():
    assert truncation_terms(0.0) == 0
    k = truncation_terms(20.0, 1e-10)
    assert k > 20


def test_dump_matrix(tmp_path):
    path = dump_matrix(build_generator(0, 0.5), tmp_path / "q.txt")
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# auxiliary window 0 0")
    assert "1 0 1.5" in lines
