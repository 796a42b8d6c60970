from src.experiments import ExperimentConfig
from src.graphical import load_diagram, parse_diagram
from src.harness import PATHWISE_SUITES, Verifier, oracle_agreement, oracle_grid


def test_correct_build_passes_every_suite(small_config):
    verifier = Verifier(small_config).run()
    assert verifier.diagrams == small_config.verify_diagrams
    for name, suite in verifier.suites.items():
        assert suite.checks > 0, name
        assert suite.failures == 0, (name, suite.examples)
    assert verifier.passed


def test_corpus_starts_with_the_empty_diagram(small_config):
    first = next(Verifier(small_config).samples())
    assert first.index == 0
    assert len(first.diagram) == 0


def test_empty_diagram_alone_passes(small_config):
    small_config.verify_diagrams = 1
    verifier = Verifier(small_config).run()
    assert all(verifier.suites[name].failures == 0 for name in PATHWISE_SUITES)


def test_and_rule_fails_duality_and_dumps_diagrams(small_config, tmp_path):
    small_config.verify_diagrams = 60
    verifier = Verifier(small_config, dual_rule="and", dump_dir=str(tmp_path)).run()
    duality = verifier.suites["duality"]
    assert duality.failures > 0
    assert not verifier.passed
    assert duality.dumps
    dumped = load_diagram(duality.dumps[0])
    assert dumped.window == (-small_config.verify_n, small_config.verify_n)
    # the mutation only touches the duality check
    assert verifier.suites["additivity"].failures == 0


def test_failing_diagrams_go_to_failures_by_default(small_config, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert ExperimentConfig().dump_dir == "failures"
    small_config.verify_diagrams = 60
    duality = Verifier(small_config, dual_rule="and").run().suites["duality"]
    assert duality.failures > 0
    assert duality.dumps
    assert all(p.startswith("failures") for p in duality.dumps)
    assert (tmp_path / duality.dumps[0]).exists()


def test_failing_diagrams_kept_in_record_without_dump_dir(small_config):
    small_config.verify_diagrams = 60
    small_config.dump_dir = None
    verifier = Verifier(small_config, dual_rule="and").run()
    duality = verifier.suites["duality"].to_dict()
    assert duality["failures"] > 0
    assert duality["dumps"] == []
    assert duality["diagrams"]
    diagram = parse_diagram(duality["diagrams"][0])
    assert diagram.window == (-small_config.verify_n, small_config.verify_n)


def test_samples_are_reproducible(small_config):
    a = [(s.A, s.B, s.t, s.s) for s in Verifier(small_config).samples()]
    b = [(s.A, s.B, s.t, s.s) for s in Verifier(small_config).samples()]
    assert a == b


def test_result_entry(small_config):
    small_config.verify_diagrams = 3
    result = Verifier(small_config).run().to_result()
    assert result["name"] == "verify"
    assert result["verdict"] is True
    assert set(result["summary"]["suites"]) == set(PATHWISE_SUITES) | {"oracle"}


def test_oracle_agreement_single_site():
    report = oracle_agreement(0, 1.0, 400, seed=5)
    assert report["exact"] == 0.5
    assert report["passes"]


def test_oracle_agreement_without_extinction():
    report = oracle_agreement(1, 0.0, 10, seed=5)
    assert report["passes"] is None


def test_oracle_grid_at_reduced_replicas():
    report = oracle_grid([0, 1, 2], [0.2, 0.5, 1.0], 150, seed=11)
    assert len(report["points"]) == 9
    assert [p["n"] for p in report["points"]] == [0, 0, 0, 1, 1, 1, 2, 2, 2]
    for point in report["points"]:
        assert point["exact"] > 0.0
        assert point["passes"], point
    assert report["failing"] == 0
    assert report["passes"]


def test_oracle_grid_skips_points_without_extinction():
    report = oracle_grid([1], [0.0, 1.0], 50, seed=11)
    assert report["points"][0]["passes"] is None
    assert report["passes"]
