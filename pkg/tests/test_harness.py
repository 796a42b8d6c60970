import json

import numpy as np
import pytest

from src.errors import RecordError
from src.experiments import estimate_rho, serial_map
from src.harness import ReplicaPool, RunRecord, compare_results, main, to_jsonable, validate_record
from src.harness.config import ENV_KEYS


def small_flags(*extra):
    return ["--gamma", "0.5", "--n", "2", "--replicas", "5", "--horizon", "3", "--seed", "17", *extra]


@pytest.fixture(autouse=True)


def clean_env(monkeypatch, tmp_path):
    for var in ENV_KEYS:
        monkeypatch.delenv(var, raising=False)
    # keep a stray .env in the working directory out of the runs
    monkeypatch.chdir(tmp_path)


# -- records --------------------------------------------------------------------

def test_to_jsonable_handles_numpy_and_nan():
    out = to_jsonable({"a": np.float64(1.5), "b": np.int64(3), "c": np.array([1, 2]), "d": float("nan"),
                       "e": (np.bool_(True), None)})
    assert out == {"a": 1.5, "b": 3, "c": [1, 2], "d": None, "e": [True, None]}
    with pytest.raises(TypeError):
        to_jsonable({"x": object()})


def test_record_round_trip(tmp_path):
    record = RunRecord(command="simulate", config={"seed": 1, "gamma": 0.1, "n": 2, "replicas": 3, "horizon": 1.0},
                       seed=1)
    record.add_result({"name": "simulate", "summary": {"tau": 0.4}, "verdict": None,
                       "flags": {"cap_hits": 2}, "elapsed_seconds": 0.01})
    record.add_result({"name": "simulate", "summary": {}, "verdict": True,
                       "flags": {"cap_hits": 1}, "elapsed_seconds": 0.0})
    assert record.flags == {"cap_hits": 3}
    assert record.verdict is True
    loaded = RunRecord.load(record.save(tmp_path / "run.json"))
    assert loaded.to_dict() == record.to_dict()


def test_schema_rejects_unknown_fields():
    record = RunRecord(command="verify", config={"seed": 1, "gamma": 0.1, "n": 2, "replicas": 3, "horizon": 1.0},
                       seed=1)
    payload = record.to_dict()
    payload["surprise"] = 1
    with pytest.raises(RecordError):
        validate_record(payload)


def test_schema_rejects_negative_flags():
    record = RunRecord(command="verify", config={"seed": 1, "gamma": 0.1, "n": 2, "replicas": 3, "horizon": 1.0},
                       seed=1, flags={"cap_hits": -1})
    with pytest.raises(RecordError):
        record.to_json()


def test_compare_results_ignores_timings():
    a = [{"name": "x", "summary": {"v": 1.0}, "verdict": None, "flags": {}, "elapsed_seconds": 1.0}]
    b = [{"name": "x", "summary": {"v": 1.0}, "verdict": None, "flags": {}, "elapsed_seconds": 9.0}]
    c = [{"name": "x", "summary": {"v": 2.0}, "verdict": None, "flags": {}, "elapsed_seconds": 1.0}]
    assert compare_results(a, b) == []
    assert compare_results(a, c) == ["x: summary differs"]


# -- pool -----------------------------------------------------------------------

def test_pool_matches_serial_map():
    serial = estimate_rho(0.4, 1.0, 6, seed=21, block=1, mapper=serial_map)
    with ReplicaPool(threads=2) as pool:
        pooled = estimate_rho(0.4, 1.0, 6, seed=21, block=1, mapper=pool.map)
    assert pooled.estimate == serial.estimate
    assert pooled.extras["raw"].equals(serial.extras["raw"])


def test_pool_rejects_zero_threads():
    with pytest.raises(ValueError):
        ReplicaPool(threads=0)


# -- command line ---------------------------------------------------------------

def test_unknown_command_exits_2(capsys):
    assert main(["teleport"]) == 2


def test_bad_flag_exits_2():
    assert main(["simulate", "--gamma", "lots"]) == 2


def test_config_error_exits_2():
    assert main(["simulate", "--gamma", "-1"]) == 2


def test_unknown_experiment_exits_2():
    assert main(["experiment", "nonsense", *small_flags()]) == 2
    assert main(["experiment"]) == 2


def test_simulate_writes_json_to_stdout(capsys):
    assert main(["simulate", *small_flags()]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["command"] == "simulate"
    assert record["seed"] == 17
    assert record["results"][0]["summary"]["n"] == 2


def test_out_and_raw_files(tmp_path):
    out = tmp_path / "results" / "dual.json"
    assert main(["dual", *small_flags("--out", str(out), "--raw")]) == 0
    assert json.loads(out.read_text())["command"] == "dual"
    assert (tmp_path / "results" / "dual_dual_raw.csv").exists()


def test_oracle_command(tmp_path):
    out = tmp_path / "oracle.json"
    assert main(["oracle", "--gamma", "1.0", "--n", "1", "--replicas", "200", "--seed", "3",
                 "--out", str(out)]) == 0
    summary = json.loads(out.read_text())["results"][0]["summary"]
    assert summary["states"] == 8
    assert summary["mean_tau_direct"] == pytest.approx(summary["mean_tau_uniformized"], rel=1e-6)


def test_oracle_grid_command(tmp_path):
    config = tmp_path / "grid.yml"
    config.write_text("harness:\n  oracle_grid_n: [0, 1]\n  oracle_grid_gammas: [0.5, 1.0]\n")
    out = tmp_path / "grid.json"
    assert main(["oracle", "--grid", "--config", str(config), "--replicas", "300", "--seed", "3",
                 "--threads", "2", "--out", str(out)]) == 0
    result = json.loads(out.read_text())["results"][0]
    assert result["name"] == "oracle_grid"
    points = result["summary"]["points"]
    assert [(p["sites"], p["gamma"]) for p in points] == [(1, 0.5), (1, 1.0), (3, 0.5), (3, 1.0)]
    assert points[1]["exact"] == pytest.approx(0.5)
    assert result["summary"]["failing"] == 0
    assert result["verdict"] is True


def test_experiment_thermalization_schema_fields(tmp_path):
    config = tmp_path / "th.yml"
    config.write_text(
        "experiments:\n"
        "  r_schedule: [[2, 1.0]]\n"
        "  F: [0]\n"
        "  t_offset: 0.5\n"
        "  rho_t_star: 1.0\n"
        "  rho_replicas: 4\n"
        "  rho_block: 0\n"
        "  tau_bound_replicas: 2\n"
    )
    out = tmp_path / "th.json"
    code = main(["experiment", "thermalization", "--config", str(config), *small_flags("--out", str(out))])
    assert code == 0
    summary = json.loads(out.read_text())["results"][0]["summary"]
    assert {"rho_hat", "concentration_fraction", "survivor_fraction"} <= set(summary)


def test_verify_small_corpus_passes(tmp_path):
    config = tmp_path / "v.yml"
    config.write_text("harness:\n  verify_diagrams: 15\n  verify_n: 3\n  verify_horizon: 2.0\n"
                      "  oracle_max_sites: 5\n")
    out = tmp_path / "verify.json"
    assert main(["verify", "--config", str(config), "--out", str(out)]) == 0
    result = json.loads(out.read_text())["results"][0]
    assert result["verdict"] is True
    assert result["summary"]["failures"] == 0


def test_replay_reproduces_record(tmp_path):
    first = tmp_path / "first.json"
    second = tmp_path / "second.json"
    assert main(["sweep", *small_flags("--out", str(first))]) == 0
    assert main(["replay", str(first), "--out", str(second)]) == 0
    a = json.loads(first.read_text())
    b = json.loads(second.read_text())
    assert compare_results(a["results"], b["results"]) == []


def test_replay_leaves_the_stored_record_untouched(tmp_path, capsys):
    first = tmp_path / "first.json"
    assert main(["sweep", *small_flags("--out", str(first))]) == 0
    before = first.read_bytes()
    capsys.readouterr()
    assert main(["replay", str(first)]) == 0
    assert first.read_bytes() == before
    fresh = json.loads(capsys.readouterr().out)
    assert compare_results(json.loads(before)["results"], fresh["results"]) == []


def test_replay_of_missing_record_exits_2(tmp_path):
    assert main(["replay", str(tmp_path / "missing.json")]) == 2
