import json

import pytest

from src.errors import ConfigError
from src.experiments import ExperimentConfig
from src.harness import env_overrides, flatten_sections, parse_config, read_config_file
from src.harness.config import DEFAULT_CONFIG_PATH


def test_empty_config_gives_defaults():
    config = parse_config(defaults_path=None, environ={})
    assert config == ExperimentConfig.from_dict({})
    assert config.seed == 2024 and config.verify_diagrams == 10_000


def test_repository_config_matches_builtin_defaults():
    assert parse_config(environ={}) == ExperimentConfig.from_dict({})
    assert DEFAULT_CONFIG_PATH.exists()


def test_decreasing_schedule_names_the_hypothesis():
    with pytest.raises(ConfigError) as err:
        ExperimentConfig.from_dict({"r_schedule": [[10, 100.0], [20, 50.0]]})
    assert err.value.field == "r_schedule"
    assert "R_n -> +inf" in str(err.value)


def test_negative_gamma_rejected():
    with pytest.raises(ConfigError) as err:
        ExperimentConfig.from_dict({"gamma": -0.1})
    assert err.value.field == "gamma"


def test_unknown_key_rejected_in_strict_mode():
    with pytest.raises(ConfigError) as err:
        ExperimentConfig.from_dict({"gamma": 0.1, "gama": 0.2})
    assert err.value.field == "gama"
    assert ExperimentConfig.from_dict({"gama": 0.2}, strict=False).gamma == 0.1


def test_bad_type_names_the_field():
    with pytest.raises(ConfigError) as err:
        ExperimentConfig.from_dict({"replicas": "many"})
    assert err.value.field == "replicas"


def test_observation_set_must_fit_smallest_window():
    with pytest.raises(ConfigError) as err:
        ExperimentConfig.from_dict({"r_schedule": [[2, 10.0]], "F": [-3, 0]})
    assert err.value.field == "F"


def test_sections_are_flattened():
    flat = flatten_sections({"simulation": {"gamma": 0.3}, "harness": {"threads": 2}, "seed": 5})
    assert flat == {"gamma": 0.3, "threads": 2, "seed": 5}


def test_key_in_two_sections_rejected():
    with pytest.raises(ConfigError) as err:
        flatten_sections({"simulation": {"gamma": 0.3}, "experiments": {"gamma": 0.4}})
    assert err.value.field == "gamma"


def test_yaml_and_json_files(tmp_path):
    yml = tmp_path / "run.yml"
    yml.write_text("simulation:\n  gamma: 0.25\n  n: 4\n")
    js = tmp_path / "run.json"
    js.write_text(json.dumps({"gamma": 0.35, "replicas": 10}))
    assert read_config_file(yml) == {"gamma": 0.25, "n": 4}
    config = parse_config(js, defaults_path=None, environ={})
    assert config.gamma == 0.35 and config.replicas == 10


def test_missing_file_is_a_config_error(tmp_path):
    with pytest.raises(ConfigError) as err:
        parse_config(tmp_path / "nope.yml", defaults_path=None, environ={})
    assert err.value.field == "config"


def test_precedence_file_env_flags(tmp_path):
    path = tmp_path / "run.yml"
    path.write_text("seed: 1\nthreads: 2\ngamma: 0.2\n")
    environ = {"GLSPIKE_SEED": "9", "GLSPIKE_THREADS": "3"}
    config = parse_config(path, flags={"threads": 4, "gamma": None}, defaults_path=None, environ=environ)
    assert config.seed == 9
    assert config.threads == 4
    assert config.gamma == 0.2


def test_env_overrides_ignore_unrelated_variables():
    assert env_overrides({"HOME": "/root", "GLSPIKE_OUTPUT_DIR": "out"}) == {"output_dir": "out"}


def test_to_dict_round_trips_through_from_dict():
    config = ExperimentConfig.from_dict({"r_schedule": [[5, 20.0], [10, 40.0]], "F": [0]})
    assert ExperimentConfig.from_dict(config.to_dict()) == config
