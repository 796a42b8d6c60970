"""
Configuration loading.

Values are layered: built-in defaults < config.yml < explicit config file
(YAML or JSON) < environment (GLSPIKE_*) < command-line flags.
"""
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import yaml
from dotenv import load_dotenv

from ..errors import ConfigError
from ..experiments import ExperimentConfig

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent.parent / "config.yml"
SECTIONS = ("simulation", "experiments", "harness")
ENV_KEYS = {
    "GLSPIKE_SEED": "seed",
    "GLSPIKE_THREADS": "threads",
    "GLSPIKE_OUTPUT_DIR": "output_dir",
}


def flatten_sections(values: Mapping[str, Any]) -> Dict[str, Any]:
    """
    Merge the top-level sections into one key space.

    Keys that are not sections pass through unchanged, so flat files work
    too.

    Raises:
        ConfigError: if a key appears in two sections
    """
    flat: Dict[str, Any] = {}
    for key, value in values.items():
        if key in SECTIONS:
            if value is None:
                continue
            if not isinstance(value, Mapping):
                raise ConfigError("section must be a mapping", field=key)
            items = value.items()
        else:
            items = [(key, value)]
        for name, v in items:
            if name in flat:
                raise ConfigError("defined twice", field=name)
            flat[name] = v
    return flat


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Read a YAML or JSON config file into flat key-value pairs.

    Raises:
        ConfigError: if the file is missing or unreadable
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"file not found: {path}", field="config")
    try:
        with path.open() as f:
            if path.suffix.lower() == ".json":
                values = json.load(f)
            else:
                values = yaml.safe_load(f)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot parse {path}: {e}", field="config") from None
    if values is None:
        return {}
    if not isinstance(values, Mapping):
        raise ConfigError(f"{path} must hold a mapping", field="config")
    return flatten_sections(values)


def env_overrides(environ: Optional[Mapping[str, str]] = None) -> Dict[str, Any]:
    """
    GLSPIKE_* overrides from the environment.

    Args:
        environ: Mapping to read; None loads .env (python-dotenv) and reads
            os.environ
    """
    if environ is None:
        load_dotenv()
        environ = os.environ
    return {field: environ[var] for var, field in ENV_KEYS.items() if environ.get(var)}


def parse_config(
    path: Optional[Union[str, Path]] = None,
    flags: Optional[Mapping[str, Any]] = None,
    defaults_path: Optional[Union[str, Path]] = DEFAULT_CONFIG_PATH,
    environ: Optional[Mapping[str, str]] = None,
    strict: bool = True,
) -> ExperimentConfig:
    """
    Build the validated configuration of a run.

    Args:
        path: Explicit config file (YAML or JSON)
        flags: Command-line overrides; None values are ignored
        defaults_path: Repository config.yml (skipped if None or missing)
        environ: Environment mapping (None reads .env and os.environ)
        strict: Reject unknown keys

    Returns:
        ExperimentConfig

    Raises:
        ConfigError: naming the offending field
    """
    values: Dict[str, Any] = {}
    if defaults_path is not None and Path(defaults_path).exists():
        values.update(read_config_file(defaults_path))
    if path is not None:
        values.update(read_config_file(path))
        logger.debug(f"loaded config file {path}")
    values.update(env_overrides(environ))
    if flags:
        values.update({k: v for k, v in flags.items() if v is not None})
    return ExperimentConfig.from_dict(values, strict=strict)
