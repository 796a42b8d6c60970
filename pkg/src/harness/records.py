"""
Run records: what was run, with which build and config, and what came out.

A record is enough to re-run a command; the replay compares the new
summaries with the stored ones value for value.
"""
import json
import logging
import math
import subprocess
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
from jsonschema import Draft202012Validator

from .. import __version__
from ..errors import RecordError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"
SCHEMA_PATH = Path(__file__).resolve().parent / "schemas" / "run_record.schema.json"
REPO_ROOT = Path(__file__).resolve().parent.parent.parent


def to_jsonable(value: Any) -> Any:
    """
    Convert results to plain JSON values.

    numpy scalars and arrays become Python numbers and lists, tuples become
    lists, enums their values, paths strings; non-finite floats become None.
    """
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        x = float(value)
        return x if math.isfinite(x) else None
    if isinstance(value, Enum):
        return to_jsonable(value.value)
    if isinstance(value, Path):
        return str(value)
    if value is None or isinstance(value, str):
        return value
    raise TypeError(f"cannot serialize {type(value).__name__}")


@lru_cache(maxsize=1)
def build_id() -> str:
    """git describe of the working tree, or the package version outside git."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=REPO_ROOT, capture_output=True, text=True, timeout=5, check=True,
        )
        described = out.stdout.strip()
        if described:
            return described
    except (OSError, subprocess.SubprocessError):
        pass
    return f"glspike-{__version__}"


@lru_cache(maxsize=1)
def _validator() -> Draft202012Validator:
    with SCHEMA_PATH.open() as f:
        return Draft202012Validator(json.load(f))


def validate_record(payload: Dict) -> None:
    """
    Check a record against the shipped schema.

    Raises:
        RecordError: listing every violation
    """
    errors = sorted(_validator().iter_errors(payload), key=lambda e: list(e.path))
    if errors:
        lines = [f"{'/'.join(str(p) for p in e.path) or '<root>'}: {e.message}" for e in errors]
        raise RecordError("run record does not match schema:\n  " + "\n  ".join(lines))


@dataclass
class RunRecord:
    """
    Outcome of one CLI command.

    Attributes:
        command: Subcommand
        config: Config snapshot (ExperimentConfig.to_dict())
        seed: Master seed
        results: One dict per experiment or suite (name, summary, verdict,
            flags, elapsed_seconds)
        target: Experiment name for 'experiment'
        timings: Wall-clock seconds
        flags: Diagnostic counters summed over results
        build_id: Build identifier
        created_at: UTC timestamp
    """
    command: str
    config: Dict
    seed: int
    results: List[Dict] = field(default_factory=list)
    target: Optional[str] = None
    timings: Dict[str, float] = field(default_factory=lambda: {"total_seconds": 0.0})
    flags: Dict[str, int] = field(default_factory=dict)
    build_id: str = field(default_factory=build_id)
    created_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    schema_version: str = SCHEMA_VERSION

    def add_result(self, result: Dict):
        self.results.append(result)
        for name, count in (result.get("flags") or {}).items():
            self.flags[name] = self.flags.get(name, 0) + int(count)

    @property
    def verdict(self) -> Optional[bool]:
        """False if any result failed, True if all carried verdicts passed."""
        verdicts = [r.get("verdict") for r in self.results if r.get("verdict") is not None]
        return all(verdicts) if verdicts else None

    def to_dict(self) -> Dict:
        return to_jsonable({
            "schema_version": self.schema_version,
            "build_id": self.build_id,
            "command": self.command,
            "target": self.target,
            "config": self.config,
            "seed": self.seed,
            "results": self.results,
            "timings": self.timings,
            "flags": self.flags,
            "created_at": self.created_at,
        })

    def to_json(self) -> str:
        payload = self.to_dict()
        validate_record(payload)
        return json.dumps(payload, indent=2)

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json() + "\n")
        return path

    @classmethod
    def from_dict(cls, payload: Dict) -> "RunRecord":
        validate_record(payload)
        return cls(
            command=payload["command"],
            config=payload["config"],
            seed=payload["seed"],
            results=list(payload["results"]),
            target=payload.get("target"),
            timings=dict(payload["timings"]),
            flags=dict(payload["flags"]),
            build_id=payload["build_id"],
            created_at=payload["created_at"],
            schema_version=payload["schema_version"],
        )

    @classmethod
    def load(cls, path: Union[str, Path]) -> "RunRecord":
        try:
            payload = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise RecordError(f"cannot read run record {path}: {e}") from None
        return cls.from_dict(payload)


def compare_results(stored: List[Dict], fresh: List[Dict]) -> List[str]:
    """
    Differences between two result lists, ignoring timings.

    Returns:
        Human-readable descriptions (empty when identical)
    """
    diffs = []
    if len(stored) != len(fresh):
        return [f"result count {len(stored)} != {len(fresh)}"]
    for a, b in zip(stored, fresh):
        a, b = to_jsonable(a), to_jsonable(b)
        for key in ("name", "summary", "verdict", "flags"):
            if a.get(key) != b.get(key):
                diffs.append(f"{a.get('name')}: {key} differs")
    return diffs
