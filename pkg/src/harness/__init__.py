"""
Harness: configuration loading, worker pool, run records, verification and
the command line.
"""
from .config import parse_config, read_config_file, env_overrides, flatten_sections, DEFAULT_CONFIG_PATH
from .pool import ReplicaPool
from .records import RunRecord, build_id, compare_results, to_jsonable, validate_record, SCHEMA_VERSION
from .verify import Verifier, SuiteResult, oracle_agreement, oracle_grid, PATHWISE_SUITES
from .cli import main, build_parser, COMMANDS

__all__ = [
    'parse_config',
    'read_config_file',
    'env_overrides',
    'flatten_sections',
    'DEFAULT_CONFIG_PATH',
    'ReplicaPool',
    'RunRecord',
    'build_id',
    'compare_results',
    'to_jsonable',
    'validate_record',
    'SCHEMA_VERSION',
    'Verifier',
    'SuiteResult',
    'oracle_agreement',
    'oracle_grid',
    'PATHWISE_SUITES',
    'main',
    'build_parser',
    'COMMANDS'
]
