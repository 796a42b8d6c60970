"""
Command-line entry point.

Usage:
    python scripts/run_glspike.py simulate --gamma 0.1 --n 20 --horizon 50
    python scripts/run_glspike.py experiment thermalization --threads 4 --out results/th.json
    python scripts/run_glspike.py verify --dump-dir failures/
    python scripts/run_glspike.py replay results/th.json

The JSON run record goes to stdout (or --out); logs go to stderr.
Exit codes: 0 success, 1 failed verification or replay mismatch, 2 usage
or configuration error.
"""
import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from ..dynamics import simulate_dual, simulate_extinction
from ..errors import ConfigError, GLSpikeError
from ..experiments import EXPERIMENTS, ExperimentConfig, ExperimentResult, SweepExperiment
from ..graphical import Configuration
from ..oracle import build_generator, extinction_cdf_expm, mean_extinction_exact, mean_extinction_uniformized
from ..randomness import StreamKey
from .config import parse_config
from .pool import ReplicaPool
from .records import RunRecord, compare_results
from .verify import Verifier, oracle_agreement, oracle_grid

logger = logging.getLogger(__name__)

COMMANDS = ("simulate", "dual", "oracle", "experiment", "verify", "sweep", "replay")

# flag dest -> config field
FLAG_FIELDS = {
    "gamma": "gamma",
    "n": "n",
    "replicas": "replicas",
    "horizon": "horizon",
    "seed": "seed",
    "out": "out",
    "raw": "raw",
    "margin_factor": "margin_factor",
    "threads": "threads",
    "dump_dir": "dump_dir",
    "grid": "oracle_grid",
}


class UsageError(Exception):
    """Bad command line; exits with code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="glspike", description="Nearest-neighbor spiking system simulator and checks")
    parser.add_argument("command", help=f"one of: {', '.join(COMMANDS)}")
    parser.add_argument("target", nargs="?", help="experiment name, or record path for 'replay'")
    parser.add_argument("--gamma", type=float, help="leak rate")
    parser.add_argument("--n", type=int, help="window half-width (window [-n, n])")
    parser.add_argument("--replicas", type=int, help="independent replicas")
    parser.add_argument("--horizon", type=float, help="time horizon")
    parser.add_argument("--seed", type=int, help="master seed (64-bit)")
    parser.add_argument("--out", help="write the JSON record here instead of stdout")
    parser.add_argument("--raw", action="store_const", const=True, help="also write per-replica CSVs")
    parser.add_argument("--margin-factor", dest="margin_factor", type=float, help="light-cone margin factor")
    parser.add_argument("--threads", type=int, help="worker processes")
    parser.add_argument("--config", help="YAML or JSON config file")
    parser.add_argument("--dump-dir", dest="dump_dir", help="where verify writes failing diagrams")
    parser.add_argument("--grid", action="store_const", const=True,
                        help="oracle: compare over the oracle_grid_n x oracle_grid_gammas grid")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    return parser


def setup_logging(verbose: bool = False):
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(message)s"))
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging.INFO)


# -- commands --------------------------------------------------------------------

def _initial(config: ExperimentConfig) -> Configuration:
    if config.init == "all":
        return Configuration.full(-config.n, config.n)
    return Configuration(frozenset(config.init), -config.n, config.n)


def run_simulate(config: ExperimentConfig) -> ExperimentResult:
    """One finite-window run of the auxiliary process."""
    run = simulate_extinction(config.n, _initial(config), config.gamma, StreamKey(config.seed),
                              max_events=config.max_events, max_time=config.horizon)
    summary = {
        "gamma": config.gamma,
        "n": config.n,
        "status": run.status.value,
        "tau": run.tau,
        "events": run.events,
        "end_time": run.end_time,
        "spikes": len(run.spike_log),
        "final_size": len(run.final),
    }
    return ExperimentResult("simulate", summary, run.spike_log.to_frame())


def run_dual(config: ExperimentConfig) -> ExperimentResult:
    """One dual run from the initial set."""
    traj = simulate_dual(_initial(config), config.gamma, config.horizon, StreamKey(config.seed),
                         max_events=config.max_events)
    summary = {
        "gamma": config.gamma,
        "status": traj.status.value,
        "sigma": traj.sigma,
        "end_time": traj.end_time,
        "final_size": len(traj.final),
        "right_edge": traj.right.final,
        "left_edge": traj.left.final,
    }
    raw = pd.DataFrame({"time": traj.right.times, "right": traj.right.values})
    return ExperimentResult("dual", summary, raw)


def run_oracle(config: ExperimentConfig, mapper) -> ExperimentResult:
    """Exact mean extinction time on [-n, n] against Monte Carlo."""
    if config.oracle_grid:
        return run_oracle_grid(config, mapper)
    matrix = build_generator(config.n, config.gamma, max_sites=config.oracle_max_sites)
    full = Configuration.full(-config.n, config.n)
    summary: Dict = {"n": config.n, "gamma": config.gamma, "states": matrix.n_states,
                     "structure_problems": matrix.structure_problems()}
    if config.gamma > 0.0:
        summary["mean_tau_direct"] = mean_extinction_exact(matrix, full)
        summary["mean_tau_uniformized"] = mean_extinction_uniformized(matrix, full)
        summary["extinct_by_horizon"] = extinction_cdf_expm(matrix, full, config.horizon)
        summary["agreement"] = oracle_agreement(config.n, config.gamma, config.replicas, config.seed,
                                                mapper=mapper)
        verdict = not summary["structure_problems"] and bool(summary["agreement"]["passes"])
    else:
        summary["note"] = "gamma = 0 never goes extinct on two or more sites"
        verdict = not summary["structure_problems"]
    return ExperimentResult("oracle", summary, None, verdict)


def run_oracle_grid(config: ExperimentConfig, mapper) -> ExperimentResult:
    """Monte Carlo against the exact mean extinction time on every grid window."""
    logger.info(f"Oracle grid: n in {config.oracle_grid_n}, gamma in {config.oracle_grid_gammas}")
    report = oracle_grid(config.oracle_grid_n, config.oracle_grid_gammas, config.replicas, config.seed,
                         mapper=mapper)
    raw = pd.DataFrame(report["points"])
    summary = {"points": report["points"], "failing": report["failing"]}
    return ExperimentResult("oracle_grid", summary, raw, report["passes"])


def run_verify(config: ExperimentConfig) -> Tuple[Dict, bool]:
    started = time.perf_counter()
    verifier = Verifier(config).run()
    result = verifier.to_result()
    result["elapsed_seconds"] = time.perf_counter() - started
    return result, verifier.passed


def execute(command: str, target: Optional[str], config: ExperimentConfig) -> Tuple[RunRecord, List, bool]:
    """
    Run a command.

    Returns:
        (record, [(name, raw DataFrame)], ok) where ok is False for a failed
        verification
    """
    record = RunRecord(command=command, config=config.to_dict(), seed=config.seed, target=target)
    raws: List[Tuple[str, pd.DataFrame]] = []
    ok = True
    started = time.perf_counter()
    with ReplicaPool(config.threads) as pool:
        if command == "verify":
            result, ok = run_verify(config)
            record.add_result(result)
        else:
            t0 = time.perf_counter()
            if command == "simulate":
                outcome = run_simulate(config)
            elif command == "dual":
                outcome = run_dual(config)
            elif command == "oracle":
                outcome = run_oracle(config, pool.map)
            elif command == "sweep":
                outcome = SweepExperiment(config).run(pool.map).get_result()
            else:
                if target not in EXPERIMENTS:
                    raise UsageError(f"unknown experiment '{target}', expected one of {sorted(EXPERIMENTS)}")
                outcome = EXPERIMENTS[target](config).run(pool.map).get_result()
            if not outcome.elapsed:
                outcome.elapsed = time.perf_counter() - t0
            record.add_result(outcome.to_dict())
            if outcome.raw is not None:
                raws.append((outcome.name, outcome.raw))
    record.timings["total_seconds"] = time.perf_counter() - started
    return record, raws, ok


def write_outputs(record: RunRecord, raws: Sequence[Tuple[str, pd.DataFrame]], config: ExperimentConfig):
    if config.out:
        path = record.save(config.out)
        logger.info(f"✓ Saved run record to {path}")
        base = path.parent / path.stem
    else:
        sys.stdout.write(record.to_json() + "\n")
        base = Path(config.output_dir) / record.command
    if config.raw:
        base.parent.mkdir(parents=True, exist_ok=True)
        for name, frame in raws:
            csv_path = Path(f"{base}_{name}_raw.csv")
            frame.to_csv(csv_path, index=False)
            logger.info(f"✓ Saved raw values to {csv_path}")


def replay(path: str, flags: Dict) -> int:
    """Re-run a stored record and compare every output."""
    stored = RunRecord.load(path)
    config = ExperimentConfig.from_dict(stored.config)
    # the stored out path may be the record itself
    config.out = flags.get("out")
    logger.info(f"Replaying '{stored.command}' from {path} (built {stored.build_id})")
    fresh, raws, _ = execute(stored.command, stored.target, config)
    write_outputs(fresh, raws, config)
    diffs = compare_results(stored.results, fresh.results)
    if diffs:
        for diff in diffs:
            logger.error(f"  ✗ {diff}")
        return 1
    logger.info("✓ Replay reproduced every result")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run the command and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"usage error: {e}\n")
        return 2
    setup_logging(args.verbose)

    flags = {field: getattr(args, dest) for dest, field in FLAG_FIELDS.items()}
    try:
        if args.command not in COMMANDS:
            raise UsageError(f"unknown command '{args.command}', expected one of {', '.join(COMMANDS)}")
        if args.command == "replay":
            if not args.target:
                raise UsageError("replay needs the path of a run record")
            return replay(args.target, flags)
        if args.command == "experiment" and not args.target:
            raise UsageError(f"experiment needs a name: {', '.join(sorted(EXPERIMENTS))}")
        config = parse_config(args.config, flags)
        record, raws, ok = execute(args.command, args.target, config)
        write_outputs(record, raws, config)
    except UsageError as e:
        logger.error(f"✗ {e}")
        return 2
    except ConfigError as e:
        logger.error(f"✗ Configuration error: {e}")
        return 2
    except GLSpikeError as e:
        logger.error(f"✗ {e}")
        return 2

    if not ok:
        logger.error("✗ Verification failed")
        return 1
    return 0
