"""
Density of the upper invariant measures.

rho is the probability that site 0 is active in the long run of the process
started all-active; by duality it is also the probability that the dual from
{0} is still alive, which gives a second, independent estimator.
"""
import logging
from typing import Dict, Optional

import pandas as pd
from scipy import stats

from ..dynamics import (
    DEFAULT_SPEED,
    required_margin,
    simulate_dual,
    simulate_dual_family,
    simulate_windowed_infinite,
)
from ..graphical import Configuration
from .base_experiment import BaseExperiment, ExperimentResult, Mapper, replica_key, serial_map
from .estimators import EstimateResult, Estimators

logger = logging.getLogger(__name__)


def _rho_replica(args):
    gamma, t_star, block, speed, seed, replica = args
    key = replica_key(seed, replica, "rho")
    sites = range(-block, block + 1)
    run = simulate_windowed_infinite(gamma, t_star, sites, key, speed=speed)
    state = run.trajectory.state_at(t_star)
    block_mean = sum(1 for i in sites if i in state) / len(sites)
    dual = simulate_dual(Configuration.from_sites([0]), gamma, t_star, replica_key(seed, replica, "rho_dual_check"))
    return replica, int(0 in state), block_mean, run.flagged, int(dual.survived)


def estimate_rho(
    gamma: float,
    t_star: float,
    replicas: int,
    seed: int,
    block: int = 2,
    speed: float = DEFAULT_SPEED,
    mapper: Optional[Mapper] = None,
) -> EstimateResult:
    """
    Estimate rho from all-active light-cone runs observed at t_star.

    The site-0 indicator is the main estimate; the average over the central
    block [-block, block] (spatially ergodic limit) and the dual survival
    frequency P(sigma > t_star) are reported in extras with their gaps.

    Args:
        gamma: Leak rate
        t_star: Observation time
        replicas: Number of replicas
        seed: Master seed
        block: Half-width of the central block
        speed: Light-cone speed for the margin
        mapper: Replica mapper

    Returns:
        EstimateResult (flags: margin_violations)
    """
    mapper = mapper or serial_map
    rows = mapper(_rho_replica, [(gamma, t_star, block, speed, seed, r) for r in range(replicas)])
    rows = sorted(rows)
    site0 = [r[1] for r in rows]
    blocks = [r[2] for r in rows]
    flagged = sum(1 for r in rows if r[3])
    dual_alive = [r[4] for r in rows]

    result = Estimators.proportion(site0, flags={"margin_violations": flagged})
    block_est = Estimators.mean(blocks)
    dual_est = Estimators.proportion(dual_alive)
    result.extras = {
        "block_estimate": block_est.estimate,
        "block_std_error": block_est.std_error,
        "agreement_gap": abs(result.estimate - block_est.estimate),
        "dual_survival_estimate": dual_est.estimate,
        "dual_survival_std_error": dual_est.std_error,
        "duality_gap": abs(result.estimate - dual_est.estimate),
        "t_star": t_star,
        "margin": required_margin(t_star, speed),
        "raw": pd.DataFrame(rows, columns=["replica", "site0", "block_mean", "flagged", "dual_alive"]),
    }
    return result


def _dual_rho_replica(args):
    gamma, t_star, speed, seed, replica = args
    m = required_margin(t_star, speed)
    key = replica_key(seed, replica, "dual_rho")
    traj = simulate_dual_family([range(-m, m + 1)], gamma, t_star, key, lo=-m, hi=m, guard=(0, 0))[0]
    return replica, int(0 in traj.final), traj.flagged


def estimate_dual_rho(
    gamma: float,
    t_star: float,
    replicas: int,
    seed: int,
    speed: float = DEFAULT_SPEED,
    mapper: Optional[Mapper] = None,
) -> EstimateResult:
    """
    Estimate the density of the dual upper invariant measure: P(0 active at
    t_star) for the dual started all-active on a light-cone window.
    """
    mapper = mapper or serial_map
    rows = sorted(mapper(_dual_rho_replica, [(gamma, t_star, speed, seed, r) for r in range(replicas)]))
    result = Estimators.proportion([r[1] for r in rows], flags={"margin_violations": sum(r[2] for r in rows)})
    result.extras = {
        "t_star": t_star,
        "margin": required_margin(t_star, speed),
        "raw": pd.DataFrame(rows, columns=["replica", "site0", "flagged"]),
    }
    return result


def _margin_replica(args):
    gamma, horizon, speed, seed, replica, offset = args
    key = replica_key(seed, replica, "margin", offset)
    run = simulate_windowed_infinite(gamma, horizon, [0], key, speed=speed)
    return replica, int(0 in run.trajectory.state_at(horizon))


def margin_self_test(
    gamma: float,
    horizon: float,
    replicas: int,
    seed: int,
    speed: float = DEFAULT_SPEED,
    mapper: Optional[Mapper] = None,
) -> Dict:
    """
    Compare the site-0 state at the horizon under margin speed and 2 * speed
    (independent streams) with Fisher's exact test.

    Returns:
        Dict with both frequencies, the p-value and 'passes' (p > 0.01)
    """
    mapper = mapper or serial_map
    base = sorted(mapper(_margin_replica, [(gamma, horizon, speed, seed, r, 0) for r in range(replicas)]))
    wide = sorted(mapper(_margin_replica, [(gamma, horizon, 2 * speed, seed, r, 1) for r in range(replicas)]))
    a = sum(r[1] for r in base)
    b = sum(r[1] for r in wide)
    _, p_value = stats.fisher_exact([[a, replicas - a], [b, replicas - b]])
    return {
        "frequency": a / replicas,
        "frequency_doubled_margin": b / replicas,
        "p_value": float(p_value),
        "passes": bool(p_value > 0.01),
    }


class RhoExperiment(BaseExperiment):
    """Density rho of the upper invariant measure."""

    name = "rho"
    description = "density of the upper invariant measure from all-active light-cone runs"

    def get_parameters(self) -> Dict:
        c = self.config
        return {"gamma": c.gamma, "t_star": c.rho_t_star, "replicas": c.rho_replicas,
                "block": c.rho_block, "margin_factor": c.margin_factor}

    def execute(self, mapper: Mapper) -> ExperimentResult:
        c = self.config
        est = estimate_rho(c.gamma, c.rho_t_star, c.rho_replicas, c.seed, c.rho_block, c.margin_factor, mapper)
        raw = est.extras.pop("raw")
        summary = {"rho_hat": est.estimate, **_interval(est), **est.extras}
        return ExperimentResult(self.name, summary, raw, None, est.flags)


class DualRhoExperiment(BaseExperiment):
    """Density of the dual upper invariant measure."""

    name = "dual_rho"
    description = "density of the dual upper invariant measure from all-active truncated duals"

    def get_parameters(self) -> Dict:
        c = self.config
        return {"gamma": c.gamma, "t_star": c.rho_t_star, "replicas": c.rho_replicas,
                "margin_factor": c.margin_factor}

    def execute(self, mapper: Mapper) -> ExperimentResult:
        c = self.config
        est = estimate_dual_rho(c.gamma, c.rho_t_star, c.rho_replicas, c.seed, c.margin_factor, mapper)
        raw = est.extras.pop("raw")
        summary = {"dual_rho_hat": est.estimate, **_interval(est), **est.extras}
        return ExperimentResult(self.name, summary, raw, None, est.flags)


def _interval(est: EstimateResult) -> Dict:
    return {
        "std_error": est.std_error,
        "ci_low": est.ci_low,
        "ci_high": est.ci_high,
        "replicas": est.replicas,
    }


class MarginExperiment(BaseExperiment):
    """Light-cone margin self-test."""

    name = "margin"
    description = "site-0 state under the configured margin against a doubled margin"

    def get_parameters(self) -> Dict:
        c = self.config
        return {"gamma": c.gamma, "t_star": c.rho_t_star, "replicas": c.rho_replicas,
                "margin_factor": c.margin_factor}

    def execute(self, mapper: Mapper) -> ExperimentResult:
        c = self.config
        report = margin_self_test(c.gamma, c.rho_t_star, c.rho_replicas, c.seed, c.margin_factor, mapper)
        return ExperimentResult(self.name, report, None, report["passes"], {})
