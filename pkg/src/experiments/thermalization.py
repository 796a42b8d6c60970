"""
Thermalization of the finite system.

The spike count of an observation set F over [t, t + R_n], divided by R_n,
concentrates around |F| * rho when the averaging length R_n grows with the
window but stays small against the mean extinction time.
"""
import logging
import math
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..dynamics import ObservedTrajectory, RunStatus, SpikeLog, simulate_extinction
from ..errors import ParameterError
from ..graphical import Configuration
from .base_experiment import BaseExperiment, ExperimentResult, Mapper, replica_key, serial_map
from .config import ExperimentConfig
from .density import estimate_rho
from .estimators import EstimateResult, Estimators

logger = logging.getLogger(__name__)

CylinderFunction = Callable[[Configuration], float]


def spike_average(
    spike_log: SpikeLog,
    sites: Iterable[int],
    t: float,
    R: float,
    window: Optional[range] = None,
) -> float:
    """
    Spikes of the sites in [t, t + R], divided by R.

    Args:
        spike_log: Spike log of one run
        sites: Observation set F
        t: Start of the averaging interval
        R: Averaging length (> 0)
        window: If given, only sites of F inside it count

    Returns:
        Spike average (0 when no spike falls in the interval)
    """
    if R <= 0.0:
        raise ParameterError(f"R must be > 0, got {R}")
    sites = [i for i in sites if window is None or i in window]
    return spike_log.count(sites, t, t + R) / R


def site_sum(sites: Iterable[int]) -> CylinderFunction:
    """S_F: number of active sites of F."""
    sites = frozenset(sites)

    def f(config: Configuration) -> float:
        return float(len(sites & config.active))

    f.support = sites
    return f


def time_average(trajectory: ObservedTrajectory, t: float, R: float, f: CylinderFunction) -> float:
    """
    (1/R) * integral over [t, t + R] of f(state), computed exactly on the
    constant pieces of the trajectory.

    Raises:
        CoverageError: if the trajectory does not cover [t, t + R]
    """
    if R <= 0.0:
        raise ParameterError(f"R must be > 0, got {R}")
    total = math.fsum((end - start) * f(state) for start, end, state in trajectory.segments(t, t + R))
    return total / R


def concentration_report(
    per_site: Sequence[float],
    rho_hat: float,
    rho_ci: Tuple[float, float],
    delta: float,
    level: float = 0.9,
) -> Dict:
    """
    Fraction of spike averages within delta of rho, with rho's CI carried
    through.

    The fraction is taken against the point estimate and against both CI
    endpoints; 'envelope_fraction' accepts a value anywhere in
    [ci_low - delta, ci_high + delta]. The verdict needs the fraction to
    reach level at both endpoints.

    Args:
        per_site: Spike average per site of every surviving replica
        rho_hat: Point estimate of rho
        rho_ci: (ci_low, ci_high) of rho_hat
        delta: Accepted deviation
        level: Required fraction

    Returns:
        Dict of fractions, their Wilson intervals and 'passes'
    """
    values = np.asarray(per_site, dtype=float)
    lo, hi = rho_ci
    if not len(values):
        return {"fraction": math.nan, "fraction_at_ci_low": math.nan, "fraction_at_ci_high": math.nan,
                "envelope_fraction": math.nan, "fraction_ci": [math.nan, math.nan], "passes": False}
    at_point = Estimators.proportion(np.abs(values - rho_hat) <= delta)
    at_low = Estimators.proportion(np.abs(values - lo) <= delta)
    at_high = Estimators.proportion(np.abs(values - hi) <= delta)
    envelope = Estimators.proportion((values >= lo - delta) & (values <= hi + delta))
    return {
        "fraction": at_point.estimate,
        "fraction_ci": [at_point.ci_low, at_point.ci_high],
        "fraction_at_ci_low": at_low.estimate,
        "fraction_at_ci_high": at_high.estimate,
        "envelope_fraction": envelope.estimate,
        "passes": bool(min(at_low.estimate, at_high.estimate) >= level),
    }


def _thermalization_replica(args):
    gamma, n, t, R, sites, seed, replica, offset = args
    key = replica_key(seed, replica, "thermalization", offset)
    run = simulate_extinction(n, None, gamma, key, max_time=t + R, observe=sites)
    n_hat = spike_average(run.spike_log, sites, t, R, range(-n, n + 1))
    a_hat = time_average(run.trajectory, t, R, site_sum(sites))
    survived = run.status != RunStatus.EXTINCT
    return replica, n_hat, a_hat, survived, run.events


def _tau_bound_replica(args):
    gamma, n, cap, seed, replica, offset = args
    run = simulate_extinction(n, None, gamma, replica_key(seed, replica, "tau_bound", offset),
                              max_time=cap, record_spikes=False)
    return replica, run.end_time, run.status == RunStatus.EXTINCT


def _schedule_entry(config: ExperimentConfig, k: int, n: int, R: float, rho: EstimateResult, mapper: Mapper) -> Dict:
    c = config
    sites = list(c.F)
    t = c.t_offset
    items = [(c.gamma, n, t, R, sites, c.seed, r, k) for r in range(c.replicas)]
    rows = sorted(mapper(_thermalization_replica, items))
    raw = pd.DataFrame(rows, columns=["replica", "n_hat", "a_hat", "survived", "events"])

    survivors = raw[raw["survived"]]
    per_site = survivors["n_hat"] / len(sites)
    report = concentration_report(per_site.to_numpy(), rho.estimate, (rho.ci_low, rho.ci_high), c.delta)
    concentration = report["fraction"]

    cap = c.tau_cap_factor * R
    bound_rows = sorted(mapper(_tau_bound_replica, [(c.gamma, n, cap, c.seed, r, k)
                                                    for r in range(c.tau_bound_replicas)]))
    capped_mean = float(np.mean([r[1] for r in bound_rows]))
    all_capped = not any(r[2] for r in bound_rows)

    entry = {
        "n": n,
        "R": R,
        "t": t,
        "concentration_fraction": concentration,
        "concentration_ci": report["fraction_ci"],
        "concentration_at_rho_ci_low": report["fraction_at_ci_low"],
        "concentration_at_rho_ci_high": report["fraction_at_ci_high"],
        "envelope_fraction": report["envelope_fraction"],
        "concentration_passes": report["passes"],
        "survivor_fraction": float(raw["survived"].mean()),
        "extinct_before_end": int((~raw["survived"]).sum()),
        "n_hat_mean": float(raw["n_hat"].mean()),
        "n_hat_quantiles": raw["n_hat"].quantile([0.05, 0.25, 0.5, 0.75, 0.95]).tolist(),
        "a_hat_mean": float(raw["a_hat"].mean()),
        "bridge_gap_mean": float((raw["n_hat"] - raw["a_hat"]).abs().mean()),
        # min(tau, cap) underestimates tau, so this overestimates R / E(tau)
        "R_over_mean_tau_bound": R / capped_mean if capped_mean > 0.0 else math.inf,
        "tau_cap": cap,
        "tau_all_capped": all_capped,
    }
    mark = "✓" if report["passes"] else "✗"
    logger.info(f"  {mark} n={n} R={R:g}: {concentration:.3f} of survivors within ±{c.delta} of rho_hat "
                f"({report['fraction_at_ci_low']:.3f} / {report['fraction_at_ci_high']:.3f} at the CI ends)")
    return {"entry": entry, "raw": raw.assign(n=n, R=R)}


def thermalization_experiment(config: ExperimentConfig, mapper: Optional[Mapper] = None) -> Dict:
    """
    Spike-count concentration on every (n, R_n) of the averaging schedule.

    rho_hat comes from estimate_rho with its own replicas. The top-level
    fields describe the last (largest) schedule entry; every entry is listed
    under 'schedule'.

    Returns:
        Dict with rho_hat, concentration_fraction, survivor_fraction, the
        per-entry reports, 'passes' and the raw table under 'raw'
    """
    c = config
    mapper = mapper or serial_map
    rho = estimate_rho(c.gamma, c.rho_t_star, c.rho_replicas, c.seed, c.rho_block, c.margin_factor, mapper)
    rho.extras.pop("raw", None)
    logger.info(f"  rho_hat = {rho.estimate:.4f} [{rho.ci_low:.4f}, {rho.ci_high:.4f}]")

    entries: List[Dict] = []
    frames = []
    for k, (n, R) in enumerate(c.r_schedule):
        out = _schedule_entry(c, k, n, R, rho, mapper)
        entries.append(out["entry"])
        frames.append(out["raw"])

    last = entries[-1]
    passes = bool(last["concentration_passes"] and last["survivor_fraction"] >= 0.95)
    return {
        "rho_hat": rho.estimate,
        "rho_ci": [rho.ci_low, rho.ci_high],
        "rho_std_error": rho.std_error,
        "F": list(c.F),
        "delta": c.delta,
        "concentration_fraction": last["concentration_fraction"],
        "concentration_at_rho_ci_low": last["concentration_at_rho_ci_low"],
        "concentration_at_rho_ci_high": last["concentration_at_rho_ci_high"],
        "envelope_fraction": last["envelope_fraction"],
        "survivor_fraction": last["survivor_fraction"],
        "bridge_gap_mean": last["bridge_gap_mean"],
        "R_over_mean_tau_bound": last["R_over_mean_tau_bound"],
        "schedule": entries,
        "passes": passes,
        "flags": dict(rho.flags),
        "raw": pd.concat(frames, ignore_index=True),
    }


class ThermalizationExperiment(BaseExperiment):
    """Concentration of the spike average around |F| rho."""

    name = "thermalization"
    description = "spike averages of F over [t, t + R_n] against |F| * rho_hat"

    def get_parameters(self) -> Dict:
        c = self.config
        return {"gamma": c.gamma, "r_schedule": c.r_schedule, "t": c.t_offset, "F": c.F,
                "delta": c.delta, "replicas": c.replicas}

    def execute(self, mapper: Mapper) -> ExperimentResult:
        report = thermalization_experiment(self.config, mapper)
        raw = report.pop("raw")
        flags = report.pop("flags")
        return ExperimentResult(self.name, report, raw, report["passes"], flags)
