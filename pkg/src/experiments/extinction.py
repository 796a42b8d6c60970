"""
Extinction time of the finite system on [-n, n].

Started all-active, the finite process dies at a time tau_n whose law,
rescaled by its mean, approaches Exponential(1), and whose mean grows faster
than n in the subcritical regime.
"""
import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..dynamics import RunStatus, simulate_extinction
from .base_experiment import BaseExperiment, ExperimentResult, Mapper, replica_key, serial_map
from .estimators import EstimateResult, Estimators

logger = logging.getLogger(__name__)


def _tau_replica(args):
    gamma, n, max_events, max_time, seed, replica, family, offset = args
    run = simulate_extinction(n, None, gamma, replica_key(seed, replica, family, offset),
                              max_events=max_events, max_time=max_time, record_spikes=False)
    tau = run.tau if run.status == RunStatus.EXTINCT else math.nan
    return replica, tau, run.end_time, run.status.value


def sample_extinction_times(
    gamma: float,
    n: int,
    replicas: int,
    seed: int,
    family: str = "extinction_law",
    offset: int = 0,
    max_events: Optional[int] = None,
    max_time: Optional[float] = None,
    mapper: Optional[Mapper] = None,
) -> pd.DataFrame:
    """
    Extinction times of all-active runs on [-n, n].

    Returns:
        DataFrame with columns replica, tau (nan when capped), end_time, status
    """
    mapper = mapper or serial_map
    items = [(gamma, n, max_events, max_time, seed, r, family, offset) for r in range(replicas)]
    rows = sorted(mapper(_tau_replica, items))
    return pd.DataFrame(rows, columns=["replica", "tau", "end_time", "status"])


def extinction_law_experiment(
    gamma: float,
    n: int,
    replicas: int,
    seed: int,
    max_events: Optional[int] = None,
    contrast_n: Optional[int] = None,
    mapper: Optional[Mapper] = None,
) -> Dict:
    """
    KS test of tau_n / mean(tau_n) against Exponential(1).

    Capped replicas are excluded and counted. With contrast_n, the same test
    on the smaller window is reported alongside (no verdict attached).

    Returns:
        Dict with the mean, the KS report, the rescaled sample mean and the
        raw table under 'raw'
    """
    raw = sample_extinction_times(gamma, n, replicas, seed, max_events=max_events, mapper=mapper)
    samples = raw["tau"].dropna().to_numpy()
    ks = Estimators.ks_exponential(samples)
    mean = Estimators.mean(samples.tolist())
    report = {
        "gamma": gamma,
        "n": n,
        "mean_tau": mean.estimate,
        "mean_tau_std_error": mean.std_error,
        "rescaled_mean": float(np.mean(samples / samples.mean())) if samples.size else math.nan,
        "ks": ks.to_dict(),
        "passes": ks.passes(0.01),
        "flags": {"cap_hits": int(raw["tau"].isna().sum())},
    }
    if contrast_n is not None:
        contrast = sample_extinction_times(gamma, contrast_n, replicas, seed, offset=1,
                                           max_events=max_events, mapper=mapper)
        report["contrast"] = {
            "n": contrast_n,
            "ks": Estimators.ks_exponential(contrast["tau"].dropna().to_numpy()).to_dict(),
        }
    report["raw"] = raw
    return report


def superlinear_mean_growth(
    gamma: float,
    n_grid: Sequence[int],
    replicas: int,
    seed: int,
    max_events: Optional[int] = None,
    mapper: Optional[Mapper] = None,
) -> Dict:
    """
    E(tau_n) / n over a grid of window half-widths.

    The verdict requires every consecutive ratio to increase, both in the
    point estimates and by a one-sided z-test; a single-point grid has no
    verdict.

    Returns:
        Dict with per-n means and ratios, the pairwise tests and the verdict
    """
    n_grid = [int(n) for n in n_grid]
    ratios: List[EstimateResult] = []
    frames = []
    cap_hits = 0
    for k, n in enumerate(n_grid):
        raw = sample_extinction_times(gamma, n, replicas, seed, family="mean_growth", offset=k,
                                      max_events=max_events, mapper=mapper)
        taus = raw["tau"].dropna().to_numpy()
        cap_hits += int(raw["tau"].isna().sum())
        ratios.append(Estimators.mean((taus / n).tolist()))
        frames.append(raw.assign(n=n))
        logger.info(f"  n={n:<4} E(tau)/n = {ratios[-1].estimate:.4g} ± {ratios[-1].std_error:.2g}")

    tests = [Estimators.increase_test(a, b) for a, b in zip(ratios, ratios[1:])]
    verdict = None if len(n_grid) < 2 else all(t["significant"] for t in tests)
    return {
        "gamma": gamma,
        "n_grid": n_grid,
        "mean_tau": [r.estimate * n for r, n in zip(ratios, n_grid)],
        "ratio": [r.estimate for r in ratios],
        "ratio_std_error": [r.std_error for r in ratios],
        "increase_tests": tests,
        "passes": verdict,
        "flags": {"cap_hits": cap_hits},
        "raw": pd.concat(frames, ignore_index=True),
    }


class ExtinctionLawExperiment(BaseExperiment):
    """Exponential law of the rescaled extinction time."""

    name = "extinction_law"
    description = "KS test of tau_n / E(tau_n) against Exponential(1)"

    def get_parameters(self) -> Dict:
        c = self.config
        return {"gamma": c.gamma, "n": c.n, "replicas": c.replicas, "max_events": c.max_events}

    def execute(self, mapper: Mapper) -> ExperimentResult:
        c = self.config
        contrast = 5 if c.n > 5 else None
        report = extinction_law_experiment(c.gamma, c.n, c.replicas, c.seed, c.max_events, contrast, mapper)
        raw = report.pop("raw")
        flags = report.pop("flags")
        return ExperimentResult(self.name, report, raw, report["passes"], flags)


class MeanGrowthExperiment(BaseExperiment):
    """Superlinear growth of the mean extinction time."""

    name = "mean_growth"
    description = "E(tau_n) / n increasing along the n grid"

    def get_parameters(self) -> Dict:
        c = self.config
        return {"gamma": c.gamma, "n_grid": c.n_grid, "replicas": c.replicas, "max_events": c.max_events}

    def execute(self, mapper: Mapper) -> ExperimentResult:
        c = self.config
        report = superlinear_mean_growth(c.gamma, c.n_grid, c.replicas, c.seed, c.max_events, mapper)
        raw = report.pop("raw")
        flags = report.pop("flags")
        return ExperimentResult(self.name, report, raw, report["passes"], flags)
