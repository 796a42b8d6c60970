"""
Decay of time correlations and of the dual extinction-time tail.
"""
import logging
import math
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..dynamics import DEFAULT_SPEED, RunStatus, simulate_dual, simulate_extinction, simulate_windowed_infinite
from ..errors import ParameterError
from ..graphical import Configuration
from .base_experiment import BaseExperiment, ExperimentResult, Mapper, replica_key, serial_map
from .estimators import Estimators

logger = logging.getLogger(__name__)


def site_indicator(site: int) -> Callable[[Configuration], float]:
    """Cylinder function 1{site active}."""
    def f(config: Configuration) -> float:
        return 1.0 if site in config else 0.0

    f.support = frozenset([site])
    return f


def _covariance_replica(args):
    gamma, base_time, lags, site, mode, n, speed, seed, replica = args
    key = replica_key(seed, replica, "covariance")
    horizon = base_time + max(lags)
    if mode == "finite":
        run = simulate_extinction(n, None, gamma, key, max_time=horizon, observe=[site], record_spikes=False)
        trajectory, flagged = run.trajectory, False
    else:
        run = simulate_windowed_infinite(gamma, horizon, [site], key, speed=speed)
        trajectory, flagged = run.trajectory, run.flagged
    f = site_indicator(site)
    values = [f(trajectory.state_at(base_time + lag)) for lag in lags]
    return (replica, f(trajectory.state_at(base_time)), values, flagged)


def covariance_decay(
    gamma: float,
    base_time: float,
    lags: Sequence[float],
    replicas: int,
    seed: int,
    site: int = 0,
    mode: str = "infinite",
    n: Optional[int] = None,
    speed: float = DEFAULT_SPEED,
    mapper: Optional[Mapper] = None,
) -> Dict:
    """
    Cov(f(xi_s), f(xi_{s + lag})) for f = 1{site active}, per lag, with a
    log-linear fit of |Cov| against the lag.

    Lags whose covariance is within 2 jackknife SEs of 0 are left out of the
    fit and listed; if every lag is, the report says the covariance decayed
    below the noise floor.

    Args:
        gamma: Leak rate
        base_time: s
        lags: Increasing lags (>= 0)
        replicas: Number of replicas
        seed: Master seed
        site: Site of the indicator
        mode: 'infinite' (light-cone window, all-active) or 'finite'
            (window [-n, n], extinction included)
        n: Window half-width for the finite mode
        speed: Light-cone speed for the infinite mode
        mapper: Replica mapper

    Returns:
        Dict with covariances, SEs, the fit and the monotonicity check
    """
    if mode not in ("infinite", "finite"):
        raise ParameterError(f"mode must be 'infinite' or 'finite', got {mode!r}")
    if mode == "finite" and (n is None or abs(site) > n):
        raise ParameterError("finite mode needs a window half-width n containing the site")
    lags = [float(v) for v in lags]
    mapper = mapper or serial_map
    items = [(gamma, base_time, lags, site, mode, n, speed, seed, r) for r in range(replicas)]
    rows = sorted(mapper(_covariance_replica, items))

    x = np.array([r[1] for r in rows], dtype=float)
    covs, ses, null = [], [], []
    for k, lag in enumerate(lags):
        y = np.array([r[2][k] for r in rows], dtype=float)
        est = Estimators.jackknife_covariance(x, y)
        covs.append(est["cov"])
        ses.append(est["se"])
        null.append(bool(abs(est["cov"]) <= 2.0 * est["se"]))

    keep = [not z for z in null]
    fit = Estimators.log_linear_fit(lags, np.abs(covs), keep=keep)
    monotone_breaks = [
        lags[k + 1] for k in range(len(lags) - 1)
        if covs[k + 1] > covs[k] + 2.0 * math.hypot(ses[k], ses[k + 1])
    ]
    raw = pd.DataFrame([[r[0], r[1]] + list(r[2]) + [r[3]] for r in rows],
                       columns=["replica", "f_base"] + [f"f_lag_{lag:g}" for lag in lags] + ["flagged"])
    return {
        "gamma": gamma,
        "mode": mode,
        "site": site,
        "base_time": base_time,
        "lags": lags,
        "covariance": covs,
        "std_error": ses,
        "null_lags": [lag for lag, z in zip(lags, null) if z],
        "below_noise_floor": all(null),
        "fit": fit.to_dict() if fit else None,
        "monotone": not monotone_breaks,
        "monotone_breaks": monotone_breaks,
        "flags": {"margin_violations": sum(1 for r in rows if r[3])},
        "raw": raw,
    }


def _sigma_replica(args):
    gamma, horizon, max_events, seed, replica = args
    traj = simulate_dual(Configuration.from_sites([0]), gamma, horizon,
                         replica_key(seed, replica, "sigma_tail"), max_events=max_events)
    sigma = traj.sigma if traj.sigma is not None else math.nan
    return replica, sigma, traj.status == RunStatus.EVENT_CAP


def sigma_tail(
    gamma: float,
    t_grid: Sequence[float],
    horizon: float,
    replicas: int,
    seed: int,
    max_events: Optional[int] = None,
    mapper: Optional[Mapper] = None,
) -> Dict:
    """
    Empirical P(t < sigma <= horizon) for the dual from {0}, per t.

    The horizon stands in for infinity; the fraction surviving to it is
    reported separately. Estimates are exact nested counts, so they never
    increase in t.

    Returns:
        Dict with per-t estimates, the survivor fraction and the fit
    """
    t_grid = [float(t) for t in t_grid]
    if any(t > horizon for t in t_grid):
        raise ParameterError("t_grid must not exceed the horizon")
    mapper = mapper or serial_map
    rows = sorted(mapper(_sigma_replica, [(gamma, horizon, max_events, seed, r) for r in range(replicas)]))
    usable = [r for r in rows if not r[2]]
    sigmas = np.array([r[1] for r in usable], dtype=float)
    died = np.isfinite(sigmas)
    m = max(len(usable), 1)
    tails: List[float] = [float(np.count_nonzero(died & (sigmas > t))) / m for t in t_grid]
    ses = [math.sqrt(p * (1.0 - p) / m) for p in tails]
    fit = Estimators.log_linear_fit(t_grid, tails)
    return {
        "gamma": gamma,
        "horizon": horizon,
        "t_grid": t_grid,
        "tail": tails,
        "std_error": ses,
        "survivor_fraction": float(np.count_nonzero(~died)) / m,
        "fit": fit.to_dict() if fit else None,
        "flags": {"cap_hits": len(rows) - len(usable)},
        "raw": pd.DataFrame(rows, columns=["replica", "sigma", "capped"]),
    }


class CovarianceExperiment(BaseExperiment):
    """Exponential decay of time correlations of a cylinder function."""

    name = "covariance"
    description = "Cov(f(xi_s), f(xi_{s+lag})) against the lag"

    def get_parameters(self) -> Dict:
        c = self.config
        return {"gamma": c.gamma, "base_time": c.base_time, "lags": c.lags, "mode": c.covariance_mode,
                "site": c.covariance_site, "replicas": c.replicas}

    def execute(self, mapper: Mapper) -> ExperimentResult:
        c = self.config
        report = covariance_decay(c.gamma, c.base_time, c.lags, c.replicas, c.seed, c.covariance_site,
                                  c.covariance_mode, c.n, c.margin_factor, mapper)
        raw = report.pop("raw")
        flags = report.pop("flags")
        fit = report["fit"]
        verdict = None if fit is None else bool(fit["slope_negative"] and report["monotone"])
        return ExperimentResult(self.name, report, raw, verdict, flags)


class SigmaTailExperiment(BaseExperiment):
    """Exponential tail of the dual extinction time."""

    name = "sigma_tail"
    description = "P(t < sigma <= horizon) for the dual from {0}"

    def get_parameters(self) -> Dict:
        c = self.config
        return {"gamma": c.gamma, "t_grid": c.t_grid, "horizon": c.horizon, "replicas": c.replicas}

    def execute(self, mapper: Mapper) -> ExperimentResult:
        c = self.config
        report = sigma_tail(c.gamma, c.t_grid, c.horizon, c.replicas, c.seed, c.max_events, mapper)
        raw = report.pop("raw")
        flags = report.pop("flags")
        fit = report["fit"]
        verdict = None if fit is None else fit["slope_negative"]
        return ExperimentResult(self.name, report, raw, verdict, flags)
