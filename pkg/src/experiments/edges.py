"""
Right edge of the half-line dual.

The dual started from (-inf, 0] has a right edge r_t that moves at an
asymptotic speed alpha(gamma). The experiments below estimate that speed,
its sensitivity to the leak rate and the edge identities that tie the dual
from a single site to the half-line duals.
"""
import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..dynamics import (
    DEFAULT_SPEED,
    required_margin,
    simulate_dual_coupled,
    simulate_dual_family,
    simulate_dual_halfline_edge,
)
from .base_experiment import BaseExperiment, ExperimentResult, Mapper, replica_key, serial_map
from .estimators import EstimateResult, Estimators

logger = logging.getLogger(__name__)


def _alpha_replica(args):
    gamma, horizon, speed, seed, replica, family = args
    traj = simulate_dual_halfline_edge(gamma, horizon, replica_key(seed, replica, family), speed=speed)
    return replica, traj.right.value_at(horizon) / horizon, traj.flagged


def estimate_alpha(
    gamma: float,
    horizon: float,
    replicas: int,
    seed: int,
    speed: float = DEFAULT_SPEED,
    mapper: Optional[Mapper] = None,
) -> EstimateResult:
    """
    Estimate the edge speed alpha(gamma) as the mean of r_T / T.

    Args:
        gamma: Leak rate
        horizon: T
        replicas: Number of replicas
        seed: Master seed
        speed: Light-cone speed sizing the truncation margin
        mapper: Replica mapper

    Returns:
        EstimateResult (flags: margin_violations, extinct)
    """
    mapper = mapper or serial_map
    rows = sorted(mapper(_alpha_replica, [(gamma, horizon, speed, seed, r, "alpha") for r in range(replicas)]))
    speeds = [v for _, v, _ in rows if math.isfinite(v)]
    flags = {
        "margin_violations": sum(1 for r in rows if r[2]),
        "extinct": sum(1 for r in rows if not math.isfinite(r[1])),
    }
    result = Estimators.mean(speeds, flags=flags)
    result.extras = {
        "horizon": horizon,
        "margin": required_margin(horizon, speed),
        "raw": pd.DataFrame(rows, columns=["replica", "edge_speed", "flagged"]),
    }
    return result


def _superlinearity_replica(args):
    gamma, lam, horizon, speed, seed, replica = args
    edges = simulate_dual_coupled(gamma, lam, horizon, replica_key(seed, replica, "superlinearity"), speed=speed)
    base = edges.base.right.value_at(horizon) / horizon
    raised = edges.raised.right.value_at(horizon) / horizon
    return replica, base, raised, edges.flagged


def superlinearity_check(
    gamma: float,
    lam: float,
    horizon: float,
    replicas: int,
    seed: int,
    speed: float = DEFAULT_SPEED,
    k: float = 3.0,
    mapper: Optional[Mapper] = None,
) -> Dict:
    """
    Paired estimate of alpha(gamma) - alpha(gamma + lam) on shared marks.

    The bound alpha(gamma) - alpha(gamma + lam) >= lam is taken as satisfied
    when the mean difference is at least lam - k * SE.

    Returns:
        Dict with the difference estimate, both speeds, the verdict and the
        per-replica table under 'raw'
    """
    mapper = mapper or serial_map
    items = [(gamma, lam, horizon, speed, seed, r) for r in range(replicas)]
    rows = sorted(mapper(_superlinearity_replica, items))
    usable = [r for r in rows if math.isfinite(r[1]) and math.isfinite(r[2])]
    diff = Estimators.mean([b - c for _, b, c, _ in usable],
                           flags={"margin_violations": sum(1 for r in rows if r[3]),
                                  "extinct": len(rows) - len(usable)})
    se = diff.std_error if math.isfinite(diff.std_error) else 0.0
    return {
        "gamma": gamma,
        "lam": lam,
        "difference": diff.estimate,
        "difference_std_error": diff.std_error,
        "difference_ci": [diff.ci_low, diff.ci_high],
        "alpha_gamma": float(np.mean([r[1] for r in usable])) if usable else math.nan,
        "alpha_gamma_plus_lam": float(np.mean([r[2] for r in usable])) if usable else math.nan,
        "bound": lam,
        "passes": bool(diff.estimate >= lam - k * se),
        "flags": diff.flags,
        "raw": pd.DataFrame(rows, columns=["replica", "alpha_gamma", "alpha_raised", "flagged"]),
    }


def _merged_states(histories: Sequence[List]) -> List:
    """(time, [state of each copy]) at every change time of any copy."""
    times = sorted({t for h in histories for t, _ in h})
    pos = [0] * len(histories)
    out = []
    for t in times:
        states = []
        for j, h in enumerate(histories):
            while pos[j] + 1 < len(h) and h[pos[j] + 1][0] <= t:
                pos[j] += 1
            states.append(h[pos[j]][1])
        out.append((t, states))
    return out


def _edge_identity_replica(args):
    gamma, horizon, speed, seed, replica = args
    m = required_margin(horizon, speed)
    single, left, right = simulate_dual_family(
        [[0], range(-m, 1), range(0, m + 1)], gamma, horizon,
        replica_key(seed, replica, "edge_identity"), lo=-m, hi=m, record_states=True,
    )
    edges = contents = ordering = 0
    for _, (eta0, eta_minus, eta_plus) in _merged_states([single.states, left.states, right.states]):
        if eta0.is_empty():
            break
        r0, l0 = eta0.rightmost, eta0.leftmost
        if r0 != eta_minus.rightmost or l0 != eta_plus.leftmost:
            edges += 1
        if eta0.active != eta_minus.restrict(l0, r0).active or eta0.active != eta_plus.restrict(l0, r0).active:
            contents += 1
        if eta_plus.leftmost > eta_minus.rightmost:
            ordering += 1
    return replica, edges, contents, ordering, single.flagged


def edge_identity_check(
    gamma: float,
    horizon: float,
    replicas: int,
    seed: int,
    speed: float = DEFAULT_SPEED,
    mapper: Optional[Mapper] = None,
) -> Dict:
    """
    Pathwise edge identities between the dual from {0} and the half-line
    duals from (-inf, 0] and [0, +inf), all on the same marks.

    While the dual from {0} is alive, at every change time:
      - its right edge equals the right edge of the left half-line dual, and
        its left edge the left edge of the right half-line dual;
      - its state equals either half-line state restricted to [l, r];
      - the left edge of the right half-line dual is <= the right edge of the
        left half-line dual.

    Returns:
        Dict of violation counts per identity and 'passes' (no violations)
    """
    mapper = mapper or serial_map
    rows = sorted(mapper(_edge_identity_replica, [(gamma, horizon, speed, seed, r) for r in range(replicas)]))
    violations = {
        "edge_violations": sum(r[1] for r in rows),
        "content_violations": sum(r[2] for r in rows),
        "ordering_violations": sum(r[3] for r in rows),
    }
    return {
        "gamma": gamma,
        "horizon": horizon,
        "replicas": replicas,
        **violations,
        "flagged_runs": sum(1 for r in rows if r[4]),
        "passes": not any(violations.values()),
    }


def _edge_gap_replica(args):
    gamma, horizon, offset, speed, seed, replica = args
    m = required_margin(horizon, speed)
    half_line = list(range(-m, 1))
    base, raised = simulate_dual_family(
        [half_line, half_line + [offset]], gamma, horizon,
        replica_key(seed, replica, "edge_gap"), lo=-m,
    )
    gap = raised.right.value_at(horizon) - base.right.value_at(horizon)
    return replica, gap, base.flagged


def edge_gap_experiment(
    gamma: float,
    horizon: float,
    offset: int,
    replicas: int,
    seed: int,
    speed: float = DEFAULT_SPEED,
    mapper: Optional[Mapper] = None,
) -> EstimateResult:
    """
    Estimate E(r_T for A + {offset}) - E(r_T for A) with A = (-inf, 0].

    The two duals share every mark; the expected gap is at least 1, and the
    verdict in extras checks it within 3 standard errors.
    """
    if offset < 1:
        raise ValueError(f"offset must be >= 1, got {offset}")
    mapper = mapper or serial_map
    rows = sorted(mapper(_edge_gap_replica, [(gamma, horizon, offset, speed, seed, r) for r in range(replicas)]))
    gaps = [g for _, g, _ in rows if math.isfinite(g)]
    result = Estimators.mean(gaps, flags={
        "margin_violations": sum(1 for r in rows if r[2]),
        "extinct": len(rows) - len(gaps),
    })
    se = result.std_error if math.isfinite(result.std_error) else 0.0
    result.extras = {
        "offset": offset,
        "bound": 1.0,
        "passes": bool(result.estimate >= 1.0 - 3.0 * se),
        "raw": pd.DataFrame(rows, columns=["replica", "gap", "flagged"]),
    }
    return result


def _edge_tail_replica(args):
    gamma, t_grid, speed, seed, replica = args
    horizon = max(t_grid)
    traj = simulate_dual_halfline_edge(gamma, horizon, replica_key(seed, replica, "edge_tail"), speed=speed)
    return (replica, [traj.right.value_at(t) for t in t_grid], traj.flagged)


def edge_deviation_tail(
    gamma: float,
    t_grid: Sequence[float],
    replicas: int,
    seed: int,
    a: Optional[float] = None,
    speed: float = DEFAULT_SPEED,
    mapper: Optional[Mapper] = None,
) -> Dict:
    """
    Decay of P(r_t < a * t) along t_grid, with a log-linear fit.

    Args:
        gamma: Leak rate
        t_grid: Increasing times (all > 0)
        replicas: Number of replicas
        seed: Master seed
        a: Slope below the edge speed; None uses half the mean r_T / T at the
            largest time of the grid
        speed: Light-cone speed sizing the margin
        mapper: Replica mapper

    Returns:
        Dict with per-t probabilities and the fit
    """
    t_grid = [float(t) for t in t_grid]
    if not t_grid or min(t_grid) <= 0.0:
        raise ValueError("t_grid must hold times > 0")
    mapper = mapper or serial_map
    rows = sorted(mapper(_edge_tail_replica, [(gamma, t_grid, speed, seed, r) for r in range(replicas)]))
    edges = np.array([r[1] for r in rows], dtype=float)
    if a is None:
        last = edges[:, -1] / t_grid[-1]
        a = 0.5 * float(np.nanmean(last))
    probabilities = []
    for k, t in enumerate(t_grid):
        column = edges[:, k]
        hits = [bool(v < a * t) for v in column if math.isfinite(v)]
        probabilities.append(Estimators.proportion(hits))
    fit = Estimators.log_linear_fit(t_grid, [p.estimate for p in probabilities])
    raw = pd.DataFrame(edges, columns=[f"r_{t:g}" for t in t_grid])
    raw.insert(0, "replica", [r[0] for r in rows])
    return {
        "gamma": gamma,
        "a": a,
        "t_grid": t_grid,
        "probabilities": [p.estimate for p in probabilities],
        "std_errors": [p.std_error for p in probabilities],
        "fit": fit.to_dict() if fit else None,
        "flags": {"margin_violations": sum(1 for r in rows if r[2])},
        "raw": raw,
    }


class AlphaExperiment(BaseExperiment):
    """Edge speed of the half-line dual."""

    name = "alpha"
    description = "edge speed alpha(gamma) of the half-line dual"

    def get_parameters(self) -> Dict:
        c = self.config
        return {"gamma": c.gamma, "horizon": c.horizon, "replicas": c.replicas, "margin_factor": c.margin_factor}

    def execute(self, mapper: Mapper) -> ExperimentResult:
        c = self.config
        est = estimate_alpha(c.gamma, c.horizon, c.replicas, c.seed, c.margin_factor, mapper)
        raw = est.extras.pop("raw")
        summary = {
            "alpha_hat": est.estimate,
            "std_error": est.std_error,
            "ci_low": est.ci_low,
            "ci_high": est.ci_high,
            "replicas": est.replicas,
            **est.extras,
        }
        return ExperimentResult(self.name, summary, raw, None, est.flags)


class SuperlinearityExperiment(BaseExperiment):
    """alpha(gamma) - alpha(gamma + lambda) >= lambda on coupled marks."""

    name = "superlinearity"
    description = "edge-speed drop under an extra leak rate lambda, coupled marks"

    def get_parameters(self) -> Dict:
        c = self.config
        return {"gamma": c.gamma, "lam": c.lam, "horizon": c.horizon, "replicas": c.replicas}

    def execute(self, mapper: Mapper) -> ExperimentResult:
        c = self.config
        report = superlinearity_check(c.gamma, c.lam, c.horizon, c.replicas, c.seed, c.margin_factor,
                                      mapper=mapper)
        raw = report.pop("raw")
        flags = report.pop("flags")
        return ExperimentResult(self.name, report, raw, report["passes"], flags)


class EdgeIdentityExperiment(BaseExperiment):
    """Pathwise edge identities of the single-site and half-line duals."""

    name = "edge_identity"
    description = "dual from {0} against the half-line duals on shared marks"

    def get_parameters(self) -> Dict:
        c = self.config
        return {"gamma": c.gamma, "horizon": c.verify_horizon, "replicas": c.replicas}

    def execute(self, mapper: Mapper) -> ExperimentResult:
        c = self.config
        report = edge_identity_check(c.gamma, c.verify_horizon, c.replicas, c.seed, c.margin_factor, mapper)
        flags = {"flagged_runs": report["flagged_runs"]}
        return ExperimentResult(self.name, report, None, report["passes"], flags)


class EdgeGapExperiment(BaseExperiment):
    """Mean edge gain from one extra site to the right of the half-line."""

    name = "edge_gap"
    description = "E(r for A + {i}) - E(r for A) >= 1 with A the left half-line"

    def get_parameters(self) -> Dict:
        c = self.config
        return {"gamma": c.gamma, "horizon": c.horizon, "offset": c.edge_offset, "replicas": c.replicas}

    def execute(self, mapper: Mapper) -> ExperimentResult:
        c = self.config
        est = edge_gap_experiment(c.gamma, c.horizon, c.edge_offset, c.replicas, c.seed, c.margin_factor, mapper)
        raw = est.extras.pop("raw")
        summary = {
            "gap_hat": est.estimate,
            "std_error": est.std_error,
            "ci_low": est.ci_low,
            "ci_high": est.ci_high,
            "replicas": est.replicas,
            **est.extras,
        }
        return ExperimentResult(self.name, summary, raw, est.extras["passes"], est.flags)


class EdgeTailExperiment(BaseExperiment):
    """Large-deviation tail of the edge below a slower line."""

    name = "edge_tail"
    description = "decay of P(r_t < a t) for a below the edge speed"

    def get_parameters(self) -> Dict:
        c = self.config
        return {"gamma": c.gamma, "t_grid": c.t_grid, "a": c.deviation_slope, "replicas": c.replicas}

    def execute(self, mapper: Mapper) -> ExperimentResult:
        c = self.config
        report = edge_deviation_tail(c.gamma, c.t_grid, c.replicas, c.seed, c.deviation_slope,
                                     c.margin_factor, mapper)
        raw = report.pop("raw")
        flags = report.pop("flags")
        fit = report["fit"]
        verdict = None if fit is None else fit["slope_negative"]
        return ExperimentResult(self.name, report, raw, verdict, flags)
