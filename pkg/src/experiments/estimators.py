"""
Monte-Carlo estimators and statistical checks.
"""
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import stats

from ..randomness import ReplicaAccumulator

Z_95 = 1.959963984540054


@dataclass
class EstimateResult:
    """
    Point estimate with uncertainty.

    Attributes:
        estimate: Point estimate
        std_error: Standard error of the estimate
        ci_low: Lower end of the confidence interval
        ci_high: Upper end of the confidence interval
        replicas: Number of replicas that entered the estimate
        flags: Diagnostic counters (margin violations, cap hits, ...)
        extras: Further named quantities reported alongside
    """
    estimate: float
    std_error: float
    ci_low: float
    ci_high: float
    replicas: int
    flags: Dict[str, int] = field(default_factory=dict)
    extras: Dict[str, object] = field(default_factory=dict)

    @property
    def ci_width(self) -> float:
        return self.ci_high - self.ci_low

    def contains(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high

    def to_dict(self) -> Dict:
        out = asdict(self)
        out["ci_width"] = self.ci_width
        return out


@dataclass
class FitResult:
    """Log-linear fit log y = intercept + slope * x."""
    slope: float
    intercept: float
    slope_se: float
    slope_ci_low: float
    slope_ci_high: float
    points_used: int
    excluded: List[float] = field(default_factory=list)

    @property
    def decay_rate(self) -> float:
        """Fitted C2 (minus the slope)."""
        return -self.slope

    @property
    def prefactor(self) -> float:
        """Fitted C1 (exp of the intercept)."""
        return math.exp(self.intercept)

    @property
    def slope_negative(self) -> bool:
        """Slope CI lies entirely below 0."""
        return self.slope_ci_high < 0.0

    def to_dict(self) -> Dict:
        out = asdict(self)
        out["decay_rate"] = self.decay_rate
        out["slope_negative"] = self.slope_negative
        return out


@dataclass
class KSReport:
    """One-sample Kolmogorov-Smirnov test of rescaled samples against Exp(1)."""
    statistic: float
    p_value: float
    samples: int
    note: str = "samples rescaled by their own mean; the estimated mean biases the test slightly"

    def passes(self, alpha: float = 0.01) -> bool:
        return self.p_value > alpha

    def to_dict(self) -> Dict:
        return asdict(self)


class Estimators:
    """Statistics used by the experiments."""

    @staticmethod
    def mean(
        values: Sequence[float],
        flags: Optional[Dict[str, int]] = None,
        z: float = Z_95,
    ) -> EstimateResult:
        """
        Sample mean with normal confidence interval.

        Args:
            values: Per-replica values, in replica order
            flags: Diagnostic counters to attach
            z: Normal quantile of the interval

        Returns:
            EstimateResult
        """
        acc = ReplicaAccumulator()
        acc.extend(enumerate(values))
        n = len(acc)
        if n == 0:
            return EstimateResult(math.nan, math.nan, math.nan, math.nan, 0, dict(flags or {}))
        m = acc.mean()
        se = acc.std_error() if n > 1 else math.nan
        if n > 1 and se == 0.0:
            lo = hi = m
        elif n > 1:
            lo, hi = m - z * se, m + z * se
        else:
            lo = hi = math.nan
        return EstimateResult(m, se, lo, hi, n, dict(flags or {}))

    @staticmethod
    def proportion(
        hits: Sequence[bool],
        flags: Optional[Dict[str, int]] = None,
        z: float = Z_95,
    ) -> EstimateResult:
        """
        Binomial proportion with Wilson interval, clipped to [0, 1].
        """
        n = len(hits)
        if n == 0:
            return EstimateResult(math.nan, math.nan, math.nan, math.nan, 0, dict(flags or {}))
        k = int(sum(1 for h in hits if h))
        p = k / n
        se = math.sqrt(p * (1.0 - p) / n)
        denom = 1.0 + z * z / n
        centre = (p + z * z / (2 * n)) / denom
        half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4 * n * n)) / denom
        return EstimateResult(p, se, max(0.0, centre - half), min(1.0, centre + half), n, dict(flags or {}))

    @staticmethod
    def jackknife_covariance(x: Sequence[float], y: Sequence[float]) -> Dict[str, float]:
        """
        Covariance of paired replica values with its leave-one-out jackknife SE.

        Returns:
            Dict with 'cov' and 'se'
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        n = x.size
        if n < 2:
            return {"cov": math.nan, "se": math.nan}
        cov = float(np.mean(x * y) - np.mean(x) * np.mean(y))
        sx, sy, sxy = x.sum(), y.sum(), (x * y).sum()
        loo_mx = (sx - x) / (n - 1)
        loo_my = (sy - y) / (n - 1)
        loo_mxy = (sxy - x * y) / (n - 1)
        loo = loo_mxy - loo_mx * loo_my
        se = float(math.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2)))
        return {"cov": cov, "se": se}

    @staticmethod
    def log_linear_fit(
        x: Sequence[float],
        y: Sequence[float],
        keep: Optional[Sequence[bool]] = None,
        confidence: float = 0.95,
    ) -> Optional[FitResult]:
        """
        Fit log y against x on the points with y > 0 (and keep[i] if given).

        Returns:
            FitResult, or None if fewer than two points are usable
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        mask = y > 0.0
        if keep is not None:
            mask &= np.asarray(keep, dtype=bool)
        excluded = [float(v) for v in x[~mask]]
        if mask.sum() < 2:
            return None
        fit = stats.linregress(x[mask], np.log(y[mask]))
        dof = int(mask.sum()) - 2
        if dof > 0 and np.isfinite(fit.stderr):
            q = stats.t.ppf(0.5 + confidence / 2.0, dof)
            lo, hi = fit.slope - q * fit.stderr, fit.slope + q * fit.stderr
        else:
            # two points: no residual degrees of freedom, no interval
            lo = hi = float(fit.slope)
        return FitResult(
            slope=float(fit.slope),
            intercept=float(fit.intercept),
            slope_se=float(fit.stderr) if dof > 0 else math.nan,
            slope_ci_low=float(lo),
            slope_ci_high=float(hi),
            points_used=int(mask.sum()),
            excluded=excluded,
        )

    @staticmethod
    def ks_exponential(samples: Sequence[float]) -> KSReport:
        """
        Rescale samples by their mean and test against Exponential(1).
        """
        samples = np.asarray(samples, dtype=float)
        if samples.size == 0:
            return KSReport(math.nan, math.nan, 0)
        mean = samples.mean()
        rescaled = samples / mean if mean > 0.0 else samples
        result = stats.kstest(rescaled, "expon")
        return KSReport(float(result.statistic), float(result.pvalue), int(samples.size))

    @staticmethod
    def increase_test(
        a: EstimateResult,
        b: EstimateResult,
        z: float = 1.6448536269514722,
    ) -> Dict[str, object]:
        """
        One-sided check that b exceeds a.

        Returns:
            Dict with the difference, its z-score and whether both the point
            estimates increase and the z-score clears the quantile
        """
        diff = b.estimate - a.estimate
        se = math.sqrt(a.std_error ** 2 + b.std_error ** 2)
        score = diff / se if se > 0.0 else (math.inf if diff > 0 else -math.inf)
        return {
            "difference": diff,
            "z_score": score,
            "point_increase": diff > 0.0,
            "significant": bool(diff > 0.0 and score > z),
        }
