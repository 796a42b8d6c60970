"""
Exact solvers on RateMatrix: mean extinction times and transient
probabilities.
"""
import logging
import math
import warnings
from typing import Callable, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply, gmres, spsolve
from scipy.stats import poisson

from ..errors import ParameterError, SingularSystemError, TruncationBudgetError
from ..graphical import Configuration
from .generator import RateMatrix

logger = logging.getLogger(__name__)

SOLVER_RTOL = 1e-10
TRUNCATION_TOL = 1e-10
DEFAULT_TERM_BUDGET = 2_000_000


class Predicate:
    """Event on configurations, evaluated over all states at once."""

    def mask(self, matrix: RateMatrix) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, config: Configuration) -> bool:
        raise NotImplementedError


class IsEmpty(Predicate):
    """The configuration is empty."""

    def mask(self, matrix: RateMatrix) -> np.ndarray:
        out = np.zeros(matrix.n_states, dtype=bool)
        out[0] = True
        return out

    def __call__(self, config: Configuration) -> bool:
        return config.is_empty()

    def __repr__(self) -> str:
        return "IsEmpty()"


class SiteActive(Predicate):
    """A given site is active."""

    def __init__(self, site: int):
        self.site = site

    def mask(self, matrix: RateMatrix) -> np.ndarray:
        if not matrix.lo <= self.site <= matrix.hi:
            return np.zeros(matrix.n_states, dtype=bool)
        states = np.arange(matrix.n_states, dtype=np.int64)
        return ((states >> (self.site - matrix.lo)) & 1).astype(bool)

    def __call__(self, config: Configuration) -> bool:
        return self.site in config

    def __repr__(self) -> str:
        return f"SiteActive({self.site})"


def is_empty() -> Predicate:
    return IsEmpty()


def site_active(site: int) -> Predicate:
    return SiteActive(site)


def predicate_mask(matrix: RateMatrix, predicate: Union[Predicate, Callable]) -> np.ndarray:
    """Boolean vector of the states satisfying a predicate."""
    if isinstance(predicate, Predicate):
        return predicate.mask(matrix)
    return np.array(
        [bool(predicate(matrix.configuration(s))) for s in range(matrix.n_states)],
        dtype=bool,
    )


def mean_extinction_exact(
    matrix: RateMatrix,
    init: Union[Configuration, int],
    method: str = "direct",
) -> float:
    """
    Expected time to reach the empty state.

    Solves Q_TT m = -1 on the transient states (all but the empty one).

    Args:
        matrix: Generator
        init: Initial configuration or state index
        method: 'direct' (sparse LU) or 'gmres'

    Returns:
        Expected extinction time

    Raises:
        SingularSystemError: if the system cannot be solved (the empty state
            is not reachable from every state, e.g. gamma = 0)
    """
    start = matrix.state_index(init)
    if start == 0:
        return 0.0
    Q_TT = matrix.Q[1:, 1:].tocsc()
    rhs = -np.ones(matrix.n_states - 1)

    if method == "direct":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            try:
                m = spsolve(Q_TT, rhs)
            except RuntimeError as e:
                raise SingularSystemError(f"sparse solve failed: {e}") from e
    elif method == "gmres":
        m, info = gmres(Q_TT, rhs, rtol=SOLVER_RTOL, atol=0.0, restart=200, maxiter=10_000)
        if info != 0:
            raise SingularSystemError(f"gmres did not converge (info={info})")
    else:
        raise ParameterError(f"unknown method '{method}'")

    m = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(m)) or np.any(m < 0.0):
        raise SingularSystemError("first-passage system is singular: the empty state is not reachable from every state")
    return float(m[start - 1])


def _uniformized(matrix: RateMatrix):
    rate = float(matrix.exit_rates().max())
    if rate <= 0.0:
        return 0.0, None
    P = sp.identity(matrix.n_states, format="csr") + matrix.Q / rate
    return rate, P.T.tocsr()


def mean_extinction_uniformized(
    matrix: RateMatrix,
    init: Union[Configuration, int],
    tol: float = 1e-12,
    max_terms: int = DEFAULT_TERM_BUDGET,
) -> float:
    """
    Expected extinction time as (1/L) * sum_k P(jump chain not absorbed after k steps),
    L being the uniformization rate.

    Raises:
        TruncationBudgetError: if the survival sum has not converged within max_terms
    """
    start = matrix.state_index(init)
    if start == 0:
        return 0.0
    rate, PT = _uniformized(matrix)
    if PT is None:
        raise SingularSystemError("no transitions: the empty state is unreachable")

    v = np.zeros(matrix.n_states)
    v[start] = 1.0
    total = 0.0
    survival = 1.0
    for k in range(max_terms):
        total += survival
        v = PT @ v
        new_survival = max(0.0, 1.0 - v[0])
        if new_survival > 0.0 and survival > 0.0:
            ratio = new_survival / survival
            tail = new_survival / (1.0 - ratio) if ratio < 1.0 else math.inf
        else:
            tail = new_survival
        survival = new_survival
        if tail <= tol * total:
            return (total + tail) / rate
    raise TruncationBudgetError(max_terms + 1, max_terms)


def truncation_terms(mean: float, tol: float = TRUNCATION_TOL) -> int:
    """Smallest K with P(Poisson(mean) > K) <= tol."""
    if mean <= 0.0:
        return 0
    K = int(poisson.isf(tol, mean))
    while poisson.sf(K, mean) > tol:
        K += 1
    while K > 0 and poisson.sf(K - 1, mean) <= tol:
        K -= 1
    return K


def transient_distribution(
    matrix: RateMatrix,
    init: Union[Configuration, int],
    t: float,
    tol: float = TRUNCATION_TOL,
    max_terms: int = DEFAULT_TERM_BUDGET,
) -> np.ndarray:
    """
    Distribution at time t by uniformization, with total truncation error <= tol.

    Raises:
        TruncationBudgetError: if more than max_terms Poisson terms are needed
    """
    if t < 0.0:
        raise ParameterError(f"t must be >= 0, got {t}")
    start = matrix.state_index(init)
    v = np.zeros(matrix.n_states)
    v[start] = 1.0
    rate, PT = _uniformized(matrix)
    if t == 0.0 or PT is None:
        return v

    mean = rate * t
    K = truncation_terms(mean, tol)
    if K > max_terms:
        raise TruncationBudgetError(K, max_terms)
    weights = poisson.pmf(np.arange(K + 1), mean)
    out = weights[0] * v
    for k in range(1, K + 1):
        v = PT @ v
        out += weights[k] * v
    return out


def transient_event_probability(
    matrix: RateMatrix,
    init: Union[Configuration, int],
    t: float,
    target_predicate: Union[Predicate, Callable],
    tol: float = TRUNCATION_TOL,
    max_terms: int = DEFAULT_TERM_BUDGET,
) -> float:
    """
    P(state at t satisfies the predicate), by uniformization.

    Args:
        matrix: Generator
        init: Initial configuration or state index
        t: Time (>= 0)
        target_predicate: Predicate instance or callable on Configuration
        tol: Bound on the truncation error
        max_terms: Poisson term budget

    Returns:
        Probability
    """
    dist = transient_distribution(matrix, init, t, tol, max_terms)
    mask = predicate_mask(matrix, target_predicate)
    return float(np.clip(dist[mask].sum(), 0.0, 1.0))


def extinction_cdf_expm(matrix: RateMatrix, init: Union[Configuration, int], t: float) -> float:
    """P(extinct by time t) from the action of the matrix exponential."""
    if t < 0.0:
        raise ParameterError(f"t must be >= 0, got {t}")
    v = np.zeros(matrix.n_states)
    v[matrix.state_index(init)] = 1.0
    if t == 0.0:
        return float(v[0])
    dist = expm_multiply(matrix.Q.T.tocsr() * t, v)
    return float(np.clip(dist[0], 0.0, 1.0))


if __name__ == "__main__":
    from .generator import build_generator

    print("Exact mean extinction times from the full window...")
    for n in (0, 1, 2):
        for gamma in (0.5, 1.0):
            matrix = build_generator(n, gamma)
            full = Configuration.full(-n, n)
            direct = mean_extinction_exact(matrix, full)
            uniformized = mean_extinction_uniformized(matrix, full)
            print(f"  n={n} gamma={gamma}: {direct:.6f} (uniformized {uniformized:.6f}, "
                  f"{matrix.n_states} states)")
