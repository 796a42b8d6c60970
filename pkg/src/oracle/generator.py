"""
Exact generators on tiny windows.

States are bit indices: bit k is site lo + k, so the empty configuration
is state 0.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
import scipy.sparse as sp

from ..errors import ParameterError, StateSpaceCapError
from ..graphical import Configuration

logger = logging.getLogger(__name__)

MAX_SITES = 20
VARIANTS = ("auxiliary", "dual")


@dataclass(frozen=True, eq=False)
class RateMatrix:
    """
    Sparse CTMC generator.

    Attributes:
        Q: CSR generator (rows sum to 0)
        lo: Left window bound
        hi: Right window bound
        gamma: Leak / kill rate
        variant: 'auxiliary' or 'dual'
    """
    Q: sp.csr_matrix
    lo: int
    hi: int
    gamma: float
    variant: str

    @property
    def width(self) -> int:
        return self.hi - self.lo + 1

    @property
    def n_states(self) -> int:
        return self.Q.shape[0]

    def state_index(self, config: Union[Configuration, int]) -> int:
        """Bit index of a configuration."""
        if isinstance(config, (int, np.integer)):
            index = int(config)
        else:
            index = Configuration(config.active, self.lo, self.hi).to_bits()
        if not 0 <= index < self.n_states:
            raise ParameterError(f"state {index} outside [0, {self.n_states})")
        return index

    def configuration(self, index: int) -> Configuration:
        return Configuration.from_bits(index, self.lo, self.hi)

    def exit_rates(self) -> np.ndarray:
        return -self.Q.diagonal()

    def structure_problems(self, atol: float = 1e-12) -> List[str]:
        """Row sums, signs and the absorbing empty state; empty list if all hold."""
        problems = []
        row_sums = np.asarray(self.Q.sum(axis=1)).ravel()
        if np.max(np.abs(row_sums)) > atol:
            problems.append(f"row sums deviate from 0 by {np.max(np.abs(row_sums)):.3e}")
        off = self.Q - sp.diags(self.Q.diagonal())
        if off.nnz and off.data.min() < 0.0:
            problems.append("negative off-diagonal rate")
        if self.Q[0].nnz and np.any(self.Q[0].data != 0.0):
            problems.append("empty state is not absorbing")
        return problems

    def __repr__(self) -> str:
        return (f"RateMatrix(variant={self.variant}, window=[{self.lo}, {self.hi}], "
                f"gamma={self.gamma}, states={self.n_states}, nnz={self.Q.nnz})")


def _window(window) -> Tuple[int, int]:
    if isinstance(window, (int, np.integer)):
        if window < 0:
            raise ParameterError(f"n must be >= 0, got {window}")
        return -int(window), int(window)
    lo, hi = int(window[0]), int(window[1])
    if lo > hi:
        raise ParameterError(f"empty window [{lo}, {hi}]")
    return lo, hi


def _transitions(states: np.ndarray, width: int, gamma: float, variant: str):
    """Vectorized (rows, cols, rates) of the off-diagonal transitions."""
    rows, cols, rates = [], [], []
    for k in range(width):
        bit = np.int64(1) << k
        active = (states & bit) != 0
        cleared = states & ~bit
        left = (states >> (k - 1)) & 1 if k > 0 else np.zeros_like(states)
        right = (states >> (k + 1)) & 1 if k < width - 1 else np.zeros_like(states)

        if variant == "auxiliary":
            fired = cleared.copy()
            if k > 0:
                fired |= bit >> 1
            if k < width - 1:
                fired |= bit << 1
            src = states[active]
            rows += [src, src]
            cols += [fired[active], cleared[active]]
            rates += [np.ones(src.size), np.full(src.size, gamma)]
        else:
            flipped = np.where((left | right) != 0, states | bit, cleared)
            src_kill = states[active]
            rows += [states, src_kill]
            cols += [flipped, cleared[active]]
            rates += [np.ones(states.size), np.full(src_kill.size, gamma)]

    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    rates = np.concatenate(rates)
    keep = (rows != cols) & (rates > 0.0)
    return rows[keep], cols[keep], rates[keep]


def build_generator(
    window,
    gamma: float,
    variant: str = "auxiliary",
    max_sites: int = MAX_SITES,
) -> RateMatrix:
    """
    Build the generator on a window.

    Args:
        window: Half-width n (window [-n, n]) or explicit (lo, hi)
        gamma: Leak rate (>= 0)
        variant: 'auxiliary' (spike/leak maps) or 'dual' (OR-of-neighbors
            clock per site, clipped at the window, plus kills)
        max_sites: Hard cap on the window width

    Returns:
        RateMatrix

    Raises:
        StateSpaceCapError: if the window is wider than max_sites
    """
    if variant not in VARIANTS:
        raise ParameterError(f"unknown variant '{variant}', expected one of {VARIANTS}")
    if gamma < 0.0:
        raise ParameterError(f"gamma must be >= 0, got {gamma}")
    lo, hi = _window(window)
    width = hi - lo + 1
    if width > max_sites:
        raise StateSpaceCapError(f"window of {width} sites exceeds the cap of {max_sites}")

    n_states = 1 << width
    states = np.arange(n_states, dtype=np.int64)
    rows, cols, rates = _transitions(states, width, float(gamma), variant)

    off = sp.coo_matrix((rates, (rows, cols)), shape=(n_states, n_states)).tocsr()
    off.sum_duplicates()
    exit_rates = np.asarray(off.sum(axis=1)).ravel()
    Q = (off - sp.diags(exit_rates)).tocsr()
    logger.debug(f"built {variant} generator on [{lo}, {hi}]: {n_states} states, {Q.nnz} entries")
    return RateMatrix(Q=Q, lo=lo, hi=hi, gamma=float(gamma), variant=variant)


def dump_matrix(matrix: RateMatrix, path: Union[str, Path]) -> Path:
    """Write 'row col rate' lines for every stored entry."""
    path = Path(path)
    coo = matrix.Q.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with path.open("w") as f:
        f.write(f"# {matrix.variant} window {matrix.lo} {matrix.hi} gamma {matrix.gamma!r}\n")
        for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            f.write(f"{int(r)} {int(c)} {float(v)!r}\n")
    return path
