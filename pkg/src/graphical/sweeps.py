"""
Configuration sweeps over a diagram.

Forward sweeps read the auxiliary process off the diagram; backward sweeps
read the dual. Both treat sites outside the (sub-)window as inactive.
Event times use the right-continuous convention: the state at t includes
every event at time <= t.
"""
from typing import List, Optional, Tuple

import numpy as np

from ..errors import ParameterError, TimeOrderError
from ..randomness import MarkKind
from .configuration import Configuration
from .diagram import Diagram

SPIKE = int(MarkKind.SPIKE)
LEAK = int(MarkKind.LEAK)

DUAL_RULES = {
    "or": lambda left, right: 1 if (left or right) else 0,
    # only for mutation testing of the verification suite
    "and": lambda left, right: 1 if (left and right) else 0,
}


def _bounds(diagram: Diagram, window: Optional[Tuple[int, int]]) -> Tuple[int, int]:
    if window is None:
        return diagram.lo, diagram.hi
    lo, hi = int(window[0]), int(window[1])
    if lo > hi or lo < diagram.lo or hi > diagram.hi:
        raise ParameterError(f"sub-window [{lo}, {hi}] not inside diagram window {diagram.window}")
    return lo, hi


def _load(config: Configuration, lo: int, hi: int) -> bytearray:
    state = bytearray(hi - lo + 1)
    for i in config.active:
        if i < lo or i > hi:
            raise ParameterError(f"site {i} outside window [{lo}, {hi}]")
        state[i - lo] = 1
    return state


def _unload(state: bytearray, lo: int, hi: int) -> Configuration:
    return Configuration(frozenset(lo + k for k, v in enumerate(state) if v), lo, hi)


def _check_time(diagram: Diagram, t: float):
    if t < 0.0 or t > diagram.horizon:
        raise TimeOrderError(f"time {t} outside [0, {diagram.horizon}]")


def _apply_forward(state: bytearray, k: int, kind: int):
    if kind == LEAK:
        state[k] = 0
    elif state[k]:
        state[k] = 0
        if k > 0:
            state[k - 1] = 1
        if k < len(state) - 1:
            state[k + 1] = 1


def forward_state(
    diagram: Diagram,
    A: Configuration,
    t: float,
    window: Optional[Tuple[int, int]] = None,
) -> Configuration:
    """
    State at time t of the auxiliary process started from A.

    Args:
        diagram: Graphical construction
        A: Initial active set (inside the window)
        t: Time (<= horizon)
        window: Optional sub-window; events outside it are ignored and
            activation is clipped to it

    Returns:
        Sites reachable from A x {0} by valid paths
    """
    _check_time(diagram, t)
    lo, hi = _bounds(diagram, window)
    state = _load(A, lo, hi)
    n = int(np.searchsorted(diagram.times, t, side="right"))
    sites = diagram.sites[:n].tolist()
    kinds = diagram.kinds[:n].tolist()
    for i, kind in zip(sites, kinds):
        if lo <= i <= hi:
            _apply_forward(state, i - lo, kind)
    return _unload(state, lo, hi)


def forward_trajectory(
    diagram: Diagram,
    A: Configuration,
    t: Optional[float] = None,
    window: Optional[Tuple[int, int]] = None,
) -> List[Tuple[float, Configuration]]:
    """
    States after every event inside the window, up to time t.

    Returns:
        List of (event time, Configuration); the first entry is (0.0, A)
    """
    t = diagram.horizon if t is None else t
    _check_time(diagram, t)
    lo, hi = _bounds(diagram, window)
    state = _load(A, lo, hi)
    out = [(0.0, _unload(state, lo, hi))]
    n = int(np.searchsorted(diagram.times, t, side="right"))
    for i, time, kind in zip(diagram.sites[:n].tolist(), diagram.times[:n].tolist(), diagram.kinds[:n].tolist()):
        if lo <= i <= hi:
            _apply_forward(state, i - lo, kind)
            out.append((time, _unload(state, lo, hi)))
    return out


def _apply_dual(state: bytearray, k: int, kind: int, combine):
    if kind == LEAK:
        state[k] = 0
    else:
        left = state[k - 1] if k > 0 else 0
        right = state[k + 1] if k < len(state) - 1 else 0
        state[k] = combine(left, right)


def backward_dual_state(
    diagram: Diagram,
    B: Configuration,
    s: float,
    t: float,
    window: Optional[Tuple[int, int]] = None,
    rule: str = "or",
) -> Configuration:
    """
    Dual configuration read backward from B x {s} over elapsed time t.

    Events in (s - t, s] are applied in decreasing time order: a spike
    event at i sets i to the OR of its neighbors, a leak mark at i clears i.

    Args:
        diagram: Graphical construction
        B: Dual initial set
        s: Starting (top) time
        t: Elapsed dual time, 0 <= t <= s
        window: Optional sub-window
        rule: Neighbor combination rule ("or"; "and" exists for mutation tests)

    Returns:
        Sites i with (i, s - t) connected to B x {s}

    Raises:
        TimeOrderError: unless 0 <= t <= s <= horizon
    """
    if not 0.0 <= t <= s <= diagram.horizon:
        raise TimeOrderError(f"need 0 <= t <= s <= horizon, got t={t}, s={s}")
    lo, hi = _bounds(diagram, window)
    combine = DUAL_RULES[rule]
    state = _load(B, lo, hi)
    start = int(np.searchsorted(diagram.times, s - t, side="right"))
    stop = int(np.searchsorted(diagram.times, s, side="right"))
    sites = diagram.sites[start:stop].tolist()
    kinds = diagram.kinds[start:stop].tolist()
    for i, kind in zip(reversed(sites), reversed(kinds)):
        if lo <= i <= hi:
            _apply_dual(state, i - lo, kind, combine)
    return _unload(state, lo, hi)


def dual_forward_state(
    diagram: Diagram,
    A: Configuration,
    t: float,
    window: Optional[Tuple[int, int]] = None,
) -> Configuration:
    """
    Forward sweep under the dual rules.

    At a spike event at i the new state of i is (state of i-1) OR
    (state of i+1); at a leak mark i deactivates.
    """
    _check_time(diagram, t)
    lo, hi = _bounds(diagram, window)
    combine = DUAL_RULES["or"]
    state = _load(A, lo, hi)
    n = int(np.searchsorted(diagram.times, t, side="right"))
    for i, kind in zip(diagram.sites[:n].tolist(), diagram.kinds[:n].tolist()):
        if lo <= i <= hi:
            _apply_dual(state, i - lo, kind, combine)
    return _unload(state, lo, hi)
