"""
Explicit valid-path enumeration.

Slow reference for the sweeps: a path climbing at site i follows time
upward until the first event at i. A leak mark ends it; a spike event forces
it across both arrows to i-1 and i+1. Used by the tests and the verify suite.
"""
from typing import Optional, Set, Tuple

import numpy as np

from ..randomness import MarkKind
from .configuration import Configuration
from .diagram import Diagram
from .sweeps import _bounds, _check_time


def enumerate_valid_paths(
    diagram: Diagram,
    A: Configuration,
    t: float,
    window: Optional[Tuple[int, int]] = None,
) -> Configuration:
    """
    Endpoints at time t of all valid paths started from A x {0}.

    Args:
        diagram: Graphical construction
        A: Starting sites
        t: End time
        window: Optional sub-window

    Returns:
        Configuration of reachable sites
    """
    _check_time(diagram, t)
    lo, hi = _bounds(diagram, window)
    reached: Set[int] = set()
    seen: Set[Tuple[int, float]] = set()
    stack = [(i, -1.0) for i in A.active if lo <= i <= hi]

    while stack:
        site, since = stack.pop()
        if (site, since) in seen:
            continue
        seen.add((site, since))

        times, kinds = diagram.site_events(site)
        k = int(np.searchsorted(times, since, side="right"))
        if k >= times.size or times[k] > t:
            reached.add(site)
            continue
        if kinds[k] == MarkKind.LEAK:
            continue
        when = float(times[k])
        for nb in (site - 1, site + 1):
            if lo <= nb <= hi:
                stack.append((nb, when))

    return Configuration(frozenset(reached), lo, hi)
