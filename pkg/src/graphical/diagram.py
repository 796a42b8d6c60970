"""
Harris time-space diagram on a finite window.

Each site carries a rate-1 spike clock (every ring draws the arrow pair
i -> i-1, i -> i+1) and a rate-gamma clock of leak marks. Events are kept in
one array sorted by time.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, Tuple

import numpy as np

from ..errors import DiagramError, ParameterError
from ..randomness import MarkKind, StreamKey, poisson_marks, site_stream

logger = logging.getLogger(__name__)

MAX_BUILD_ATTEMPTS = 8

Event = Tuple[int, float, MarkKind]


@dataclass(frozen=True, eq=False)
class Diagram:
    """
    Immutable graphical construction.

    Attributes:
        lo: Left window bound
        hi: Right window bound
        horizon: Time horizon
        gamma: Leak rate
        sites: Event sites, sorted by time
        times: Event times, strictly increasing
        kinds: Event kinds (MarkKind codes)
    """
    lo: int
    hi: int
    horizon: float
    gamma: float
    sites: np.ndarray
    times: np.ndarray
    kinds: np.ndarray

    def __post_init__(self):
        if self.lo > self.hi:
            raise ParameterError(f"empty window [{self.lo}, {self.hi}]")
        if self.horizon < 0.0 or self.gamma < 0.0:
            raise ParameterError("horizon and gamma must be >= 0")
        sites = np.asarray(self.sites, dtype=np.int64)
        times = np.asarray(self.times, dtype=float)
        kinds = np.asarray(self.kinds, dtype=np.int8)
        if not (sites.shape == times.shape == kinds.shape):
            raise DiagramError("event arrays differ in length")
        if times.size:
            if times[0] < 0.0 or times[-1] > self.horizon:
                raise DiagramError("event time outside [0, horizon]")
            if np.any(np.diff(times) <= 0.0):
                raise DiagramError("events must have distinct, increasing times")
            if sites.min() < self.lo or sites.max() > self.hi:
                raise DiagramError("event site outside window")
        for arr in (sites, times, kinds):
            arr.setflags(write=False)
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "kinds", kinds)
        object.__setattr__(self, "_by_site", None)

    @classmethod
    def from_events(
        cls,
        lo: int,
        hi: int,
        horizon: float,
        gamma: float,
        events: Iterable[Event],
    ) -> "Diagram":
        """
        Build a diagram from explicit (site, time, kind) events.

        Raises:
            DiagramError: if two events share a timestamp
        """
        events = sorted((float(t), int(i), int(k)) for i, t, k in events)
        return cls(
            lo=lo, hi=hi, horizon=float(horizon), gamma=float(gamma),
            sites=[e[1] for e in events],
            times=[e[0] for e in events],
            kinds=[e[2] for e in events],
        )

    @property
    def window(self) -> Tuple[int, int]:
        return (self.lo, self.hi)

    @property
    def width(self) -> int:
        return self.hi - self.lo + 1

    def __len__(self) -> int:
        return int(self.times.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Diagram):
            return NotImplemented
        return (
            self.window == other.window
            and self.horizon == other.horizon
            and self.gamma == other.gamma
            and np.array_equal(self.sites, other.sites)
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.kinds, other.kinds)
        )

    def __hash__(self):
        return hash((self.window, self.horizon, self.gamma, self.times.tobytes()))

    def events(self) -> Iterator[Event]:
        """Iterate (site, time, kind) in increasing time."""
        for i, t, k in zip(self.sites.tolist(), self.times.tolist(), self.kinds.tolist()):
            yield i, t, MarkKind(k)

    def count(self, kind: MarkKind) -> int:
        return int(np.count_nonzero(self.kinds == kind))

    def site_events(self, site: int) -> Tuple[np.ndarray, np.ndarray]:
        """Times and kinds of the events at one site, in increasing time."""
        if self._by_site is None:
            by_site: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
            for i in np.unique(self.sites).tolist():
                mask = self.sites == i
                by_site[i] = (self.times[mask], self.kinds[mask])
            object.__setattr__(self, "_by_site", by_site)
        empty = (np.empty(0), np.empty(0, dtype=np.int8))
        return self._by_site.get(site, empty)

    def __repr__(self) -> str:
        return (
            f"Diagram(window=[{self.lo}, {self.hi}], horizon={self.horizon}, "
            f"gamma={self.gamma}, spikes={self.count(MarkKind.SPIKE)}, "
            f"leaks={self.count(MarkKind.LEAK)})"
        )


def _draw_events(lo: int, hi: int, horizon: float, gamma: float, key: StreamKey, attempt: int):
    sites, times, kinds = [], [], []
    for site in range(lo, hi + 1):
        for kind, rate in ((MarkKind.SPIKE, 1.0), (MarkKind.LEAK, gamma)):
            marks = poisson_marks(site_stream(key, site, kind, attempt), rate, horizon, site, kind)
            sites.append(np.full(len(marks), site, dtype=np.int64))
            times.append(marks.times)
            kinds.append(np.full(len(marks), int(kind), dtype=np.int8))
    sites = np.concatenate(sites)
    times = np.concatenate(times)
    kinds = np.concatenate(kinds)
    order = np.argsort(times, kind="stable")
    return sites[order], times[order], kinds[order]


def build_diagram(window: Tuple[int, int], horizon: float, gamma: float, key: StreamKey) -> Diagram:
    """
    Sample a graphical construction.

    Marks of each (site, kind) come from their own stream, so diagrams built
    with the same key on nested windows agree on their common sites.

    Args:
        window: (lo, hi) site bounds, inclusive
        horizon: Time horizon
        gamma: Leak rate (>= 0)
        key: Stream address

    Returns:
        Diagram

    Raises:
        DiagramError: if timestamps keep colliding after regeneration
    """
    lo, hi = int(window[0]), int(window[1])
    if gamma < 0.0:
        raise ParameterError(f"gamma must be >= 0, got {gamma}")
    if lo > hi:
        raise ParameterError(f"empty window [{lo}, {hi}]")

    for attempt in range(MAX_BUILD_ATTEMPTS):
        sites, times, kinds = _draw_events(lo, hi, horizon, gamma, key, attempt)
        if times.size < 2 or np.all(np.diff(times) > 0.0):
            return Diagram(lo, hi, float(horizon), float(gamma), sites, times, kinds)
        logger.warning(f"⚠ timestamp collision in diagram {key}, regenerating (attempt {attempt + 1})")

    raise DiagramError(f"timestamp collisions persisted after {MAX_BUILD_ATTEMPTS} attempts")


def mirror_diagram(diagram: Diagram, s: float) -> Diagram:
    """
    Time-reverse the events of [0, s]: an event at time T moves to s - T.

    Args:
        diagram: Source diagram
        s: Reflection time (0 <= s <= horizon)

    Returns:
        Diagram on the same window with horizon s
    """
    if not 0.0 <= s <= diagram.horizon:
        raise ParameterError(f"mirror time {s} outside [0, {diagram.horizon}]")
    keep = diagram.times <= s
    times = (s - diagram.times[keep])[::-1]
    return Diagram(
        diagram.lo, diagram.hi, float(s), diagram.gamma,
        diagram.sites[keep][::-1].copy(), times.copy(), diagram.kinds[keep][::-1].copy(),
    )


def shift_diagram(diagram: Diagram, k: int) -> Diagram:
    """Translate the diagram by k sites."""
    return Diagram(
        diagram.lo + k, diagram.hi + k, diagram.horizon, diagram.gamma,
        diagram.sites + k, diagram.times.copy(), diagram.kinds.copy(),
    )
