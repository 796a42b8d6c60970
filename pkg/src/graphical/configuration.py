"""
Finite configurations of active sites.
"""
from dataclasses import dataclass
from typing import FrozenSet, Iterable, Iterator, Optional

import numpy as np

from ..errors import ParameterError


@dataclass(frozen=True)
class Configuration:
    """
    Finite set of active sites on a window of the integer line.

    Attributes:
        active: Active sites
        lo: Left window bound (None for an unbounded side)
        hi: Right window bound (None for an unbounded side)
    """
    active: FrozenSet[int]
    lo: Optional[int] = None
    hi: Optional[int] = None

    def __post_init__(self):
        active = frozenset(int(i) for i in self.active)
        object.__setattr__(self, "active", active)
        if self.lo is not None and self.hi is not None and self.lo > self.hi:
            raise ParameterError(f"empty window [{self.lo}, {self.hi}]")
        if active:
            if self.lo is not None and min(active) < self.lo:
                raise ParameterError(f"site {min(active)} left of window bound {self.lo}")
            if self.hi is not None and max(active) > self.hi:
                raise ParameterError(f"site {max(active)} right of window bound {self.hi}")

    @classmethod
    def from_sites(cls, sites: Iterable[int], lo: Optional[int] = None, hi: Optional[int] = None) -> "Configuration":
        return cls(frozenset(sites), lo, hi)

    @classmethod
    def empty(cls, lo: Optional[int] = None, hi: Optional[int] = None) -> "Configuration":
        return cls(frozenset(), lo, hi)

    @classmethod
    def full(cls, lo: int, hi: int) -> "Configuration":
        """All sites of [lo, hi] active."""
        return cls(frozenset(range(lo, hi + 1)), lo, hi)

    @classmethod
    def from_bits(cls, bits: int, lo: int, hi: int) -> "Configuration":
        """Decode a bit index (bit k is site lo + k)."""
        active = [lo + k for k in range(hi - lo + 1) if (bits >> k) & 1]
        return cls(frozenset(active), lo, hi)

    def to_bits(self) -> int:
        """Encode as a bit index relative to the left window bound."""
        if self.lo is None:
            raise ParameterError("bit encoding needs a bounded window")
        bits = 0
        for i in self.active:
            bits |= 1 << (i - self.lo)
        return bits

    def is_empty(self) -> bool:
        return not self.active

    def __len__(self) -> int:
        return len(self.active)

    def __contains__(self, site) -> bool:
        return site in self.active

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self.active))

    @property
    def leftmost(self) -> Optional[int]:
        return min(self.active) if self.active else None

    @property
    def rightmost(self) -> Optional[int]:
        return max(self.active) if self.active else None

    def union(self, other: "Configuration") -> "Configuration":
        return Configuration(self.active | other.active, self.lo, self.hi)

    def intersection(self, other: "Configuration") -> "Configuration":
        return Configuration(self.active & other.active, self.lo, self.hi)

    def issubset(self, other: "Configuration") -> bool:
        return self.active <= other.active

    def intersects(self, other) -> bool:
        """True if the active sets share a site (other may be any iterable)."""
        sites = other.active if isinstance(other, Configuration) else set(other)
        return not self.active.isdisjoint(sites)

    def shift(self, k: int) -> "Configuration":
        lo = None if self.lo is None else self.lo + k
        hi = None if self.hi is None else self.hi + k
        return Configuration(frozenset(i + k for i in self.active), lo, hi)

    def restrict(self, lo: Optional[int], hi: Optional[int]) -> "Configuration":
        """Active sites inside [lo, hi], re-bounded to that window."""
        active = frozenset(
            i for i in self.active
            if (lo is None or i >= lo) and (hi is None or i <= hi)
        )
        return Configuration(active, lo, hi)

    def indicator(self, sites: Iterable[int]) -> np.ndarray:
        """0/1 vector of the given sites."""
        return np.array([1 if i in self.active else 0 for i in sites], dtype=np.int8)

    def __str__(self) -> str:
        return "{" + ", ".join(str(i) for i in self) + "}"
