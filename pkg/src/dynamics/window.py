"""
Simulation windows and light-cone margins.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Tuple

from ..errors import ParameterError

DEFAULT_SPEED = 4.0


class WindowKind(Enum):
    """What a finite window stands for."""
    FINITE = "finite"                  # the finite system on [-n, n]
    HALF_LINE_RIGHT = "half_line_right"  # approximates [m, +inf), right side truncated
    HALF_LINE_LEFT = "half_line_left"    # approximates (-inf, m], left side truncated
    LIGHT_CONE = "light_cone"          # approximates Z, both sides truncated


def required_margin(horizon: float, speed: float = DEFAULT_SPEED) -> int:
    """Light-cone margin ceil(speed * horizon)."""
    if horizon < 0.0 or speed <= 0.0:
        raise ParameterError("horizon must be >= 0 and speed > 0")
    return int(math.ceil(speed * horizon))


@dataclass(frozen=True)
class Window:
    """
    Integer interval [lo, hi] plus what it approximates.

    Attributes:
        kind: Window kind
        lo: Left bound (inclusive)
        hi: Right bound (inclusive)
        margin: Sites added beyond the region of interest on truncated sides
    """
    kind: WindowKind
    lo: int
    hi: int
    margin: int = 0

    def __post_init__(self):
        if self.lo > self.hi:
            raise ParameterError(f"empty window [{self.lo}, {self.hi}]")
        if self.margin < 0:
            raise ParameterError(f"margin must be >= 0, got {self.margin}")

    @classmethod
    def finite(cls, n: int) -> "Window":
        """The window [-n, n] of the finite system."""
        if n < 0:
            raise ParameterError(f"n must be >= 0, got {n}")
        return cls(WindowKind.FINITE, -n, n)

    @classmethod
    def light_cone(cls, sites: Iterable[int], horizon: float, speed: float = DEFAULT_SPEED) -> "Window":
        """Window around an observation set, padded by the margin on both sides."""
        sites = list(sites)
        if not sites:
            raise ParameterError("observation set is empty")
        margin = required_margin(horizon, speed)
        return cls(WindowKind.LIGHT_CONE, min(sites) - margin, max(sites) + margin, margin)

    @classmethod
    def half_line_right(cls, m: int, reach: int, horizon: float, speed: float = DEFAULT_SPEED) -> "Window":
        """Approximation of [m, +inf) observed up to site m + reach."""
        margin = required_margin(horizon, speed)
        return cls(WindowKind.HALF_LINE_RIGHT, m, m + reach + margin, margin)

    @classmethod
    def half_line_left(cls, m: int, reach: int, horizon: float, speed: float = DEFAULT_SPEED) -> "Window":
        """Approximation of (-inf, m] observed down to site m - reach."""
        margin = required_margin(horizon, speed)
        return cls(WindowKind.HALF_LINE_LEFT, m - reach - margin, m, margin)

    @property
    def bounds(self) -> Tuple[int, int]:
        return (self.lo, self.hi)

    @property
    def width(self) -> int:
        return self.hi - self.lo + 1

    @property
    def truncated_left(self) -> bool:
        return self.kind in (WindowKind.HALF_LINE_LEFT, WindowKind.LIGHT_CONE)

    @property
    def truncated_right(self) -> bool:
        return self.kind in (WindowKind.HALF_LINE_RIGHT, WindowKind.LIGHT_CONE)

    def sites(self) -> range:
        return range(self.lo, self.hi + 1)

    def __contains__(self, site) -> bool:
        return self.lo <= site <= self.hi

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "lo": self.lo, "hi": self.hi, "margin": self.margin}
