"""
Poisson mark generation.
"""
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterator

import numpy as np

from ..errors import ParameterError

MAX_REDRAWS = 16


class MarkKind(IntEnum):
    """Kind of a Poisson mark on the time-space diagram."""
    SPIKE = 0
    LEAK = 1

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "MarkKind":
        try:
            return cls[label.upper()]
        except KeyError:
            raise ParameterError(f"unknown mark kind '{label}'") from None


@dataclass(frozen=True)
class MarkSequence:
    """
    Ordered mark times of one site and kind.

    Attributes:
        site: Lattice site
        kind: Spike or leak mark
        times: Strictly increasing times in [0, horizon]
        horizon: Upper time bound
    """
    site: int
    kind: MarkKind
    times: np.ndarray
    horizon: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.size:
            if times[0] < 0.0 or times[-1] > self.horizon:
                raise ParameterError("mark times must lie in [0, horizon]")
            if np.any(np.diff(times) <= 0.0):
                raise ParameterError("mark times must be strictly increasing")
        times.setflags(write=False)
        object.__setattr__(self, "times", times)

    def __len__(self) -> int:
        return int(self.times.size)


def _check_rate_horizon(rate: float, horizon: float):
    if not (np.isfinite(rate) and np.isfinite(horizon)):
        raise ParameterError("rate and horizon must be finite")
    if rate < 0.0:
        raise ParameterError(f"rate must be >= 0, got {rate}")
    if horizon < 0.0:
        raise ParameterError(f"horizon must be >= 0, got {horizon}")


def poisson_marks(
    stream: np.random.Generator,
    rate: float,
    horizon: float,
    site: int = 0,
    kind: MarkKind = MarkKind.SPIKE,
) -> MarkSequence:
    """
    Draw a homogeneous Poisson process on [0, horizon].

    The count is Poisson(rate * horizon) and, given the count, the times are
    sorted uniforms; exact ties (probability zero) are redrawn.

    Args:
        stream: Random stream
        rate: Intensity (>= 0)
        horizon: Time horizon (>= 0)
        site: Site the marks belong to
        kind: Mark kind

    Returns:
        MarkSequence
    """
    _check_rate_horizon(rate, horizon)
    count = int(stream.poisson(rate * horizon)) if rate > 0.0 else 0
    for _ in range(MAX_REDRAWS):
        times = np.sort(stream.uniform(0.0, horizon, count))
        if count < 2 or np.all(np.diff(times) > 0.0):
            return MarkSequence(site=site, kind=kind, times=times, horizon=horizon)
    raise ParameterError("could not draw distinct mark times")


def lazy_marks(stream: np.random.Generator, rate: float, horizon: float) -> Iterator[float]:
    """
    Yield Poisson mark times one at a time by exponential increments.

    Args:
        stream: Random stream
        rate: Intensity (>= 0)
        horizon: Time horizon (>= 0)

    Yields:
        Increasing mark times in [0, horizon]
    """
    _check_rate_horizon(rate, horizon)
    if rate == 0.0:
        return
    t = 0.0
    while True:
        t += stream.exponential(1.0 / rate)
        if t > horizon:
            return
        yield t
