"""
Membrane-potential model with hard threshold.

A neuron with positive potential spikes at rate 1: its potential resets to
0 and each in-window neighbor's potential goes up by one. Leaks at rate gamma
reset the potential to 0. Since only the sign of the potential matters for
the rates, the process is driven by the auxiliary process machinery and the
potentials ride along.
"""
from dataclasses import dataclass, field
from typing import Dict, Optional

from ..errors import ParameterError
from ..graphical import Configuration
from ..randomness import StreamKey, StreamRole, UniformBuffer, derive_stream
from .auxiliary import AuxiliaryProcess, run_until_extinction
from .records import RunStatus, SpikeLog
from .window import Window


@dataclass(frozen=True)
class MembraneState:
    """
    Integer potentials on a window (sites not listed are at 0).

    Attributes:
        potentials: site -> potential (>= 0)
        lo: Left window bound
        hi: Right window bound
    """
    potentials: Dict[int, int] = field(default_factory=dict)
    lo: Optional[int] = None
    hi: Optional[int] = None

    def __post_init__(self):
        clean = {}
        for site, x in self.potentials.items():
            if int(x) < 0:
                raise ParameterError(f"potential of site {site} is negative: {x}")
            if (self.lo is not None and site < self.lo) or (self.hi is not None and site > self.hi):
                raise ParameterError(f"site {site} outside window [{self.lo}, {self.hi}]")
            if int(x) > 0:
                clean[int(site)] = int(x)
        object.__setattr__(self, "potentials", clean)

    def potential(self, site: int) -> int:
        return self.potentials.get(site, 0)

    def indicator(self) -> Configuration:
        """Sites with positive potential."""
        return Configuration(frozenset(self.potentials), self.lo, self.hi)


class MembraneProcess(AuxiliaryProcess):
    """Auxiliary process carrying integer potentials."""

    def __init__(self, init: MembraneState, gamma: float, lo: Optional[int] = None, hi: Optional[int] = None):
        lo = init.lo if lo is None else lo
        hi = init.hi if hi is None else hi
        super().__init__(init.indicator(), gamma, lo, hi)
        self.potentials: Dict[int, int] = dict(init.potentials)

    def apply_spike(self, site: int) -> bool:
        fired = super().apply_spike(site)
        if fired:
            self.potentials.pop(site, None)
            for nb in (site - 1, site + 1):
                if self.in_window(nb):
                    self.potentials[nb] = self.potentials.get(nb, 0) + 1
        return fired

    def apply_leak(self, site: int) -> bool:
        leaked = super().apply_leak(site)
        if leaked:
            self.potentials.pop(site, None)
        return leaked

    def membrane_state(self) -> MembraneState:
        return MembraneState(dict(self.potentials), self.lo, self.hi)

    def snapshot(self):
        return self.membrane_state()


@dataclass
class MembraneRun:
    """
    Outcome of a membrane run.

    Attributes:
        state: Potentials at end_time
        spike_log: Every spike of the run
        status: EXTINCT if all potentials reached 0 before the horizon
        events: Number of events simulated
        end_time: Horizon, or the extinction time
    """
    state: MembraneState
    spike_log: SpikeLog
    status: RunStatus
    events: int
    end_time: float


def simulate_membrane(
    n: int,
    init_potentials: MembraneState,
    gamma: float,
    horizon: float,
    key: StreamKey,
    max_events: Optional[int] = None,
) -> MembraneRun:
    """
    Run the membrane model on [-n, n] up to the horizon.

    With the same key, the activity indicator follows exactly the
    trajectory of simulate_extinction from the indicator configuration.

    Args:
        n: Window half-width
        init_potentials: Initial potentials
        gamma: Leak rate
        horizon: Time horizon
        key: Stream address
        max_events: Optional event cap

    Returns:
        MembraneRun
    """
    window = Window.finite(n)
    process = MembraneProcess(init_potentials, gamma, window.lo, window.hi)
    process.spike_log = SpikeLog()
    buffer = UniformBuffer(derive_stream(key.with_role(StreamRole.FORWARD_MARKS)))
    status, events = run_until_extinction(process, buffer, max_events, horizon)
    return MembraneRun(
        state=process.membrane_state(),
        spike_log=process.spike_log,
        status=status,
        events=events,
        end_time=process.time,
    )
