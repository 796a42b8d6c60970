"""
Event-driven simulator of the auxiliary process.

Only active sites carry clocks: each active site spikes at rate 1 and leaks
at rate gamma, so the total exit rate is |active| * (1 + gamma). A spike
clears the site and activates its in-window neighbors, a leak clears it.
"""
import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Optional, Tuple, Union

import numpy as np

from ..errors import ParameterError
from ..graphical import Configuration, Diagram
from ..randomness import MarkKind, StreamKey, StreamRole, UniformBuffer, derive_stream
from .kernels import KERNEL_BLOCK, KernelState, run_extinction
from .records import ObservedTrajectory, RunStatus, SpikeLog
from .window import Window

logger = logging.getLogger(__name__)


class AuxiliaryEvent(NamedTuple):
    """One clock ring: its time, site and kind, and whether it changed anything."""
    time: float
    site: int
    kind: MarkKind
    effective: bool


class AuxiliaryProcess:
    """
    Mutable auxiliary configuration on a window.

    Active sites are held in a list plus a position index so a uniform active
    site is drawn in O(1). Bounds of None leave that side open.
    """

    def __init__(
        self,
        init: Configuration,
        gamma: float,
        lo: Optional[int] = None,
        hi: Optional[int] = None,
    ):
        """
        Initialize the process.

        Args:
            init: Initial active set
            gamma: Leak rate (>= 0)
            lo: Left window bound (defaults to init.lo)
            hi: Right window bound (defaults to init.hi)
        """
        if gamma < 0.0:
            raise ParameterError(f"gamma must be >= 0, got {gamma}")
        self.gamma = float(gamma)
        self.lo = init.lo if lo is None else lo
        self.hi = init.hi if hi is None else hi
        self.time = 0.0
        self.spike_log: Optional[SpikeLog] = None
        self.trajectory: Optional[ObservedTrajectory] = None
        self._active: List[int] = []
        self._pos = {}
        for i in sorted(init.active):
            if not self.in_window(i):
                raise ParameterError(f"site {i} outside window [{self.lo}, {self.hi}]")
            self._add(i)

    def in_window(self, site: int) -> bool:
        return (self.lo is None or site >= self.lo) and (self.hi is None or site <= self.hi)

    def _add(self, site: int):
        self._pos[site] = len(self._active)
        self._active.append(site)

    def _remove(self, site: int):
        k = self._pos.pop(site)
        last = self._active.pop()
        if last != site:
            self._active[k] = last
            self._pos[last] = k

    def _set(self, site: int, value: int, kind: str):
        if value:
            self._add(site)
        else:
            self._remove(site)
        if self.trajectory is not None and self.trajectory.observes(site):
            self.trajectory.record(self.time, site, kind, value)

    def is_active(self, site: int) -> bool:
        return site in self._pos

    @property
    def size(self) -> int:
        return len(self._active)

    @property
    def total_rate(self) -> float:
        return len(self._active) * (1.0 + self.gamma)

    def is_extinct(self) -> bool:
        return not self._active

    def configuration(self) -> Configuration:
        return Configuration(frozenset(self._active), self.lo, self.hi)

    def snapshot(self):
        """State recorded by replay_skeleton."""
        return self.configuration()

    def apply_spike(self, site: int) -> bool:
        """Spike mark at site; a no-op unless the site is active."""
        if site not in self._pos:
            return False
        if self.spike_log is not None:
            self.spike_log.record(site, self.time)
        self._set(site, 0, "spike")
        for nb in (site - 1, site + 1):
            if self.in_window(nb) and nb not in self._pos:
                self._set(nb, 1, "spike")
        return True

    def apply_leak(self, site: int) -> bool:
        """Leak mark at site; a no-op unless the site is active."""
        if site not in self._pos:
            return False
        self._set(site, 0, "leak")
        return True

    def apply(self, site: int, kind: MarkKind) -> bool:
        if kind == MarkKind.SPIKE:
            return self.apply_spike(site)
        return self.apply_leak(site)

    def step(self, buffer: UniformBuffer, until: Optional[float] = None) -> Optional[AuxiliaryEvent]:
        """
        Advance to the next event.

        Uses three uniforms: dwell time, site, kind.

        Args:
            buffer: Uniform source
            until: Optional time cap; an event past it is discarded and the
                clock stops at until

        Returns:
            The event, or None if the configuration is empty or the cap was hit
        """
        k = len(self._active)
        if k == 0:
            return None
        dwell = buffer.exponential(k * (1.0 + self.gamma))
        if until is not None and self.time + dwell > until:
            self.time = until
            return None
        self.time += dwell
        site = self._active[buffer.index(k)]
        kind = MarkKind.SPIKE if buffer.uniform() * (1.0 + self.gamma) < 1.0 else MarkKind.LEAK
        self.apply(site, kind)
        return AuxiliaryEvent(self.time, site, kind, True)


class AuxiliaryStep(NamedTuple):
    configuration: Configuration
    event: Optional[AuxiliaryEvent]
    dwell: float

    @property
    def extinct(self) -> bool:
        return self.event is None


def _as_buffer(stream: Union[UniformBuffer, np.random.Generator]) -> UniformBuffer:
    return stream if isinstance(stream, UniformBuffer) else UniformBuffer(stream)


def step_auxiliary(
    config: Configuration,
    gamma: float,
    stream: Union[UniformBuffer, np.random.Generator],
) -> AuxiliaryStep:
    """
    One transition of the auxiliary process from config.

    Args:
        config: Current configuration (window taken from its bounds)
        gamma: Leak rate
        stream: Random stream or uniform buffer

    Returns:
        AuxiliaryStep; on an empty configuration event is None and dwell is inf
    """
    process = AuxiliaryProcess(config, gamma)
    event = process.step(_as_buffer(stream))
    if event is None:
        return AuxiliaryStep(config, None, math.inf)
    return AuxiliaryStep(process.configuration(), event, event.time)


@dataclass
class ExtinctionRun:
    """
    Outcome of one finite-window run.

    Attributes:
        tau: Extinction time (None unless status is EXTINCT)
        status: EXTINCT, or HORIZON / EVENT_CAP when a cap stopped the run
        spike_log: Every spike of the run
        events: Number of events simulated
        end_time: Time the run stopped at
        final: Configuration at end_time
        trajectory: Observed trajectory when requested
    """
    tau: Optional[float]
    status: RunStatus
    spike_log: SpikeLog
    events: int
    end_time: float
    final: Configuration
    trajectory: Optional[ObservedTrajectory] = None

    @property
    def capped(self) -> bool:
        return self.status != RunStatus.EXTINCT


def run_until_extinction(
    process: AuxiliaryProcess,
    buffer: UniformBuffer,
    max_events: Optional[int] = None,
    max_time: Optional[float] = None,
) -> Tuple[RunStatus, int]:
    """
    Step a process until it dies or a cap is hit.

    A time cap stops the process at exactly max_time (the pending event is
    discarded), so the state it reports is the state at max_time.
    """
    events = 0
    while not process.is_extinct():
        if max_events is not None and events >= max_events:
            return RunStatus.EVENT_CAP, events
        if process.step(buffer, until=max_time) is None:
            return RunStatus.HORIZON, events
        events += 1
    return RunStatus.EXTINCT, events


def simulate_extinction(
    n: int,
    init: Optional[Configuration],
    gamma: float,
    key: StreamKey,
    max_events: Optional[int] = None,
    max_time: Optional[float] = None,
    observe: Optional[Iterable[int]] = None,
    record_spikes: bool = True,
) -> ExtinctionRun:
    """
    Run the finite process on [-n, n] until extinction.

    Args:
        n: Window half-width
        init: Initial configuration (None for all sites active)
        gamma: Leak rate
        key: Stream address (forward-marks role is used)
        max_events: Optional event cap
        max_time: Optional time cap
        observe: Sites whose trajectory is recorded
        record_spikes: Keep the spike log

    Returns:
        ExtinctionRun
    """
    window = Window.finite(n)
    if init is None:
        init = Configuration.full(window.lo, window.hi)
    if gamma < 0.0:
        raise ParameterError(f"gamma must be >= 0, got {gamma}")
    if not init.active <= frozenset(window.sites()):
        raise ParameterError(f"initial sites outside window [{window.lo}, {window.hi}]")
    if gamma == 0.0 and window.width > 1 and not init.is_empty() and max_events is None and max_time is None:
        raise ParameterError("gamma = 0 on two or more sites never goes extinct; set max_events or max_time")
    spike_log = SpikeLog() if record_spikes else None
    trajectory = ObservedTrajectory(observe, init) if observe is not None else None

    buffer = UniformBuffer(derive_stream(key.with_role(StreamRole.FORWARD_MARKS)), block=KERNEL_BLOCK)
    state = KernelState(init.active, window.lo, window.hi, buffer, spike_log, trajectory)
    status, events, end_time = run_extinction(state, gamma, max_events, max_time)

    if trajectory is not None:
        # the empty configuration is absorbing, so an extinct run covers any time cap
        trajectory.close(end_time if status != RunStatus.EXTINCT or max_time is None else max(end_time, max_time))
    if status != RunStatus.EXTINCT:
        logger.debug(f"run {key.replica_id} stopped by {status.value} at t={end_time:.3f}")
    return ExtinctionRun(
        tau=end_time if status == RunStatus.EXTINCT else None,
        status=status,
        spike_log=spike_log if spike_log is not None else SpikeLog(),
        events=events,
        end_time=end_time,
        final=Configuration(state.active_sites(), window.lo, window.hi),
        trajectory=trajectory,
    )


def replay_skeleton(diagram: Diagram, process: AuxiliaryProcess) -> List[Tuple[float, object]]:
    """
    Drive a process with the events of a diagram.

    Events outside the process window are skipped; leak marks and spike
    marks at inactive sites are no-ops, exactly as in the sweeps.

    Returns:
        (time, snapshot) after every in-window event, starting at (0.0, initial)
    """
    out = [(0.0, process.snapshot())]
    for site, time, kind in diagram.events():
        if not process.in_window(site):
            continue
        process.time = time
        process.apply(site, kind)
        out.append((time, process.snapshot()))
    return out
