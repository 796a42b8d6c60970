"""
Windowed approximations of the infinite and semi-infinite processes.

Every window site carries its full spike and leak clocks (rings at inactive
sites are no-ops). That makes the contamination fronts exact: a truncated
boundary can only corrupt the state next to it, and the corrupted region
grows by one site each time the spike clock at its front site rings. A run
whose front reaches the observation set is flagged.
"""
import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional

from ..errors import ParameterError
from ..graphical import Configuration
from ..randomness import StreamKey, StreamRole, UniformBuffer, derive_stream
from .kernels import KERNEL_BLOCK, KernelState, run_windowed
from .records import ObservedTrajectory, SpikeLog
from .window import DEFAULT_SPEED, Window

logger = logging.getLogger(__name__)


@dataclass
class WindowedRun:
    """
    Outcome of a windowed run.

    Attributes:
        window: Simulation window, margin included
        trajectory: States of the observation set over [0, horizon]
        flagged: True if a contamination front reached the observation set
        flag_time: When it did (None if never)
        events: Clock rings simulated
        final: Whole-window configuration at the horizon
        spike_log: Spikes inside the window when requested
    """
    window: Window
    trajectory: ObservedTrajectory
    flagged: bool
    flag_time: Optional[float]
    events: int
    final: Configuration
    spike_log: Optional[SpikeLog] = field(default=None, repr=False)


def simulate_windowed(
    window: Window,
    gamma: float,
    horizon: float,
    observation_set: Iterable[int],
    key: StreamKey,
    init: Optional[Configuration] = None,
    record_spikes: bool = False,
) -> WindowedRun:
    """
    Full-clock simulation on a window with contamination fronts.

    Args:
        window: Window (truncated sides come from its kind)
        gamma: Leak rate
        horizon: Time horizon
        observation_set: Sites whose states are recorded
        key: Stream address
        init: Initial configuration (None for all-active)
        record_spikes: Keep the spike log

    Returns:
        WindowedRun
    """
    observed = sorted(set(observation_set))
    if not observed:
        raise ParameterError("observation set is empty")
    if observed[0] < window.lo or observed[-1] > window.hi:
        raise ParameterError(f"observation set not inside window [{window.lo}, {window.hi}]")
    if gamma < 0.0:
        raise ParameterError(f"gamma must be >= 0, got {gamma}")
    if init is None:
        init = Configuration.full(window.lo, window.hi)
    elif not init.active <= frozenset(window.sites()):
        raise ParameterError(f"initial sites outside window [{window.lo}, {window.hi}]")

    trajectory = ObservedTrajectory(observed, init)
    spike_log = SpikeLog() if record_spikes else None
    fronts = (window.lo if window.truncated_left else None, window.hi if window.truncated_right else None)

    buffer = UniformBuffer(derive_stream(key.with_role(StreamRole.FORWARD_MARKS)), block=KERNEL_BLOCK)
    state = KernelState(init.active, window.lo, window.hi, buffer, spike_log, trajectory)
    events, flag_time = run_windowed(state, gamma, horizon, fronts, (observed[0], observed[-1]))
    if flag_time is not None:
        logger.debug(f"⚠ contamination front reached observation set at t={flag_time:.3f}")

    trajectory.close(horizon)
    return WindowedRun(
        window=window,
        trajectory=trajectory,
        flagged=flag_time is not None,
        flag_time=flag_time,
        events=events,
        final=Configuration(state.active_sites(), window.lo, window.hi),
        spike_log=spike_log,
    )


def simulate_windowed_infinite(
    gamma: float,
    horizon: float,
    observation_set: Iterable[int],
    key: StreamKey,
    speed: float = DEFAULT_SPEED,
    init: Optional[Configuration] = None,
    record_spikes: bool = False,
) -> WindowedRun:
    """
    Approximate the process on the whole line, started all-active, by a
    light-cone window around the observation set.

    Args:
        gamma: Leak rate
        horizon: Time horizon
        observation_set: Finite set of observed sites
        key: Stream address
        speed: Light-cone speed; margin = ceil(speed * horizon)
        init: Initial configuration on the window (None for all-active)
        record_spikes: Keep the spike log

    Returns:
        WindowedRun (its window carries the margin)
    """
    observed = list(observation_set)
    window = Window.light_cone(observed, horizon, speed)
    return simulate_windowed(window, gamma, horizon, observed, key, init, record_spikes)
