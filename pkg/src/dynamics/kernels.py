"""
Compiled event loops of the auxiliary process.

The kernels work on site offsets 0..width-1 of a window and keep the active
sites in an array plus a position index (-1 for inactive sites), swapping the
last entry into a removed slot. They consume uniforms in exactly the order of
AuxiliaryProcess.step (dwell, site, kind), so a compiled run and a run of the
Python process on the same stream agree event for event.

A kernel returns early when it runs short of uniforms or of log space; the
drivers below refill, flush the logs and call it again.
"""
import logging
import math
from typing import Optional, Tuple

import numpy as np
from numba import njit

from ..randomness import UniformBuffer
from .records import ObservedTrajectory, RunStatus, SpikeLog

logging.getLogger('numba').setLevel(logging.WARNING)

EXTINCT = 0
HORIZON = 1
EVENT_CAP = 2
NEED_UNIFORMS = 3
LOG_FULL = 4

KIND_LABELS = ("spike", "leak")
LOG_CAPACITY = 4096
# uniforms per refill; the sequence does not depend on it
KERNEL_BLOCK = 512

_STATUS = {EXTINCT: RunStatus.EXTINCT, HORIZON: RunStatus.HORIZON, EVENT_CAP: RunStatus.EVENT_CAP}


@njit(cache=True, inline='always')
def _add(active, pos, count, s):
    pos[s] = count
    active[count] = s
    return count + 1


@njit(cache=True, inline='always')
def _remove(active, pos, count, s):
    k = pos[s]
    count -= 1
    last = active[count]
    if last != s:
        active[k] = last
        pos[last] = k
    pos[s] = -1
    return count


@njit(cache=True, inline='always')
def _log_change(changes, n_changes, time, site, kind, value):
    changes[n_changes, 0] = time
    changes[n_changes, 1] = site
    changes[n_changes, 2] = kind
    changes[n_changes, 3] = value
    return n_changes + 1


@njit(cache=True)
def _fire(active, pos, count, site, time, observed, changes, n_changes):
    # spike at an active site: clear it, activate inactive neighbors
    width = pos.shape[0]
    count = _remove(active, pos, count, site)
    if observed[site]:
        n_changes = _log_change(changes, n_changes, time, site, 0, 0)
    nb = site - 1
    if nb >= 0 and pos[nb] < 0:
        count = _add(active, pos, count, nb)
        if observed[nb]:
            n_changes = _log_change(changes, n_changes, time, nb, 0, 1)
    nb = site + 1
    if nb < width and pos[nb] < 0:
        count = _add(active, pos, count, nb)
        if observed[nb]:
            n_changes = _log_change(changes, n_changes, time, nb, 0, 1)
    return count, n_changes


@njit(cache=True)
def extinction_kernel(active, pos, count, gamma, uniforms, cursor, time, events, max_events, max_time,
                      record_spikes, spikes, n_spikes, observed, changes, n_changes):
    """
    Active-site clocks until extinction, a cap, or a refill.

    max_events < 0 disables the event cap; max_time = inf disables the time
    cap. Returns (code, count, cursor, time, events, n_spikes, n_changes).
    """
    one_plus = 1.0 + gamma
    n_uniforms = uniforms.shape[0]
    while count > 0:
        if max_events >= 0 and events >= max_events:
            return EVENT_CAP, count, cursor, time, events, n_spikes, n_changes
        if cursor + 3 > n_uniforms:
            return NEED_UNIFORMS, count, cursor, time, events, n_spikes, n_changes
        if (record_spikes and n_spikes >= spikes.shape[0]) or n_changes + 3 > changes.shape[0]:
            return LOG_FULL, count, cursor, time, events, n_spikes, n_changes
        dwell = -math.log1p(-uniforms[cursor]) / (count * one_plus)
        cursor += 1
        if time + dwell > max_time:
            time = max_time
            return HORIZON, count, cursor, time, events, n_spikes, n_changes
        time += dwell
        k = int(uniforms[cursor] * count)
        if k >= count:
            k = count - 1
        cursor += 1
        site = active[k]
        is_spike = uniforms[cursor] * one_plus < 1.0
        cursor += 1
        events += 1
        if is_spike:
            if record_spikes:
                spikes[n_spikes, 0] = site
                spikes[n_spikes, 1] = time
                n_spikes += 1
            count, n_changes = _fire(active, pos, count, site, time, observed, changes, n_changes)
        else:
            count = _remove(active, pos, count, site)
            if observed[site]:
                n_changes = _log_change(changes, n_changes, time, site, 1, 0)
    return EXTINCT, count, cursor, time, events, n_spikes, n_changes


@njit(cache=True)
def windowed_kernel(active, pos, count, gamma, uniforms, cursor, time, events, horizon,
                    has_left, left_front, has_right, right_front, obs_lo, obs_hi, flag_time,
                    record_spikes, spikes, n_spikes, observed, changes, n_changes):
    """
    Full clocks on every window site up to the horizon, with contamination
    fronts advancing at the spike clocks of their front sites.

    flag_time is nan until a front reaches [obs_lo, obs_hi]. Returns (code,
    count, cursor, time, events, left_front, right_front, flag_time,
    n_spikes, n_changes).
    """
    width = pos.shape[0]
    rate = width * (1.0 + gamma)
    threshold = 1.0 / (1.0 + gamma)
    n_uniforms = uniforms.shape[0]
    while True:
        if cursor + 3 > n_uniforms:
            return (NEED_UNIFORMS, count, cursor, time, events, left_front, right_front, flag_time,
                    n_spikes, n_changes)
        if (record_spikes and n_spikes >= spikes.shape[0]) or n_changes + 3 > changes.shape[0]:
            return (LOG_FULL, count, cursor, time, events, left_front, right_front, flag_time,
                    n_spikes, n_changes)
        t = time + (-math.log1p(-uniforms[cursor]) / rate)
        cursor += 1
        if t > horizon:
            return (HORIZON, count, cursor, time, events, left_front, right_front, flag_time,
                    n_spikes, n_changes)
        time = t
        site = int(uniforms[cursor] * width)
        if site >= width:
            site = width - 1
        cursor += 1
        is_spike = uniforms[cursor] < threshold
        cursor += 1
        events += 1
        if is_spike:
            if pos[site] >= 0:
                if record_spikes:
                    spikes[n_spikes, 0] = site
                    spikes[n_spikes, 1] = time
                    n_spikes += 1
                count, n_changes = _fire(active, pos, count, site, time, observed, changes, n_changes)
            if has_left and site == left_front:
                left_front += 1
            if has_right and site == right_front:
                right_front -= 1
            if math.isnan(flag_time) and ((has_left and left_front >= obs_lo)
                                          or (has_right and right_front <= obs_hi)):
                flag_time = t
        elif pos[site] >= 0:
            count = _remove(active, pos, count, site)
            if observed[site]:
                n_changes = _log_change(changes, n_changes, time, site, 1, 0)


class KernelState:
    """
    Arrays a kernel mutates, plus the uniforms and logs between calls.

    Sites are stored as offsets from lo; flush() hands logged spikes and
    observed changes to the Python records with absolute sites.
    """

    def __init__(
        self,
        init_sites,
        lo: int,
        hi: int,
        buffer: UniformBuffer,
        spike_log: Optional[SpikeLog] = None,
        trajectory: Optional[ObservedTrajectory] = None,
    ):
        width = hi - lo + 1
        self.lo = lo
        self.active = np.empty(width, dtype=np.int64)
        self.pos = np.full(width, -1, dtype=np.int64)
        self.count = 0
        for i in sorted(init_sites):
            s = i - lo
            self.pos[s] = self.count
            self.active[self.count] = s
            self.count += 1
        self.buffer = buffer
        self.uniforms = buffer.take_array()
        self.cursor = 0
        self.spike_log = spike_log
        self.trajectory = trajectory
        self.spikes = np.empty((LOG_CAPACITY if spike_log is not None else 1, 2))
        self.changes = np.empty((LOG_CAPACITY, 4))
        self.observed = np.zeros(width, dtype=np.bool_)
        if trajectory is not None:
            for i in trajectory.sites:
                if lo <= i <= hi:
                    self.observed[i - lo] = True
        self.n_spikes = 0
        self.n_changes = 0

    @property
    def record_spikes(self) -> bool:
        return self.spike_log is not None

    def refill(self):
        self.buffer.give_back(self.uniforms[self.cursor:])
        self.uniforms = self.buffer.take_array()
        self.cursor = 0

    def flush(self):
        if self.spike_log is not None and self.n_spikes:
            self.spike_log.extend(self.spikes[:self.n_spikes, 0].astype(np.int64) + self.lo,
                                  self.spikes[:self.n_spikes, 1])
        if self.trajectory is not None:
            for time, site, kind, value in self.changes[:self.n_changes]:
                self.trajectory.record(float(time), int(site) + self.lo, KIND_LABELS[int(kind)], int(value))
        self.n_spikes = 0
        self.n_changes = 0

    def finish(self):
        self.flush()
        self.buffer.give_back(self.uniforms[self.cursor:])

    def active_sites(self) -> frozenset:
        return frozenset(int(s) + self.lo for s in self.active[:self.count])


def run_extinction(
    state: KernelState,
    gamma: float,
    max_events: Optional[int] = None,
    max_time: Optional[float] = None,
) -> Tuple[RunStatus, int, float]:
    """
    Drive extinction_kernel to extinction or a cap.

    Returns:
        (status, events, end time)
    """
    time, events = 0.0, 0
    cap_events = -1 if max_events is None else int(max_events)
    cap_time = math.inf if max_time is None else float(max_time)
    while True:
        code, state.count, state.cursor, time, events, state.n_spikes, state.n_changes = extinction_kernel(
            state.active, state.pos, state.count, float(gamma), state.uniforms, state.cursor, time, events,
            cap_events, cap_time, state.record_spikes, state.spikes, state.n_spikes,
            state.observed, state.changes, state.n_changes,
        )
        if code == NEED_UNIFORMS:
            state.refill()
        elif code == LOG_FULL:
            state.flush()
        else:
            state.finish()
            return _STATUS[code], events, time


def run_windowed(
    state: KernelState,
    gamma: float,
    horizon: float,
    fronts: Tuple[Optional[int], Optional[int]],
    observed_range: Tuple[int, int],
) -> Tuple[int, Optional[float]]:
    """
    Drive windowed_kernel to the horizon.

    Args:
        fronts: Initial left and right fronts (absolute sites; None when that
            side is not truncated)
        observed_range: Leftmost and rightmost observed site

    Returns:
        (events, flag time or None)
    """
    left, right = fronts
    has_left, has_right = left is not None, right is not None
    left_front = left - state.lo if has_left else 0
    right_front = right - state.lo if has_right else 0
    obs_lo, obs_hi = observed_range[0] - state.lo, observed_range[1] - state.lo
    time, events, flag_time = 0.0, 0, math.nan
    while True:
        (code, state.count, state.cursor, time, events, left_front, right_front, flag_time,
         state.n_spikes, state.n_changes) = windowed_kernel(
            state.active, state.pos, state.count, float(gamma), state.uniforms, state.cursor, time, events,
            float(horizon), has_left, left_front, has_right, right_front, obs_lo, obs_hi, flag_time,
            state.record_spikes, state.spikes, state.n_spikes, state.observed, state.changes, state.n_changes,
        )
        if code == NEED_UNIFORMS:
            state.refill()
        elif code == LOG_FULL:
            state.flush()
        else:
            state.finish()
            return events, None if math.isnan(flag_time) else float(flag_time)
