"""
Result records of the simulators: spike logs, observed trajectories and
edge tracks.
"""
import json
import math
from bisect import bisect_right
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..errors import CoverageError, TimeOrderError
from ..graphical import Configuration


class RunStatus(Enum):
    """How a simulation ended."""
    EXTINCT = "extinct"
    HORIZON = "horizon"
    EVENT_CAP = "event_cap"


class SpikeLog:
    """
    Spike times per site, stored column-wise.

    Spikes are appended in time order by the simulators, so each site's
    times are increasing.
    """

    def __init__(self):
        self._sites: List[int] = []
        self._times: List[float] = []

    def record(self, site: int, time: float):
        self._sites.append(site)
        self._times.append(time)

    def extend(self, sites: Sequence[int], times: Sequence[float]):
        """Append spikes in time order."""
        self._sites.extend(int(s) for s in sites)
        self._times.extend(float(t) for t in times)

    def __len__(self) -> int:
        return len(self._times)

    @property
    def sites(self) -> np.ndarray:
        return np.asarray(self._sites, dtype=np.int64)

    @property
    def times(self) -> np.ndarray:
        return np.asarray(self._times, dtype=float)

    def site_times(self, site: int) -> np.ndarray:
        """Spike times of one site."""
        return self.times[self.sites == site]

    def count(self, sites: Iterable[int], t0: float, t1: float) -> int:
        """Number of spikes of the given sites in [t0, t1]."""
        if not self._times:
            return 0
        wanted = np.isin(self.sites, np.fromiter(sites, dtype=np.int64))
        times = self.times
        return int(np.count_nonzero(wanted & (times >= t0) & (times <= t1)))

    def to_frame(self, replica: int = 0) -> pd.DataFrame:
        """DataFrame with columns replica, site, time."""
        return pd.DataFrame({
            "replica": np.full(len(self), replica, dtype=np.int64),
            "site": self.sites,
            "time": self.times,
        })

    def to_csv(self, path: Union[str, Path], replica: int = 0) -> Path:
        path = Path(path)
        self.to_frame(replica).to_csv(path, index=False)
        return path

    @staticmethod
    def concat(logs: Sequence[Tuple[int, "SpikeLog"]]) -> pd.DataFrame:
        """Stack (replica, log) pairs into one table."""
        frames = [log.to_frame(replica) for replica, log in logs]
        if not frames:
            return pd.DataFrame(columns=["replica", "site", "time"])
        return pd.concat(frames, ignore_index=True)


class ObservedTrajectory:
    """
    Piecewise-constant trajectory of the states of an observation set.

    Only state changes are stored; the state at t includes every change at
    time <= t. The trajectory covers [0, end_time].
    """

    def __init__(self, sites: Iterable[int], initial: Configuration):
        self.sites: Tuple[int, ...] = tuple(sorted(set(sites)))
        self._site_set = frozenset(self.sites)
        self.initial = frozenset(initial.active & self._site_set)
        self._changes: List[Tuple[float, int, str, int]] = []
        self._change_times: List[float] = []
        self.end_time = 0.0

    def observes(self, site: int) -> bool:
        return site in self._site_set

    def record(self, time: float, site: int, kind: str, value: int):
        """Record that an observed site switched to value at time."""
        if self._change_times and time < self._change_times[-1]:
            raise TimeOrderError(f"change at {time} before last change at {self._change_times[-1]}")
        self._changes.append((time, site, kind, value))
        self._change_times.append(time)

    def close(self, end_time: float):
        """Mark the trajectory as covering [0, end_time]."""
        self.end_time = end_time

    def __len__(self) -> int:
        return len(self._changes)

    def _state_after(self, n_changes: int) -> set:
        state = set(self.initial)
        for _, site, _, value in self._changes[:n_changes]:
            if value:
                state.add(site)
            else:
                state.discard(site)
        return state

    def state_at(self, t: float) -> Configuration:
        """Observed configuration at time t."""
        if t < 0.0 or t > self.end_time:
            raise CoverageError(f"time {t} outside covered range [0, {self.end_time}]")
        n = bisect_right(self._change_times, t)
        return Configuration(frozenset(self._state_after(n)))

    def segments(self, t0: float, t1: float) -> Iterator[Tuple[float, float, Configuration]]:
        """
        Constant pieces (start, end, state) tiling [t0, t1].

        Raises:
            CoverageError: if [t0, t1] is not inside [0, end_time]
        """
        if t0 < 0.0 or t1 > self.end_time or t0 > t1:
            raise CoverageError(f"[{t0}, {t1}] not covered by [0, {self.end_time}]")
        n = bisect_right(self._change_times, t0)
        state = self._state_after(n)
        start = t0
        for time, site, _, value in self._changes[n:]:
            if time >= t1:
                break
            if time > start:
                yield start, time, Configuration(frozenset(state))
                start = time
            if value:
                state.add(site)
            else:
                state.discard(site)
        if t1 > start:
            yield start, t1, Configuration(frozenset(state))

    def to_records(self) -> List[Dict]:
        """One dict per change: {t, site, kind, state_delta}."""
        return [
            {"t": time, "site": site, "kind": kind, "state_delta": 1 if value else -1}
            for time, site, kind, value in self._changes
        ]

    def to_jsonl(self, path: Union[str, Path]) -> Path:
        """Write the changes as JSON lines."""
        path = Path(path)
        with path.open("w") as f:
            for rec in self.to_records():
                f.write(json.dumps(rec) + "\n")
        return path


class EdgeTrack:
    """Piecewise-constant edge position, recorded when it changes."""

    def __init__(self, start: Optional[int], time: float = 0.0):
        self._times: List[float] = [time]
        self._values: List[float] = [math.nan if start is None else float(start)]

    def record(self, time: float, value: Optional[int]):
        value = math.nan if value is None else float(value)
        last = self._values[-1]
        if value == last or (math.isnan(value) and math.isnan(last)):
            return
        if time == self._times[-1]:
            self._values[-1] = value
        else:
            self._times.append(time)
            self._values.append(value)

    @property
    def times(self) -> np.ndarray:
        return np.asarray(self._times)

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self._values)

    def value_at(self, t: float) -> float:
        """Edge position at t (nan once the configuration is empty)."""
        k = bisect_right(self._times, t) - 1
        if k < 0:
            raise TimeOrderError(f"time {t} before track start {self._times[0]}")
        return self._values[k]

    @property
    def final(self) -> float:
        return self._values[-1]

    def __len__(self) -> int:
        return len(self._times)
