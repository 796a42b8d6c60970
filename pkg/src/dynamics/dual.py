"""
Event-driven dual process.

Every site has a rate-1 clock; when it rings the site takes the OR of its
two neighbors. Kill marks clear active sites. Only clocks that would change
something are simulated: a site can change at its clock only when its state
differs from the OR of its neighbors (its "flip set" membership), and a kill
only matters at an active site.

One engine runs k coupled copies on shared clocks. Kill marks come in
layers, each with a rate and the set of copies it acts on, which gives the
shared-marks couplings between leak rates (gamma, gamma + lambda, or a
whole nested gamma grid).

Truncated windows keep exact contamination fronts: the region next to a
truncated boundary that may differ from the untruncated process grows by one
site each time the clock of the site beyond the front rings. Those front
clocks are simulated explicitly.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from ..errors import ParameterError
from ..graphical import Configuration, Diagram
from ..randomness import MarkKind, StreamKey, StreamRole, UniformBuffer, derive_stream
from .records import EdgeTrack, RunStatus
from .window import DEFAULT_SPEED, required_margin

logger = logging.getLogger(__name__)


class IndexedSet:
    """Set with O(1) add, discard and uniform choice."""

    def __init__(self, items: Iterable[int] = ()):
        self._items: List[int] = []
        self._pos: Dict[int, int] = {}
        for x in items:
            self.add(x)

    def add(self, x: int):
        if x not in self._pos:
            self._pos[x] = len(self._items)
            self._items.append(x)

    def discard(self, x: int):
        k = self._pos.pop(x, None)
        if k is None:
            return
        last = self._items.pop()
        if last != x:
            self._items[k] = last
            self._pos[last] = k

    def __contains__(self, x) -> bool:
        return x in self._pos

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self):
        return iter(self._items)

    def at(self, k: int) -> int:
        return self._items[k]


class CountedUnion:
    """Union of several sets, kept as an IndexedSet with membership counts."""

    def __init__(self):
        self.members = IndexedSet()
        self._counts: Dict[int, int] = {}

    def incr(self, x: int):
        c = self._counts.get(x, 0)
        self._counts[x] = c + 1
        if c == 0:
            self.members.add(x)

    def decr(self, x: int):
        c = self._counts[x] - 1
        if c == 0:
            del self._counts[x]
            self.members.discard(x)
        else:
            self._counts[x] = c

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, x) -> bool:
        return x in self._counts


@dataclass
class DualTrajectory:
    """
    Dual run of one copy.

    Attributes:
        init: Initial configuration
        gamma: Total kill rate acting on this copy
        horizon: Time horizon
        sigma: Extinction time (None if alive at the end)
        right: Right edge track (nan once extinct)
        left: Left edge track (nan once extinct)
        final: Configuration at end_time
        status: EXTINCT, HORIZON or EVENT_CAP
        end_time: Time the run stopped
        flagged: A contamination front reached the guarded region
        flag_time: When it did
        states: (time, Configuration) after every change, when recorded
    """
    init: Configuration
    gamma: float
    horizon: float
    sigma: Optional[float]
    right: EdgeTrack
    left: EdgeTrack
    final: Configuration
    status: RunStatus
    end_time: float
    flagged: bool = False
    flag_time: Optional[float] = None
    states: Optional[List[Tuple[float, Configuration]]] = field(default=None, repr=False)

    @property
    def survived(self) -> bool:
        return self.sigma is None

    def state_at(self, t: float) -> Configuration:
        """Recorded configuration at time t (needs record_states)."""
        if self.states is None:
            raise ParameterError("states were not recorded for this run")
        current = self.states[0][1]
        for time, config in self.states:
            if time > t:
                break
            current = config
        return current


class CoupledDualEngine:
    """
    k dual copies on shared clocks with layered kill marks.

    Usage:
        engine = CoupledDualEngine([init_a, init_b], [(gamma, [0, 1]), (lam, [1])])
        engine.run(horizon, buffer)
        traj_a, traj_b = engine.trajectories()
    """

    def __init__(
        self,
        inits: Sequence[Iterable[int]],
        layers: Sequence[Tuple[float, Sequence[int]]],
        lo: Optional[int] = None,
        hi: Optional[int] = None,
        guard: Optional[Tuple[int, int]] = None,
        record_states: bool = False,
    ):
        """
        Initialize the engine.

        Args:
            inits: Initial active sets, one per copy
            layers: (rate, copy indices) of each kill layer
            lo: Left truncation (None for unbounded)
            hi: Right truncation (None for unbounded)
            guard: Site range whose contamination flags the run; if None the
                run is flagged when an alive copy's edge enters a
                contaminated region
            record_states: Keep every configuration (small runs only)
        """
        self.k = len(inits)
        if self.k == 0:
            raise ParameterError("need at least one copy")
        self.lo, self.hi = lo, hi
        self.time = 0.0
        self.events = 0
        self.guard = guard

        self.layers = []
        self._copy_layers: List[List[int]] = [[] for _ in range(self.k)]
        for idx, (rate, members) in enumerate(layers):
            if rate < 0.0:
                raise ParameterError(f"layer rate must be >= 0, got {rate}")
            members = sorted(set(members))
            if any(j < 0 or j >= self.k for j in members):
                raise ParameterError(f"layer {idx} names an unknown copy")
            self.layers.append((float(rate), members, CountedUnion()))
            for j in members:
                self._copy_layers[j].append(idx)

        self.states: List[set] = [set() for _ in range(self.k)]
        self.flips: List[set] = [set() for _ in range(self.k)]
        self.flip_union = CountedUnion()
        self.right: List[Optional[int]] = [None] * self.k
        self.left: List[Optional[int]] = [None] * self.k
        self.sigma: List[Optional[float]] = [None] * self.k
        self.inits: List[Configuration] = []

        for j, init in enumerate(inits):
            sites = sorted(set(int(i) for i in init))
            for i in sites:
                if not self.in_window(i):
                    raise ParameterError(f"site {i} outside window [{lo}, {hi}]")
            self.inits.append(Configuration(frozenset(sites), lo, hi))
            for i in sites:
                self.states[j].add(i)
                for idx in self._copy_layers[j]:
                    self.layers[idx][2].incr(i)
            if sites:
                self.left[j], self.right[j] = sites[0], sites[-1]
            else:
                self.sigma[j] = 0.0
        for j in range(self.k):
            for i in self._neighborhood(self.states[j]):
                self._refresh_flip(j, i)

        self.right_tracks = [EdgeTrack(r) for r in self.right]
        self.left_tracks = [EdgeTrack(l) for l in self.left]
        self.record_states = record_states
        self.history: List[List[Tuple[float, Configuration]]] = [
            [(0.0, c)] for c in self.inits
        ] if record_states else []

        # contamination fronts: [lo, left_front] and [right_front, hi] may be corrupted
        self.left_front = lo if lo is not None else None
        self.right_front = hi if hi is not None else None
        self.flag_time: Optional[float] = None
        self.status = RunStatus.HORIZON
        self.horizon = 0.0
        self._check_fronts()

    def in_window(self, site: int) -> bool:
        return (self.lo is None or site >= self.lo) and (self.hi is None or site <= self.hi)

    @staticmethod
    def _neighborhood(sites: Iterable[int]) -> set:
        out = set()
        for i in sites:
            out.update((i - 1, i, i + 1))
        return out

    def _refresh_flip(self, j: int, i: int):
        state = self.states[j]
        want = self.in_window(i) and ((i in state) != ((i - 1) in state or (i + 1) in state))
        have = i in self.flips[j]
        if want and not have:
            self.flips[j].add(i)
            self.flip_union.incr(i)
        elif have and not want:
            self.flips[j].discard(i)
            self.flip_union.decr(i)

    def _set(self, j: int, i: int, value: bool):
        state = self.states[j]
        if value:
            state.add(i)
            for idx in self._copy_layers[j]:
                self.layers[idx][2].incr(i)
            if self.right[j] is None or i > self.right[j]:
                self.right[j] = i
            if self.left[j] is None or i < self.left[j]:
                self.left[j] = i
        else:
            state.discard(i)
            for idx in self._copy_layers[j]:
                self.layers[idx][2].decr(i)
            if not state:
                self.right[j] = self.left[j] = None
                self.sigma[j] = self.time
            else:
                if i == self.right[j]:
                    r = i - 1
                    while r not in state:
                        r -= 1
                    self.right[j] = r
                if i == self.left[j]:
                    l = i + 1
                    while l not in state:
                        l += 1
                    self.left[j] = l
        for x in (i - 1, i, i + 1):
            self._refresh_flip(j, x)
        self.right_tracks[j].record(self.time, self.right[j])
        self.left_tracks[j].record(self.time, self.left[j])

    def _snapshot(self, j: int):
        if self.record_states:
            self.history[j].append((self.time, Configuration(frozenset(self.states[j]), self.lo, self.hi)))

    def apply_clock(self, i: int):
        """Ring the rate-1 clock of site i in every copy."""
        if not self.in_window(i):
            return
        for j in range(self.k):
            state = self.states[j]
            new = (i - 1) in state or (i + 1) in state
            if new != (i in state):
                self._set(j, i, new)
                self._snapshot(j)

    def apply_kill(self, layer: int, i: int):
        """Kill mark of one layer at site i."""
        for j in self.layers[layer][1]:
            if i in self.states[j]:
                self._set(j, i, False)
                self._snapshot(j)

    def is_extinct(self) -> bool:
        return all(not s for s in self.states)

    # -- fronts ---------------------------------------------------------------

    def _front_sites(self) -> List[int]:
        """Sites whose clocks drive a contamination front."""
        sites = []
        left = self.left_front + 1 if self.left_front is not None else None
        right = self.right_front - 1 if self.right_front is not None else None
        if left is not None and right is not None and left >= right:
            return []
        if left is not None and self.in_window(left):
            sites.append(left)
        if right is not None and self.in_window(right):
            sites.append(right)
        return sites

    def _check_fronts(self):
        if self.flag_time is not None:
            return
        lf, rf = self.left_front, self.right_front
        if lf is not None and rf is not None and lf + 1 >= rf - 1:
            self.flag_time = self.time
            return
        if self.guard is not None:
            g_lo, g_hi = self.guard
            if (lf is not None and lf >= g_lo) or (rf is not None and rf <= g_hi):
                self.flag_time = self.time
            return
        for j in range(self.k):
            if not self.states[j]:
                continue
            if (lf is not None and self.right[j] <= lf) or (rf is not None and self.left[j] >= rf):
                self.flag_time = self.time
                return

    def _advance_front(self, site: int):
        if self.left_front is not None and site == self.left_front + 1:
            self.left_front = site
        elif self.right_front is not None and site == self.right_front - 1:
            self.right_front = site

    # -- main loop ------------------------------------------------------------

    def total_rate(self) -> float:
        front_sites = self._front_sites()
        flip_rate = len(self.flip_union) - sum(1 for s in front_sites if s in self.flip_union)
        kill_rate = sum(rate * len(union) for rate, _, union in self.layers)
        return flip_rate + kill_rate + len(front_sites)

    def step(self, buffer: UniformBuffer, until: Optional[float] = None) -> bool:
        """
        Advance to the next effective event.

        Returns:
            False if nothing can change any more or the time cap was reached
        """
        front_sites = self._front_sites()
        excluded = [s for s in front_sites if s in self.flip_union]
        # (rate, category): -1 flip clocks, layer index >= 0, -2 front clocks
        categories = [(float(len(self.flip_union) - len(excluded)), -1)]
        categories += [(rate * len(union), idx) for idx, (rate, _, union) in enumerate(self.layers)]
        categories.append((float(len(front_sites)), -2))
        total = sum(rate for rate, _ in categories)
        if total <= 0.0:
            if until is not None:
                self.time = until
            return False
        dwell = buffer.exponential(total)
        if until is not None and self.time + dwell > until:
            self.time = until
            return False
        self.time += dwell
        self.events += 1

        x = buffer.uniform() * total
        chosen = None
        for rate, category in categories:
            if rate <= 0.0:
                continue
            chosen = category
            if x < rate:
                break
            x -= rate

        if chosen == -1:
            members = self.flip_union.members
            while True:
                site = members.at(buffer.index(len(members)))
                if site not in excluded:
                    break
            self.apply_clock(site)
        elif chosen == -2:
            site = front_sites[buffer.index(len(front_sites))]
            self.apply_clock(site)
            self._advance_front(site)
        else:
            union = self.layers[chosen][2].members
            self.apply_kill(chosen, union.at(buffer.index(len(union))))
        self._check_fronts()
        return True

    def run(self, horizon: float, buffer: UniformBuffer, max_events: Optional[int] = None) -> "CoupledDualEngine":
        """
        Run up to the horizon or an event cap.

        Returns:
            self
        """
        self.status = RunStatus.HORIZON
        while True:
            if max_events is not None and self.events >= max_events:
                self.status = RunStatus.EVENT_CAP
                break
            if not self.step(buffer, until=horizon):
                break
        if self.status == RunStatus.HORIZON:
            self.time = max(self.time, horizon)
        if self.is_extinct():
            self.status = RunStatus.EXTINCT
        self.horizon = horizon
        return self

    def copy_gamma(self, j: int) -> float:
        return sum(self.layers[idx][0] for idx in self._copy_layers[j])

    def trajectories(self) -> List[DualTrajectory]:
        """One DualTrajectory per copy."""
        out = []
        for j in range(self.k):
            if self.sigma[j] is not None:
                status = RunStatus.EXTINCT
            elif self.status == RunStatus.EVENT_CAP:
                status = RunStatus.EVENT_CAP
            else:
                status = RunStatus.HORIZON
            out.append(DualTrajectory(
                init=self.inits[j],
                gamma=self.copy_gamma(j),
                horizon=self.horizon,
                sigma=self.sigma[j],
                right=self.right_tracks[j],
                left=self.left_tracks[j],
                final=Configuration(frozenset(self.states[j]), self.lo, self.hi),
                status=status,
                end_time=self.time,
                flagged=self.flag_time is not None,
                flag_time=self.flag_time,
                states=self.history[j] if self.record_states else None,
            ))
        return out


def _dual_buffer(key: StreamKey) -> UniformBuffer:
    return UniformBuffer(derive_stream(key.with_role(StreamRole.DUAL_MARKS)))


def simulate_dual(
    init: Configuration,
    gamma: float,
    horizon: float,
    key: StreamKey,
    max_events: Optional[int] = None,
    record_states: bool = False,
) -> DualTrajectory:
    """
    Dual process from a finite set on the whole line.

    Args:
        init: Finite initial set
        gamma: Kill rate
        horizon: Time horizon
        key: Stream address (dual-marks role is used)
        max_events: Optional event cap
        record_states: Keep every configuration

    Returns:
        DualTrajectory
    """
    if gamma < 0.0:
        raise ParameterError(f"gamma must be >= 0, got {gamma}")
    engine = CoupledDualEngine([init.active], [(gamma, [0])], record_states=record_states)
    engine.run(horizon, _dual_buffer(key), max_events)
    return engine.trajectories()[0]


def halfline_margin(horizon: float, speed: float = DEFAULT_SPEED, margin: Optional[int] = None) -> int:
    return required_margin(horizon, speed) if margin is None else int(margin)


def simulate_dual_halfline_edge(
    gamma: float,
    horizon: float,
    key: StreamKey,
    speed: float = DEFAULT_SPEED,
    margin: Optional[int] = None,
    max_events: Optional[int] = None,
) -> DualTrajectory:
    """
    Dual from the half-line (-inf, 0], truncated at -margin.

    Returns:
        DualTrajectory whose right track is the edge; flagged when the edge
        enters the region the truncation may have corrupted
    """
    m = halfline_margin(horizon, speed, margin)
    engine = CoupledDualEngine([range(-m, 1)], [(gamma, [0])], lo=-m)
    engine.run(horizon, _dual_buffer(key), max_events)
    return engine.trajectories()[0]


@dataclass
class CoupledEdges:
    """Edges of the gamma and gamma + lambda half-line duals on shared marks."""
    base: DualTrajectory
    raised: DualTrajectory

    @property
    def flagged(self) -> bool:
        return self.base.flagged or self.raised.flagged

    def difference_at(self, t: float) -> float:
        return self.base.right.value_at(t) - self.raised.right.value_at(t)


def simulate_dual_coupled(
    gamma: float,
    lam: float,
    horizon: float,
    key: StreamKey,
    speed: float = DEFAULT_SPEED,
    margin: Optional[int] = None,
    max_events: Optional[int] = None,
) -> CoupledEdges:
    """
    Half-line duals with kill rates gamma and gamma + lam on shared marks.

    Both copies see the same clocks and the same rate-gamma kill layer; an
    extra rate-lam layer acts on the second copy only.
    """
    if gamma < 0.0 or lam < 0.0:
        raise ParameterError("gamma and lambda must be >= 0")
    m = halfline_margin(horizon, speed, margin)
    half_line = range(-m, 1)
    engine = CoupledDualEngine([half_line, half_line], [(gamma, [0, 1]), (lam, [1])], lo=-m)
    engine.run(horizon, _dual_buffer(key), max_events)
    base, raised = engine.trajectories()
    return CoupledEdges(base, raised)


def simulate_dual_family(
    inits: Sequence[Iterable[int]],
    gamma: float,
    horizon: float,
    key: StreamKey,
    lo: Optional[int] = None,
    hi: Optional[int] = None,
    guard: Optional[Tuple[int, int]] = None,
    record_states: bool = False,
    max_events: Optional[int] = None,
) -> List[DualTrajectory]:
    """Several duals with the same kill rate on shared marks."""
    engine = CoupledDualEngine(inits, [(gamma, list(range(len(inits))))], lo, hi, guard, record_states)
    engine.run(horizon, _dual_buffer(key), max_events)
    return engine.trajectories()


def simulate_dual_gamma_grid(
    init: Configuration,
    gammas: Sequence[float],
    horizon: float,
    key: StreamKey,
    max_events: Optional[int] = None,
) -> List[DualTrajectory]:
    """
    One dual per gamma on nested kill layers.

    Layer l has rate gammas[l] - gammas[l-1] and acts on copies l, l+1, ...,
    so copy j is killed at total rate gammas[j] and the copies are ordered
    by inclusion at all times.
    """
    gammas = list(gammas)
    if any(b < a for a, b in zip(gammas, gammas[1:])):
        raise ParameterError("gamma grid must be sorted")
    if gammas and gammas[0] < 0.0:
        raise ParameterError("gamma must be >= 0")
    layers = []
    prev = 0.0
    for idx, g in enumerate(gammas):
        layers.append((g - prev, list(range(idx, len(gammas)))))
        prev = g
    engine = CoupledDualEngine([init.active] * len(gammas), layers)
    engine.run(horizon, _dual_buffer(key), max_events)
    return engine.trajectories()


def replay_dual_skeleton(diagram: Diagram, init: Configuration) -> List[Tuple[float, Configuration]]:
    """
    Drive a single-copy engine with the events of a diagram.

    Spike marks ring the site's clock and leak marks are kills, so the
    result matches dual_forward_state at every event time.
    """
    engine = CoupledDualEngine([init.active], [(diagram.gamma, [0])], diagram.lo, diagram.hi)
    out = [(0.0, Configuration(frozenset(engine.states[0]), diagram.lo, diagram.hi))]
    for site, time, kind in diagram.events():
        engine.time = time
        if kind == MarkKind.SPIKE:
            engine.apply_clock(site)
        else:
            engine.apply_kill(0, site)
        out.append((time, Configuration(frozenset(engine.states[0]), diagram.lo, diagram.hi)))
    return out


if __name__ == "__main__":
    print("Testing dual process...")
    for gamma in (0.1, 0.3, 0.6):
        traj = simulate_dual(Configuration.full(-5, 5), gamma, 30.0, StreamKey(2024))
        print(f"  gamma={gamma}: status={traj.status.value} sigma={traj.sigma} "
              f"right edge={traj.right.final}")
