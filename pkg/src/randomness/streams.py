"""
Replica-addressable random streams.

Every stream is derived from a StreamKey through numpy's SeedSequence spawn
keys feeding a Philox counter-based generator, so any replica's stream can be
rebuilt without replaying the ones before it.
"""
import math
from dataclasses import dataclass, replace
from enum import IntEnum
from typing import Optional

import numpy as np

from ..errors import ParameterError

MAX_SEED = 2 ** 64


class StreamRole(IntEnum):
    """What a stream is used for; part of the key."""
    FORWARD_MARKS = 0
    DUAL_MARKS = 1
    LAYER = 2
    ORACLE_CHECK = 3


@dataclass(frozen=True)
class StreamKey:
    """
    Address of one random stream.

    Attributes:
        master_seed: 64-bit experiment seed
        replica_id: Replica index (>= 0)
        role: Stream role tag
        layer: Layer index for coupled-marks constructions (layer-lambda)
    """
    master_seed: int
    replica_id: int = 0
    role: StreamRole = StreamRole.FORWARD_MARKS
    layer: int = 0

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < MAX_SEED:
            raise ParameterError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if int(self.replica_id) < 0:
            raise ParameterError(f"replica_id must be >= 0, got {self.replica_id}")
        if int(self.layer) < 0:
            raise ParameterError(f"layer must be >= 0, got {self.layer}")

    def for_replica(self, replica_id: int) -> "StreamKey":
        """Same key, other replica."""
        return replace(self, replica_id=replica_id)

    def with_role(self, role: StreamRole, layer: Optional[int] = None) -> "StreamKey":
        """Same key, other role (and layer if given)."""
        return replace(self, role=role, layer=self.layer if layer is None else layer)

    def spawn_key(self) -> tuple:
        return (int(self.replica_id), int(self.role), int(self.layer))


def _zigzag(site: int) -> int:
    # SeedSequence spawn keys must be non-negative
    return 2 * site if site >= 0 else -2 * site - 1


def _generator(master_seed: int, spawn_key: tuple) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=spawn_key)
    return np.random.Generator(np.random.Philox(seq))


def derive_stream(key: StreamKey, attempt: int = 0) -> np.random.Generator:
    """
    Build the random stream addressed by a key.

    Args:
        key: Stream address
        attempt: Regeneration counter (used when a draw must be redone)

    Returns:
        numpy Generator; identical keys give bit-identical draws
    """
    spawn = key.spawn_key()
    if attempt:
        spawn = spawn + (0, int(attempt))
    return _generator(key.master_seed, spawn)


def site_stream(key: StreamKey, site: int, kind: int, attempt: int = 0) -> np.random.Generator:
    """
    Stream for the marks of one (site, kind) pair.

    Diagrams built on nested windows with the same key see the same marks on
    their common sites.

    Args:
        key: Stream address
        site: Lattice site (any integer)
        kind: Mark kind code (0 spike, 1 leak, >= 2 extra layers)
        attempt: Regeneration counter

    Returns:
        numpy Generator
    """
    spawn = key.spawn_key() + (1 + _zigzag(int(site)), int(kind), int(attempt))
    return _generator(key.master_seed, spawn)


class UniformBuffer:
    """
    Block-buffered uniform draws on [0, 1).

    The event loops consume a few uniforms per event; drawing them in blocks
    keeps the per-event overhead low while staying deterministic for a given
    stream.
    """

    def __init__(self, stream: np.random.Generator, block: int = 4096):
        """
        Initialize the buffer.

        Args:
            stream: Source generator
            block: Number of uniforms drawn at a time
        """
        self.stream = stream
        self.block = block
        self._values = []
        self._pos = 0

    def _refill(self):
        self._values = self.stream.random(self.block).tolist()
        self._pos = 0

    def uniform(self) -> float:
        """Next uniform in [0, 1)."""
        if self._pos >= len(self._values):
            self._refill()
        value = self._values[self._pos]
        self._pos += 1
        return value

    def exponential(self, rate: float) -> float:
        """Exponential waiting time with the given rate (inf when rate is 0)."""
        if rate <= 0.0:
            return math.inf
        return -math.log1p(-self.uniform()) / rate

    def index(self, size: int) -> int:
        """Uniform index in range(size)."""
        i = int(self.uniform() * size)
        return i if i < size else size - 1

    def take_array(self) -> np.ndarray:
        """
        Unconsumed uniforms followed by a fresh block, for compiled loops.

        The buffer is left empty; hand back what was not used with
        give_back so the sequence continues unchanged.
        """
        rest = np.asarray(self._values[self._pos:], dtype=float)
        self._values = []
        self._pos = 0
        return np.concatenate([rest, self.stream.random(self.block)])

    def give_back(self, values: np.ndarray):
        """Put unused uniforms back in front of the next draws."""
        self._values = list(values.tolist()) + self._values[self._pos:]
        self._pos = 0
