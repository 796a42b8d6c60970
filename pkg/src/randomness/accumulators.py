"""
Order-insensitive accumulation of per-replica values.
"""
import math
from typing import Dict, Iterable, List, Tuple

import numpy as np


class ReplicaAccumulator:
    """
    Collects one value per replica id and reduces with exactly-rounded sums.

    Adding the same (replica_id, value) pairs in any order gives identical
    summary statistics.
    """

    def __init__(self):
        self._values: Dict[int, float] = {}

    def add(self, replica_id: int, value: float):
        """Record the value of one replica (a replica id may appear once)."""
        if replica_id in self._values:
            raise KeyError(f"replica {replica_id} already recorded")
        self._values[replica_id] = float(value)

    def extend(self, pairs: Iterable[Tuple[int, float]]):
        for replica_id, value in pairs:
            self.add(replica_id, value)

    def merge(self, other: "ReplicaAccumulator") -> "ReplicaAccumulator":
        """Return a new accumulator holding both sets of replicas."""
        merged = ReplicaAccumulator()
        merged.extend(self._values.items())
        merged.extend(other._values.items())
        return merged

    def __len__(self) -> int:
        return len(self._values)

    @property
    def replica_ids(self) -> List[int]:
        return sorted(self._values)

    def values(self) -> np.ndarray:
        """Values ordered by replica id."""
        return np.array([self._values[k] for k in self.replica_ids], dtype=float)

    def mean(self) -> float:
        if not self._values:
            return math.nan
        return math.fsum(self._values.values()) / len(self._values)

    def variance(self) -> float:
        """Unbiased sample variance (nan below two replicas)."""
        n = len(self._values)
        if n < 2:
            return math.nan
        m = self.mean()
        return math.fsum((v - m) ** 2 for v in self._values.values()) / (n - 1)

    def std_error(self) -> float:
        n = len(self._values)
        if n < 2:
            return math.nan
        return math.sqrt(self.variance() / n)
