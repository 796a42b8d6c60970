"""
Replica fan-out.

Workers must be module-level functions so they pickle. Results come back in
item order whatever order the workers finish in.
"""
import logging
import multiprocessing
from typing import Callable, List, Optional, Sequence

logger = logging.getLogger(__name__)


def _indexed(args):
    fn, index, item = args
    return index, fn(item)


class ReplicaPool:
    """
    multiprocessing.Pool wrapper used as an experiment mapper.

    Usage:
        with ReplicaPool(threads=4) as pool:
            experiment.run(pool.map)
    """

    def __init__(self, threads: int = 1, chunksize: Optional[int] = None):
        """
        Initialize the pool.

        Args:
            threads: Worker processes (1 runs in-process)
            chunksize: Items handed to a worker at a time (None picks one)
        """
        if threads < 1:
            raise ValueError(f"threads must be >= 1, got {threads}")
        self.threads = threads
        self.chunksize = chunksize
        self._pool = None

    def __enter__(self) -> "ReplicaPool":
        if self.threads > 1:
            self._pool = multiprocessing.Pool(self.threads)
        return self

    def __exit__(self, *exc):
        self.close()
        return False

    def close(self):
        if self._pool is not None:
            self._pool.close()
            self._pool.join()
            self._pool = None

    def map(self, fn: Callable, items: Sequence) -> List:
        """Apply fn to every item; results in item order."""
        items = list(items)
        if self._pool is None or len(items) < 2:
            return [fn(item) for item in items]
        chunksize = self.chunksize or max(1, len(items) // (4 * self.threads))
        results = [None] * len(items)
        done = 0
        tasks = [(fn, k, item) for k, item in enumerate(items)]
        for index, value in self._pool.imap_unordered(_indexed, tasks, chunksize):
            results[index] = value
            done += 1
            if done % 1000 == 0:
                logger.debug(f"  [{done}/{len(items)}] replicas done")
        return results
