"""
Base class for all experiments.
"""
import logging
import math
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import pandas as pd

from ..randomness import StreamKey
from .config import ExperimentConfig

logger = logging.getLogger(__name__)

Mapper = Callable[[Callable, Sequence], List]

# separate stream families per experiment so estimates combined in one run
# (rho inside thermalization, for instance) are independent
STREAM_LAYERS = {
    "rho": 10,
    "rho_dual_check": 11,
    "dual_rho": 12,
    "margin": 13,
    "alpha": 20,
    "superlinearity": 21,
    "edge_identity": 22,
    "edge_gap": 23,
    "edge_tail": 24,
    "extinction_law": 30,
    "mean_growth": 31,
    "thermalization": 40,
    "tau_bound": 41,
    "covariance": 50,
    "sigma_tail": 51,
    "sweep": 60,
    "oracle_agreement": 70,
}


def replica_key(seed: int, replica: int, family: str, offset: int = 0) -> StreamKey:
    """Stream key of one replica of an experiment family."""
    return StreamKey(master_seed=seed, replica_id=replica, layer=STREAM_LAYERS[family] * 100 + offset)


def serial_map(fn: Callable, items: Sequence) -> List:
    """In-process mapper; the harness swaps in a worker pool."""
    return [fn(item) for item in items]


@dataclass
class ExperimentResult:
    """
    Outcome of one experiment.

    Attributes:
        name: Experiment name
        summary: JSON-friendly estimates, intervals and verdicts
        raw: Per-replica values (one row per replica)
        verdict: True/False when the experiment carries an acceptance check
        flags: Diagnostic counters
        elapsed: Wall-clock seconds
    """
    name: str
    summary: Dict
    raw: Optional[pd.DataFrame] = None
    verdict: Optional[bool] = None
    flags: Dict[str, int] = field(default_factory=dict)
    elapsed: float = 0.0

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "summary": self.summary,
            "verdict": self.verdict,
            "flags": self.flags,
            "elapsed_seconds": self.elapsed,
        }


class BaseExperiment(ABC):
    """
    Abstract base class for experiments.

    Subclasses implement execute(); run() adds timing and the summary banner.
    """

    name: str = ""
    description: str = ""

    def __init__(self, config: ExperimentConfig):
        """
        Initialize experiment.

        Args:
            config: Validated experiment configuration
        """
        self.config = config
        self.result: Optional[ExperimentResult] = None

    @abstractmethod
    def execute(self, mapper: Mapper) -> ExperimentResult:
        """
        Run the replicas and reduce them.

        Args:
            mapper: map(fn, items) implementation used to fan out replicas

        Returns:
            ExperimentResult
        """
        pass

    @abstractmethod
    def get_parameters(self) -> Dict:
        """Config values this experiment depends on."""
        pass

    def run(self, mapper: Optional[Mapper] = None) -> 'BaseExperiment':
        """
        Execute the experiment.

        Returns:
            Self (for method chaining)
        """
        logger.info(f"Running experiment: {self.name}")
        logger.info(f"{'=' * 60}")
        started = time.perf_counter()
        self.result = self.execute(mapper or serial_map)
        self.result.elapsed = time.perf_counter() - started
        self._print_summary()
        return self

    def get_result(self) -> ExperimentResult:
        if self.result is None:
            raise ValueError("Must run experiment first")
        return self.result

    def _print_summary(self):
        if self.result is None:
            return
        logger.info(f"{self.name.upper()} RESULTS ({self.result.elapsed:.1f}s)")
        for key, value in self.result.summary.items():
            if isinstance(value, float) and math.isfinite(value):
                logger.info(f"  {key:<28} {value:.6g}")
            elif isinstance(value, (int, str, bool)) or value is None:
                logger.info(f"  {key:<28} {value}")
        if self.result.verdict is not None:
            mark = "✓" if self.result.verdict else "✗"
            logger.info(f"  {mark} verdict: {'pass' if self.result.verdict else 'fail'}")
        for flag, count in self.result.flags.items():
            if count:
                logger.warning(f"  ⚠ {flag}: {count}")
        logger.info(f"{'=' * 60}")

    def get_description(self) -> str:
        return f"{self.name}: {self.description}"

    def get_parameters_str(self) -> str:
        return ", ".join(f"{k}={v}" for k, v in self.get_parameters().items())

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.get_parameters_str()})"

    def __str__(self) -> str:
        return self.get_description()
