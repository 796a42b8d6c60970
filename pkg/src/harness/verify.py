"""
Pathwise verification suites.

Every check is exact on a sampled diagram: any single failure fails its
suite, and the failing diagram is dumped so the case can be replayed with
load_diagram. Oracle checks compare solvers numerically.
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Optional, Sequence

import numpy as np

from ..dynamics import AuxiliaryProcess, MembraneProcess, MembraneState, replay_dual_skeleton, replay_skeleton
from ..errors import SingularSystemError
from ..experiments import ExperimentConfig, sample_extinction_times, serial_map
from ..experiments.base_experiment import Mapper
from ..graphical import (
    Configuration,
    Diagram,
    backward_dual_state,
    build_diagram,
    dual_forward_state,
    dump_diagram,
    enumerate_valid_paths,
    format_diagram,
    forward_state,
    forward_trajectory,
    mirror_diagram,
    shift_diagram,
)
from ..oracle import (
    build_generator,
    extinction_cdf_expm,
    is_empty,
    mean_extinction_exact,
    mean_extinction_uniformized,
    transient_event_probability,
)
from ..randomness import StreamKey, StreamRole, derive_stream

logger = logging.getLogger(__name__)

MAX_DUMPS = 20
ORACLE_RTOL = 1e-6

PATHWISE_SUITES = (
    "duality",
    "additivity",
    "monotonicity",
    "translation",
    "absorbing",
    "paths",
    "mirror",
    "skeleton",
    "membrane",
    "dual_skeleton",
    "nested_windows",
    "edge_identity",
)


@dataclass
class SuiteResult:
    """Check and failure counts of one suite."""
    name: str
    checks: int = 0
    failures: int = 0
    examples: List[str] = field(default_factory=list)
    dumps: List[str] = field(default_factory=list)
    diagrams: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_dict(self) -> Dict:
        return {
            "checks": self.checks,
            "failures": self.failures,
            "examples": self.examples[:5],
            "dumps": self.dumps,
            "diagrams": self.diagrams,
        }


@dataclass
class Sample:
    """One diagram and the random sets and times checked on it."""
    index: int
    diagram: Diagram
    A: Configuration
    B: Configuration
    t: float
    s: float
    shift: int
    potentials: Dict[int, int]


class Verifier:
    """
    Runs the pathwise suites over a corpus of sampled diagrams, then the
    oracle suite.

    Usage:
        verifier = Verifier(config).run()
        verifier.passed
    """

    def __init__(self, config: ExperimentConfig, dual_rule: str = "or", dump_dir: Optional[str] = None):
        """
        Initialize the verifier.

        Args:
            config: Supplies seed, verify_diagrams, verify_n, verify_horizon,
                verify_gammas and oracle_max_sites
            dual_rule: Neighbor rule of the backward dual ('and' is the
                mutation the duality suite must catch)
            dump_dir: Where failing diagrams are written (None: config.dump_dir;
                with neither set, the diagram text goes into the suite result)
        """
        self.config = config
        self.dual_rule = dual_rule
        dump_dir = dump_dir or config.dump_dir
        self.dump_dir = Path(dump_dir) if dump_dir else None
        self.suites: Dict[str, SuiteResult] = {name: SuiteResult(name) for name in PATHWISE_SUITES}
        self.suites["oracle"] = SuiteResult("oracle")
        self.diagrams = 0

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites.values())

    # -- corpus -----------------------------------------------------------------

    def samples(self) -> Iterator[Sample]:
        """The diagram corpus; index 0 is the empty diagram."""
        c = self.config
        lo, hi = -c.verify_n, c.verify_n
        width = hi - lo + 1
        for k in range(c.verify_diagrams):
            gamma = c.verify_gammas[k % len(c.verify_gammas)]
            key = StreamKey(master_seed=c.seed, replica_id=k, role=StreamRole.ORACLE_CHECK)
            if k == 0:
                diagram = Diagram.from_events(lo, hi, c.verify_horizon, gamma, [])
            else:
                diagram = build_diagram((lo, hi), c.verify_horizon, gamma, key)
            rng = derive_stream(key.with_role(StreamRole.ORACLE_CHECK, layer=1))
            a_mask = rng.random(width) < 0.3
            b_mask = rng.random(width) < 0.3
            A = Configuration(frozenset(int(i) for i in np.flatnonzero(a_mask) + lo), lo, hi)
            B = Configuration(frozenset(int(i) for i in np.flatnonzero(b_mask) + lo), lo, hi)
            t = float(rng.uniform(0.0, c.verify_horizon))
            s = float(rng.uniform(0.0, c.verify_horizon))
            shift = int(rng.integers(-3, 4))
            potentials = {i: int(rng.integers(1, 4)) for i in A}
            yield Sample(k, diagram, A, B, t, s, shift, potentials)

    # -- bookkeeping ------------------------------------------------------------

    def _check(self, suite: str, ok: bool, sample: Sample, detail: str = ""):
        result = self.suites[suite]
        result.checks += 1
        if ok:
            return
        result.failures += 1
        if len(result.examples) < 5:
            result.examples.append(f"diagram {sample.index}: {detail}")
        if self.dump_dir is not None and len(result.dumps) < MAX_DUMPS:
            path = dump_diagram(sample.diagram, self.dump_dir / f"{suite}_{sample.index:05d}.txt")
            result.dumps.append(str(path))
            logger.warning(f"  ✗ {suite} failed on diagram {sample.index}, dumped to {path}")
        elif self.dump_dir is None and len(result.diagrams) < MAX_DUMPS:
            result.diagrams.append(format_diagram(sample.diagram))
            logger.warning(f"  ✗ {suite} failed on diagram {sample.index}, text kept in the record")

    # -- pathwise suites --------------------------------------------------------

    def check_duality(self, x: Sample):
        d = x.diagram
        forward_hit = forward_state(d, x.A, x.s).intersects(x.B)
        dual_hit = backward_dual_state(d, x.B, x.s, x.s, rule=self.dual_rule).intersects(x.A)
        self._check("duality", forward_hit == dual_hit, x, f"A={x.A} B={x.B} s={x.s!r}")

    def check_additivity(self, x: Sample):
        d = x.diagram
        joint = forward_state(d, x.A.union(x.B), x.t)
        split = forward_state(d, x.A, x.t).union(forward_state(d, x.B, x.t))
        self._check("additivity", joint.active == split.active, x, f"A={x.A} B={x.B} t={x.t!r}")

    def check_monotonicity(self, x: Sample):
        d = x.diagram
        bigger = x.A.union(x.B)
        ok = forward_state(d, x.A, x.t).issubset(forward_state(d, bigger, x.t))
        ok = ok and dual_forward_state(d, x.A, x.t).issubset(dual_forward_state(d, bigger, x.t))
        self._check("monotonicity", ok, x, f"A={x.A} B={x.B} t={x.t!r}")

    def check_translation(self, x: Sample):
        d = x.diagram
        shifted = forward_state(shift_diagram(d, x.shift), x.A.shift(x.shift), x.t)
        expected = forward_state(d, x.A, x.t).shift(x.shift)
        self._check("translation", shifted.active == expected.active, x, f"k={x.shift} t={x.t!r}")

    def check_absorbing(self, x: Sample):
        d = x.diagram
        empty = Configuration.empty(d.lo, d.hi)
        ok = forward_state(d, empty, x.t).is_empty() and dual_forward_state(d, empty, x.t).is_empty()
        ok = ok and backward_dual_state(d, empty, x.s, x.s).is_empty()
        self._check("absorbing", ok, x, f"t={x.t!r}")

    def check_paths(self, x: Sample):
        d = x.diagram
        swept = forward_state(d, x.A, x.t)
        enumerated = enumerate_valid_paths(d, x.A, x.t)
        self._check("paths", swept.active == enumerated.active, x, f"A={x.A} t={x.t!r}")

    def check_mirror(self, x: Sample):
        d = x.diagram
        backward = backward_dual_state(d, x.B, x.s, x.s)
        mirrored = dual_forward_state(mirror_diagram(d, x.s), x.B, x.s)
        self._check("mirror", backward.active == mirrored.active, x, f"B={x.B} s={x.s!r}")

    def check_skeletons(self, x: Sample):
        d = x.diagram
        swept = [c.active for _, c in forward_trajectory(d, x.A)]

        replayed = [c.active for _, c in replay_skeleton(d, AuxiliaryProcess(x.A, d.gamma, d.lo, d.hi))]
        self._check("skeleton", swept == replayed, x, f"A={x.A}")

        membrane = MembraneProcess(MembraneState(x.potentials, d.lo, d.hi), d.gamma, d.lo, d.hi)
        indicators = [m.indicator().active for _, m in replay_skeleton(d, membrane)]
        self._check("membrane", swept == indicators, x, f"A={x.A}")

        dual = replay_dual_skeleton(d, x.B)
        picks = sorted({0, len(dual) // 2, len(dual) - 1})
        ok = all(dual[k][1].active == dual_forward_state(d, x.B, dual[k][0]).active for k in picks)
        self._check("dual_skeleton", ok, x, f"B={x.B}")

    def check_nested_windows(self, x: Sample):
        d = x.diagram
        N = d.hi
        m = max(N // 2, 0)
        t = x.t
        wide = forward_state(d, Configuration.full(-N, N), t)
        inner = forward_state(d, Configuration.full(-m, m), t, window=(-m, m))
        if inner.is_empty():
            self._check("nested_windows", True, x)
            return
        right_open = forward_state(d, Configuration.full(-m, N), t, window=(-m, N))
        left_open = forward_state(d, Configuration.full(-N, m), t, window=(-N, m))
        lo, hi = inner.leftmost, inner.rightmost
        ok = inner.active == wide.restrict(lo, hi).active
        ok = ok and lo == right_open.leftmost and hi == left_open.rightmost
        self._check("nested_windows", ok, x, f"m={m} t={t!r}")

    def check_edge_identity(self, x: Sample):
        d = x.diagram
        single = replay_dual_skeleton(d, Configuration(frozenset([0]), d.lo, d.hi))
        left = replay_dual_skeleton(d, Configuration.full(d.lo, 0))
        right = replay_dual_skeleton(d, Configuration.full(0, d.hi))
        ok = True
        for (_, eta0), (_, eta_minus), (_, eta_plus) in zip(single, left, right):
            if eta0.is_empty():
                break
            l0, r0 = eta0.leftmost, eta0.rightmost
            ok = (
                r0 == eta_minus.rightmost
                and l0 == eta_plus.leftmost
                and eta0.active == eta_minus.restrict(l0, r0).active
                and eta0.active == eta_plus.restrict(l0, r0).active
                and eta_plus.leftmost <= eta_minus.rightmost
            )
            if not ok:
                break
        self._check("edge_identity", ok, x)

    # -- oracle suite -----------------------------------------------------------

    def check_oracle(self):
        suite = self.suites["oracle"]
        max_n = max(0, min(2, (self.config.oracle_max_sites - 1) // 2))

        def record(ok: bool, detail: str):
            suite.checks += 1
            if not ok:
                suite.failures += 1
                if len(suite.examples) < 5:
                    suite.examples.append(detail)

        for gamma in self.config.verify_gammas:
            for n in range(0, max_n + 1):
                for variant in ("auxiliary", "dual"):
                    matrix = build_generator(n, gamma, variant=variant)
                    problems = matrix.structure_problems()
                    record(not problems, f"{variant} n={n} gamma={gamma}: {problems}")
                if gamma == 0.0:
                    continue
                matrix = build_generator(n, gamma)
                full = Configuration.full(-n, n)
                direct = mean_extinction_exact(matrix, full)
                iterative = mean_extinction_exact(matrix, full, method="gmres")
                uniformized = mean_extinction_uniformized(matrix, full)
                record(math.isclose(direct, iterative, rel_tol=ORACLE_RTOL), f"n={n} gamma={gamma}: gmres")
                record(math.isclose(direct, uniformized, rel_tol=ORACLE_RTOL), f"n={n} gamma={gamma}: uniformized")
                if n == 0:
                    record(math.isclose(direct, 1.0 / (1.0 + gamma), rel_tol=1e-9), f"gamma={gamma}: single site")
                by_expm = extinction_cdf_expm(matrix, full, 1.0)
                by_uniformization = transient_event_probability(matrix, full, 1.0, is_empty())
                record(abs(by_expm - by_uniformization) <= 1e-8, f"n={n} gamma={gamma}: transient")

    # -- driver -----------------------------------------------------------------

    def run(self) -> "Verifier":
        """Run every suite; returns self."""
        c = self.config
        logger.info(f"Verifying on {c.verify_diagrams} diagrams "
                    f"(window [-{c.verify_n}, {c.verify_n}], horizon {c.verify_horizon})")
        logger.info(f"{'=' * 60}")
        checks: List[Callable[[Sample], None]] = [
            self.check_duality,
            self.check_additivity,
            self.check_monotonicity,
            self.check_translation,
            self.check_absorbing,
            self.check_paths,
            self.check_mirror,
            self.check_skeletons,
            self.check_nested_windows,
            self.check_edge_identity,
        ]
        for sample in self.samples():
            self.diagrams += 1
            for check in checks:
                check(sample)
            if self.diagrams % 1000 == 0:
                logger.debug(f"  [{self.diagrams}/{c.verify_diagrams}] diagrams checked")
        self.check_oracle()
        self._print_summary()
        return self

    def _print_summary(self):
        for suite in self.suites.values():
            mark = "✓" if suite.passed else "✗"
            logger.info(f"  {mark} {suite.name:<16} {suite.checks:>8} checks, {suite.failures} failures")
        logger.info(f"{'=' * 60}")

    def to_result(self) -> Dict:
        """Result entry of a run record."""
        return {
            "name": "verify",
            "summary": {
                "diagrams": self.diagrams,
                "dual_rule": self.dual_rule,
                "suites": {name: s.to_dict() for name, s in self.suites.items()},
                "failures": sum(s.failures for s in self.suites.values()),
            },
            "verdict": self.passed,
            "flags": {},
            "elapsed_seconds": 0.0,
        }


def oracle_agreement(
    n: int,
    gamma: float,
    replicas: int,
    seed: int,
    k: float = 4.0,
    mapper: Optional[Mapper] = None,
    offset: int = 0,
) -> Dict:
    """
    Monte-Carlo mean extinction time on [-n, n] against the exact value.

    offset selects the stream layer, so grid points use disjoint streams.

    Returns:
        Dict with both means, the standard error, the z-score and 'passes'
        (|z| <= k)
    """
    matrix = build_generator(n, gamma)
    full = Configuration.full(-n, n)
    try:
        exact = mean_extinction_exact(matrix, full)
    except SingularSystemError:
        return {"n": n, "gamma": gamma, "exact": None, "passes": None,
                "note": "the system never goes extinct"}
    raw = sample_extinction_times(gamma, n, replicas, seed, family="oracle_agreement",
                                  offset=offset, mapper=mapper or serial_map)
    taus = raw["tau"].to_numpy()
    mean = float(np.mean(taus))
    se = float(np.std(taus, ddof=1) / math.sqrt(len(taus))) if len(taus) > 1 else math.nan
    z = (mean - exact) / se if se and math.isfinite(se) else math.nan
    return {
        "n": n,
        "sites": 2 * n + 1,
        "gamma": gamma,
        "exact": exact,
        "monte_carlo": mean,
        "std_error": se,
        "z_score": z,
        "passes": bool(math.isfinite(z) and abs(z) <= k),
    }


def oracle_grid(
    ns: Sequence[int],
    gammas: Sequence[float],
    replicas: int,
    seed: int,
    k: float = 4.0,
    mapper: Optional[Mapper] = None,
) -> Dict:
    """
    oracle_agreement over every (n, gamma) of a grid.

    Points without extinction (gamma = 0 on two or more sites) are listed
    but do not count against the verdict.

    Returns:
        Dict with the per-point reports under 'points', the number of
        failing points and 'passes'
    """
    points = []
    for offset, (n, gamma) in enumerate((n, g) for n in ns for g in gammas):
        report = oracle_agreement(n, gamma, replicas, seed, k=k, mapper=mapper, offset=offset)
        mark = {True: "✓", False: "✗", None: "⚠"}[report["passes"]]
        logger.info(f"  {mark} {2 * n + 1} sites, gamma={gamma:g}: exact {report['exact']}, "
                    f"monte carlo {report.get('monte_carlo')}")
        points.append(report)
    failing = sum(1 for p in points if p["passes"] is False)
    return {"points": points, "failing": failing, "passes": failing == 0}
