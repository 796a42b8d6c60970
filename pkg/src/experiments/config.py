"""
Experiment configuration.
"""
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional, Tuple, Union

from ..errors import ConfigError

MAX_SEED = 2 ** 64


@dataclass
class ExperimentConfig:
    """
    All knobs of a run, with their defaults.

    Window half-widths are n (window [-n, n]); R_schedule pairs a window
    half-width with its averaging length R_n.
    """
    seed: int = 2024
    gamma: float = 0.1
    n: int = 20
    replicas: int = 200
    horizon: float = 100.0
    max_events: Optional[int] = None
    init: Union[str, List[int]] = "all"

    # thermalization
    r_schedule: List[Tuple[int, float]] = field(default_factory=lambda: [(50, 200.0)])
    t_offset: float = 10.0
    F: List[int] = field(default_factory=lambda: [-2, -1, 0, 1, 2])
    delta: float = 0.1
    tau_cap_factor: float = 5.0
    tau_bound_replicas: int = 20

    # density
    rho_t_star: float = 40.0
    rho_replicas: int = 200
    rho_block: int = 2
    margin_factor: float = 4.0

    # edges
    lam: float = 0.1
    edge_offset: int = 1
    deviation_slope: Optional[float] = None

    # extinction and decay
    n_grid: List[int] = field(default_factory=lambda: [10, 20, 40])
    t_grid: List[float] = field(default_factory=lambda: [2.0, 4.0, 8.0, 16.0])
    lags: List[float] = field(default_factory=lambda: [0.5, 1.0, 2.0, 4.0, 8.0])
    base_time: float = 20.0
    covariance_mode: str = "infinite"
    covariance_site: int = 0

    # phase diagram
    gamma_grid: List[float] = field(default_factory=lambda: [0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 1.0])
    sweep_mode: str = "dual"
    survival_threshold: float = 0.1

    # verification
    verify_diagrams: int = 10_000
    verify_n: int = 10
    verify_horizon: float = 5.0
    verify_gammas: List[float] = field(default_factory=lambda: [0.1, 0.5, 1.0])
    oracle_max_sites: int = 20
    oracle_grid: bool = False
    oracle_grid_n: List[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])
    oracle_grid_gammas: List[float] = field(default_factory=lambda: [0.2, 0.5, 1.0])

    # harness
    threads: int = 1
    raw: bool = False
    out: Optional[str] = None
    output_dir: str = "results"
    dump_dir: Optional[str] = "failures"

    @classmethod
    def field_names(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_dict(cls, values: Dict[str, Any], strict: bool = True) -> "ExperimentConfig":
        """
        Build a validated config from flat key-value pairs.

        Raises:
            ConfigError: on unknown keys (strict mode) or invalid values
        """
        known = set(cls.field_names())
        unknown = sorted(set(values) - known)
        if unknown and strict:
            raise ConfigError("unknown configuration key", field=unknown[0])
        config = cls(**{k: v for k, v in values.items() if k in known})
        config.normalize()
        config.validate()
        return config

    def normalize(self):
        """Coerce value types; errors name the field."""
        def coerce(name, fn):
            try:
                setattr(self, name, fn(getattr(self, name)))
            except (TypeError, ValueError) as e:
                raise ConfigError(f"invalid value {getattr(self, name)!r} ({e})", field=name) from None

        for name in ("gamma", "horizon", "t_offset", "delta", "tau_cap_factor", "rho_t_star",
                     "margin_factor", "lam", "base_time", "survival_threshold", "verify_horizon"):
            coerce(name, _real)
        for name in ("seed", "n", "replicas", "tau_bound_replicas", "rho_replicas", "rho_block",
                     "edge_offset", "verify_diagrams", "verify_n", "oracle_max_sites", "threads",
                     "covariance_site"):
            coerce(name, _integer)
        coerce("max_events", lambda v: None if v is None else _integer(v))
        coerce("deviation_slope", lambda v: None if v is None else _real(v))
        coerce("F", lambda v: [_integer(x) for x in v])
        coerce("n_grid", lambda v: [_integer(x) for x in v])
        coerce("t_grid", lambda v: [_real(x) for x in v])
        coerce("lags", lambda v: [_real(x) for x in v])
        coerce("gamma_grid", lambda v: [_real(x) for x in v])
        coerce("verify_gammas", lambda v: [_real(x) for x in v])
        coerce("r_schedule", lambda v: [(_integer(a), _real(b)) for a, b in v])
        coerce("raw", _boolean)
        coerce("oracle_grid", _boolean)
        coerce("oracle_grid_n", lambda v: [_integer(x) for x in v])
        coerce("oracle_grid_gammas", lambda v: [_real(x) for x in v])
        coerce("init", lambda v: v if v == "all" else [_integer(x) for x in v])

    def validate(self):
        """
        Check value ranges and the averaging-schedule hypotheses.

        Raises:
            ConfigError: naming the offending field
        """
        if not 0 <= self.seed < MAX_SEED:
            raise ConfigError("must be a 64-bit unsigned integer", field="seed")
        for name in ("gamma", "lam"):
            if getattr(self, name) < 0.0:
                raise ConfigError("must be >= 0", field=name)
        for name in ("horizon", "delta", "margin_factor", "rho_t_star", "tau_cap_factor", "verify_horizon"):
            if getattr(self, name) <= 0.0:
                raise ConfigError("must be > 0", field=name)
        for name in ("t_offset", "base_time"):
            if getattr(self, name) < 0.0:
                raise ConfigError("must be >= 0", field=name)
        for name in ("replicas", "rho_replicas", "tau_bound_replicas", "threads", "verify_diagrams",
                     "oracle_max_sites"):
            if getattr(self, name) < 1:
                raise ConfigError("must be >= 1", field=name)
        for name in ("n", "verify_n", "rho_block"):
            if getattr(self, name) < 0:
                raise ConfigError("must be >= 0", field=name)
        if self.edge_offset < 1:
            raise ConfigError("must be >= 1 (site right of the half-line)", field="edge_offset")
        if self.max_events is not None and self.max_events < 1:
            raise ConfigError("must be >= 1", field="max_events")
        if not 0.0 < self.survival_threshold < 1.0:
            raise ConfigError("must lie in (0, 1)", field="survival_threshold")
        if self.covariance_mode not in ("infinite", "finite"):
            raise ConfigError("must be 'infinite' or 'finite'", field="covariance_mode")
        if self.sweep_mode not in ("dual", "finite"):
            raise ConfigError("must be 'dual' or 'finite'", field="sweep_mode")

        if not self.r_schedule:
            raise ConfigError("schedule is empty", field="r_schedule")
        ns = [n for n, _ in self.r_schedule]
        rs = [r for _, r in self.r_schedule]
        if any(n < 0 for n in ns) or any(r <= 0.0 for r in rs):
            raise ConfigError("window half-widths must be >= 0 and averaging lengths > 0", field="r_schedule")
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ConfigError("window half-widths must be strictly increasing", field="r_schedule")
        if any(b <= a for a, b in zip(rs, rs[1:])):
            raise ConfigError("averaging lengths R_n must increase with n (hypothesis R_n -> +inf)",
                              field="r_schedule")
        if not self.F:
            raise ConfigError("observation set is empty", field="F")
        if len(set(self.F)) != len(self.F):
            raise ConfigError("sites must be distinct", field="F")
        smallest = min(ns)
        if min(self.F) < -smallest or max(self.F) > smallest:
            raise ConfigError(f"sites must lie in the window [-{smallest}, {smallest}]", field="F")

        _check_sorted(self.lags, "lags", minimum=0.0)
        _check_sorted(self.t_grid, "t_grid", minimum=0.0)
        _check_sorted(self.gamma_grid, "gamma_grid", minimum=0.0)
        _check_sorted([float(n) for n in self.n_grid], "n_grid", minimum=1.0)
        if any(g < 0.0 for g in self.verify_gammas):
            raise ConfigError("must be >= 0", field="verify_gammas")
        if not self.oracle_grid_n or any(n < 0 for n in self.oracle_grid_n):
            raise ConfigError("must be a non-empty list of half-widths >= 0", field="oracle_grid_n")
        if not self.oracle_grid_gammas or any(g < 0.0 for g in self.oracle_grid_gammas):
            raise ConfigError("must be a non-empty list of rates >= 0", field="oracle_grid_gammas")
        if self.init != "all":
            if any(abs(i) > self.n for i in self.init):
                raise ConfigError(f"sites must lie in [-{self.n}, {self.n}]", field="init")

    def window_sites(self) -> range:
        return range(-self.n, self.n + 1)

    def to_dict(self) -> Dict[str, Any]:
        """JSON-friendly snapshot."""
        out = asdict(self)
        out["r_schedule"] = [[n, r] for n, r in self.r_schedule]
        return out


def _real(value) -> float:
    if isinstance(value, bool):
        raise ValueError("expected a number")
    x = float(value)
    if not math.isfinite(x):
        raise ValueError("must be finite")
    return x


def _integer(value) -> int:
    if isinstance(value, bool):
        raise ValueError("expected an integer")
    if isinstance(value, float):
        if not value.is_integer():
            raise ValueError("expected an integer")
        return int(value)
    return int(value)


def _boolean(value) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.lower() in ("1", "true", "yes", "on", "0", "false", "no", "off"):
        return value.lower() in ("1", "true", "yes", "on")
    if isinstance(value, int):
        return bool(value)
    raise ValueError("expected a boolean")


def _check_sorted(values: List[float], name: str, minimum: float):
    if not values:
        raise ConfigError("must not be empty", field=name)
    if any(v < minimum for v in values):
        raise ConfigError(f"values must be >= {minimum}", field=name)
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError("must be strictly increasing", field=name)
