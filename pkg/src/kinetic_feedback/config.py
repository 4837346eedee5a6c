"""Simulation configuration and its flat ``key = value`` file format.

Every key is optional; missing keys take the defaults below, which are the
published experiment settings plus implementer choices for the values the
experiment leaves open (``tau``, ``beta``, covariances, ``z_t``).

Example::

    # desk-scale run
    n_t = 100
    n_x = 25
    n_v = 25
    n_f = 1000
    n_q_terminal = 200
    sigma_theta = 1.0 1.0
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path

from .collisions import KSParams
from .denoise import DenoiseParams
from .domain import GridSpec, PhaseDomain
from .dynamics import CHARACTERISTICS, SCHEMES, ForceSpec
from .objective import ObjectiveParams, TargetOrbit, z_desired
from .sampling import InitialDensitySpec
from .transport import StepSettings


class ConfigError(ValueError):
    pass


@dataclass
class SimConfig:
    n_t: int = 100
    dt: float = 0.025
    n_x: int = 50
    n_v: int = 50
    v_max: float = 5.0
    p_max: float = 10.0
    n_f: int = 10_000
    gamma: float = 0.9999
    alpha: float = 0.5
    nu: float = 1.0
    c_theta: float = 1000.0
    c_phi: float = 1000.0
    c_s: float = 0.5
    n_q_terminal: int = 600
    # None means "derive": tau = dt / 10, beta = 1 / (2 (1 - gamma^2)), z_t = z_D(T)
    tau: float | None = None
    beta: float | None = None
    sigma_theta: tuple[float, float] = (1.0, 1.0)
    sigma_phi: tuple[float, float] = (1.0, 1.0)
    z_t: tuple[float, float] | None = None
    orbit_radius: float = 2.5
    seed: int = 0
    use_time_averaged_theta: bool = True
    adjoint_characteristics: str = "forward-stream"
    integrator: str = "velocity_verlet"
    max_substep: float = math.inf
    max_adjoint_particles: int = 0
    closure: bool = True
    workers: int = 1
    init: str = "uniform"
    init_mean: tuple[float, float] = (8.0, 3.5)
    init_cov: tuple[float, float] = (0.15, 0.15)

    def __post_init__(self):
        self.validate()

    # derived quantities ------------------------------------------------
    @property
    def T(self) -> float:
        return self.n_t * self.dt

    @property
    def dx(self) -> float:
        return self.p_max / self.n_x

    @property
    def dv(self) -> float:
        return 2.0 * self.v_max / self.n_v

    @property
    def tau_eff(self) -> float:
        return self.dt / 10.0 if self.tau is None else self.tau

    @property
    def beta_eff(self) -> float:
        return 1.0 / (2.0 * (1.0 - self.gamma ** 2)) if self.beta is None else self.beta

    @property
    def z_t_eff(self) -> tuple[float, float]:
        if self.z_t is not None:
            return tuple(self.z_t)
        x, v = z_desired(self.T, self.orbit())
        return (float(x), float(v))

    def validate(self) -> None:
        checks = [
            (self.n_t >= 1, "n_t must be >= 1"),
            (self.dt > 0, "dt must be positive"),
            (self.n_x >= 2 and self.n_v >= 2, "grid needs n_x, n_v >= 2"),
            (self.v_max > 0 and self.p_max > 0, "v_max and p_max must be positive"),
            (self.n_f >= 1, "n_f must be >= 1"),
            (0 < self.gamma < 1, "gamma must lie in (0, 1)"),
            (0 <= self.alpha <= 1, "alpha must lie in [0, 1]"),
            (self.nu > 0, "nu must be positive"),
            (self.c_theta >= 0 and self.c_phi >= 0, "c_theta and c_phi must be non-negative"),
            (self.c_s >= 0, "c_s must be non-negative"),
            (self.n_q_terminal >= 1, "n_q_terminal must be >= 1"),
            (self.tau is None or self.tau > 0, "tau must be positive"),
            (self.beta is None or self.beta > 0, "beta must be positive"),
            (min(self.sigma_theta) > 0 and min(self.sigma_phi) > 0,
             "covariance entries must be positive"),
            (self.adjoint_characteristics in CHARACTERISTICS,
             f"adjoint_characteristics must be one of {CHARACTERISTICS}"),
            (self.integrator in SCHEMES, f"integrator must be one of {SCHEMES}"),
            (self.max_substep > 0, "max_substep must be positive"),
            (self.max_adjoint_particles >= 0, "max_adjoint_particles must be >= 0"),
            (self.workers >= 1, "workers must be >= 1"),
            (self.init in ("uniform", "gaussian"), "init must be 'uniform' or 'gaussian'"),
            (min(self.init_cov) > 0, "init_cov entries must be positive"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)

    # component builders ------------------------------------------------
    def domain(self) -> PhaseDomain:
        return PhaseDomain(self.p_max, self.v_max, self.alpha)

    def grid(self) -> GridSpec:
        return GridSpec(self.n_x, self.n_v, self.p_max, self.v_max)

    def ks(self) -> KSParams:
        return KSParams(self.gamma, self.beta_eff, self.tau_eff, self.v_max)

    def orbit(self) -> TargetOrbit:
        return TargetOrbit(self.T, self.p_max / 2.0, 0.0, self.orbit_radius)

    def force_spec(self) -> ForceSpec:
        return ForceSpec(self.orbit().omega, self.p_max / 2.0)

    def objective(self) -> ObjectiveParams:
        return ObjectiveParams(self.c_theta, self.c_phi, tuple(self.sigma_theta),
                               tuple(self.sigma_phi), self.nu, self.z_t_eff, self.T,
                               self.use_time_averaged_theta)

    def denoise(self) -> DenoiseParams:
        return DenoiseParams(self.c_s)

    def initial_density(self) -> InitialDensitySpec:
        return InitialDensitySpec(self.init, tuple(self.init_mean), tuple(self.init_cov))

    def step_settings(self, direction: str = "forward") -> StepSettings:
        return StepSettings(self.dt, self.domain(), self.ks(), direction, self.integrator,
                            self.adjoint_characteristics, self.max_substep, self.seed)

    def replace(self, **changes) -> SimConfig:
        return dataclasses.replace(self, **changes)


_PAIR_KEYS = {"sigma_theta", "sigma_phi", "z_t", "init_mean", "init_cov"}
_OPTIONAL_KEYS = {"tau", "beta", "z_t"}
# accepted for documentation, checked against the derived value
_DERIVED_KEYS = {"dx": "dx", "dp": "dx", "dv": "dv", "T": "T"}


def _convert(name: str, raw: str, ftype):
    text = raw.strip()
    if name in _OPTIONAL_KEYS and text.lower() in ("none", "auto", ""):
        return None
    if name in _PAIR_KEYS:
        parts = text.replace(",", " ").split()
        if len(parts) != 2:
            raise ValueError(f"expected two numbers, got {raw!r}")
        return (float(parts[0]), float(parts[1]))
    if "bool" in str(ftype):
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if "int" in str(ftype) and "float" not in str(ftype):
        value = float(text)
        if value != int(value):
            raise ValueError(f"expected an integer, got {raw!r}")
        return int(value)
    if "float" in str(ftype):
        return float(text)
    return text


def parse_config_text(text: str, source: str = "<config>") -> SimConfig:
    types = {f.name: f.type for f in fields(SimConfig)}
    values = {}
    derived = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, raw = (s.strip() for s in body.split("=", 1))
        if key in _DERIVED_KEYS:
            try:
                derived[key] = (float(raw), lineno)
            except ValueError:
                raise ConfigError(f"{source}:{lineno}: {key}: expected a number") from None
            continue
        if key not in types:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = (_convert(key, raw, types[key]), lineno)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: {key}: {exc}") from None

    try:
        cfg = SimConfig(**{k: v for k, (v, _) in values.items()})
    except ConfigError as exc:
        key = str(exc).split()[0]
        where = f"{source}:{values[key][1]}" if key in values else source
        raise ConfigError(f"{where}: {exc}") from None
    for key, (value, lineno) in derived.items():
        actual = getattr(cfg, _DERIVED_KEYS[key])
        if not math.isclose(value, actual, rel_tol=1e-9, abs_tol=1e-12):
            raise ConfigError(f"{source}:{lineno}: {key} = {value} is inconsistent with "
                              f"the grid (derived value {actual})")
    return cfg


def parse_config(path) -> SimConfig:
    path = Path(path)
    return parse_config_text(path.read_text(encoding="utf-8"), str(path))


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return " ".join(repr(float(x)) for x in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_config(cfg: SimConfig) -> str:
    """Serialise every effective value; derived defaults are written out."""
    effective = {f.name: getattr(cfg, f.name) for f in fields(SimConfig)}
    effective["tau"] = cfg.tau_eff
    effective["beta"] = cfg.beta_eff
    effective["z_t"] = cfg.z_t_eff
    lines = [f"{k} = {_fmt(v)}" for k, v in effective.items()]
    lines += [f"dx = {cfg.dx!r}", f"dv = {cfg.dv!r}"]
    return "\n".join(lines) + "\n"
