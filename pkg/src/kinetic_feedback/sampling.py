"""Random streams, samplers and ensemble initialisation.

All randomness in the solvers comes from a counter-based generator: every
draw is a pure hash of ``(seed, purpose, particle id, step, sub-step, lane)``.
Nothing is carried between particles, so the order (or the worker) in which
particles are processed cannot change the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .domain import ParticleEnsemble, PhaseDomain

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


class Purpose(IntEnum):
    INIT = 1
    FLIGHT = 2
    COLLIDE = 3
    BOUNDARY = 4
    INJECT = 5
    REACTION = 6
    STREAM = 7


def _mix(z: np.ndarray) -> np.ndarray:
    # splitmix64 finaliser
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _absorb(h: np.ndarray, value) -> np.ndarray:
    value = np.asarray(value).astype(np.int64).astype(np.uint64)
    return _mix(h ^ (value * _GOLDEN + _GOLDEN))


def keyed_bits(seed: int, purpose: int, ids, step, sub=0, lane=0) -> np.ndarray:
    """64-bit hash of the stream key; broadcasts over array arguments."""
    with np.errstate(over="ignore"):
        h = _mix(np.atleast_1d(np.uint64(int(seed) & _MASK)) + _GOLDEN)
        h = _absorb(h, purpose)
        h = _absorb(h, step)
        h = _absorb(h, ids)
        h = _absorb(h, sub)
        h = _absorb(h, lane)
    return h


def keyed_uniform(seed: int, purpose: int, ids, step, sub=0, lane=0) -> np.ndarray:
    """Uniform doubles in [0, 1) keyed like :func:`keyed_bits`."""
    bits = keyed_bits(seed, purpose, ids, step, sub, lane)
    return (bits >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def keyed_normal(seed: int, purpose: int, ids, step, sub=0, lane=0) -> np.ndarray:
    """Standard normals by Box-Muller from lanes ``2*lane`` and ``2*lane + 1``."""
    u1 = 1.0 - keyed_uniform(seed, purpose, ids, step, sub, 2 * lane)
    u2 = keyed_uniform(seed, purpose, ids, step, sub, 2 * lane + 1)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


class RngStream:
    """Sequential view of one keyed stream.

    ``random()`` returns successive draws of the key ``(purpose, particle,
    step)``; two streams with equal seed and key yield identical sequences.
    """

    def __init__(self, seed: int = 0, purpose: int = Purpose.STREAM, particle: int = 0,
                 step: int = 0):
        self.seed = int(seed)
        self.key = (int(purpose), int(particle), int(step))
        self.counter = 0

    def random(self, size=None):
        n = 1 if size is None else int(np.prod(size))
        purpose, particle, step = self.key
        subs = np.arange(self.counter, self.counter + n)
        self.counter += n
        out = keyed_uniform(self.seed, purpose, particle, step, subs)
        return float(out[0]) if size is None else out.reshape(size)


def sample_uniform(a: float, b: float, rng) -> float:
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b})")
    return a + (b - a) * rng.random()


def sample_normal(mean: float, variance: float, rng) -> float:
    """Box-Muller draw; consumes two raw uniforms."""
    if variance < 0:
        raise ValueError(f"variance must be non-negative, got {variance}")
    u1 = 1.0 - rng.random()
    u2 = rng.random()
    z = math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
    if variance == 0:
        return float(mean)
    return mean + math.sqrt(variance) * z


def free_flight_time(tau: float, rng) -> float:
    """Exponential flight ``-tau * log(r)`` with r uniform in (0, 1]."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    r = 1.0 - rng.random()
    return -tau * math.log(r)


def free_flight_times(tau: float, u) -> np.ndarray:
    """Array form of :func:`free_flight_time` from uniforms ``u`` in [0, 1)."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    return -tau * np.log(1.0 - np.asarray(u, dtype=float))


@dataclass(frozen=True)
class InitialDensitySpec:
    variant: str = "uniform"
    mean: tuple[float, float] = (8.0, 3.5)
    cov: tuple[float, float] = (0.15, 0.15)

    def __post_init__(self):
        if self.variant not in ("uniform", "gaussian"):
            raise ValueError(f"unknown initial density {self.variant!r}")
        if self.variant == "gaussian" and min(self.cov) <= 0:
            raise ValueError("gaussian covariance entries must be positive")


def _gaussian_in_window(n: int, mean, var, domain: PhaseDomain, seed: int, ids,
                        step: int, allow_zero_var: bool = False, max_rounds: int = 10_000):
    """Rejection-sample a diagonal 2D Gaussian restricted to the window."""
    x = np.empty(n)
    v = np.empty(n)
    pending = np.arange(n)
    sx, sv = math.sqrt(var[0]), math.sqrt(var[1])
    for attempt in range(max_rounds):
        if pending.size == 0:
            return x, v
        pid = ids[pending]
        x[pending] = mean[0] + sx * keyed_normal(seed, Purpose.INIT, pid, step, attempt, 0)
        v[pending] = mean[1] + sv * keyed_normal(seed, Purpose.INIT, pid, step, attempt, 1)
        ok = ((x[pending] >= 0) & (x[pending] <= domain.p_max)
              & (np.abs(v[pending]) <= domain.v_max))
        pending = pending[~ok]
    raise RuntimeError("gaussian initial cloud lies almost entirely outside the window")


def init_forward_ensemble(spec: InitialDensitySpec, n_f: int, domain: PhaseDomain,
                          seed: int = 0) -> ParticleEnsemble:
    if n_f < 1:
        raise ValueError("need at least one particle")
    ids = np.arange(n_f, dtype=np.int64)
    if spec.variant == "uniform":
        x = domain.p_max * keyed_uniform(seed, Purpose.INIT, ids, 0, 0, 0)
        v = domain.v_max * (2.0 * keyed_uniform(seed, Purpose.INIT, ids, 0, 0, 1) - 1.0)
    else:
        x, v = _gaussian_in_window(n_f, spec.mean, spec.cov, domain, seed, ids, 0)
    return ParticleEnsemble.from_phase(x, v, kind="forward", ids=ids)


def init_adjoint_ensemble(z_t, sigma_phi, n_q: int, domain: PhaseDomain, seed: int = 0,
                          step: int = 0) -> ParticleEnsemble:
    """Terminal adjoint cloud: a Gaussian sample shaped like ``-phi``."""
    if n_q < 1:
        raise ValueError("need at least one terminal adjoint particle")
    ids = np.arange(n_q, dtype=np.int64)
    x, v = _gaussian_in_window(n_q, z_t, sigma_phi, domain, seed, ids, step)
    return ParticleEnsemble.from_phase(x, v, kind="adjoint", ids=ids)
