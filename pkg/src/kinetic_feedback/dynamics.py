"""Forces, Verlet sub-steps and the partial specular-reflection wall.

Two update rules are available for a sub-step of length ``dt1``:

``velocity_verlet``
    x' = x + v dt1 + a dt1^2 / 2,  v' = v + (a + a') dt1 / 2
``algorithm``
    x' = x + v dt1 + a (dt1 + dt2) / 2 dt1,  v' = v + a dt1
    (the variable-step pseudocode form; ``dt2`` is the previous sub-step)

In the adjoint direction the force term enters with the opposite sign. The
default ``characteristics="forward-stream"`` keeps the streaming term ``+v``.
With ``"reversed"`` it flips too, so the particle retraces the forward flow
backwards in time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .domain import ControlField, GridSpec, Particle, PhaseDomain, lookup

SCHEMES = ("velocity_verlet", "algorithm")
CHARACTERISTICS = ("forward-stream", "reversed")


@dataclass(frozen=True)
class ForceSpec:
    omega: float
    center: float

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")


def base_force(x, spec: ForceSpec):
    """Hooke restoring force towards the domain centre (unit mass)."""
    return -spec.omega ** 2 * (x - spec.center)


def total_force(x, v, k: int, control: ControlField | None, spec: ForceSpec,
                grid: GridSpec | None = None):
    a = base_force(x, spec)
    if control is None:
        return a
    u = lookup(control.at(k), x, v, grid)
    return a + (u if np.ndim(u) else float(u))


def force_at_step(k: int, control: ControlField | None, spec: ForceSpec,
                  grid: GridSpec) -> Callable:
    """Bind the step index so the solvers can call ``force(x, v)``."""
    if control is None:
        return lambda x, v: base_force(x, spec)
    u_k = control.at(k)
    return lambda x, v: base_force(x, spec) + lookup(u_k, x, v, grid)


def verlet(x, v, dt1, dt2, force: Callable, direction: str = "forward",
           scheme: str = "velocity_verlet", characteristics: str = "forward-stream"):
    """One sub-step for scalars or arrays; returns ``(x', v')``."""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown integrator {scheme!r}")
    if direction == "forward":
        s_x, s_a = 1.0, 1.0
    elif direction == "adjoint":
        if characteristics not in CHARACTERISTICS:
            raise ValueError(f"unknown adjoint characteristics {characteristics!r}")
        s_x = -1.0 if characteristics == "reversed" else 1.0
        s_a = -1.0
    else:
        raise ValueError(f"unknown direction {direction!r}")

    a = force(x, v)
    if scheme == "algorithm":
        x_new = x + s_x * v * dt1 + s_x * s_a * a * (dt1 + dt2) / 2.0 * dt1
        v_new = v + s_a * a * dt1
        return x_new, v_new
    # the streaming sign multiplies v, so the position curvature carries s_x * s_a
    x_new = x + s_x * v * dt1 + s_x * s_a * a * dt1 * dt1 / 2.0
    a_new = force(x_new, v + s_a * a * dt1 / 2.0)
    v_new = v + s_a * (a + a_new) * dt1 / 2.0
    return x_new, v_new


def verlet_substep(p: Particle, dt1: float, dt2: float, force: Callable,
                   direction: str = "forward", scheme: str = "velocity_verlet",
                   characteristics: str = "forward-stream") -> Particle:
    if dt1 < 0 or dt2 < 0:
        raise ValueError("sub-steps must be non-negative")
    x, v = verlet(p.x, p.v, dt1, dt2, force, direction, scheme, characteristics)
    return Particle(float(x), float(v), p.t_elapsed)


@dataclass(frozen=True)
class BoundaryOutcome:
    absorbed: bool
    x: float | None = None
    v: float | None = None

    @classmethod
    def reflected(cls, x: float, v: float) -> BoundaryOutcome:
        return cls(False, float(x), float(v))


def fold(x, v, p_max: float):
    """Mirror positions back into [0, p_max], flipping v once per wall hit."""
    x = np.array(x, dtype=float, copy=True)
    v = np.array(v, dtype=float, copy=True)
    if not np.all(np.isfinite(x)):
        raise ValueError("cannot fold a non-finite position")
    # shifts by whole 2 p_max periods flip v an even number of times; only
    # far excursions take this path, so single folds stay bit-exact
    far = (x < -p_max) | (x > 2.0 * p_max)
    if far.any():
        x[far] = np.mod(x[far], 2.0 * p_max)
    out = (x < 0) | (x > p_max)
    while out.any():
        low = x < 0
        x[low] = -x[low]
        v[low] = -v[low]
        high = x > p_max
        x[high] = 2.0 * p_max - x[high]
        v[high] = -v[high]
        out = (x < 0) | (x > p_max)
    return x, v


def apply_boundary(x_tilde: float, v: float, domain: PhaseDomain, rng) -> BoundaryOutcome:
    if 0.0 <= x_tilde <= domain.p_max:
        return BoundaryOutcome.reflected(x_tilde, v)
    xi = rng.random()
    if xi > domain.alpha:
        return BoundaryOutcome(True)
    x, v = fold(x_tilde, v, domain.p_max)
    return BoundaryOutcome.reflected(x, v)


def apply_boundary_many(x, v, xi, domain: PhaseDomain):
    """Array form of :func:`apply_boundary`.

    ``xi`` holds one uniform per particle; it is only read for particles
    outside the domain. Returns ``(x, v, absorbed)``.
    """
    outside = (x < 0) | (x > domain.p_max)
    absorbed = outside & (xi > domain.alpha)
    if outside.any():
        x = x.copy()
        v = v.copy()
        x[outside], v[outside] = fold(x[outside], v[outside], domain.p_max)
    return x, v, absorbed
