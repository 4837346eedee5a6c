"""Tracking and terminal costs, the target orbit and Monte Carlo cost estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import ControlField, GridSpec, lookup


@dataclass(frozen=True)
class TargetOrbit:
    """Harmonic-oscillator ellipse around ``(x0, v0)`` with period ``period``."""

    period: float
    x0: float = 5.0
    v0: float = 0.0
    radius: float = 2.5

    @property
    def omega(self) -> float:
        return 2.0 * math.pi / self.period


@dataclass(frozen=True)
class ObjectiveParams:
    c_theta: float
    c_phi: float
    sigma_theta: tuple[float, float]
    sigma_phi: tuple[float, float]
    nu: float
    z_t: tuple[float, float]
    T: float
    use_time_averaged_theta: bool = True

    def __post_init__(self):
        # zero weights are allowed so either cost can be switched off
        if self.c_theta < 0 or self.c_phi < 0:
            raise ValueError("cost weights must be non-negative")
        if min(self.sigma_theta) <= 0 or min(self.sigma_phi) <= 0:
            raise ValueError("covariance diagonals must be positive")
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if not self.T > 0:
            raise ValueError(f"horizon T must be positive, got {self.T}")


def z_desired(t, orbit: TargetOrbit):
    w = orbit.omega
    x_d = orbit.radius * np.cos(w * t) + orbit.x0
    v_d = -orbit.radius * w * np.sin(w * t) - orbit.v0
    return x_d, v_d


def _gaussian_well(x, v, cx, cv, weight: float, sigma) -> np.ndarray:
    norm = weight / math.sqrt((2.0 * math.pi) ** 2 * sigma[0] * sigma[1])
    q = (x - cx) ** 2 / sigma[0] + (v - cv) ** 2 / sigma[1]
    return -norm * np.exp(-0.5 * q)


def theta(x, v, t, params: ObjectiveParams, orbit: TargetOrbit):
    xd, vd = z_desired(t, orbit)
    return _gaussian_well(x, v, xd, vd, params.c_theta, params.sigma_theta)


def theta_bar(x, v, params: ObjectiveParams, orbit: TargetOrbit, n_t: int):
    """Left Riemann average of theta over t^k = k T / n_t, k < n_t."""
    if n_t < 1:
        raise ValueError("n_t must be at least 1")
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    acc = np.zeros(np.broadcast(x, v).shape)
    for k in range(n_t):
        acc = acc + theta(x, v, k * params.T / n_t, params, orbit)
    return acc / n_t


def phi(x, v, params: ObjectiveParams):
    return _gaussian_well(x, v, params.z_t[0], params.z_t[1], params.c_phi, params.sigma_phi)


def running_cost(x, v, k: int, params: ObjectiveParams, orbit: TargetOrbit, n_t: int):
    """theta (or theta_bar) at the particles for step k."""
    if params.use_time_averaged_theta:
        return theta_bar(x, v, params, orbit, n_t)
    return theta(x, v, k * params.T / n_t, params, orbit)


def cost_estimate(history, control: ControlField | None, params: ObjectiveParams,
                  orbit: TargetOrbit, grid: GridSpec, n_initial: int | None = None) -> float:
    """Ensemble cost J from per-step particle states.

    ``history`` is a sequence of ``(x, v)`` array pairs for k = 0..n_t. The
    running part uses a left Riemann sum over k < n_t; every sum is divided
    by the initial particle count, so absorbed particles simply stop
    contributing.
    """
    if len(history) < 2:
        raise ValueError("cost needs at least the initial and one further step")
    n_t = len(history) - 1
    dt = params.T / n_t
    if n_initial is None:
        n_initial = len(history[0][0])
    if n_initial == 0:
        raise ValueError("empty initial ensemble")
    run = 0.0
    for k in range(n_t):
        x, v = history[k]
        c = running_cost(x, v, k, params, orbit, n_t)
        if control is not None:
            u = lookup(control.at(k), x, v, grid)
            c = c + 0.5 * params.nu * u * u
        run += dt * float(np.sum(c))
    x, v = history[n_t]
    terminal = float(np.sum(phi(x, v, params)))
    return (run + terminal) / n_initial


def sampled_orbit(orbit: TargetOrbit, T: float, n_t: int) -> np.ndarray:
    t = np.arange(n_t + 1) * T / n_t
    xd, vd = z_desired(t, orbit)
    return np.column_stack([xd, vd])


def orbit_residual(x, v, orbit: TargetOrbit, T: float, n_t: int) -> np.ndarray:
    """Per-particle distance to the nearest sampled orbit point z_D(t^k)."""
    pts = sampled_orbit(orbit, T, n_t)
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    best = np.full(x.shape, np.inf)
    for px, pv in pts:
        best = np.minimum(best, np.hypot(x - px, v - pv))
    return best
