"""Keilson-Storer collisions for physical and adjoint particles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sampling import sample_normal


@dataclass(frozen=True)
class KSParams:
    gamma: float
    beta: float
    tau: float
    v_max: float = math.inf

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")

    @classmethod
    def with_default_beta(cls, gamma: float, tau: float, v_max: float = math.inf) -> KSParams:
        # unit mass over k_B T_p
        return cls(gamma, 1.0 / (2.0 * (1.0 - gamma ** 2)), tau, v_max)

    @property
    def Gamma(self) -> float:
        return 1.0 / self.tau

    @property
    def tau_q(self) -> float:
        return self.gamma * self.tau

    @property
    def forward_variance(self) -> float:
        return 1.0 / (2.0 * self.beta)

    @property
    def adjoint_variance(self) -> float:
        return 1.0 / (2.0 * self.beta * self.gamma ** 2)


def kernel(v, w, params: KSParams):
    """Transition density A(v, w) from pre-collision v to post-collision w."""
    b = params.beta
    return params.Gamma * np.sqrt(b / np.pi) * np.exp(-b * (w - params.gamma * v) ** 2)


def adjoint_kernel(v, w, params: KSParams):
    """A*(v, w); as a function of w it is a Gaussian centred at v / gamma."""
    b, g = params.beta, params.gamma
    return params.Gamma / g * np.sqrt(b / np.pi) * np.exp(-b * g * g * (w - v / g) ** 2)


def c_star_0(params: KSParams) -> float:
    """Net adjoint reaction rate, Gamma (1 - gamma) / gamma."""
    return params.Gamma * (1.0 - params.gamma) / params.gamma


def forward_postcollision(v: float, params: KSParams, rng, max_tries: int = 100_000) -> float:
    """Draw from N(gamma v, 1/(2 beta)).

    A draw leaving [-v_max, v_max] is redrawn from the same pre-collision
    velocity, unless that velocity was itself already outside the window
    (then no in-window draw may exist and the first draw is kept).
    """
    for _ in range(max_tries):
        w = sample_normal(params.gamma * v, params.forward_variance, rng)
        if abs(w) <= params.v_max or abs(v) > params.v_max:
            return w
    raise RuntimeError("post-collision velocity keeps leaving the velocity window")


def adjoint_postcollision(v: float, params: KSParams, rng) -> float | None:
    """Draw from N(v/gamma, 1/(2 beta gamma^2)); None flags removal."""
    w = sample_normal(v / params.gamma, params.adjoint_variance, rng)
    if abs(w) > params.v_max:
        return None
    return w


def forward_postcollision_many(v: np.ndarray, params: KSParams, normal_draw,
                               max_tries: int = 100_000) -> np.ndarray:
    """Array form; ``normal_draw(attempt, index)`` returns standard normals."""
    out = np.empty_like(v)
    pending = np.arange(len(v))
    sd = math.sqrt(params.forward_variance)
    for attempt in range(max_tries):
        if pending.size == 0:
            return out
        w = params.gamma * v[pending] + sd * normal_draw(attempt, pending)
        out[pending] = w
        retry = (np.abs(w) > params.v_max) & (np.abs(v[pending]) <= params.v_max)
        pending = pending[retry]
    raise RuntimeError("post-collision velocity keeps leaving the velocity window")


def adjoint_postcollision_many(v: np.ndarray, params: KSParams, z: np.ndarray):
    """Array form from standard normals ``z``; returns ``(v', removed)``."""
    w = v / params.gamma + math.sqrt(params.adjoint_variance) * z
    return w, np.abs(w) > params.v_max
