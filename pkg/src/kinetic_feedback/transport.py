"""One macro-step of collisional particle transport.

Each particle repeats, while its clock is below ``dt_macro``: start a new
free flight when the previous one is used up (draw its length, collide),
advance by ``min(flight left, max_substep)`` with a Verlet sub-step, then
apply the wall. A clock that overshoots the step is wrapped modulo
``dt_macro`` and carried into the next step.

Draws are keyed by particle id and sub-step index, so processing particles
in chunks (``workers > 1``) reproduces the serial result bit for bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .collisions import KSParams, adjoint_postcollision_many, forward_postcollision_many
from .domain import ParticleEnsemble, PhaseDomain
from .dynamics import apply_boundary_many, verlet
from .sampling import Purpose, free_flight_times, keyed_normal, keyed_uniform


@dataclass(frozen=True)
class StepSettings:
    dt_macro: float
    domain: PhaseDomain
    ks: KSParams
    direction: str = "forward"
    scheme: str = "velocity_verlet"
    characteristics: str = "forward-stream"
    max_substep: float = math.inf
    seed: int = 0

    @property
    def flight_mean(self) -> float:
        return self.ks.tau if self.direction == "forward" else self.ks.tau_q


@dataclass
class StepStats:
    collisions: int = 0
    absorbed: int = 0
    removed: int = 0
    substeps: int = 0

    def __iadd__(self, other: StepStats) -> StepStats:
        self.collisions += other.collisions
        self.absorbed += other.absorbed
        self.removed += other.removed
        self.substeps += other.substeps
        return self


_ARRAYS = ("x", "v", "t_elapsed", "dt_prev", "flight_left", "ids")


def _advance_chunk(ens: ParticleEnsemble, k: int, force: Callable, cfg: StepSettings):
    x, v = ens.x.copy(), ens.v.copy()
    tp, dtp, fl = ens.t_elapsed.copy(), ens.dt_prev.copy(), ens.flight_left.copy()
    ids = ens.ids
    alive = np.ones(len(x), dtype=bool)
    stats = StepStats()
    dt = cfg.dt_macro
    ks = cfg.ks
    forward = cfg.direction == "forward"
    sub = 0
    while True:
        act = np.flatnonzero(alive & (tp < dt))
        if act.size == 0:
            break

        new = act[fl[act] <= 0.0]
        if new.size:
            fl[new] = free_flight_times(
                cfg.flight_mean, keyed_uniform(cfg.seed, Purpose.FLIGHT, ids[new], k, sub))
            stats.collisions += new.size
            if forward:
                def draw(attempt, idx, _ids=ids[new]):
                    return keyed_normal(cfg.seed, Purpose.COLLIDE, _ids[idx], k, sub, attempt)
                v[new] = forward_postcollision_many(v[new], ks, draw)
            else:
                z = keyed_normal(cfg.seed, Purpose.COLLIDE, ids[new], k, sub)
                v[new], removed = adjoint_postcollision_many(v[new], ks, z)
                if removed.any():
                    alive[new[removed]] = False
                    stats.removed += int(removed.sum())
                    act = act[alive[act]]
                    if act.size == 0:
                        break

        h = np.minimum(fl[act], cfg.max_substep)
        xa, va = verlet(x[act], v[act], h, dtp[act], force, cfg.direction, cfg.scheme,
                        cfg.characteristics)
        if not np.all(np.isfinite(xa)):
            raise FloatingPointError("particle position became non-finite")
        outside = (xa < 0) | (xa > cfg.domain.p_max)
        xi = np.zeros(act.size)
        if outside.any():
            xi[outside] = keyed_uniform(cfg.seed, Purpose.BOUNDARY, ids[act[outside]], k, sub)
        xb, vb, absorbed = apply_boundary_many(xa, va, xi, cfg.domain)
        x[act] = xb
        v[act] = vb
        if absorbed.any():
            alive[act[absorbed]] = False
            stats.absorbed += int(absorbed.sum())
        tp[act] += h
        fl[act] -= h
        dtp[act] = h
        stats.substeps += act.size
        sub += 1

    over = tp >= dt
    tp[over] = np.mod(tp[over], dt)
    out = ParticleEnsemble(x[alive], v[alive], tp[alive], dtp[alive], fl[alive], ids[alive],
                           kind=ens.kind, next_id=ens.next_id)
    return out, stats


def advance(ens: ParticleEnsemble, k: int, force: Callable, cfg: StepSettings,
            workers: int = 1, chunk_size: int | None = None):
    """Advance every particle through one macro-step; returns ``(ensemble, stats)``."""
    n = len(ens)
    if n == 0:
        return ens.copy(), StepStats()
    if workers <= 1 and chunk_size is None:
        return _advance_chunk(ens, k, force, cfg)
    if chunk_size is None:
        chunk_size = max(1, math.ceil(n / workers))
    bounds = [(s, min(s + chunk_size, n)) for s in range(0, n, chunk_size)]
    parts = [ens.select(slice(a, b)) for a, b in bounds]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(lambda p: _advance_chunk(p, k, force, cfg), parts))
    stats = StepStats()
    for _, st in results:
        stats += st
    parts = [part for part, _ in results]
    out = ParticleEnsemble(*(np.concatenate([getattr(p, a) for p in parts]) for a in _ARRAYS),
                           kind=ens.kind, next_id=ens.next_id)
    return out, stats
