"""One-shot backward Monte Carlo solve of the augmented adjoint model.

The adjoint density q is carried by particles. Going backwards from the
terminal cloud, every step deposits and smooths q, reads the control
``u = (1/nu) d_v q`` off the smoothed histogram, injects particles for the
source ``-(theta + |d_v q|^2 / (2 nu))``, multiplies particles for the
reaction term ``C0* q`` and finally transports the cloud one step with the
adjoint dynamics driven by the control just extracted.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .collisions import c_star_0
from .config import SimConfig
from .denoise import denoise_values
from .domain import ControlField, GridSpec, ParticleEnsemble, deposit, lookup
from .dynamics import ForceSpec, base_force
from .objective import ObjectiveParams, TargetOrbit, theta, theta_bar
from .sampling import Purpose, init_adjoint_ensemble, keyed_uniform
from .transport import StepStats, advance

log = logging.getLogger(__name__)


class AdjointCollapse(RuntimeError):
    """The adjoint ensemble ran empty; the configuration is degenerate."""


class AdjointOverflow(RuntimeError):
    """The adjoint ensemble outgrew ``max_adjoint_particles``."""


@dataclass
class AdjointRun:
    control: ControlField
    q: np.ndarray              # raw counts q^k, k = 0..n_t
    q_tilde: np.ndarray        # smoothed counts
    counts: np.ndarray         # N_q^k when q^k was deposited
    injected: np.ndarray       # particles created by the source at step k
    reaction: np.ndarray       # particles created by the reaction at step k
    stats: StepStats = field(default_factory=StepStats)


def velocity_gradient(q_tilde: np.ndarray, dv: float) -> np.ndarray:
    """Central differences inside, one-sided at the first and last velocity cell."""
    return np.gradient(q_tilde, dv, axis=1, edge_order=1)


def extract_control(q_tilde: np.ndarray, nu: float, dv: float) -> np.ndarray:
    if not nu > 0:
        raise ValueError(f"nu must be positive, got {nu}")
    return velocity_gradient(np.asarray(q_tilde, dtype=float), dv) / nu


def time_average_control(u: np.ndarray | ControlField) -> np.ndarray:
    """Mean of u[k] over k = 0..n_t."""
    if isinstance(u, ControlField):
        u = u.u
    return np.asarray(u, dtype=float).mean(axis=0)


def source_counts(q_tilde: np.ndarray, theta_cells: np.ndarray, nu: float, dv: float,
                  closure: bool = True) -> np.ndarray:
    """Particles to create per cell: max(floor(-theta - |grad q|^2 / (2 nu)), 0).

    Only interior cells receive particles; the outer ring of the grid stays
    empty.
    """
    n_theta = -theta_cells
    if closure:
        g = velocity_gradient(q_tilde, dv)
        n_q = g * g / (2.0 * nu)
    else:
        n_q = 0.0
    n_new = np.maximum(np.floor(n_theta - n_q), 0.0)
    out = np.zeros_like(n_new, dtype=np.int64)
    out[1:-1, 1:-1] = n_new[1:-1, 1:-1].astype(np.int64)
    return out


def source_injection(ens: ParticleEnsemble, q_tilde: np.ndarray, theta_cells: np.ndarray,
                     k: int, nu: float, grid: GridSpec, seed: int = 0,
                     closure: bool = True) -> tuple[ParticleEnsemble, int]:
    """Append uniformly placed particles in every cell with a positive source."""
    n_new = source_counts(q_tilde, theta_cells, nu, grid.dv, closure)
    total = int(n_new.sum())
    if total == 0:
        return ens, 0
    cells = np.repeat(np.arange(n_new.size), n_new.ravel())
    i, j = np.divmod(cells, grid.n_v)
    ids = ens.next_id + np.arange(total, dtype=np.int64)
    x = (i + keyed_uniform(seed, Purpose.INJECT, ids, k, 0, 0)) * grid.dx
    v = (j + keyed_uniform(seed, Purpose.INJECT, ids, k, 0, 1)) * grid.dv - grid.v_max
    new = ParticleEnsemble.from_phase(x, v, kind=ens.kind, ids=ids)
    out = ens.extend(new)
    out.next_id = int(ids[-1]) + 1
    return out, total


def reaction_amplify(ens: ParticleEnsemble, dt: float, c0: float, k: int = 0,
                     seed: int = 0) -> tuple[ParticleEnsemble, int]:
    """Replace each particle by on average ``1 + dt c0`` identical ones."""
    m = dt * c0
    if m < 0:
        raise ValueError("reaction growth dt * c0 must be non-negative")
    whole = math.floor(m)
    eps = m - whole
    n = len(ens)
    if n == 0 or m == 0:
        return ens, 0
    copies = np.full(n, whole, dtype=np.int64)
    if eps > 0:
        r = keyed_uniform(seed, Purpose.REACTION, ens.ids, k)
        copies += (r > 1.0 - eps)
    total = int(copies.sum())
    if total == 0:
        return ens, 0
    parents = np.repeat(np.arange(n), copies)
    spawned = ens.select(parents)
    spawned.ids = ens.next_id + np.arange(total, dtype=np.int64)
    out = ens.extend(spawned)
    out.next_id = ens.next_id + total
    return out, total


def theta_on_grid(k: int, obj: ObjectiveParams, orbit: TargetOrbit, grid: GridSpec,
                  n_t: int, cached_bar: np.ndarray | None = None) -> np.ndarray:
    if obj.use_time_averaged_theta:
        if cached_bar is not None:
            return cached_bar
        xc, vc = grid.mesh()
        return theta_bar(xc, vc, obj, orbit, n_t)
    xc, vc = grid.mesh()
    return theta(xc, vc, k * obj.T / n_t, obj, orbit)


def _adjoint_force(u_k: np.ndarray, spec: ForceSpec, grid: GridSpec):
    return lambda x, v: base_force(x, spec) + lookup(u_k, x, v, grid)


def run_adjoint_oneshot(cfg: SimConfig, workers: int | None = None) -> AdjointRun:
    """Backward sweep k = n_t .. 1 producing the control u[0..n_t]."""
    workers = cfg.workers if workers is None else workers
    grid = cfg.grid()
    domain = cfg.domain()
    obj = cfg.objective()
    orbit = cfg.orbit()
    spec = cfg.force_spec()
    n_t = cfg.n_t
    c0 = c_star_0(cfg.ks())
    # adjoint streams are salted so they never coincide with forward draws
    seed = cfg.seed ^ 0x5DEECE66D

    shape = (n_t + 1, *grid.shape)
    u = np.zeros(shape)
    q_all = np.zeros(shape)
    qs_all = np.zeros(shape)
    counts = np.zeros(n_t + 1, dtype=np.int64)
    injected = np.zeros(n_t + 1, dtype=np.int64)
    reacted = np.zeros(n_t + 1, dtype=np.int64)
    stats = StepStats()

    theta_bar_cells = None
    if obj.use_time_averaged_theta:
        theta_bar_cells = theta_on_grid(0, obj, orbit, grid, n_t)

    ens = init_adjoint_ensemble(obj.z_t, obj.sigma_phi, cfg.n_q_terminal, domain, seed, n_t)

    def smooth(k):
        q = deposit(ens, grid, k=k).values
        qs = denoise_values(q, cfg.c_s, grid.dv)
        q_all[k], qs_all[k] = q, qs
        counts[k] = len(ens)
        if cfg.closure:
            u[k] = extract_control(qs, cfg.nu, grid.dv)
        return qs

    settings = dataclasses.replace(cfg.step_settings("adjoint"), seed=seed)
    for k in range(n_t, 0, -1):
        qs = smooth(k)
        th = theta_on_grid(k, obj, orbit, grid, n_t, theta_bar_cells)
        ens, injected[k] = source_injection(ens, qs, th, k, cfg.nu, grid, seed, cfg.closure)
        ens, reacted[k] = reaction_amplify(ens, cfg.dt, c0, k, seed)
        if len(ens) == 0:
            raise AdjointCollapse(f"adjoint ensemble is empty at step {k}; "
                                  "no source and no surviving particles")
        if cfg.max_adjoint_particles and len(ens) > cfg.max_adjoint_particles:
            raise AdjointOverflow(f"{len(ens)} adjoint particles at step {k} exceed "
                                  f"max_adjoint_particles = {cfg.max_adjoint_particles}")
        ens, st = advance(ens, k, _adjoint_force(u[k], spec, grid), settings, workers=workers)
        stats += st
        log.debug("adjoint step %d: %d particles (+%d source, +%d reaction)",
                  k, len(ens), injected[k], reacted[k])
    smooth(0)

    return AdjointRun(ControlField(u), q_all, qs_all, counts, injected, reacted, stats)
