"""Monte Carlo simulation of the controlled kinetic model."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import ControlField, GridSpec, ParticleEnsemble, deposit
from .dynamics import ForceSpec, force_at_step
from .transport import StepSettings, advance


@dataclass
class ForwardRun:
    hist: np.ndarray                      # (n_t + 1, n_x, n_v) particle counts f^k
    counts: np.ndarray                    # surviving particles per step
    states: list = field(repr=False)      # (x, v) per step
    collisions: np.ndarray                # collisions during step k -> k + 1
    final: ParticleEnsemble | None = field(default=None, repr=False)

    @property
    def n_t(self) -> int:
        return len(self.counts) - 1


def run_forward(init: ParticleEnsemble, control: ControlField | None, n_t: int,
                grid: GridSpec, force_spec: ForceSpec, settings: StepSettings,
                workers: int = 1, keep_states: bool = True) -> ForwardRun:
    """Evolve ``init`` over ``n_t`` macro-steps under F0 + u.

    ``control=None`` runs the uncontrolled model. The control read during
    step k -> k + 1 is ``u[k]``.
    """
    if settings.direction != "forward":
        raise ValueError("forward runs need a forward StepSettings")
    if control is not None:
        if control.n_t < n_t - 1 or control.u.shape[1:] != grid.shape:
            raise ValueError(f"control of shape {control.u.shape} does not cover "
                             f"{n_t} steps on a {grid.shape} grid")
    ens = init.copy()
    hist = np.zeros((n_t + 1, *grid.shape))
    counts = np.zeros(n_t + 1, dtype=np.int64)
    collisions = np.zeros(n_t, dtype=np.int64)
    states = []

    def record(k):
        hist[k] = deposit(ens, grid, k=k).values
        counts[k] = len(ens)
        if keep_states:
            states.append((ens.x.copy(), ens.v.copy()))

    record(0)
    for k in range(n_t):
        force = force_at_step(k, control, force_spec, grid)
        ens, stats = advance(ens, k, force, settings, workers=workers)
        collisions[k] = stats.collisions
        record(k + 1)
    return ForwardRun(hist, counts, states, collisions, final=ens)
