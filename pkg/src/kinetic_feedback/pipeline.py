"""Forward simulation plus cost and orbit-residual evaluation in one call."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .config import SimConfig
from .domain import ControlField
from .forward import ForwardRun, run_forward
from .io import RunReport
from .objective import cost_estimate, orbit_residual
from .sampling import init_forward_ensemble


@dataclass
class Simulation:
    run: ForwardRun
    cost: float
    residuals: np.ndarray      # per surviving particle, at t = T
    wall_clock: float

    def report(self, **extra) -> RunReport:
        return RunReport.from_residuals(self.cost, self.run.counts, self.residuals,
                                        self.wall_clock, **extra)


def simulate(cfg: SimConfig, control: ControlField | None = None,
             workers: int | None = None) -> Simulation:
    """Sample f0, run the forward model and evaluate J and the orbit residual."""
    workers = cfg.workers if workers is None else workers
    grid = cfg.grid()
    t0 = time.perf_counter()
    init = init_forward_ensemble(cfg.initial_density(), cfg.n_f, cfg.domain(), cfg.seed)
    run = run_forward(init, control, cfg.n_t, grid, cfg.force_spec(),
                      cfg.step_settings("forward"), workers=workers)
    cost = cost_estimate(run.states, control, cfg.objective(), cfg.orbit(), grid)
    x, v = run.states[-1]
    residuals = orbit_residual(x, v, cfg.orbit(), cfg.T, cfg.n_t)
    return Simulation(run, cost, residuals, time.perf_counter() - t0)
