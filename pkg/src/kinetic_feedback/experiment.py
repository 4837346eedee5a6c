"""Desk-scale stabilization experiment: controlled versus uncontrolled runs.

One adjoint solve gives ``u``. The uniform initial density is simulated with
and without ``u``; the Gaussian cloud is simulated with and without the
time-averaged ``u_bar``. All four forward runs share the seed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .adjoint import AdjointRun, run_adjoint_oneshot
from .config import SimConfig
from .domain import ControlField
from .pipeline import Simulation, simulate

DESK = dict(n_f=1000, n_q_terminal=200, n_x=25, n_v=25, n_t=100)


def desk_config(**overrides) -> SimConfig:
    """Published parameters scaled down to a laptop run."""
    return SimConfig(**(DESK | overrides))


@dataclass
class StabilizationResult:
    adjoint: AdjointRun
    adjoint_seconds: float
    uniform_free: Simulation
    uniform_controlled: Simulation
    gaussian_free: Simulation
    gaussian_averaged: Simulation

    def rows(self) -> list[tuple[str, float, float, int]]:
        """(label, J, mean residual at T, survivors) per forward run."""
        runs = [("uniform, u = 0", self.uniform_free),
                ("uniform, u", self.uniform_controlled),
                ("gaussian, u = 0", self.gaussian_free),
                ("gaussian, u_bar", self.gaussian_averaged)]
        return [(name, s.cost, float(s.residuals.mean()) if s.residuals.size else 0.0,
                 int(s.run.counts[-1])) for name, s in runs]

    def to_text(self) -> str:
        lines = [f"adjoint solve: {self.adjoint_seconds:.2f} s, "
                 f"{self.adjoint.counts[0]} adjoint particles at t = 0"]
        lines += [f"{name:<18} J = {J:10.4f}  residual = {r:.4f}  survivors = {n}"
                  for name, J, r, n in self.rows()]
        return "\n".join(lines)


def stabilization_experiment(cfg: SimConfig, workers: int | None = None) -> StabilizationResult:
    t0 = time.perf_counter()
    adj = run_adjoint_oneshot(cfg, workers=workers)
    seconds = time.perf_counter() - t0
    uniform = cfg.replace(init="uniform")
    gaussian = cfg.replace(init="gaussian")
    averaged = ControlField.constant(adj.control.u_bar, cfg.n_t)
    return StabilizationResult(
        adj, seconds,
        simulate(uniform, None, workers),
        simulate(uniform, adj.control, workers),
        simulate(gaussian, None, workers),
        simulate(gaussian, averaged, workers),
    )
