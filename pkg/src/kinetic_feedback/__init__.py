"""Feedback-like control fields for a collisional kinetic model, by Monte Carlo."""

from .adjoint import AdjointRun, run_adjoint_oneshot
from .config import SimConfig, parse_config
from .domain import ControlField, GridField, GridSpec, ParticleEnsemble, PhaseDomain
from .forward import ForwardRun, run_forward

__all__ = [
    "AdjointRun", "ControlField", "ForwardRun", "GridField", "GridSpec",
    "ParticleEnsemble", "PhaseDomain", "SimConfig", "parse_config",
    "run_adjoint_oneshot", "run_forward",
]
