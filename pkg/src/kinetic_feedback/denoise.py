"""Tikhonov smoothing of histograms along the velocity axis.

Each position row solves ``(I - c_s D2) q_s = q`` where ``D2`` is the
second difference over velocity with mirrored ghost cells (homogeneous
Neumann). The matrix has unit column sums, so row totals are preserved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .domain import GridField


@dataclass(frozen=True)
class DenoiseParams:
    c_s: float = 0.5

    def __post_init__(self):
        if self.c_s < 0:
            raise ValueError(f"c_s must be non-negative, got {self.c_s}")


def smoothing_bands(n_v: int, c_s: float, dv: float) -> np.ndarray:
    """Banded (1, 1) storage of I - c_s D2 for ``solve_banded``."""
    r = c_s / dv ** 2
    ab = np.empty((3, n_v))
    ab[0, :] = -r
    ab[1, :] = 1.0 + 2.0 * r
    ab[2, :] = -r
    ab[1, 0] = ab[1, -1] = 1.0 + r
    ab[0, 0] = 0.0
    ab[2, -1] = 0.0
    return ab


def denoise_values(q: np.ndarray, c_s: float, dv: float) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if not np.all(np.isfinite(q)):
        raise ValueError("cannot denoise a field with non-finite entries")
    if not dv > 0:
        raise ValueError(f"dv must be positive, got {dv}")
    if c_s == 0:
        return q.copy()
    ab = smoothing_bands(q.shape[-1], c_s, dv)
    # rows of q are independent right-hand sides
    return solve_banded((1, 1), ab, q.T).T


def denoise_field(q: GridField, params: DenoiseParams, dv: float) -> GridField:
    return GridField(denoise_values(q.values, params.c_s, dv), q.k)
