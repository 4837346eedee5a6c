"""Phase-space domain, cell-centred mesh and particle-to-grid deposition.

Cells are indexed 1-based in the public scalar API (``cell_of``,
``cell_center``) to match the usual (i, j) notation; array-valued helpers
and ``GridField.values`` use 0-based numpy indexing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class PhaseDomain:
    p_max: float
    v_max: float
    alpha: float = 1.0

    def __post_init__(self):
        if not self.p_max > 0:
            raise ValueError(f"p_max must be positive, got {self.p_max}")
        if not self.v_max > 0:
            raise ValueError(f"v_max must be positive, got {self.v_max}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")


@dataclass(frozen=True)
class GridSpec:
    n_x: int
    n_v: int
    p_max: float
    v_max: float

    def __post_init__(self):
        if self.n_x < 2 or self.n_v < 2:
            raise ValueError(f"grid needs at least 2x2 cells, got {self.n_x}x{self.n_v}")
        if not (self.p_max > 0 and self.v_max > 0):
            raise ValueError("grid extents must be positive")

    @classmethod
    def for_domain(cls, n_x: int, n_v: int, domain: PhaseDomain) -> GridSpec:
        return cls(n_x, n_v, domain.p_max, domain.v_max)

    @property
    def dx(self) -> float:
        return self.p_max / self.n_x

    @property
    def dv(self) -> float:
        return 2.0 * self.v_max / self.n_v

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_x, self.n_v)

    def x_centers(self) -> np.ndarray:
        return (np.arange(1, self.n_x + 1) - 0.5) * self.dx

    def v_centers(self) -> np.ndarray:
        return (np.arange(1, self.n_v + 1) - 0.5) * self.dv - self.v_max

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-centre coordinates as two (n_x, n_v) arrays."""
        return np.meshgrid(self.x_centers(), self.v_centers(), indexing="ij")


@dataclass
class Particle:
    x: float
    v: float
    t_elapsed: float = 0.0


@dataclass
class ParticleEnsemble:
    """Structure-of-arrays particle list.

    Besides the phase-space state every particle carries its sub-step clock
    ``t_elapsed``, the length of its previous sub-step ``dt_prev``, the
    unfinished part of its current free flight ``flight_left`` and a stable
    integer ``ids`` used to key its random streams.
    """

    x: np.ndarray
    v: np.ndarray
    t_elapsed: np.ndarray
    dt_prev: np.ndarray
    flight_left: np.ndarray
    ids: np.ndarray
    kind: str = "forward"
    next_id: int = 0

    def __post_init__(self):
        if self.kind not in ("forward", "adjoint"):
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        n = len(self.x)
        for name in ("v", "t_elapsed", "dt_prev", "flight_left", "ids"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"ensemble array {name!r} has wrong length")
        if n and self.next_id <= int(self.ids.max()):
            self.next_id = int(self.ids.max()) + 1

    @classmethod
    def from_phase(cls, x, v, kind: str = "forward", ids=None) -> ParticleEnsemble:
        x = np.asarray(x, dtype=float).copy()
        v = np.asarray(v, dtype=float).copy()
        n = len(x)
        if ids is None:
            ids = np.arange(n, dtype=np.int64)
        return cls(x, v, np.zeros(n), np.zeros(n), np.zeros(n),
                   np.asarray(ids, dtype=np.int64), kind=kind)

    @classmethod
    def empty(cls, kind: str = "forward") -> ParticleEnsemble:
        return cls.from_phase(np.empty(0), np.empty(0), kind=kind)

    @classmethod
    def from_particles(cls, particles, kind: str = "forward") -> ParticleEnsemble:
        ens = cls.from_phase([p.x for p in particles], [p.v for p in particles], kind=kind)
        ens.t_elapsed[:] = [p.t_elapsed for p in particles]
        return ens

    def __len__(self) -> int:
        return len(self.x)

    def particle(self, p: int) -> Particle:
        return Particle(float(self.x[p]), float(self.v[p]), float(self.t_elapsed[p]))

    def select(self, mask_or_index) -> ParticleEnsemble:
        return ParticleEnsemble(
            self.x[mask_or_index], self.v[mask_or_index],
            self.t_elapsed[mask_or_index], self.dt_prev[mask_or_index],
            self.flight_left[mask_or_index], self.ids[mask_or_index],
            kind=self.kind, next_id=self.next_id,
        )

    def copy(self) -> ParticleEnsemble:
        return self.select(slice(None))

    def extend(self, other: ParticleEnsemble) -> ParticleEnsemble:
        out = ParticleEnsemble(
            np.concatenate([self.x, other.x]),
            np.concatenate([self.v, other.v]),
            np.concatenate([self.t_elapsed, other.t_elapsed]),
            np.concatenate([self.dt_prev, other.dt_prev]),
            np.concatenate([self.flight_left, other.flight_left]),
            np.concatenate([self.ids, other.ids]),
            kind=self.kind,
            next_id=max(self.next_id, other.next_id),
        )
        return out


@dataclass
class GridField:
    values: np.ndarray
    k: int = 0

    def check(self, grid: GridSpec) -> None:
        if self.values.shape != grid.shape:
            raise ValueError(f"field shape {self.values.shape} does not match grid {grid.shape}")


@dataclass
class ControlField:
    """Gridded control ``u[k, i, j]`` for k = 0..n_t and its time average."""

    u: np.ndarray
    u_bar: np.ndarray = field(default=None)

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        if self.u.ndim != 3:
            raise ValueError("control must be a (n_t + 1, n_x, n_v) array")
        if self.u_bar is None:
            self.u_bar = self.u.mean(axis=0)
        self.u_bar = np.asarray(self.u_bar, dtype=float)
        if self.u_bar.shape != self.u.shape[1:]:
            raise ValueError("u_bar shape does not match the control grid")

    @property
    def n_t(self) -> int:
        return self.u.shape[0] - 1

    @classmethod
    def zeros(cls, n_t: int, grid: GridSpec) -> ControlField:
        return cls(np.zeros((n_t + 1, *grid.shape)))

    @classmethod
    def constant(cls, field2d: np.ndarray, n_t: int) -> ControlField:
        """Stationary control repeating ``field2d`` at every step."""
        field2d = np.asarray(field2d, dtype=float)
        return cls(np.broadcast_to(field2d, (n_t + 1, *field2d.shape)).copy(), field2d.copy())

    def at(self, k: int) -> np.ndarray:
        if not 0 <= k <= self.n_t:
            raise ValueError(f"control has no step {k} (n_t = {self.n_t})")
        return self.u[k]


def cell_indices(x, v, grid: GridSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised 0-based cell lookup.

    Returns ``(i, j, inside)``; ``i`` and ``j`` are only meaningful where
    ``inside`` is true. Interior edges go to the higher cell, the outer edges
    x = p_max and v = v_max to the last cell.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    inside = (x >= 0.0) & (x <= grid.p_max) & (v >= -grid.v_max) & (v <= grid.v_max)
    with np.errstate(invalid="ignore"):
        i = np.floor(x / grid.dx)
        j = np.floor((v + grid.v_max) / grid.dv)
    i = np.clip(np.nan_to_num(i), 0, grid.n_x - 1).astype(np.int64)
    j = np.clip(np.nan_to_num(j), 0, grid.n_v - 1).astype(np.int64)
    return i, j, inside


def cell_of(x: float, v: float, grid: GridSpec, domain: PhaseDomain | None = None):
    """1-based (i, j) of the cell holding (x, v), or None outside the window."""
    i, j, inside = cell_indices(x, v, grid)
    if not bool(inside):
        return None
    return int(i) + 1, int(j) + 1


def cell_center(i: int, j: int, grid: GridSpec, domain: PhaseDomain | None = None):
    if not (1 <= i <= grid.n_x and 1 <= j <= grid.n_v):
        raise ValueError(f"cell ({i}, {j}) outside a {grid.n_x}x{grid.n_v} grid")
    return (i - 0.5) * grid.dx, (j - 0.5) * grid.dv - grid.v_max


def lookup(values: np.ndarray, x, v, grid: GridSpec) -> np.ndarray:
    """Piecewise-constant read of a gridded field; zero outside the window."""
    i, j, inside = cell_indices(x, v, grid)
    return np.where(inside, values[i, j], 0.0)


def deposit(ensemble: ParticleEnsemble, grid: GridSpec, domain: PhaseDomain | None = None,
            k: int = 0) -> GridField:
    """Histogram of particle counts per cell (box counting)."""
    i, j, inside = cell_indices(ensemble.x, ensemble.v, grid)
    flat = i[inside] * grid.n_v + j[inside]
    counts = np.bincount(flat, minlength=grid.n_x * grid.n_v).astype(float)
    return GridField(counts.reshape(grid.shape), k)
