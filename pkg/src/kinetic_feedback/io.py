"""On-disk formats: binary control fields, histogram dumps, quiver data and run reports."""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .domain import ControlField, GridField, GridSpec

MAGIC = b"KCF1"
_HEADER = struct.Struct("<4sIII")


class FormatError(ValueError):
    """A control file is malformed or does not match the expected grid."""


def write_control(path, control: ControlField) -> None:
    n_t = control.n_t
    n_x, n_v = control.u.shape[1:]
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, n_t, n_x, n_v))
        fh.write(np.ascontiguousarray(control.u, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(control.u_bar, dtype="<f8").tobytes())


def read_control(path, grid: GridSpec | None = None, n_t: int | None = None) -> ControlField:
    """Inverse of :func:`write_control`.

    ``grid`` and ``n_t``, when given, must match the dimensions in the file.
    """
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, f_nt, f_nx, f_nv = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    n_u = (f_nt + 1) * f_nx * f_nv
    expected = _HEADER.size + 8 * (n_u + f_nx * f_nv)
    if len(data) < expected:
        raise FormatError(f"{path}: truncated, {len(data)} bytes of {expected}")
    if len(data) > expected:
        raise FormatError(f"{path}: {len(data) - expected} trailing bytes")
    if grid is not None and (f_nx, f_nv) != grid.shape:
        raise FormatError(f"{path}: grid {f_nx}x{f_nv} does not match {grid.n_x}x{grid.n_v}")
    if n_t is not None and f_nt != n_t:
        raise FormatError(f"{path}: n_t = {f_nt} does not match {n_t}")
    body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).astype(float)
    u = body[:n_u].reshape(f_nt + 1, f_nx, f_nv)
    u_bar = body[n_u:].reshape(f_nx, f_nv)
    return ControlField(u, u_bar)


def write_histograms(directory, hist: np.ndarray, name: str = "hist") -> list[Path]:
    """One ``k,i,j,count`` file per step; i and j are 1-based cell indices."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    n_x, n_v = hist.shape[1:]
    ii, jj = np.meshgrid(np.arange(1, n_x + 1), np.arange(1, n_v + 1), indexing="ij")
    paths = []
    width = len(str(len(hist) - 1))
    for k, h in enumerate(hist):
        path = directory / f"{name}_{k:0{width}d}.csv"
        rows = np.column_stack([np.full(h.size, k), ii.ravel(), jj.ravel(), h.ravel()])
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "i", "j", "count"])
            w.writerows([int(a), int(b), int(c), _num(d)] for a, b, c, d in rows)
        paths.append(path)
    return paths


def read_histogram(path) -> np.ndarray:
    """Load one histogram file back into an (n_x, n_v) array."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    n_x = max(int(r["i"]) for r in rows)
    n_v = max(int(r["j"]) for r in rows)
    out = np.zeros((n_x, n_v))
    for r in rows:
        out[int(r["i"]) - 1, int(r["j"]) - 1] = float(r["count"])
    return out


def _num(value: float):
    value = float(value)
    return int(value) if value.is_integer() else repr(value)


def emit_quiver(path, field2d: np.ndarray | GridField | ControlField, grid: GridSpec,
                k: int | None = None) -> int:
    """Write ``x, v, arrow_x, arrow_v`` rows, one per cell; returns the row count.

    The arrow is the phase-space velocity ``(v_j, u_ij)``. A ControlField is
    read at step ``k``, or as its time average when ``k`` is None.
    """
    if isinstance(field2d, ControlField):
        values = field2d.u_bar if k is None else field2d.at(k)
    elif isinstance(field2d, GridField):
        values = field2d.values
    else:
        values = np.asarray(field2d, dtype=float)
    if values.shape != grid.shape:
        raise ValueError(f"field shape {values.shape} does not match grid {grid.shape}")
    xc, vc = grid.mesh()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "v", "arrow_x", "arrow_v"])
        for x, v, u in zip(xc.ravel(), vc.ravel(), values.ravel()):
            w.writerow([repr(float(x)), repr(float(v)), repr(float(v)), repr(float(u))])
    return values.size


def plot_quiver(path, values: np.ndarray, grid: GridSpec, title: str = "") -> None:
    """PNG quiver of ``(v, u)``; needs matplotlib."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xc, vc = grid.mesh()
    fig, ax = plt.subplots(figsize=(6, 5))
    ax.quiver(xc, vc, vc, values, angles="xy")
    ax.set_xlabel("x")
    ax.set_ylabel("v")
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)


@dataclass
class RunReport:
    cost: float
    counts: list[int]
    residual_mean: float
    residual_median: float
    residual_max: float
    wall_clock: float
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        nums = [self.cost, self.residual_mean, self.residual_median, self.residual_max,
                self.wall_clock, *self.extra.values()]
        if not all(math.isfinite(float(x)) for x in nums):
            raise ValueError("run report holds a non-finite number")

    @classmethod
    def from_residuals(cls, cost: float, counts, residuals: np.ndarray, wall_clock: float,
                       **extra) -> RunReport:
        r = np.asarray(residuals, dtype=float)
        if r.size == 0:
            mean = median = worst = 0.0
        else:
            mean, median, worst = float(r.mean()), float(np.median(r)), float(r.max())
        return cls(float(cost), [int(c) for c in counts], mean, median, worst,
                   float(wall_clock), dict(extra))

    def to_text(self) -> str:
        lines = [
            f"cost = {self.cost!r}",
            f"residual_mean = {self.residual_mean!r}",
            f"residual_median = {self.residual_median!r}",
            f"residual_max = {self.residual_max!r}",
            f"wall_clock_s = {self.wall_clock:.3f}",
            f"final_count = {self.counts[-1] if self.counts else 0}",
        ]
        lines += [f"{k} = {v!r}" for k, v in self.extra.items()]
        lines.append("counts = " + " ".join(str(c) for c in self.counts))
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")


def parse_report(path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if "=" in line:
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out
