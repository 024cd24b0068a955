"""Uniform periodic grids, sampled fields and the plain-text snapshot format."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MIN_COUNT = 8


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform grid on a periodic box in one or two dimensions.

    Node ``j`` on axis ``k`` sits at ``origin[k] + j * spacing[k]``.  When
    ``origin`` is omitted the box is centred on zero, ``[-L/2, L/2)``.
    """

    extents: tuple[float, ...]
    counts: tuple[int, ...]
    origin: tuple[float, ...] | None = None

    def __post_init__(self):
        extents = tuple(float(e) for e in self.extents)
        counts = tuple(int(c) for c in self.counts)
        if len(extents) != len(counts) or len(extents) not in (1, 2):
            raise ValueError("grid must be 1-D or 2-D with one extent per count")
        if any(c < MIN_COUNT for c in counts):
            raise ValueError(f"need at least {MIN_COUNT} nodes per axis, got {counts}")
        if any(not np.isfinite(e) or e <= 0 for e in extents):
            raise ValueError(f"extents must be positive, got {extents}")
        origin = self.origin
        if origin is None:
            origin = tuple(-0.5 * e for e in extents)
        origin = tuple(float(o) for o in origin)
        if len(origin) != len(extents):
            raise ValueError("origin must have one entry per axis")
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "origin", origin)

    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(e / c for e, c in zip(self.extents, self.counts))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.counts

    @property
    def h_min(self) -> float:
        return min(self.spacing)

    def axis(self, k: int) -> np.ndarray:
        return self.origin[k] + self.spacing[k] * np.arange(self.counts[k])

    def mesh(self) -> tuple[np.ndarray, ...]:
        return np.meshgrid(*(self.axis(k) for k in range(self.dim)), indexing="ij")

    def wrap_delta(self, d: np.ndarray, k: int) -> np.ndarray:
        """Minimum-image displacement along axis ``k``."""
        L = self.extents[k]
        return d - L * np.round(d / L)

    def nearest_index(self, point) -> tuple[int, ...]:
        point = np.atleast_1d(np.asarray(point, dtype=float))
        idx = []
        for k in range(self.dim):
            j = int(np.round((point[k] - self.origin[k]) / self.spacing[k]))
            idx.append(j % self.counts[k])
        return tuple(idx)

    def node(self, index) -> np.ndarray:
        return np.array([self.origin[k] + self.spacing[k] * index[k] for k in range(self.dim)])

    def refined(self, factor: int) -> "PeriodicGrid":
        return PeriodicGrid(self.extents, tuple(c * factor for c in self.counts), self.origin)

    def coarsened(self, factor: int) -> "PeriodicGrid":
        if any(c % factor for c in self.counts):
            raise ValueError(f"counts {self.counts} not divisible by {factor}")
        return PeriodicGrid(self.extents, tuple(c // factor for c in self.counts), self.origin)

    def line(self, k: int = 0) -> "PeriodicGrid":
        """The 1-D grid along axis ``k``."""
        return PeriodicGrid((self.extents[k],), (self.counts[k],), (self.origin[k],))


@dataclass
class ScalarField:
    grid: PeriodicGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values shape {self.values.shape} != grid shape {self.grid.shape}")

    @classmethod
    def from_function(cls, grid: PeriodicGrid, fn) -> "ScalarField":
        return cls(grid, np.broadcast_to(fn(*grid.mesh()), grid.shape).copy())

    @classmethod
    def constant(cls, grid: PeriodicGrid, c: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(c)))

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())

    def sup(self) -> float:
        return float(self.values.max())

    def inf(self) -> float:
        return float(self.values.min())

    def mean(self) -> float:
        return float(self.values.mean())

    def at(self, point) -> float:
        return float(self.values[self.grid.nearest_index(point)])

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())


def restrict(field: ScalarField, factor: int) -> ScalarField:
    """Full-weighting restriction onto a grid ``factor`` times coarser.

    Coarse nodes coincide with every ``factor``-th fine node.  Weights are
    non-negative (so ordering between fields is preserved) and every fine node
    contributes ``1/factor`` per axis in total (so the grid integral is kept).
    """
    if factor == 1:
        return field.copy()
    grid = field.grid.coarsened(factor)
    half = factor // 2
    if factor % 2:
        taps = [(j, 1.0) for j in range(-half, half + 1)]
    else:
        taps = [(j, 1.0) for j in range(-half + 1, half)] + [(-half, 0.5), (half, 0.5)]
    v = field.values
    for k in range(grid.dim):
        acc = np.zeros_like(v)
        for shift, w in taps:
            acc += w * np.roll(v, -shift, axis=k)
        sl = [slice(None)] * v.ndim
        sl[k] = slice(0, None, factor)
        v = acc[tuple(sl)] / factor
    return ScalarField(grid, v)


def write_snapshot(path, field: ScalarField, t: float) -> None:
    g = field.grid
    fmt = lambda xs: ",".join(repr(float(x)) for x in xs)  # noqa: E731
    lines = [
        f"dim={g.dim}",
        f"extents={fmt(g.extents)}",
        f"counts={','.join(str(c) for c in g.counts)}",
        f"origin={fmt(g.origin)}",
        f"t={float(t)!r}",
    ]
    rows = np.atleast_2d(field.values)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
        np.savetxt(fh, rows, delimiter=",", fmt="%.17g")


def read_snapshot(path) -> tuple[ScalarField, float]:
    header = {}
    with open(path) as fh:
        lines = fh.read().splitlines()
    body_start = 0
    for i, line in enumerate(lines):
        if "=" not in line:
            body_start = i
            break
        key, _, val = line.partition("=")
        header[key.strip()] = val.strip()
    else:
        raise ValueError(f"{path}: snapshot has no data rows")
    dim = int(header["dim"])
    extents = tuple(float(x) for x in header["extents"].split(","))
    counts = tuple(int(x) for x in header["counts"].split(","))
    origin = tuple(float(x) for x in header["origin"].split(",")) if "origin" in header else None
    grid = PeriodicGrid(extents, counts, origin)
    data = np.loadtxt(lines[body_start:], delimiter=",", ndmin=2)
    values = data.reshape(counts) if dim == 2 else data.reshape(-1)
    if values.shape != grid.shape:
        raise ValueError(f"{Path(path).name}: expected {grid.shape} values, got {data.shape}")
    return ScalarField(grid, values), float(header.get("t", 0.0))
