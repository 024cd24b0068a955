"""Analytic barriers (shrinking tori and spheres) and clearance measurements.

A clearance is a signed distance-like number that is positive while the
evolving graph and the barrier are disjoint.  Sampling it densely in time
gives a numerical certificate of the avoidance argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import PeriodicGrid, ScalarField
from .shrinker import ProfileCurve


class BarrierExtinct(ValueError):
    pass


def _patch(grid: PeriodicGrid, center, radius: float):
    """Index window covering the disc of ``radius`` about ``center``.

    Returns ``(index, dx, dy)`` with minimum-image offsets; an axis shorter
    than the disc is taken whole.
    """
    offs, idxs = [], []
    for k in range(2):
        n, h = grid.counts[k], grid.spacing[k]
        if 2 * radius + 2 * h >= grid.extents[k]:
            j = np.arange(n)
        else:
            lo = math.floor((center[k] - radius - grid.origin[k]) / h)
            hi = math.ceil((center[k] + radius - grid.origin[k]) / h)
            j = np.arange(lo, hi + 1) % n
        x = grid.origin[k] + h * j
        idxs.append(j)
        offs.append(grid.wrap_delta(x - center[k], k))
    dx, dy = np.meshgrid(*offs, indexing="ij")
    return np.ix_(*idxs), dx, dy


@dataclass(frozen=True)
class TorusBarrier:
    """Scaled shrinking torus centred at ``(center, profile.delta)``.

    The rotation axis passes through the base point ``center``; the torus
    sits on the plane, its lowest circle touching height zero at ``t = 0``.
    """

    profile: ProfileCurve
    center: tuple[float, float] = (0.0, 0.0)

    @property
    def t_star(self) -> float:
        return self.profile.t_star

    @property
    def height(self) -> float:
        return self.profile.delta

    def scale_at(self, t: float) -> float:
        if t < 0:
            raise ValueError("negative time")
        if t >= self.t_star:
            raise BarrierExtinct(f"torus extinct at t_star={self.t_star:.6g}, asked t={t:.6g}")
        return math.sqrt(1.0 - t / self.t_star)


def torus_at_time(barrier: TorusBarrier, t: float):
    """Radii and cross-section of the torus at time ``t``.

    Returns
    -------
    (ell_t, r_t, section)
        ``section(rho)`` gives ``(z_minus, z_plus)`` in absolute height for
        ``ell_t <= rho <= r_t``.
    """
    lam = barrier.scale_at(t)
    p = barrier.profile
    c = barrier.height

    def section(rho):
        zm, zp = p.cross_section(np.asarray(rho, dtype=float) / lam)
        return c + lam * zm, c + lam * zp

    return lam * p.ell, lam * p.r_out, section


def clearance_graph_torus(field: ScalarField, barrier: TorusBarrier, t: float) -> float:
    """Smallest signed gap between the graph and the torus band over the annulus.

    For each node whose distance ``rho`` from the axis lies in
    ``[ell_t, r_t]`` the gap is how far ``u`` sits below ``z_minus`` or above
    ``z_plus`` (negative when inside the band).  Returns ``inf`` when no node
    falls in the annulus.
    """
    ell_t, r_t, section = torus_at_time(barrier, t)
    idx, dx, dy = _patch(field.grid, barrier.center, r_t)
    rho = np.hypot(dx, dy)
    mask = (rho >= ell_t) & (rho <= r_t)
    if not mask.any():
        return math.inf
    u = field.values[idx][mask]
    zm, zp = section(rho[mask])
    return float(np.max([zm - u, u - zp], axis=0).min())


@dataclass(frozen=True)
class SphereBarrier:
    """Round sphere of initial radius ``rho0`` about ``(base, height)``.

    Under MCF of a surface in R^{n+1} the radius is ``sqrt(rho0**2 - 2 n t)``.
    """

    base: tuple[float, float]
    height: float
    rho0: float
    n: int = 2

    def __post_init__(self):
        if not self.rho0 > 0:
            raise ValueError("sphere radius must be positive")

    @property
    def t_star(self) -> float:
        return self.rho0 ** 2 / (2.0 * self.n)

    def radius(self, t: float) -> float:
        r2 = self.rho0 ** 2 - 2.0 * self.n * t
        if t >= self.t_star or r2 <= 0:
            raise BarrierExtinct(f"sphere extinct at t={self.t_star:.6g}, asked t={t:.6g}")
        return math.sqrt(r2)

    @classmethod
    def with_extinction(cls, t_star: float, base, height=None, n: int = 2) -> "SphereBarrier":
        rho0 = math.sqrt(2.0 * n * t_star)
        return cls(tuple(base), rho0 if height is None else height, rho0, n)


def clearance_graph_sphere(field: ScalarField, barrier: SphereBarrier, t: float) -> float:
    """Distance from the graph to the sphere minus its radius, minimized over the shadow.

    Only nodes whose base point lies within the current radius of the
    sphere's base point are scanned.  Returns ``inf`` if none do.
    """
    R = barrier.radius(t)
    idx, dx, dy = _patch(field.grid, barrier.base, R)
    d2 = dx * dx + dy * dy
    mask = d2 <= R * R
    if not mask.any():
        return math.inf
    dz = field.values[idx][mask] - barrier.height
    return float((np.sqrt(d2[mask] + dz * dz) - R).min())


@dataclass(frozen=True)
class RegionOmega:
    """Complement of the balls ``B_{r_t}(m)`` about the barrier centres.

    With ``centres=None`` the centres are all integer lattice points (the
    periodic case).  ``x1_bands`` optionally restricts the region to nodes
    with ``|x1|`` in one of the given closed ranges.
    """

    t: float
    ell_t: float
    r_t: float
    centres: tuple | None = None
    x1_bands: tuple = ()
    label: str = "omega"

    @classmethod
    def from_torus(cls, profile: ProfileCurve, t: float, **kw) -> "RegionOmega":
        if t >= profile.t_star:
            return cls(t, 0.0, 0.0, **kw)
        lam = math.sqrt(1.0 - t / profile.t_star)
        return cls(t, lam * profile.ell, lam * profile.r_out, **kw)

    @classmethod
    def everywhere(cls, t: float, label: str = "all") -> "RegionOmega":
        return cls(t, 0.0, 0.0, label=label)

    def _carve(self, grid: PeriodicGrid, keep: np.ndarray, radius: float, value: bool) -> None:
        # set nodes within ``radius`` of each centre to ``value``
        if self.centres is None:
            x, y = grid.mesh()
            disc = np.hypot(x - np.round(x), y - np.round(y)) < radius
            keep[disc] = value
            return
        for c in self.centres:
            idx, dx, dy = _patch(grid, c, radius)
            disc = np.hypot(dx, dy) < radius
            sub = keep[idx]
            sub[disc] = value
            keep[idx] = sub

    def mask(self, grid: PeriodicGrid) -> np.ndarray:
        keep = np.ones(grid.shape, dtype=bool)
        if self.x1_bands:
            a = np.abs(grid.axis(0))
            band = np.zeros(a.shape, dtype=bool)
            for lo, hi in self.x1_bands:
                band |= (a >= lo) & (a <= hi)
            keep &= band[:, None]
        if self.r_t > 0:
            self._carve(grid, keep, self.r_t, False)
        return keep

    def hole_mask(self, grid: PeriodicGrid) -> np.ndarray:
        """Nodes of ``U_t``, the union of the inner balls ``B_{ell_t}(m)``."""
        out = np.zeros(grid.shape, dtype=bool)
        if self.ell_t > 0:
            self._carve(grid, out, self.ell_t, True)
        return out


@dataclass(frozen=True)
class BoundCheck:
    t: float
    region: str
    bound: float
    passed: bool
    max_value: float
    at: tuple = field(default=())

    def log_line(self) -> str:
        at = ",".join(f"{c:.6g}" for c in self.at)
        return (f"t={self.t:.9g}, region={self.region}, bound={self.bound:.9g}, "
                f"pass={self.passed}, max={self.max_value:.9g}, at=({at})")


def check_region_bound(field: ScalarField, region: RegionOmega, bound: float,
                       strict: bool = False) -> tuple[bool, BoundCheck]:
    """Is ``field < bound`` (or ``<=``) on every node of ``region``?

    Returns the verdict and a :class:`BoundCheck` with the largest value
    found and its location.  An empty region passes vacuously.
    """
    m = region.mask(field.grid)
    if not m.any():
        chk = BoundCheck(region.t, region.label, bound, True, -math.inf)
        return True, chk
    vals = np.where(m, field.values, -np.inf)
    flat = int(np.argmax(vals))
    idx = np.unravel_index(flat, field.grid.shape)
    vmax = float(vals[idx])
    ok = vmax < bound if strict else vmax <= bound
    chk = BoundCheck(region.t, region.label, bound, bool(ok), vmax, tuple(field.grid.node(idx)))
    return bool(ok), chk
