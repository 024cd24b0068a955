"""Initial graphs: the periodic spiked field, the factorial oscillator and its barriers.

Every transition uses the quintic smoothstep ``s**3 (10 - 15 s + 6 s**2)``,
whose first and second derivatives vanish at both ends, so all built data
are C² (in fact C^{2,1}).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .grid import PeriodicGrid, ScalarField

log = logging.getLogger(__name__)

PLATEAU_FRACTION = 1.0 / 3.0
ZERO_FRACTION = 2.0 / 3.0
SLAB_MARGIN = 0.25


class InitialDataError(ValueError):
    pass


class UnresolvedSpike(InitialDataError):
    pass


class IncompatibleTorusScale(InitialDataError):
    pass


def smoothstep(s):
    """Quintic ramp from 0 (``s <= 0``) to 1 (``s >= 1``)."""
    s = np.clip(s, 0.0, 1.0)
    return s ** 3 * (10.0 - 15.0 * s + 6.0 * s * s)


def smooth_plateau_bump(x):
    """Radial spike profile in units of the support radius.

    1 on ``[0, 1/3]``, 0 beyond ``2/3``, quintic in between.
    """
    s = (np.asarray(x, dtype=float) - PLATEAU_FRACTION) / (ZERO_FRACTION - PLATEAU_FRACTION)
    out = 1.0 - smoothstep(s)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class SpikeParams:
    ell0: float
    h0: float
    plateau_fraction: float = PLATEAU_FRACTION
    zero_fraction: float = ZERO_FRACTION


# ---------------------------------------------------------------- spikes

def _axis_window(grid: PeriodicGrid, k: int, c: float, radius: float) -> np.ndarray:
    """Wrapped node indices on axis ``k`` within ``radius`` of coordinate ``c``."""
    h = grid.spacing[k]
    lo = math.floor((c - radius - grid.origin[k]) / h)
    hi = math.ceil((c + radius - grid.origin[k]) / h)
    idx = np.arange(lo, hi + 1)
    return idx % grid.counts[k]


def _stamp_spike(grid: PeriodicGrid, center, ell0: float):
    """Node indices and bump values of one unit-height spike at ``center``."""
    windows = [_axis_window(grid, k, center[k], ell0) for k in range(grid.dim)]
    coords = []
    for k, w in enumerate(windows):
        x = grid.origin[k] + grid.spacing[k] * w
        coords.append(grid.wrap_delta(x - center[k], k))
    R = np.hypot(*np.meshgrid(*coords, indexing="ij"))
    return np.ix_(*windows), smooth_plateau_bump(R / ell0)


def _check_resolution(grid: PeriodicGrid, ell0: float) -> None:
    h = max(grid.spacing)
    if not ell0 > 6.0 * h:
        raise UnresolvedSpike(
            f"spike radius {ell0:.4g} needs spacing below {ell0 / 6:.4g}, grid has {h:.4g}")


def _unit_height(grid: PeriodicGrid, center, ell0: float) -> float:
    """Height giving the discrete spike at ``center`` unit integral."""
    _, b = _stamp_spike(grid, center, ell0)
    return 1.0 / (b.sum() * math.prod(grid.spacing))


def build_spiked_u0(grid: PeriodicGrid, torus) -> tuple[ScalarField, SpikeParams]:
    """Periodic field with one unit-mass spike centred on every integer lattice point.

    The spike radius is the torus inner radius ``torus.ell``; its height is
    fixed by making the discrete integral over each unit cell equal to one.

    Raises
    ------
    UnresolvedSpike
        If fewer than about six nodes span the spike radius.
    IncompatibleTorusScale
        If the normalized height does not exceed twice the torus height, so
        the spike could not pass through the hole.
    """
    if grid.dim != 2:
        raise ValueError("the spiked field lives on a 2-D grid")
    for e in grid.extents:
        if abs(e - round(e)) > 1e-12 or round(e) < 1:
            raise ValueError(f"extents must be whole numbers of unit cells, got {grid.extents}")
    ell0 = torus.ell
    _check_resolution(grid, ell0)
    centres = _lattice_points(grid, lambda x1: True)
    u = np.zeros(grid.shape)
    h0 = _unit_height(grid, centres[0], ell0)
    for c in centres:
        idx, b = _stamp_spike(grid, c, ell0)
        u[idx] += h0 * b
    if not h0 > 2.0 * torus.delta:
        raise IncompatibleTorusScale(
            f"spike height {h0:.4g} does not exceed 2*delta={2 * torus.delta:.4g}; scale the torus smaller")
    return ScalarField(grid, u), SpikeParams(ell0, float(h0))


def _lattice_points(grid: PeriodicGrid, keep) -> list[tuple[float, float]]:
    """Integer points of the (wrapped) box whose x1 coordinate passes ``keep``."""
    ranges = []
    for k in range(grid.dim):
        lo = math.ceil(grid.origin[k] - 1e-9)
        hi = math.floor(grid.origin[k] + grid.extents[k] - 1e-9)
        ranges.append(range(lo, hi + 1))
    pts = []
    for x1 in ranges[0]:
        if not keep(float(x1)):
            continue
        for x2 in ranges[1]:
            pts.append((float(x1), float(x2)))
    # a periodic axis of integer length sees each lattice class once
    seen, out = set(), []
    for p in pts:
        key = tuple(round((p[k] - grid.origin[k]) % grid.extents[k], 9) for k in range(grid.dim))
        if key not in seen:
            seen.add(key)
            out.append(p)
    return out


# ---------------------------------------------------------------- slabs

@dataclass(frozen=True)
class SlabLayout:
    """Factorially spaced plateaus of the one-dimensional oscillator.

    Plateau ``I_0 = [0, 1 - ell]`` and ``I_m = [m! + ell, (m+1)! - ell]`` for
    ``m = 1..m_max``; even ``m`` carry value ``b``, odd ``m`` value ``a``.
    Beyond the last plateau the value stays at the last level.
    """

    ell: float = 0.15
    m_max: int = 3
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.ell < 0.25:
            raise ValueError(f"transition half-width must lie in (0, 1/4), got {self.ell}")
        if self.m_max < 2:
            raise ValueError("m_max must be at least 2")

    def level(self, m: int) -> float:
        return self.b if m % 2 == 0 else self.a

    def interval(self, m: int) -> tuple[float, float]:
        if m == 0:
            return 0.0, 1.0 - self.ell
        return math.factorial(m) + self.ell, math.factorial(m + 1) - self.ell

    @property
    def extent(self) -> float:
        """End of the last plateau, ``(m_max + 1)!``."""
        return float(math.factorial(self.m_max + 1))

    def slab(self, j: int) -> tuple[float, float]:
        """``|x1|`` range of slab ``S_j`` (``j >= 2``)."""
        if j < 2:
            raise ValueError("slabs are indexed from 2")
        if j % 2 == 0:
            return math.factorial(j) - SLAB_MARGIN, math.factorial(j + 1) + SLAB_MARGIN
        return math.factorial(j) + SLAB_MARGIN, math.factorial(j + 1) - SLAB_MARGIN

    def odd_slabs(self) -> list[tuple[float, float]]:
        return [self.slab(j) for j in range(3, self.m_max + 1, 2)]

    def even_slabs(self) -> list[tuple[float, float]]:
        return [self.slab(j) for j in range(2, self.m_max + 1, 2)]


def build_phi0(layout: SlabLayout, x1):
    """Even C² profile equal to the plateau levels on every ``I_m``."""
    x = np.abs(np.asarray(x1, dtype=float))
    out = np.full(x.shape, layout.level(0))
    for m in range(1, layout.m_max + 1):
        jump = layout.level(m) - layout.level(m - 1)
        c = math.factorial(m)
        out = out + jump * smoothstep((x - (c - layout.ell)) / (2.0 * layout.ell))
    # pin the plateaus exactly; the summed ramps leave round-off at the ends
    for m in range(layout.m_max + 1):
        lo, hi = layout.interval(m)
        if m == layout.m_max:
            hi = math.inf
        out = np.where((x >= lo) & (x <= hi), layout.level(m), out)
    return float(out) if out.ndim == 0 else out


def build_phi0_plus(eps: float, rho0: float, layout: SlabLayout):
    """Upper-barrier profile: ``1 + rho0`` with dips to ``eps``.

    The dips cover ``[m! + 1/2, (m+1)! - 1/2]`` for every odd ``m <= m_max``
    (for ``m = 1`` this is the single point 3/2); the value is ``1 + rho0`` on
    ``[(m-1)! - 1/4, m! + 1/4]`` and ramps in the quarter-width gaps between.
    Returns a vectorized callable of ``x1``.
    """
    hi = 1.0 + rho0
    dips = []
    for m in range(1, layout.m_max + 1, 2):
        lo_edge = math.factorial(m) + SLAB_MARGIN
        hi_edge = math.factorial(m + 1) - SLAB_MARGIN
        dips.append((lo_edge, hi_edge))

    def phi_plus(x1):
        x = np.abs(np.asarray(x1, dtype=float))
        out = np.full(x.shape, hi)
        for lo_edge, hi_edge in dips:
            down = smoothstep((x - lo_edge) / SLAB_MARGIN)
            up = smoothstep((hi_edge - x) / SLAB_MARGIN)
            out = out - (hi - eps) * np.minimum(down, up)
        return float(out) if out.ndim == 0 else out

    return phi_plus


def build_w0(grid: PeriodicGrid, layout: SlabLayout, torus) -> tuple[ScalarField, SpikeParams, list]:
    """Oscillator extended in x2 plus unit-mass spikes on the odd slabs.

    A lattice point gets a spike when its whole support ``|x - m| < ell0``
    lies inside an odd slab; others are skipped with a log line.

    Returns
    -------
    (ScalarField, SpikeParams, list of spike centres)
    """
    if grid.dim != 2:
        raise ValueError("w0 lives on a 2-D grid")
    if abs(grid.extents[1] - 1.0) > 1e-12:
        raise ValueError("x2 period must be 1")
    half = 0.5 * grid.extents[0]
    if half < layout.extent:
        raise ValueError(f"x1 half-width {half} must cover (m_max+1)! = {layout.extent}")
    ell0 = torus.ell
    _check_resolution(grid, ell0)
    x1 = grid.axis(0)
    psi = build_phi0(layout, x1)
    w = np.repeat(psi[:, None], grid.counts[1], axis=1)

    slabs = layout.odd_slabs()

    def inside(p):
        a = abs(p)
        return any(lo + ell0 <= a <= hi - ell0 for lo, hi in slabs)

    def near(p):
        a = abs(p)
        return any(lo - ell0 < a < hi + ell0 for lo, hi in slabs)

    for p in _lattice_points(grid, near):
        if not inside(p[0]):
            log.info("skipping spike at x1=%g: support crosses a slab edge", p[0])
    centres = _lattice_points(grid, inside)
    h0 = _unit_height(grid, centres[0], ell0) if centres else math.nan
    for c in centres:
        idx, b = _stamp_spike(grid, c, ell0)
        w[idx] += h0 * b
    return ScalarField(grid, w), SpikeParams(ell0, float(h0)), centres


def build_psi0(grid: PeriodicGrid, layout: SlabLayout) -> ScalarField:
    """The oscillator as a function of x1 alone, on a 1-D or 2-D grid."""
    psi = build_phi0(layout, grid.axis(0))
    if grid.dim == 1:
        return ScalarField(grid, psi)
    return ScalarField(grid, np.repeat(psi[:, None], grid.counts[1], axis=1))
