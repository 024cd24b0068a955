"""Diagnostics on fields and recorded series."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import ScalarField
from .series import TimeSeries

__all__ = [
    "TimeSeries", "ball_average", "ball_volume_bounds", "flatness", "curvature_monitor",
    "OscillationReport", "detect_oscillation", "NotStabilized", "estimate_limit_constant",
    "monotonicity_defect",
]


def ball_average(field: ScalarField, center, r: float, tiled_axes=None) -> float:
    """Mean of the node values inside the closed ball ``|x - center| <= r``.

    Axes listed in ``tiled_axes`` (default: all) are treated as truly
    periodic, so the ball may cover many periods; along any other axis the
    ball must fit inside the sampled window.

    Raises
    ------
    ValueError
        If the ball leaves the window along a non-tiled axis.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    g = field.grid
    center = np.atleast_1d(np.asarray(center, dtype=float))
    tiled = set(range(g.dim) if tiled_axes is None else tiled_axes)
    shifts = []
    for k in range(g.dim):
        lo, L = g.origin[k], g.extents[k]
        if k in tiled:
            k0 = math.floor((center[k] - r - lo) / L)
            k1 = math.floor((center[k] + r - lo) / L)
            shifts.append([j * L for j in range(k0, k1 + 1)])
        else:
            top = lo + (g.counts[k] - 1) * g.spacing[k]
            if center[k] - r < lo or center[k] + r > top:
                raise ValueError(f"ball of radius {r} about {tuple(center)} leaves the window on axis {k}")
            shifts.append([0.0])
    axes = [g.axis(k) for k in range(g.dim)]
    lows = [a[0] for a in axes]
    highs = [a[-1] for a in axes]
    full_sum = float(field.values.sum())
    full_count = field.values.size
    total, count = 0.0, 0
    r2 = r * r
    for shift in itertools.product(*shifts):
        # farthest and nearest corner distances of this image tile
        far2 = near2 = 0.0
        for k in range(g.dim):
            a, b = lows[k] + shift[k] - center[k], highs[k] + shift[k] - center[k]
            far2 += max(a * a, b * b)
            near2 += 0.0 if a <= 0.0 <= b else min(a * a, b * b)
        if near2 > r2:
            continue
        if far2 <= r2:
            total += full_sum
            count += full_count
            continue
        d2 = 0.0
        for k in range(g.dim):
            shape = [1] * g.dim
            shape[k] = -1
            d = (axes[k] + shift[k] - center[k]).reshape(shape)
            d2 = d2 + d * d
        m = np.broadcast_to(d2 <= r2, g.shape)
        total += float(field.values[m].sum())
        count += int(m.sum())
    if count == 0:
        raise ValueError("ball contains no grid nodes")
    return total / count


def ball_volume_bounds(r: float, dim: int = 2) -> tuple[float, float]:
    """Sandwich ``vol(B_{r - sqrt(dim)}) / vol(B_r)`` and ``vol(B_{r + sqrt(dim)}) / vol(B_r)``.

    Bounds the ball average of a field with unit mass per unit cell.
    """
    s = math.sqrt(dim)
    lo = max(r - s, 0.0) ** dim / r ** dim
    hi = (r + s) ** dim / r ** dim
    return lo, hi


def flatness(field: ScalarField) -> tuple[float, float]:
    """``(sup - inf, max |Du|)`` with central differences."""
    g = field.grid
    grad2 = np.zeros(g.shape)
    for k, h in enumerate(g.spacing):
        d = (np.roll(field.values, -1, axis=k) - np.roll(field.values, 1, axis=k)) / (2.0 * h)
        grad2 += d * d
    return field.sup() - field.inf(), float(np.sqrt(grad2.max()))


def _derivatives(v, spacing):
    dim = v.ndim
    p = [(np.roll(v, -1, k) - np.roll(v, 1, k)) / (2.0 * spacing[k]) for k in range(dim)]
    H = [[None] * dim for _ in range(dim)]
    for k in range(dim):
        H[k][k] = (np.roll(v, -1, k) - 2.0 * v + np.roll(v, 1, k)) / spacing[k] ** 2
    if dim == 2:
        hx, hy = spacing
        s = lambda a, b: np.roll(np.roll(v, -a, 0), -b, 1)  # noqa: E731
        H[0][1] = H[1][0] = (s(1, 1) + s(-1, -1) - s(-1, 1) - s(1, -1)) / (4.0 * hx * hy)
    return p, H


def curvature_monitor(field: ScalarField, mask=None) -> float:
    """Largest norm of the second fundamental form of the graph.

    ``|A|^2 = tr((G^-1 D²u)^2) / (1 + |Du|^2)`` with ``G = I + Du Du^T``.
    ``mask`` restricts the maximum to selected nodes (e.g. where a sampled
    surface is defined).
    """
    p, H = _derivatives(field.values, field.grid.spacing)
    w = 1.0 + sum(pk * pk for pk in p)
    dim = field.grid.dim
    # G^-1 = I - p p^T / w
    M = [[H[i][j] - p[i] * sum(p[k] * H[k][j] for k in range(dim)) / w for j in range(dim)]
         for i in range(dim)]
    tr = sum(M[i][j] * M[j][i] for i in range(dim) for j in range(dim))
    A = np.sqrt(np.maximum(tr, 0.0) / w)
    if mask is not None:
        A = A[mask]
    return float(A.max()) if A.size else 0.0


@dataclass
class OscillationReport:
    """Alternating extrema of a sampled signal.

    ``extrema`` holds ``(kind, t, value)`` with kind ``"min"`` or ``"max"`` in
    time order; consecutive entries always differ in kind.
    """

    extrema: list = field(default_factory=list)
    running_min: np.ndarray = field(default=None, repr=False)
    running_max: np.ndarray = field(default=None, repr=False)

    @property
    def minima(self) -> list[tuple[float, float]]:
        return [(t, v) for k, t, v in self.extrema if k == "min"]

    @property
    def maxima(self) -> list[tuple[float, float]]:
        return [(t, v) for k, t, v in self.extrema if k == "max"]

    @property
    def lowest_min(self) -> float:
        return min((v for _, v in self.minima), default=math.nan)

    @property
    def highest_max(self) -> float:
        return max((v for _, v in self.maxima), default=math.nan)

    def alternates(self) -> bool:
        kinds = [k for k, _, _ in self.extrema]
        return all(a != b for a, b in zip(kinds, kinds[1:]))

    def min_then_max(self, low: float, high: float) -> bool:
        """Is there a minimum ``<= low`` followed later by a maximum ``>= high``?"""
        seen_low = False
        for k, _, v in self.extrema:
            if k == "min" and v <= low:
                seen_low = True
            elif k == "max" and seen_low and v >= high:
                return True
        return False

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("kind,t,value\n")
            for k, t, v in self.extrema:
                fh.write(f"{k},{t!r},{v!r}\n")


def detect_oscillation(values, dead_band: float, times=None) -> OscillationReport:
    """Zigzag peak detection with a hysteresis ``dead_band``.

    An extremum is confirmed once the signal has moved at least ``dead_band``
    away from it in the opposite direction, so every reported extremum has
    prominence ``>= dead_band`` relative to its neighbours.  The first sample
    may be reported; the last unconfirmed candidate is not.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        raise ValueError("need at least 3 samples")
    if not dead_band > 0:
        raise ValueError("dead_band must be positive")
    t = np.arange(v.size, dtype=float) if times is None else np.asarray(times, dtype=float)
    out = []
    direction = 0  # +1 rising (seeking max), -1 falling (seeking min)
    hi = lo = cand = 0
    for i in range(1, v.size):
        x = v[i]
        if direction == 0:
            if x > v[hi]:
                hi = i
            if x < v[lo]:
                lo = i
            if x <= v[hi] - dead_band:
                out.append(("max", float(t[hi]), float(v[hi])))
                direction, cand = -1, i
            elif x >= v[lo] + dead_band:
                out.append(("min", float(t[lo]), float(v[lo])))
                direction, cand = 1, i
        elif direction == 1:
            if x > v[cand]:
                cand = i
            elif x <= v[cand] - dead_band:
                out.append(("max", float(t[cand]), float(v[cand])))
                direction, cand = -1, i
        else:
            if x < v[cand]:
                cand = i
            elif x >= v[cand] + dead_band:
                out.append(("min", float(t[cand]), float(v[cand])))
                direction, cand = 1, i
    return OscillationReport(out, np.minimum.accumulate(v), np.maximum.accumulate(v))


class NotStabilized(RuntimeError):
    pass


def estimate_limit_constant(sup, inf, tail_fraction: float = 0.2, tol: float | None = None):
    """Midpoint and width of the ``[inf, sup]`` envelope over the tail of a run.

    Parameters
    ----------
    sup, inf : array_like
        Recorded sup and inf columns.
    tail_fraction : float
        Fraction of the records (from the end) forming the tail.
    tol : float, optional
        Required band width.

    Returns
    -------
    (c0, band)

    Raises
    ------
    NotStabilized
        If the band is wider than ``tol``, or the oscillation ``sup - inf``
        is not shrinking across the tail.
    """
    sup = np.asarray(sup, dtype=float)
    inf = np.asarray(inf, dtype=float)
    if not 0.0 < tail_fraction <= 1.0:
        raise ValueError("tail_fraction must lie in (0, 1]")
    k = max(2, math.ceil(tail_fraction * sup.size))
    s, i = sup[-k:], inf[-k:]
    hi, lo = float(s.max()), float(i.min())
    band = hi - lo
    first, last = s[0] - i[0], s[-1] - i[-1]
    if last > 0 and last > first * (1.0 + 1e-9):
        raise NotStabilized(f"oscillation grew over the tail ({first:.3g} -> {last:.3g})")
    if tol is not None and band > tol:
        raise NotStabilized(f"tail band {band:.3g} exceeds {tol:.3g}")
    return 0.5 * (hi + lo), band


def monotonicity_defect(series: TimeSeries) -> tuple[float, float]:
    """Largest increase of ``sup`` and largest decrease of ``inf`` between records."""
    s, i = series["sup"], series["inf"]
    up = float(np.max(np.diff(s), initial=0.0)) + 0.0
    down = float(np.max(-np.diff(i), initial=0.0)) + 0.0
    return up, down
