"""Explicit finite-difference steppers for graphical MCF, curve shortening and heat.

All operators use second-order central differences on a periodic grid.  The
MCF speed is evaluated in the expanded (non-divergence) form

    u_t = Δu - D²u(Du, Du) / (1 + |Du|²),

and the stepping is forward Euler under a parabolic CFL restriction.  The
inner loops live in :mod:`mcflab.kernels`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import kernels
from .grid import ScalarField
from .series import TimeSeries

log = logging.getLogger(__name__)

FLOW_KINDS = ("mcf", "heat", "csf")
MIXED_STENCILS = ("skew", "cross")


class FlowDiverged(RuntimeError):
    """A step produced non-finite values; carries the last good state."""

    def __init__(self, t_last_good: float, last_good: ScalarField):
        super().__init__(f"non-finite values after t={t_last_good:.6g}")
        self.t_last_good = t_last_good
        self.last_good = last_good


@dataclass(frozen=True)
class FlowParams:
    """Solver selection and time-stepping controls.

    Parameters
    ----------
    flow_kind : {"mcf", "heat", "csf"}
    t_end : float
        Absolute end time of the run.
    cfl_safety : float
        Fraction of the explicit stability limit, in (0, 1].
    record_every : float or None
        Record cadence; None records only the first and last states.
    dt_cap : float or None
        Upper bound on the step.
    mixed_stencil : {"skew", "cross"}
        Mixed-derivative stencil for 2-D MCF.  "skew" picks, per node, the
        7-point diagonal stencil whose weights keep the scheme monotone;
        "cross" is the symmetric 4-point stencil.
    """

    flow_kind: str = "mcf"
    t_end: float = 1.0
    cfl_safety: float = 0.9
    record_every: float | None = None
    dt_cap: float | None = None
    mixed_stencil: str = "skew"

    def __post_init__(self):
        if self.flow_kind not in FLOW_KINDS:
            raise ValueError(f"flow_kind must be one of {FLOW_KINDS}, got {self.flow_kind!r}")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ValueError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if not self.t_end > 0.0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if self.record_every is not None and not self.record_every > 0.0:
            raise ValueError("record_every must be positive")
        if self.dt_cap is not None and not self.dt_cap > 0.0:
            raise ValueError("dt_cap must be positive")
        if self.mixed_stencil not in MIXED_STENCILS:
            raise ValueError(f"mixed_stencil must be one of {MIXED_STENCILS}")


def gradient(field: ScalarField) -> tuple[ScalarField, ...]:
    """Central-difference partial derivatives, one field per axis."""
    out = []
    for k, h in enumerate(field.grid.spacing):
        v = field.values
        d = (np.roll(v, -1, axis=k) - np.roll(v, 1, axis=k)) / (2.0 * h)
        out.append(ScalarField(field.grid, d))
    return tuple(out)


def mcf_rhs(field: ScalarField, mixed_stencil: str = "skew") -> ScalarField:
    g = field.grid
    k = kernels.active()
    if g.dim == 1:
        return ScalarField(g, k.csf_rhs_1d(field.values, g.spacing[0]))
    hx, hy = g.spacing
    return ScalarField(g, k.mcf_rhs_2d(field.values, hx, hy, mixed_stencil == "skew"))


def heat_rhs(field: ScalarField) -> ScalarField:
    g = field.grid
    k = kernels.active()
    if g.dim == 1:
        return ScalarField(g, k.heat_rhs_1d(field.values, g.spacing[0]))
    return ScalarField(g, k.heat_rhs_2d(field.values, *g.spacing))


def csf_rhs(field: ScalarField) -> ScalarField:
    if field.grid.dim != 1:
        raise ValueError("curve shortening flow needs a 1-D field")
    return ScalarField(field.grid, kernels.active().csf_rhs_1d(field.values, field.grid.spacing[0]))


def rhs(field: ScalarField, params: FlowParams) -> ScalarField:
    if params.flow_kind == "heat":
        return heat_rhs(field)
    if params.flow_kind == "csf":
        return csf_rhs(field)
    return mcf_rhs(field, params.mixed_stencil)


def stable_dt(field: ScalarField, params: FlowParams) -> float:
    """Forward-Euler step ``cfl * h_min**2 / (2 dim)``, capped by ``dt_cap``.

    The MCF and CSF diffusion coefficients are bounded by one, so the heat
    limit is used for all three flows.
    """
    g = field.grid
    dt = params.cfl_safety * g.h_min ** 2 / (2.0 * g.dim)
    if params.dt_cap is not None:
        dt = min(dt, params.dt_cap)
    return dt


def iter_flow(field: ScalarField, params: FlowParams, t_start: float = 0.0, dt: float | None = None):
    """Advance ``field`` and yield ``(t, state)`` at each record time.

    The first yield is the initial state at ``t_start``; the last is the state
    at exactly ``params.t_end`` (the final step is shortened to land there).
    Records are taken at the first step at or after each multiple of
    ``record_every`` past ``t_start``.  The yielded field is a view of an
    internal buffer: copy it to keep it.

    Raises
    ------
    FlowDiverged
        If a step produces non-finite values.
    """
    if params.flow_kind == "csf" and field.grid.dim != 1:
        raise ValueError("curve shortening flow needs a 1-D field")
    if params.t_end <= t_start:
        raise ValueError(f"t_end={params.t_end} must exceed t_start={t_start}")
    g = field.grid
    if dt is None:
        dt = stable_dt(field, params)
    kind = 1 if params.flow_kind == "heat" else 0
    log.debug("%s on %s: dt=%.3g, t in [%g, %g]", params.flow_kind, g.shape, dt, t_start, params.t_end)
    k = kernels.active()
    if g.dim == 1:
        hx = g.spacing[0]
        step = lambda u, out, tau: k.advance_1d(kind, u, out, tau, hx)  # noqa: E731
    else:
        hx, hy = g.spacing
        skew = params.mixed_stencil == "skew"
        step = lambda u, out, tau: k.advance_2d(kind, u, out, tau, hx, hy, skew)  # noqa: E731

    cur = field.values.copy()
    nxt = np.empty_like(cur)
    if not np.isfinite(cur).all():
        raise FlowDiverged(t_start, ScalarField(g, cur))
    yield t_start, ScalarField(g, cur)

    every = params.record_every
    n_rec = 1
    i = 0
    t = t_start
    while True:
        t_next = t_start + (i + 1) * dt
        last = t_next >= params.t_end * (1.0 - 1e-14)
        tau = params.t_end - t if last else dt
        if step(cur, nxt, tau):
            raise FlowDiverged(t, ScalarField(g, cur.copy()))
        cur, nxt = nxt, cur
        i += 1
        t = params.t_end if last else t_next
        if last:
            yield t, ScalarField(g, cur)
            return
        if every is not None and t >= t_start + n_rec * every * (1.0 - 1e-12):
            while t_start + n_rec * every <= t * (1.0 + 1e-12):
                n_rec += 1
            yield t, ScalarField(g, cur)


def run(field: ScalarField, params: FlowParams, recorders=(), probes=(), t_start: float = 0.0,
        dt: float | None = None, series: TimeSeries | None = None, on_record=None,
        include_start: bool = True):
    """Evolve to ``params.t_end`` and collect a :class:`TimeSeries`.

    Parameters
    ----------
    recorders : iterable of callables
        Each is called as ``rec(t, field)`` at every record time and returns
        a mapping of extra column names to values.
    probes : iterable of points
        Base points whose nearest-node values become ``probe0``, ``probe1``, ...
    series : TimeSeries, optional
        Append to this series instead of a new one (continuing a run).
    on_record : callable, optional
        Called as ``on_record(t, field)`` after the record is stored, e.g. to
        write snapshots.
    include_start : bool
        Record the initial state; turn off when continuing a series that
        already holds it.

    Returns
    -------
    (ScalarField, TimeSeries)
        The final state (an independent copy) and the records.
    """
    ts = series if series is not None else TimeSeries(probes)
    state = field
    for t, state in iter_flow(field, params, t_start=t_start, dt=dt):
        if not include_start and t == t_start:
            continue
        extras = {}
        for rec in recorders:
            extras.update(rec(t, state))
        ts.append(t, state, extras)
        if on_record is not None:
            on_record(t, state)
    return state.copy(), ts
