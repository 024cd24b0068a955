"""Rotationally symmetric self-shrinkers: cylinder, sphere and the shrinking torus.

A profile curve in the half-plane ``r > 0`` parametrised by arclength with
tangent angle ``theta`` generates a self-shrinker of dimension ``n`` when

    r' = cos(theta),  z' = sin(theta),
    theta' = (r sin(theta) - z cos(theta)) / 2 - (n - 1) sin(theta) / r.

The torus profile is found by shooting: start on the axis of symmetry
``z = 0`` at the inner radius heading straight up, integrate until the curve
comes back to ``z = 0``, and bisect on the start radius until it arrives
heading straight down.  Reflecting that arc across ``z = 0`` closes it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import kernels

DEFAULT_STEP = 1e-4
DEFAULT_TOL = 1e-10
DEFAULT_R_MIN = 1e-3
DEFAULT_MAX_ARCLENGTH = 40.0


class ShrinkerError(Exception):
    """Base class for profile integration and shooting failures."""


class IntegrationStopped(ShrinkerError):
    """Integration ended without a return to ``z = 0``.

    ``trajectory`` holds the samples computed up to that point.
    """

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class AxisCollision(IntegrationStopped):
    pass


class NoReturn(IntegrationStopped):
    pass


class BracketFailure(ShrinkerError):
    pass


class DegenerateProfile(ShrinkerError):
    pass


@dataclass(frozen=True)
class ProfileState:
    r: float
    z: float
    theta: float


def shrinker_ode_rhs(state: ProfileState, n: int) -> tuple[float, float, float]:
    """Arclength derivative ``(dr, dz, dtheta)`` of a shrinker profile."""
    if not state.r > 0:
        raise ValueError(f"profile ODE is singular on the axis (r={state.r})")
    st, ct = math.sin(state.theta), math.cos(state.theta)
    return ct, st, 0.5 * (state.r * st - state.z * ct) - (n - 1) * st / state.r


def _rk4(y, n, h):
    f = lambda r, z, th: shrinker_ode_rhs(ProfileState(r, z, th), n)  # noqa: E731
    r, z, th = y
    k1 = f(r, z, th)
    k2 = f(r + 0.5 * h * k1[0], z + 0.5 * h * k1[1], th + 0.5 * h * k1[2])
    k3 = f(r + 0.5 * h * k2[0], z + 0.5 * h * k2[1], th + 0.5 * h * k2[2])
    k4 = f(r + h * k3[0], z + h * k3[1], th + h * k3[2])
    return (r + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            z + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
            th + h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]))


def _solve_partial_step(y0, n, h, target, sigma0, index):
    """Partial RK4 step length ``sigma`` in [0, h] putting component ``index``
    of the state at ``target``; Newton on the step length."""
    sigma = min(max(sigma0, 0.0), h)
    for _ in range(8):
        y = _rk4(y0, n, sigma)
        g = y[index] - target
        dy = shrinker_ode_rhs(ProfileState(*y), n)
        slope = dy[index]
        if slope == 0:
            break
        new = min(max(sigma - g / slope, 0.0), h)
        if abs(new - sigma) < 1e-16:
            sigma = new
            break
        sigma = new
    return sigma, _rk4(y0, n, sigma)


def _hermite_root(z0, z1, d0, d1, h):
    """Root in (0, h] of the cubic Hermite interpolant of z on one step."""
    # z(x) on x in [0, 1], derivatives scaled by h
    a = 2 * z0 - 2 * z1 + h * d0 + h * d1
    b = -3 * z0 + 3 * z1 - 2 * h * d0 - h * d1
    c = h * d0
    roots = np.roots([a, b, c, z0])
    real = [x.real for x in roots if abs(x.imag) < 1e-12 and -1e-12 <= x.real <= 1 + 1e-12]
    if not real:
        return h * z0 / (z0 - z1)
    return h * min(real)


@dataclass
class Trajectory:
    """Samples ``(s, r, z, theta)`` of one integration; the last interval is
    shortened so the final sample sits on the event."""

    s: np.ndarray
    r: np.ndarray
    z: np.ndarray
    theta: np.ndarray

    def states(self):
        return [ProfileState(*v) for v in zip(self.r, self.z, self.theta)]

    @property
    def end(self) -> ProfileState:
        return ProfileState(self.r[-1], self.z[-1], self.theta[-1])


def integrate_profile(start: ProfileState, n: int, step: float = DEFAULT_STEP, *,
                      max_arclength: float = DEFAULT_MAX_ARCLENGTH,
                      r_min: float = DEFAULT_R_MIN) -> Trajectory:
    """RK4 from ``start`` until the curve first returns to ``z = 0``.

    The return is located on the cubic Hermite interpolant of ``z`` and then
    polished with a partial RK4 step, so the end state is accurate to the
    integrator order.  Raises :class:`AxisCollision` if ``r`` falls below
    ``r_min`` and :class:`NoReturn` past ``max_arclength``.
    """
    if not start.r > 0:
        raise ValueError(f"start must lie off the axis (r={start.r})")
    if not step > 0:
        raise ValueError("step must be positive")
    max_steps = int(math.ceil(max_arclength / step))
    rows, status = kernels.active().shrinker_march(
        float(start.r), float(start.z), float(start.theta), int(n), float(step), max_steps, float(r_min))
    rows = np.asarray(rows)
    if status:
        s = step * np.arange(len(rows), dtype=float)
        partial = Trajectory(s, rows[:, 0].copy(), rows[:, 1].copy(), rows[:, 2].copy())
    if status == 1:
        raise AxisCollision(f"profile from r={start.r:.12g} reached the axis near s={s[-1]:.4g}", partial)
    if status == 2:
        raise NoReturn(f"profile from r={start.r:.12g} did not return to z=0 within arclength {max_arclength}",
                       partial)
    y0 = tuple(rows[-2])
    y1 = tuple(rows[-1])
    d0 = math.sin(y0[2])
    d1 = math.sin(y1[2])
    sigma0 = _hermite_root(y0[1], y1[1], d0, d1, step)
    sigma, yend = _solve_partial_step(y0, n, step, 0.0, sigma0, index=1)
    rows[-1] = yend
    s = step * np.arange(len(rows), dtype=float)
    s[-1] = s[-2] + sigma
    return Trajectory(s, rows[:, 0].copy(), rows[:, 1].copy(), rows[:, 2].copy())


def _uniform_arc(r_start, n, step, max_arclength, r_min) -> Trajectory:
    """Re-integrate the arc with a step that divides its length exactly."""
    first = integrate_profile(ProfileState(r_start, 0.0, math.pi / 2), n, step,
                              max_arclength=max_arclength, r_min=r_min)
    length = first.s[-1]
    nsteps = int(math.ceil(length / step))
    h = length / nsteps
    rows, _ = kernels.active().shrinker_march(float(r_start), 0.0, math.pi / 2, int(n), h, nsteps, r_min)
    rows = np.asarray(rows)
    if len(rows) != nsteps + 1:
        # landed on z <= 0 one step early through round-off: keep the refined end
        return first
    s = h * np.arange(nsteps + 1, dtype=float)
    return Trajectory(s, rows[:, 0].copy(), rows[:, 1].copy(), rows[:, 2].copy())


@dataclass
class ProfileCurve:
    """Upper arc of a closed, reflection-symmetric shrinker profile.

    Samples run from the inner axis crossing ``(ell, 0)`` over the top to the
    outer crossing ``(r_out, 0)``.  The closed profile is this arc together
    with its mirror image in ``z = 0`` (see :meth:`closed`).
    """

    n: int
    s: np.ndarray = field(repr=False)
    r: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)
    theta: np.ndarray = field(repr=False)
    ell: float
    r_out: float
    delta: float
    rho_peak: float
    t_star: float = 1.0
    scale: float = 1.0
    step: float = DEFAULT_STEP
    tol: float = DEFAULT_TOL
    miss: float = 0.0

    @property
    def samples(self) -> list[ProfileState]:
        return [ProfileState(*v) for v in zip(self.r, self.z, self.theta)]

    @property
    def length(self) -> float:
        return float(self.s[-1])

    def scaled(self, lam: float) -> "ProfileCurve":
        if not lam > 0:
            raise ValueError("scale factor must be positive")
        return ProfileCurve(
            self.n, self.s * lam, self.r * lam, self.z * lam, self.theta.copy(),
            self.ell * lam, self.r_out * lam, self.delta * lam, self.rho_peak * lam,
            self.t_star * lam * lam, self.scale * lam, self.step * lam, self.tol, self.miss)

    def closed(self) -> tuple[np.ndarray, np.ndarray]:
        """Closed loop: upper arc then its mirror image traversed back."""
        r = np.concatenate([self.r, self.r[-2::-1]])
        z = np.concatenate([self.z, -self.z[-2::-1]])
        return r, z

    def curvature(self) -> np.ndarray:
        """Signed curvature ``dtheta/ds`` from the ODE in normalised variables."""
        lam = self.scale
        rn, zn = self.r / lam, self.z / lam
        st, ct = np.sin(self.theta), np.cos(self.theta)
        return (0.5 * (rn * st - zn * ct) - (self.n - 1) * st / rn) / lam

    def residual(self) -> np.ndarray:
        """``theta' - rhs`` at every sample, in normalised (shrinker) units.

        ``theta'`` comes from fourth-order finite differences of the samples
        (second order at the two ends).
        """
        lam = self.scale
        s, th = self.s / lam, self.theta
        h = np.diff(s)
        uniform = np.allclose(h, h[0], rtol=1e-9, atol=0)
        if uniform and len(s) >= 5:
            hh = h[0]
            d = np.gradient(th, hh, edge_order=2)
            d[2:-2] = (-th[4:] + 8 * th[3:-1] - 8 * th[1:-3] + th[:-4]) / (12 * hh)
        else:
            d = np.gradient(th, s, edge_order=2)
        return d - self.curvature() * lam

    def is_convex(self) -> bool:
        k = self.curvature()
        return bool(np.all(k < 0) or np.all(k > 0))

    @cached_property
    def _section(self):
        r = self.r
        keep = np.concatenate([[True], np.diff(r) > 0])
        return PchipInterpolator(r[keep], self.z[keep], extrapolate=False)

    def cross_section(self, rho):
        return torus_cross_section(self, rho)


def torus_cross_section(profile: ProfileCurve, rho):
    """Heights ``(z_minus, z_plus)`` of the closed profile above radius ``rho``.

    Accepts scalars or arrays.  Raises ``ValueError`` outside ``[ell, r_out]``.
    """
    rho_arr = np.asarray(rho, dtype=float)
    span = profile.r_out - profile.ell
    slack = 1e-12 * max(span, 1.0)
    if np.any(rho_arr < profile.ell - slack) or np.any(rho_arr > profile.r_out + slack):
        raise ValueError(f"rho outside [{profile.ell}, {profile.r_out}]")
    zp = profile._section(np.clip(rho_arr, profile.r[0], profile.r[-1]))
    zp = np.maximum(zp, 0.0)
    if zp.ndim == 0:
        return -float(zp), float(zp)
    return -zp, zp


def _miss(r_start, n, step, max_arclength, r_min):
    traj = integrate_profile(ProfileState(r_start, 0.0, math.pi / 2), n, step,
                             max_arclength=max_arclength, r_min=r_min)
    return traj.end.theta + math.pi / 2


def find_bracket(n: int = 2, lo: float = 0.3, hi: float | None = None, samples: int = 24,
                 step: float = 1e-3, **kw) -> tuple[float, float]:
    """Coarse scan of the miss angle over start radii in ``(lo, hi)``; returns
    the first adjacent pair with a sign change."""
    if hi is None:
        hi = math.sqrt(2.0 * (n - 1))
    prev = None
    for r0 in np.linspace(lo, hi, samples, endpoint=False):
        try:
            m = _miss(float(r0), n, step, kw.get("max_arclength", DEFAULT_MAX_ARCLENGTH),
                      kw.get("r_min", DEFAULT_R_MIN))
        except ShrinkerError:
            prev = None
            continue
        if prev is not None and prev[1] * m < 0:
            return prev[0], float(r0)
        prev = (float(r0), m)
    raise BracketFailure(f"no sign change of the miss angle on ({lo}, {hi})")


def shoot_torus(n: int = 2, bracket: tuple[float, float] | None = None, tol: float = DEFAULT_TOL,
                step: float = DEFAULT_STEP, *, max_arclength: float = DEFAULT_MAX_ARCLENGTH,
                r_min: float = DEFAULT_R_MIN) -> ProfileCurve:
    """Bisect on the inner start radius until the profile closes up.

    The miss is ``theta_end + pi/2`` at the return to ``z = 0``.  Shots that
    reach the axis or fail to return are treated as lying on the large-radius
    side of the root.
    """
    if bracket is None:
        bracket = find_bracket(n, max_arclength=max_arclength, r_min=r_min)
    lo, hi = sorted(float(b) for b in bracket)
    if not lo > 0:
        raise BracketFailure("bracket must lie in r > 0")
    args = (n, step, max_arclength, r_min)
    try:
        m_lo = _miss(lo, *args)
        m_hi = _miss(hi, *args)
    except ShrinkerError as exc:
        raise BracketFailure(f"bracket endpoint shot failed: {exc}") from exc
    if m_lo * m_hi > 0:
        raise BracketFailure(f"miss has one sign on [{lo}, {hi}] ({m_lo:.3g}, {m_hi:.3g})")
    best = (lo, m_lo) if abs(m_lo) < abs(m_hi) else (hi, m_hi)
    hit_axis = False
    for _ in range(200):
        if abs(best[1]) < tol or hi - lo < 4e-16 * hi:
            break
        mid = 0.5 * (lo + hi)
        try:
            m = _miss(mid, *args)
        except (AxisCollision, NoReturn):
            hi, hit_axis = mid, True
            continue
        if abs(m) < abs(best[1]):
            best = (mid, m)
        if (m < 0) == (m_lo < 0):
            lo, m_lo = mid, m
        else:
            hi = mid
    if abs(best[1]) >= tol and hit_axis:
        raise DegenerateProfile(
            f"bisection collapsed onto an axis-hitting shot at r_start={hi:.12g} "
            "(sphere branch: the closed curve would have inner radius 0)")
    r_start = best[0]
    try:
        traj = _uniform_arc(r_start, n, step, max_arclength, r_min)
    except AxisCollision as exc:
        raise DegenerateProfile(f"final profile reaches the axis: {exc}") from exc
    miss = traj.theta[-1] + math.pi / 2
    profile = _profile_from_arc(traj, n, step, tol, miss)
    if abs(miss) >= tol:
        raise ShrinkerError(f"shooting stalled with miss {miss:.3e} >= tol {tol:.1e}")
    if not (0 < profile.ell < profile.r_out and profile.delta > 0):
        raise DegenerateProfile(f"not a torus: ell={profile.ell:.6g}, r_out={profile.r_out:.6g}")
    if not profile.is_convex():
        raise DegenerateProfile("profile curvature changes sign")
    return profile


def _profile_from_arc(traj: Trajectory, n, step, tol, miss) -> ProfileCurve:
    # maximum height: where theta crosses zero
    k = int(np.argmax(traj.theta <= 0.0)) - 1
    y0 = (traj.r[k], traj.z[k], traj.theta[k])
    h = traj.s[k + 1] - traj.s[k]
    sigma0 = h * traj.theta[k] / (traj.theta[k] - traj.theta[k + 1])
    _, ypk = _solve_partial_step(y0, n, h, 0.0, sigma0, index=2)
    return ProfileCurve(
        n=n, s=traj.s, r=traj.r, z=traj.z, theta=traj.theta,
        ell=float(traj.r[0]), r_out=float(traj.r[-1]), delta=float(ypk[1]),
        rho_peak=float(ypk[0]), t_star=1.0, scale=1.0, step=float(traj.s[1] - traj.s[0]),
        tol=tol, miss=float(miss))


def scale_torus(profile: ProfileCurve, target_outer: float, target_height_cap: float) -> ProfileCurve:
    """Largest rescaling with ``r_out <= target_outer`` and ``delta <= target_height_cap``."""
    if not (target_outer > 0 and target_height_cap > 0):
        raise ValueError("scale targets must be positive")
    lam = min(target_outer / profile.r_out, target_height_cap / profile.delta)
    return profile.scaled(lam)


def write_profile(profile: ProfileCurve, csv_path, meta_path=None) -> None:
    csv_path = Path(csv_path)
    data = np.column_stack([profile.s, profile.r, profile.z, profile.theta])
    np.savetxt(csv_path, data, delimiter=",", header="s,r,z,theta", comments="", fmt="%.17g")
    meta_path = Path(meta_path) if meta_path else csv_path.with_suffix(".meta")
    meta = {
        "n": profile.n, "ell": profile.ell, "r_out": profile.r_out, "delta": profile.delta,
        "t_star": profile.t_star, "step": profile.step, "tol": profile.tol,
        "scale": profile.scale, "rho_peak": profile.rho_peak, "miss": profile.miss,
    }
    meta_path.write_text("".join(f"{k}={v!r}\n" for k, v in meta.items()))


def read_profile(csv_path, meta_path=None) -> ProfileCurve:
    csv_path = Path(csv_path)
    meta_path = Path(meta_path) if meta_path else csv_path.with_suffix(".meta")
    meta = {}
    for line in meta_path.read_text().splitlines():
        if "=" in line:
            k, _, v = line.partition("=")
            meta[k.strip()] = float(v)
    data = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
    return ProfileCurve(
        n=int(meta["n"]), s=data[:, 0], r=data[:, 1], z=data[:, 2], theta=data[:, 3],
        ell=meta["ell"], r_out=meta["r_out"], delta=meta["delta"], rho_peak=meta["rho_peak"],
        t_star=meta["t_star"], scale=meta.get("scale", 1.0), step=meta["step"], tol=meta["tol"],
        miss=meta.get("miss", 0.0))
