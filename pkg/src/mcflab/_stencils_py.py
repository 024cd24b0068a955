"""Pure NumPy stencil kernels.

Reference implementation of the hot loops; the compiled module
``mcflab._stencils`` exposes the same functions with the same signatures.
All arrays are C-contiguous float64, axis 0 is x1 and axis 1 is x2, and
every index wraps periodically.
"""

import math

import numpy as np


def _sh(u, axis, k):
    # value at index j + k along axis
    return np.roll(u, -k, axis=axis)


def heat_rhs_1d(u, hx):
    return (_sh(u, 0, 1) - 2.0 * u + _sh(u, 0, -1)) / (hx * hx)


def csf_rhs_1d(u, hx):
    px = (_sh(u, 0, 1) - _sh(u, 0, -1)) / (2.0 * hx)
    uxx = (_sh(u, 0, 1) - 2.0 * u + _sh(u, 0, -1)) / (hx * hx)
    return uxx / (1.0 + px * px)


def heat_rhs_2d(u, hx, hy):
    return ((_sh(u, 0, 1) - 2.0 * u + _sh(u, 0, -1)) / (hx * hx)
            + (_sh(u, 1, 1) - 2.0 * u + _sh(u, 1, -1)) / (hy * hy))


def mcf_rhs_2d(u, hx, hy, skew=True):
    """Graph MCF speed ``(a11 u_xx + 2 a12 u_xy + a22 u_yy)``.

    The coefficients are ``a = I - p p^T / (1 + |p|^2)`` with central ``p``.
    With ``skew`` the mixed derivative uses the 7-point stencil leaning along
    the diagonal that matches the sign of ``a12``; otherwise the symmetric
    4-point cross.
    """
    e, w = _sh(u, 0, 1), _sh(u, 0, -1)
    n, s = _sh(u, 1, 1), _sh(u, 1, -1)
    px = (e - w) / (2.0 * hx)
    py = (n - s) / (2.0 * hy)
    uxx = (e - 2.0 * u + w) / (hx * hx)
    uyy = (n - 2.0 * u + s) / (hy * hy)
    ne = _sh(e, 1, 1)
    sw = _sh(w, 1, -1)
    nw = _sh(w, 1, 1)
    se = _sh(e, 1, -1)
    if skew:
        pos = (ne + sw - e - w - n - s + 2.0 * u) / (2.0 * hx * hy)
        neg = (e + w + n + s - nw - se - 2.0 * u) / (2.0 * hx * hy)
        uxy = np.where(px * py < 0.0, pos, neg)
    else:
        uxy = (ne + sw - nw - se) / (4.0 * hx * hy)
    d = 1.0 + px * px + py * py
    return (uxx * (1.0 + py * py) + uyy * (1.0 + px * px) - 2.0 * uxy * px * py) / d


def euler_step(u, rhs, dt):
    return u + dt * rhs


def advance_2d(kind, u, out, dt, hx, hy, skew=True):
    """``out = u + dt * rhs(u)``; kind 0 is MCF, 1 is heat."""
    rhs = mcf_rhs_2d(u, hx, hy, skew) if kind == 0 else heat_rhs_2d(u, hx, hy)
    np.multiply(rhs, dt, out=out)
    out += u
    return 0 if np.isfinite(out).all() else 1


def advance_1d(kind, u, out, dt, hx):
    """``out = u + dt * rhs(u)``; kind 0 is curve shortening, 1 is heat."""
    rhs = csf_rhs_1d(u, hx) if kind == 0 else heat_rhs_1d(u, hx)
    np.multiply(rhs, dt, out=out)
    out += u
    return 0 if np.isfinite(out).all() else 1


def _shrinker_rhs(r, z, th, m):
    st, ct = math.sin(th), math.cos(th)
    return ct, st, 0.5 * (r * st - z * ct) - m * st / r


def shrinker_march(r, z, th, n, h, max_steps, r_min):
    """Classical RK4 on the profile ODE; same contract as the compiled version."""
    m = n - 1.0
    rows = [(r, z, th)]
    status = 2
    f = _shrinker_rhs
    for _ in range(max_steps):
        k1 = f(r, z, th, m)
        k2 = f(r + 0.5 * h * k1[0], z + 0.5 * h * k1[1], th + 0.5 * h * k1[2], m)
        k3 = f(r + 0.5 * h * k2[0], z + 0.5 * h * k2[1], th + 0.5 * h * k2[2], m)
        k4 = f(r + h * k3[0], z + h * k3[1], th + h * k3[2], m)
        r = r + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        z = z + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        th = th + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        rows.append((r, z, th))
        if r < r_min:
            status = 1
            break
        if z <= 0.0:
            status = 0
            break
    return np.array(rows), status
