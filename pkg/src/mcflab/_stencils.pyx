# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled stencil kernels; see ``_stencils_py`` for the reference versions."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos

cnp.import_array()


cdef inline Py_ssize_t _wrap(Py_ssize_t j, Py_ssize_t n) nogil:
    if j < 0:
        return j + n
    if j >= n:
        return j - n
    return j


def heat_rhs_1d(double[::1] u, double hx):
    cdef Py_ssize_t n = u.shape[0], i
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double c = 1.0 / (hx * hx)
    with nogil:
        for i in range(n):
            o[i] = (u[_wrap(i + 1, n)] - 2.0 * u[i] + u[_wrap(i - 1, n)]) * c
    return out


def csf_rhs_1d(double[::1] u, double hx):
    cdef Py_ssize_t n = u.shape[0], i
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double px, uxx, e, w
    with nogil:
        for i in range(n):
            e = u[_wrap(i + 1, n)]
            w = u[_wrap(i - 1, n)]
            px = (e - w) / (2.0 * hx)
            uxx = (e - 2.0 * u[i] + w) / (hx * hx)
            o[i] = uxx / (1.0 + px * px)
    return out


def heat_rhs_2d(double[:, ::1] u, double hx, double hy):
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1], i, j, ip, im, jp, jm
    out = np.empty((nx, ny))
    cdef double[:, ::1] o = out
    cdef double cx = 1.0 / (hx * hx), cy = 1.0 / (hy * hy)
    with nogil:
        for i in range(nx):
            ip = _wrap(i + 1, nx)
            im = _wrap(i - 1, nx)
            for j in range(ny):
                jp = _wrap(j + 1, ny)
                jm = _wrap(j - 1, ny)
                o[i, j] = ((u[ip, j] - 2.0 * u[i, j] + u[im, j]) * cx
                           + (u[i, jp] - 2.0 * u[i, j] + u[i, jm]) * cy)
    return out


cdef inline double _mcf_node(double[:, ::1] u, Py_ssize_t i, Py_ssize_t j,
                             Py_ssize_t ip, Py_ssize_t im, Py_ssize_t jp, Py_ssize_t jm,
                             double hx, double hy, bint skew) nogil:
    cdef double c = u[i, j]
    cdef double e = u[ip, j], w = u[im, j], n = u[i, jp], s = u[i, jm]
    cdef double px = (e - w) / (2.0 * hx)
    cdef double py = (n - s) / (2.0 * hy)
    cdef double uxx = (e - 2.0 * c + w) / (hx * hx)
    cdef double uyy = (n - 2.0 * c + s) / (hy * hy)
    cdef double uxy
    if skew:
        if px * py < 0.0:
            uxy = (u[ip, jp] + u[im, jm] - e - w - n - s + 2.0 * c) / (2.0 * hx * hy)
        else:
            uxy = (e + w + n + s - u[im, jp] - u[ip, jm] - 2.0 * c) / (2.0 * hx * hy)
    else:
        uxy = (u[ip, jp] + u[im, jm] - u[im, jp] - u[ip, jm]) / (4.0 * hx * hy)
    cdef double d = 1.0 + px * px + py * py
    return (uxx * (1.0 + py * py) + uyy * (1.0 + px * px) - 2.0 * uxy * px * py) / d


def mcf_rhs_2d(double[:, ::1] u, double hx, double hy, bint skew=True):
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1], i, j, ip, im
    out = np.empty((nx, ny))
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(nx):
            ip = _wrap(i + 1, nx)
            im = _wrap(i - 1, nx)
            for j in range(ny):
                o[i, j] = _mcf_node(u, i, j, ip, im, _wrap(j + 1, ny), _wrap(j - 1, ny), hx, hy, skew)
    return out


def euler_step(u, rhs, double dt):
    return u + dt * rhs


def advance_2d(int kind, double[:, ::1] u, double[:, ::1] out, double dt,
               double hx, double hy, bint skew=True):
    """``out = u + dt * rhs(u)``; kind 0 is MCF, 1 is heat.

    Returns 1 if any output value is not finite, else 0.
    """
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1], i, j, ip, im, jp, jm
    cdef double cx = 1.0 / (hx * hx), cy = 1.0 / (hy * hy), r, v
    cdef int bad = 0
    with nogil:
        for i in range(nx):
            ip = _wrap(i + 1, nx)
            im = _wrap(i - 1, nx)
            for j in range(ny):
                jp = _wrap(j + 1, ny)
                jm = _wrap(j - 1, ny)
                if kind == 0:
                    r = _mcf_node(u, i, j, ip, im, jp, jm, hx, hy, skew)
                else:
                    r = ((u[ip, j] - 2.0 * u[i, j] + u[im, j]) * cx
                         + (u[i, jp] - 2.0 * u[i, j] + u[i, jm]) * cy)
                v = u[i, j] + dt * r
                if not (v - v == 0.0):
                    bad = 1
                out[i, j] = v
    return bad


def advance_1d(int kind, double[::1] u, double[::1] out, double dt, double hx):
    """``out = u + dt * rhs(u)``; kind 0 is curve shortening, 1 is heat.

    Returns 1 if any output value is not finite, else 0.
    """
    cdef Py_ssize_t n = u.shape[0], i
    cdef double e, w, px, uxx, r, v
    cdef int bad = 0
    with nogil:
        for i in range(n):
            e = u[_wrap(i + 1, n)]
            w = u[_wrap(i - 1, n)]
            uxx = (e - 2.0 * u[i] + w) / (hx * hx)
            if kind == 0:
                px = (e - w) / (2.0 * hx)
                r = uxx / (1.0 + px * px)
            else:
                r = uxx
            v = u[i] + dt * r
            if not (v - v == 0.0):
                bad = 1
            out[i] = v
    return bad


cdef inline void _shrinker_rhs(double r, double z, double th, double m,
                               double* dr, double* dz, double* dth) nogil:
    cdef double st = sin(th), ct = cos(th)
    dr[0] = ct
    dz[0] = st
    dth[0] = 0.5 * (r * st - z * ct) - m * st / r


def shrinker_march(double r, double z, double th, int n, double h,
                   Py_ssize_t max_steps, double r_min):
    """Classical RK4 on the profile ODE from (r, z, th).

    Stops after the first step that lands on or below ``z = 0`` (status 0),
    when ``r`` drops below ``r_min`` (status 1) or after ``max_steps``
    (status 2).  Returns ``(samples, status)`` with samples of shape (k, 3).
    """
    buf = np.empty((max_steps + 1, 3))
    cdef double[:, ::1] b = buf
    cdef double m = n - 1.0
    cdef double k1r, k1z, k1t, k2r, k2z, k2t, k3r, k3z, k3t, k4r, k4z, k4t
    cdef Py_ssize_t k = 0
    cdef int status = 2
    b[0, 0] = r
    b[0, 1] = z
    b[0, 2] = th
    with nogil:
        while k < max_steps:
            _shrinker_rhs(r, z, th, m, &k1r, &k1z, &k1t)
            _shrinker_rhs(r + 0.5 * h * k1r, z + 0.5 * h * k1z, th + 0.5 * h * k1t, m, &k2r, &k2z, &k2t)
            _shrinker_rhs(r + 0.5 * h * k2r, z + 0.5 * h * k2z, th + 0.5 * h * k2t, m, &k3r, &k3z, &k3t)
            _shrinker_rhs(r + h * k3r, z + h * k3z, th + h * k3t, m, &k4r, &k4z, &k4t)
            r = r + h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
            z = z + h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
            th = th + h / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t)
            k += 1
            b[k, 0] = r
            b[k, 1] = z
            b[k, 2] = th
            if r < r_min:
                status = 1
                break
            if z <= 0.0:
                status = 0
                break
    return buf[:k + 1].copy(), status
