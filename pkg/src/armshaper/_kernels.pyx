# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the per-sample kernels.

Semantics match armshaper._kernels_py exactly; see that module for the
documented contracts.  Arrays are allocated through the Python numpy API
(no C-level numpy dependency) and filled through typed memoryviews.
"""

from libc.math cimport cos, exp, floor, sin, sqrt

import numpy as np


def modal_response(u, double dt, double omega, double zeta):
    cdef const double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t n = uv.shape[0]
    x_arr = np.empty(n, dtype=np.float64)
    v_arr = np.empty(n, dtype=np.float64)
    if n == 0:
        return x_arr, v_arr
    cdef double[::1] x = x_arr
    cdef double[::1] v = v_arr

    cdef double wd = omega * sqrt(1.0 - zeta * zeta)
    cdef double decay = exp(-zeta * omega * dt)
    cdef double c = cos(wd * dt)
    cdef double s = sin(wd * dt)
    cdef double a00 = decay * (c + zeta * omega / wd * s)
    cdef double a01 = decay * s / wd
    cdef double a10 = -decay * omega * omega / wd * s
    cdef double a11 = decay * (c - zeta * omega / wd * s)
    cdef double b0 = 1.0 - a00
    cdef double b1 = -a10

    cdef double xc = uv[0]
    cdef double vc = 0.0
    cdef double xn, vn, uk
    cdef Py_ssize_t k
    x[0] = xc
    v[0] = vc
    for k in range(n - 1):
        uk = uv[k]
        xn = a00 * xc + a01 * vc + b0 * uk
        vn = a10 * xc + a11 * vc + b1 * uk
        x[k + 1] = xn
        v[k + 1] = vn
        xc = xn
        vc = vn
    return x_arr, v_arr


def shape_channel(y, amps, delays, n_out):
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef const double[::1] av = np.ascontiguousarray(amps, dtype=np.float64)
    cdef const double[::1] dv = np.ascontiguousarray(delays, dtype=np.float64)
    cdef Py_ssize_t n = yv.shape[0]
    cdef Py_ssize_t m = int(n_out)
    cdef Py_ssize_t nimp = av.shape[0]
    out_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t j, k, i
    cdef double a, d, src, frac, total

    if n == 1:
        total = 0.0
        for j in range(nimp):
            total += av[j]
        for k in range(m):
            out[k] = yv[0] * total
        return out_arr

    for j in range(nimp):
        a = av[j]
        d = dv[j]
        for k in range(m):
            src = k - d
            if src <= 0.0:
                out[k] += a * yv[0]
            elif src >= n - 1.0:
                out[k] += a * yv[n - 1]
            else:
                i = <Py_ssize_t>floor(src)
                if i > n - 2:
                    i = n - 2
                frac = src - i
                out[k] += a * ((1.0 - frac) * yv[i] + frac * yv[i + 1])
    return out_arr
