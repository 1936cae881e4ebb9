# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled sinusoid-bank kernels.

Same contract as :mod:`nmd._kernels_py`. Loops run serially with samples
outermost so every reduction has a fixed order.
"""

cdef extern from *:
    """
    #ifndef _GNU_SOURCE
    #define _GNU_SOURCE
    #endif
    #include <math.h>
    static inline void nmd_sincos(double x, double *s, double *c) {
    #if defined(__GLIBC__)
        sincos(x, s, c);
    #else
        *s = sin(x);
        *c = cos(x);
    #endif
    }
    """
    void nmd_sincos(double x, double *s, double *c) nogil

from libc.math cimport fabs

import numpy as np


cdef enum:
    BLOCK = 64  # samples per exact sincos anchor
cdef double EPS = 2.220446049250313e-16


cdef bint _uniform_block(const double[::1] t, Py_ssize_t a, Py_ssize_t e, double *dt) noexcept nogil:
    """True when t[a..e] lie on an arithmetic grid up to rounding."""
    cdef Py_ssize_t j
    cdef double step, tol
    if e <= a:
        return False
    step = (t[e] - t[a]) / (e - a)
    tol = 16.0 * EPS * (fabs(t[a]) + fabs(t[e]) + fabs(step) * (e - a))
    for j in range(a + 1, e):
        if fabs(t[j] - (t[a] + (j - a) * step)) > tol:
            return False
    dt[0] = step
    return True


def bank_forward(const double[::1] t, const double[:, ::1] amp,
                 const double[::1] omega, const double[::1] phi,
                 double[:, ::1] sines, double[:, ::1] cosines,
                 double[::1] periodic):
    """Fill sines/cosines of omega*t + phi and periodic = sum_k amp*sin.

    On uniformly spaced blocks of samples the angles advance by the
    addition formula from an exact anchor at the block start, which
    replaces most sin/cos calls with four multiplies; the drift stays at a
    few ulps of the angle. Other blocks call sincos per entry.
    """
    cdef Py_ssize_t n = t.shape[0], h = omega.shape[0]
    cdef Py_ssize_t i, k, a, e
    cdef double ti, s, c, acc, dt = 0.0
    cdef bint rotate = False
    cdef double[::1] rot_c = np.empty(h)
    cdef double[::1] rot_s = np.empty(h)
    with nogil:
        for i in range(n):
            ti = t[i]
            acc = 0.0
            if i % BLOCK == 0:
                a = i
                e = i + BLOCK - 1 if i + BLOCK - 1 < n - 1 else n - 1
                rotate = _uniform_block(t, a, e, &dt)
                if rotate:
                    for k in range(h):
                        nmd_sincos(omega[k] * dt, &rot_s[k], &rot_c[k])
                for k in range(h):
                    nmd_sincos(omega[k] * ti + phi[k], &s, &c)
                    sines[i, k] = s
                    cosines[i, k] = c
                    acc += amp[i, k] * s
            elif rotate:
                for k in range(h):
                    s = sines[i - 1, k] * rot_c[k] + cosines[i - 1, k] * rot_s[k]
                    c = cosines[i - 1, k] * rot_c[k] - sines[i - 1, k] * rot_s[k]
                    sines[i, k] = s
                    cosines[i, k] = c
                    acc += amp[i, k] * s
            else:
                for k in range(h):
                    nmd_sincos(omega[k] * ti + phi[k], &s, &c)
                    sines[i, k] = s
                    cosines[i, k] = c
                    acc += amp[i, k] * s
            periodic[i] = acc


def bank_backward(const double[::1] t, const double[::1] g,
                  const double[:, ::1] amp, const double[:, ::1] sines,
                  const double[:, ::1] cosines, double[:, ::1] d_amp,
                  double[::1] d_omega, double[::1] d_phi):
    cdef Py_ssize_t n = t.shape[0], h = d_omega.shape[0]
    cdef Py_ssize_t i, k
    cdef double gi, ti, q
    for k in range(h):
        d_omega[k] = 0.0
        d_phi[k] = 0.0
    for i in range(n):
        gi = g[i]
        ti = t[i]
        for k in range(h):
            d_amp[i, k] = gi * sines[i, k]
            q = gi * amp[i, k] * cosines[i, k]
            d_phi[k] += q
            d_omega[k] += q * ti
