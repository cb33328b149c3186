# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; behavior matches ``_kernels_py`` exactly.

The smoothed penalty pair runs once per line-search trial and the bisection
once per precoder block update, so these loops dominate the solver runtime
at small and medium array sizes.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log1p

cnp.import_array()

BACKEND = "cython"


def box_residuals(cnp.ndarray[cnp.complex128_t, ndim=1] x, double a):
    """Signed box residuals, grouped per entry as (re-a, im-a, -re-a, -im-a)."""
    cdef Py_ssize_t m = x.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(4 * m, dtype=np.float64)
    cdef Py_ssize_t i
    cdef double re, im
    for i in range(m):
        re = x[i].real
        im = x[i].imag
        out[4 * i] = re - a
        out[4 * i + 1] = im - a
        out[4 * i + 2] = -re - a
        out[4 * i + 3] = -im - a
    return out


cdef inline double _softplus(double c, double u) nogil:
    # u*log(1+exp(c/u)) in the overflow-safe split form.
    cdef double m = c if c > 0.0 else 0.0
    return m + u * log1p(exp(-fabs(c) / u))


def smoothed_box_penalty(cnp.ndarray[cnp.complex128_t, ndim=1] x, double a, double u):
    """Sum of the smoothed hinges of all 4M box residuals."""
    cdef Py_ssize_t m = x.shape[0]
    cdef double total = 0.0
    cdef Py_ssize_t i
    cdef double re, im
    for i in range(m):
        re = x[i].real
        im = x[i].imag
        total += _softplus(re - a, u)
        total += _softplus(im - a, u)
        total += _softplus(-re - a, u)
        total += _softplus(-im - a, u)
    return total


cdef inline double _logistic(double t) nogil:
    cdef double e
    if t >= 0.0:
        return 1.0 / (1.0 + exp(-t))
    e = exp(t)
    return e / (1.0 + e)


def smoothed_box_penalty_grad(cnp.ndarray[cnp.complex128_t, ndim=1] x, double a, double u):
    """Complex gradient of the smoothed penalty (d/d_re + j*d/d_im per entry)."""
    cdef Py_ssize_t m = x.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(m, dtype=np.complex128)
    cdef Py_ssize_t i
    cdef double re, im, gr, gi
    for i in range(m):
        re = x[i].real
        im = x[i].imag
        gr = _logistic((re - a) / u) - _logistic((-re - a) / u)
        gi = _logistic((im - a) / u) - _logistic((-im - a) / u)
        out[i] = gr + 1j * gi
    return out


def unit_norm_shift_root(
    cnp.ndarray[cnp.float64_t, ndim=1] mu,
    cnp.ndarray[cnp.float64_t, ndim=1] csq,
    double rho,
    double lo,
    double tol=1e-10,
    int max_iter=200,
):
    """Bisection root of ``sum csq/(2*rho*mu + 1 + 2*rho*lam)^2 = 1``."""
    cdef Py_ssize_t m = mu.shape[0]
    cdef double hi, lam, val, den
    cdef Py_ssize_t i
    cdef int it

    hi = 1.0 if 1.0 > lo + 1.0 else lo + 1.0
    while True:
        val = 0.0
        for i in range(m):
            den = 2.0 * rho * mu[i] + 1.0 + 2.0 * rho * hi
            val += csq[i] / (den * den)
        if val < 1.0:
            break
        hi = 2.0 * hi - lo

    lam = 0.5 * (lo + hi)
    for it in range(max_iter):
        val = 0.0
        for i in range(m):
            den = 2.0 * rho * mu[i] + 1.0 + 2.0 * rho * lam
            val += csq[i] / (den * den)
        if fabs(val - 1.0) <= tol:
            break
        if val > 1.0:
            lo = lam
        else:
            hi = lam
        lam = 0.5 * (lo + hi)
    return lam
