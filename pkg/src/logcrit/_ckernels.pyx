# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Same signatures as _kernels_py."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log

cnp.import_array()

cdef double LOG_FLOOR = 1e-150


def tridiag_factor(double[::1] diag, double[::1] off):
    # LDL^T: row 0 holds the multipliers, row 1 the pivots
    cdef Py_ssize_t n = diag.shape[0], i
    out = np.zeros((2, n))
    cdef double[:, ::1] f = out
    f[1, 0] = diag[0]
    for i in range(n - 1):
        if f[1, i] <= 0.0:
            raise np.linalg.LinAlgError("matrix is not positive definite")
        f[0, i] = off[i] / f[1, i]
        f[1, i + 1] = diag[i + 1] - f[0, i] * off[i]
    if f[1, n - 1] <= 0.0:
        raise np.linalg.LinAlgError("matrix is not positive definite")
    return out


def tridiag_solve(double[:, ::1] factor, double[::1] rhs):
    cdef Py_ssize_t n = rhs.shape[0], i
    out = np.empty(n)
    cdef double[::1] x = out
    with nogil:
        x[0] = rhs[0]
        for i in range(1, n):
            x[i] = rhs[i] - factor[0, i - 1] * x[i - 1]
        x[n - 1] = x[n - 1] / factor[1, n - 1]
        for i in range(n - 2, -1, -1):
            x[i] = x[i] / factor[1, i] - factor[0, i] * x[i + 1]
    return out


def stiff_apply(double[::1] coup, double cb, double[::1] x):
    cdef Py_ssize_t n = x.shape[0], i
    cdef double d
    out = np.zeros(n)
    cdef double[::1] y = out
    with nogil:
        for i in range(n - 1):
            d = coup[i] * (x[i + 1] - x[i])
            y[i] -= d
            y[i + 1] += d
        y[n - 1] += cb * x[n - 1]
    return out


def stiff_form(double[::1] coup, double cb, double[::1] x):
    cdef Py_ssize_t n = x.shape[0], i
    cdef double s = 0.0, d
    with nogil:
        for i in range(n - 1):
            d = x[i + 1] - x[i]
            s += coup[i] * d * d
        s += cb * x[n - 1] * x[n - 1]
    return s


def to_points(double[::1] x, double[::1] bl, double[::1] br):
    cdef Py_ssize_t n = x.shape[0], nq = bl.shape[0], e, q
    cdef double a, b
    out = np.empty(n * nq)
    cdef double[::1] y = out
    with nogil:
        for e in range(n):
            a = x[e]
            b = x[e + 1] if e + 1 < n else 0.0
            for q in range(nq):
                y[e * nq + q] = a * bl[q] + b * br[q]
    return out


def from_points(double[::1] g, double[::1] bl, double[::1] br):
    cdef Py_ssize_t nq = bl.shape[0], n = g.shape[0] // nq, e, q
    cdef double sl, sr
    out = np.zeros(n)
    cdef double[::1] y = out
    with nogil:
        for e in range(n):
            sl = 0.0
            sr = 0.0
            for q in range(nq):
                sl += g[e * nq + q] * bl[q]
                sr += g[e * nq + q] * br[q]
            y[e] += sl
            if e + 1 < n:
                y[e + 1] += sr
    return out


def positive_moments(double[::1] u, double[::1] w):
    cdef Py_ssize_t n = u.shape[0], i
    cdef double a = 0.0, b = 0.0, c = 0.0, p2
    with nogil:
        for i in range(n):
            if u[i] > LOG_FLOOR:
                p2 = u[i] * u[i]
                a += w[i] * p2
                b += w[i] * p2 * p2
                c += w[i] * p2 * log(p2)
    return a, b, c


def cross_moment(double[::1] u, double[::1] v, double[::1] w):
    cdef Py_ssize_t n = u.shape[0], i
    cdef double s = 0.0
    with nogil:
        for i in range(n):
            if u[i] > LOG_FLOOR and v[i] > LOG_FLOOR:
                s += w[i] * u[i] * u[i] * v[i] * v[i]
    return s


def reaction(double[::1] u, double[::1] v, double lam, double mu,
             double theta, double beta):
    cdef Py_ssize_t n = u.shape[0], i
    cdef double p, q
    out = np.zeros(n)
    cdef double[::1] f = out
    with nogil:
        for i in range(n):
            p = u[i]
            if p > LOG_FLOOR:
                q = v[i] if v[i] > LOG_FLOOR else 0.0
                f[i] = p * (lam + mu * p * p + theta * log(p * p) + beta * q * q)
    return out
