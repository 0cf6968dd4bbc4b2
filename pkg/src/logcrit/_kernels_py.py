"""Numpy/scipy implementations of the hot kernels.

Used when the compiled extension is missing or LOGCRIT_PURE_PYTHON is set.
The compiled module in ``_ckernels.pyx`` exposes the same functions.
"""
import numpy as np
from scipy.linalg import cholesky_banded, cho_solve_banded

LOG_FLOOR = 1e-150


def tridiag_factor(diag, off):
    """Cholesky factor of a symmetric positive definite tridiagonal matrix."""
    n = diag.shape[0]
    ab = np.zeros((2, n))
    ab[0, 1:] = off
    ab[1] = diag
    return cholesky_banded(ab, lower=False)


def tridiag_solve(factor, rhs):
    return cho_solve_banded((factor, False), rhs, check_finite=False)


def stiff_apply(coup, cb, x):
    """K x in flux form: face couplings coup, boundary coupling cb."""
    d = coup * (x[1:] - x[:-1])
    y = np.zeros_like(x)
    y[:-1] -= d
    y[1:] += d
    y[-1] += cb * x[-1]
    return y


def stiff_form(coup, cb, x):
    d = x[1:] - x[:-1]
    return float(coup @ (d * d) + cb * x[-1] * x[-1])


def to_points(x, bl, br):
    """Values of the P1 interpolant at the Gauss points, element by element.

    Element e joins node e to node e+1; node n is the Dirichlet node (zero).
    """
    right = np.append(x[1:], 0.0)
    return (np.outer(x, bl) + np.outer(right, br)).ravel()


def from_points(g, bl, br):
    """Transpose of to_points: out_j = sum over quadrature points of g phi_j."""
    n = g.shape[0] // bl.shape[0]
    G = g.reshape(n, bl.shape[0])
    out = G @ bl
    out[1:] += (G @ br)[:-1]
    return out


def _pos(u):
    p = np.where(u > LOG_FLOOR, u, 0.0)
    return p


def positive_moments(u, w):
    # sum w u+^2, sum w u+^4, sum w u+^2 log u+^2
    p = _pos(u)
    p2 = p * p
    with np.errstate(divide="ignore"):
        lg = np.where(p > 0.0, np.log(np.where(p > 0.0, p2, 1.0)), 0.0)
    return float(w @ p2), float(w @ (p2 * p2)), float(w @ (p2 * lg))


def cross_moment(u, v, w):
    pu = _pos(u)
    pv = _pos(v)
    return float(w @ (pu * pu * pv * pv))


def reaction(u, v, lam, mu, theta, beta):
    # lam u+ + mu u+^3 + theta u+ log u+^2 + beta v+^2 u+
    p = _pos(u)
    q = _pos(v)
    p2 = p * p
    lg = np.log(np.where(p > 0.0, p2, 1.0))
    return p * (lam + mu * p2 + theta * lg + beta * q * q)
