"""Radial discretization of the ball B_R in R^4.

Conforming P1 finite elements in r: node j sits at r_j = j h, h = R/n, and
the Dirichlet node r_n = R is eliminated. Every integral, linear or not, is
taken with 4-point Gauss-Legendre quadrature on each element. That rule is
exact for u^4 r^3 when u is piecewise linear, so the discrete Dirichlet and
quartic terms are the true integrals of the interpolant. In particular the
discrete Sobolev quotient can never drop below S, which is what keeps
critical-exponent minimizers from collapsing onto the grid scale.

With K the stiffness and M the (consistent) mass matrix, the discrete
Laplacian is -M^{-1} K. Both matrices are tridiagonal and exclude omega_4.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .errors import DomainError, NumericError

OMEGA4 = 2.0 * np.pi ** 2
SCHEME_ORDER = 2

_GX, _GW = np.polynomial.legendre.leggauss(4)
REF_POINTS = 0.5 * (_GX + 1.0)
REF_WEIGHTS = 0.5 * _GW
BASIS_LEFT = np.ascontiguousarray(1.0 - REF_POINTS)
BASIS_RIGHT = np.ascontiguousarray(REF_POINTS.copy())


@dataclass(frozen=True, eq=False)
class RadialGrid:
    radius: float
    n: int
    nodes: np.ndarray
    coupling: np.ndarray
    boundary_coupling: float
    mass_diag: np.ndarray
    mass_off: np.ndarray
    qpoints: np.ndarray
    qweights: np.ndarray

    @cached_property
    def stiff_diag(self):
        d = np.zeros(self.n)
        d[:-1] += self.coupling
        d[1:] += self.coupling
        d[-1] += self.boundary_coupling
        return d

    @property
    def stiff_off(self):
        return -self.coupling

    @cached_property
    def factor(self):
        return kernels.tridiag_factor(self.stiff_diag, self.stiff_off)

    @cached_property
    def mass_factor(self):
        return kernels.tridiag_factor(self.mass_diag, self.mass_off)

    @property
    def h(self):
        return self.radius / self.n

    @property
    def volume(self):
        return OMEGA4 * float(self.qweights.sum())

    def same_as(self, other):
        return other is self or (
            other.n == self.n and np.isclose(other.radius, self.radius, rtol=1e-14, atol=0))

    def field(self, values):
        return RadialField(self, np.asarray(values, dtype=float))

    def apply_stiffness(self, x):
        return kernels.stiff_apply(self.coupling, self.boundary_coupling, np.ascontiguousarray(x))

    def stiffness_form(self, x):
        return kernels.stiff_form(self.coupling, self.boundary_coupling, np.ascontiguousarray(x))

    def solve_stiffness(self, rhs):
        return kernels.tridiag_solve(self.factor, np.ascontiguousarray(rhs, dtype=float))

    def apply_mass(self, x):
        y = self.mass_diag * x
        y[:-1] += self.mass_off * x[1:]
        y[1:] += self.mass_off * x[:-1]
        return y

    def solve_mass(self, rhs):
        return kernels.tridiag_solve(self.mass_factor, np.ascontiguousarray(rhs, dtype=float))

    def to_points(self, x):
        return kernels.to_points(np.ascontiguousarray(x, dtype=float), BASIS_LEFT, BASIS_RIGHT)

    def load(self, g):
        """Vector of integrals g phi_j r^3 for point values g (no omega_4)."""
        return kernels.from_points(np.ascontiguousarray(self.qweights * g), BASIS_LEFT, BASIS_RIGHT)

    def describe(self):
        return {"radius": float(self.radius), "n": int(self.n), "scheme_order": SCHEME_ORDER}


@dataclass(frozen=True, eq=False)
class RadialField:
    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if v.shape != (self.grid.n,):
            raise DomainError(f"field has shape {v.shape}, grid has {self.grid.n} nodes")
        if not np.all(np.isfinite(v)):
            raise DomainError("field contains non-finite values")

    def __add__(self, other):
        return RadialField(self.grid, self.values + _vals(other))

    def __sub__(self, other):
        return RadialField(self.grid, self.values - _vals(other))

    def __mul__(self, c):
        return RadialField(self.grid, self.values * c)

    __rmul__ = __mul__

    def __neg__(self):
        return RadialField(self.grid, -self.values)

    @property
    def interior_min(self):
        return float(self.values.min())


def _vals(x):
    return x.values if isinstance(x, RadialField) else x


def make_grid(radius, n):
    if not radius > 0:
        raise DomainError(f"radius must be positive, got {radius}")
    if int(n) != n or n < 16:
        raise DomainError(f"need at least 16 elements, got {n}")
    n = int(n)
    radius = float(radius)
    h = radius / n
    edges = h * np.arange(n + 1)
    edges[-1] = radius
    a, b = edges[:-1], edges[1:]
    coup_all = 0.25 * (b ** 4 - a ** 4) / (h * h)
    qp = a[:, None] + h * REF_POINTS[None, :]
    qw = h * REF_WEIGHTS[None, :] * qp ** 3
    mll = qw @ (BASIS_LEFT ** 2)
    mrr = qw @ (BASIS_RIGHT ** 2)
    mlr = qw @ (BASIS_LEFT * BASIS_RIGHT)
    md = mll.copy()
    md[1:] += mrr[:-1]
    return RadialGrid(radius, n, edges[:-1].copy(), coup_all[:-1].copy(), float(coup_all[-1]),
                      md, mlr[:-1].copy(), qp.ravel(), qw.ravel())


def integrate_power(f, p):
    """Integral of |f|^p over the ball (exact for integer p <= 4)."""
    if p < 1:
        raise DomainError("p must be at least 1")
    v = f.values
    if float(p) != int(p) and np.any(v < 0):
        raise DomainError("fractional power of a field with negative values")
    g = f.grid
    return OMEGA4 * float(g.qweights @ np.abs(g.to_points(v)) ** p)


def dirichlet_energy(f):
    return OMEGA4 * f.grid.stiffness_form(f.values)


def log_moment(f):
    """Integral of (f+)^2 log (f+)^2; values below the 1e-150 floor count as 0."""
    g = f.grid
    return OMEGA4 * kernels.positive_moments(g.to_points(f.values), g.qweights)[2]


def inner(f, g):
    return OMEGA4 * float(f.values @ f.grid.apply_mass(g.values))


def h_inner(f, g):
    return OMEGA4 * float(f.values @ f.grid.apply_stiffness(g.values))


def neg_laplacian(f):
    g = f.grid
    return RadialField(g, g.solve_mass(g.apply_stiffness(f.values)))


def riesz_solve(f):
    """Solve -Lap g = f with g(R) = 0 in the Galerkin sense."""
    g = f.grid
    rhs = g.apply_mass(f.values)
    sol = g.solve_stiffness(rhs)
    if not np.all(np.isfinite(sol)):
        res = np.linalg.norm(g.apply_stiffness(np.nan_to_num(sol)) - rhs)
        raise NumericError(f"Riesz solve broke down (residual {res:.3e})")
    return RadialField(g, sol)


def principal_eigenpair(grid, max_iter=500, tol=1e-14):
    """Inverse power iteration for the lowest Dirichlet eigenpair.

    Returns (lambda_1, e_1) with e_1 > 0 and |e_1|_2 = 1. Being a Galerkin
    eigenvalue, lambda_1 is an upper bound for the exact one.
    """
    x = np.cos(0.5 * np.pi * grid.nodes / grid.radius)
    lam_old = np.inf
    for it in range(max_iter):
        x = grid.solve_stiffness(grid.apply_mass(x))
        x /= np.sqrt(OMEGA4 * (x @ grid.apply_mass(x)))
        lam = OMEGA4 * grid.stiffness_form(x)
        if abs(lam - lam_old) <= tol * lam:
            break
        lam_old = lam
    else:
        raise NumericError(f"inverse iteration did not converge in {max_iter} steps")
    if x.sum() < 0:
        x = -x
    return float(lam), RadialField(grid, x)


def fields_to_csv(fh, grid, **columns):
    """Write r and the given fields as CSV, 17 significant digits."""
    names = list(columns)
    fh.write(",".join(["r"] + names) + "\n")
    cols = [grid.nodes] + [_vals(columns[k]) for k in names]
    for row in zip(*cols):
        fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def log_sobolev_gap(f, a):
    """(a^2/pi)|grad f|^2 + (log|f|_2^2 - 4(1 + log a))|f|_2^2 - int f^2 log f^2.

    Nonnegative for every f in H_0^1 and a > 0 (Euclidean log-Sobolev
    inequality in dimension 4, f extended by zero).
    """
    if not a > 0:
        raise DomainError("a must be positive")
    n2 = integrate_power(f, 2)
    if n2 == 0:
        return 0.0
    return (a * a / np.pi * dirichlet_energy(f) + (np.log(n2) - 4.0 * (1.0 + np.log(a))) * n2
            - log_moment(f))
