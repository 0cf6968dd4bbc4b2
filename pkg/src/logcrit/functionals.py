"""Energy functionals, Riesz gradients and Nehari quantities.

Everything is assembled in weak form on the radial grid. With K the
stiffness matrix and b(F) the Gauss-quadrature load vector of the reaction
F_i evaluated at the quadrature points (both without the omega_4 factor), the
derivative of the system functional in direction (phi, psi) is

    omega_4 * sum_i [ phi_i' K x_i - phi_i' b(F_i(x)) ]

and the H_0^1 Riesz representative of component i is x_i - K^{-1} b(F_i).
"""
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError
from .radial import BASIS_LEFT, BASIS_RIGHT, OMEGA4, RadialField

FLOOR = kernels.LOG_FLOOR


@dataclass(frozen=True, eq=False)
class StatePair:
    u: RadialField
    v: RadialField

    def __post_init__(self):
        if not self.u.grid.same_as(self.v.grid):
            raise DomainError("u and v live on different grids")

    @property
    def grid(self):
        return self.u.grid

    def array(self):
        return np.vstack([self.u.values, self.v.values])

    @classmethod
    def from_array(cls, grid, X):
        return cls(RadialField(grid, np.array(X[0], dtype=float)),
                   RadialField(grid, np.array(X[1], dtype=float)))

    def scaled(self, t1, t2):
        return StatePair(self.u * t1, self.v * t2)


@dataclass(frozen=True)
class EnergyBreakdown:
    total: float
    gradient_u: float
    gradient_v: float
    lambda_u: float
    lambda_v: float
    quartic_u: float
    quartic_v: float
    coupling: float
    log_u: float
    log_v: float

    def terms(self):
        return [self.gradient_u, self.gradient_v, self.lambda_u, self.lambda_v,
                self.quartic_u, self.quartic_v, self.coupling, self.log_u, self.log_v]

    def to_dict(self):
        return dict(self.__dict__)


class Model:
    """Discrete functional with one or two components on a fixed grid.

    The single-equation functional J is the one-component case. All methods
    take stacked arrays X of shape (m, n).
    """

    def __init__(self, grid, lams, mus, thetas, beta=0.0):
        self.grid = grid
        self.lams = tuple(float(x) for x in lams)
        self.mus = tuple(float(x) for x in mus)
        self.thetas = tuple(float(x) for x in thetas)
        self.m = len(self.lams)
        self.beta = float(beta) if self.m == 2 else 0.0
        self.w = grid.qweights

    @classmethod
    def system(cls, grid, p):
        return cls(grid, (p.lambda1, p.lambda2), (p.mu1, p.mu2), (p.theta1, p.theta2), p.beta)

    @classmethod
    def single(cls, grid, lam, mu, theta):
        return cls(grid, (lam,), (mu,), (theta,))

    def points(self, X):
        return [self.grid.to_points(x) for x in X]

    def moments(self, X, Q=None):
        g = self.grid
        if Q is None:
            Q = self.points(X)
        grad = [OMEGA4 * g.stiffness_form(x) for x in X]
        pm = [kernels.positive_moments(q, self.w) for q in Q]
        l2 = [OMEGA4 * a for a, _, _ in pm]
        l4 = [OMEGA4 * b for _, b, _ in pm]
        ll = [OMEGA4 * c for _, _, c in pm]
        cross = 0.0
        if self.m == 2:
            cross = OMEGA4 * kernels.cross_moment(Q[0], Q[1], self.w)
        return grad, l2, l4, ll, cross

    def terms(self, X):
        grad, l2, l4, ll, cross = self.moments(X)
        out = []
        for i in range(self.m):
            out.append((0.5 * grad[i], -0.5 * self.lams[i] * l2[i],
                        -0.25 * self.mus[i] * l4[i], -0.5 * self.thetas[i] * (ll[i] - l2[i])))
        return out, -0.5 * self.beta * cross

    def energy(self, X):
        t, c = self.terms(X)
        return sum(sum(x) for x in t) + c

    def reactions(self, X, Q=None):
        """F_i at the quadrature points."""
        if Q is None:
            Q = self.points(X)
        out = []
        for i in range(self.m):
            other = Q[1 - i] if self.m == 2 else np.zeros_like(Q[i])
            out.append(kernels.reaction(Q[i], other, self.lams[i], self.mus[i],
                                        self.thetas[i], self.beta))
        return out

    def loads(self, X):
        return [self.grid.load(f) for f in self.reactions(X)]

    def gradient(self, X):
        g = self.grid
        return np.vstack([x - g.solve_stiffness(b) for x, b in zip(X, self.loads(X))])

    def weak_residual(self, X):
        g = self.grid
        return np.vstack([g.apply_stiffness(x) - b for x, b in zip(X, self.loads(X))])

    def derivative(self, X, Phi):
        R = self.weak_residual(X)
        return OMEGA4 * float(np.sum(Phi * R))

    def hinner(self, X, Y):
        return OMEGA4 * sum(float(x @ self.grid.apply_stiffness(y)) for x, y in zip(X, Y))

    def hnorm(self, X):
        return math.sqrt(max(sum(OMEGA4 * self.grid.stiffness_form(x) for x in X), 0.0))

    def rel_gradient_norm(self, X, G=None):
        if G is None:
            G = self.gradient(X)
        return self.hnorm(G) / max(self.hnorm(X), 1e-300)

    def reaction_jacobian(self, X):
        """Pointwise dF_i/dx_j at the quadrature points, as arrays D[i][j]."""
        Q = np.array(self.points(X))
        P = np.where(Q > FLOOR, Q, 0.0)
        D = [[None] * self.m for _ in range(self.m)]
        for i in range(self.m):
            p = P[i]
            q2 = P[1 - i] ** 2 if self.m == 2 else 0.0
            lg = np.log(np.where(p > 0, p * p, 1.0))
            d = self.lams[i] + 3 * self.mus[i] * p * p + self.thetas[i] * (lg + 2.0) + self.beta * q2
            D[i][i] = np.where(p > 0, d, 0.0)
            if self.m == 2:
                D[i][1 - i] = 2.0 * self.beta * p * P[1 - i]
        return D

    def _weighted_mass(self, d):
        """Tridiagonal matrix of the integrals d phi_j phi_k r^3, as (diag, off)."""
        n = self.grid.n
        W = (self.w * d).reshape(n, -1)
        ll = W @ (BASIS_LEFT ** 2)
        rr = W @ (BASIS_RIGHT ** 2)
        lr = W @ (BASIS_LEFT * BASIS_RIGHT)
        diag = ll.copy()
        diag[1:] += rr[:-1]
        return diag, lr[:-1]

    def newton_step(self, X):
        """Solve J dX = -R for the weak residual R with the banded Jacobian."""
        from scipy.linalg import solve_banded

        g = self.grid
        n, m = g.n, self.m
        R = self.weak_residual(X)
        D = self.reaction_jacobian(X)
        bw = 2 * m - 1
        N = m * n
        ab = np.zeros((2 * bw + 1, N))

        def put(rows, cols, vals):
            ab[bw + rows - cols, cols] = vals
            ab[bw + cols - rows, rows] = vals

        # interleaved ordering: index = m*j + i
        j = np.arange(n)
        for i in range(m):
            md, mo = self._weighted_mass(D[i][i])
            idx = m * j + i
            ab[bw, idx] = g.stiff_diag - md
            put(idx[:-1], idx[1:], g.stiff_off - mo)
        if m == 2:
            cd, co = self._weighted_mass(D[0][1])
            put(2 * j, 2 * j + 1, -cd)
            put(2 * j[:-1], 2 * j[1:] + 1, -co)
            put(2 * j[:-1] + 1, 2 * j[1:], -co)
        rhs = -R.T.reshape(N)
        sol = solve_banded((bw, bw), ab, rhs, check_finite=False)
        return sol.reshape(n, m).T


def _check(s, p):
    if not math.isclose(s.grid.radius, p.radius, rel_tol=1e-12):
        raise DomainError(f"state grid radius {s.grid.radius} does not match parameter radius {p.radius}")


def energy_L(s, p):
    _check(s, p)
    t, c = Model.system(s.grid, p).terms(s.array())
    (gu, lu, qu, lgu), (gv, lv, qv, lgv) = t
    total = gu + gv + lu + lv + qu + qv + c + lgu + lgv
    return EnergyBreakdown(total, gu, gv, lu, lv, qu, qv, c, lgu, lgv)


def grad_L(s, p):
    _check(s, p)
    return StatePair.from_array(s.grid, Model.system(s.grid, p).gradient(s.array()))


def derivative_L(s, p, phi):
    """L'(s) applied to the direction phi (a StatePair)."""
    _check(s, p)
    return Model.system(s.grid, p).derivative(s.array(), phi.array())


def energy_J(u, lam, mu, theta):
    return Model.single(u.grid, lam, mu, theta).energy(u.values[None, :])


def energy_limit_E(s, mu1, mu2, beta):
    g = s.grid
    u, v = g.to_points(s.u.values), g.to_points(s.v.values)
    grad = OMEGA4 * (g.stiffness_form(s.u.values) + g.stiffness_form(s.v.values))
    quart = OMEGA4 * float(g.qweights @ (mu1 * u ** 4 + 2 * beta * u * u * v * v + mu2 * v ** 4))
    return 0.5 * grad - 0.25 * quart


def nehari_residuals(s, p):
    _check(s, p)
    md = Model.system(s.grid, p)
    grad, l2, l4, ll, cross = md.moments(s.array())
    G = []
    for i in range(2):
        lam, mu, th = p.component(i + 1)
        G.append(grad[i] - lam * l2[i] - mu * l4[i] - p.beta * cross - th * ll[i])
    return G[0], G[1]


def nehari_matrix(s, p):
    _check(s, p)
    _, l2, l4, _, cross = Model.system(s.grid, p).moments(s.array())
    m11 = p.mu1 * l4[0] + p.theta1 * l2[0]
    m22 = p.mu2 * l4[1] + p.theta2 * l2[1]
    off = p.beta * cross
    M = np.array([[m11, off], [off, m22]])
    return M, bool(m11 - abs(off) > 0 and m22 - abs(off) > 0)


def identity_quarter(s, p):
    """Both sides of L - L'(u,v)(u,v)/4 = sum_i [|grad u_i|^2/4 - ...]."""
    md = Model.system(s.grid, p)
    X = s.array()
    lhs = md.energy(X) - 0.25 * md.derivative(X, X)
    grad, l2, _, ll, _ = md.moments(X)
    rhs = 0.0
    for i in range(2):
        lam, _, th = p.component(i + 1)
        # theta/4 * int u^2 log(e^{lam/theta} u^2) = lam/4 |u|^2 + theta/4 int u^2 log u^2
        rhs += 0.25 * grad[i] - 0.25 * (lam * l2[i] + th * ll[i]) + 0.5 * th * l2[i]
    return lhs, rhs


def identity_half(s, p):
    """Both sides of L - L'(u,v)(u,v)/2 = quartic/4 + theta-terms/2."""
    md = Model.system(s.grid, p)
    X = s.array()
    lhs = md.energy(X) - 0.5 * md.derivative(X, X)
    _, l2, l4, _, cross = md.moments(X)
    rhs = 0.25 * (p.mu1 * l4[0] + p.mu2 * l4[1] + 2 * p.beta * cross) \
        + 0.5 * (p.theta1 * l2[0] + p.theta2 * l2[1])
    return lhs, rhs


def strong_residuals(md, X):
    """||-Lap x_i - F_i||_2 / ||x_i||_{H_0^1} per component."""
    g = md.grid
    R = md.weak_residual(X)
    out = []
    for i in range(md.m):
        r = g.solve_mass(R[i])
        num = math.sqrt(max(OMEGA4 * float(R[i] @ r), 0.0))
        den = math.sqrt(max(OMEGA4 * g.stiffness_form(X[i]), 0.0))
        out.append(num / den if den > 0 else (0.0 if num == 0 else math.inf))
    return out
