"""Projection onto the Nehari set by componentwise scaling.

Scaling u by t1 and v by t2 and writing a = log t1^2, b = log t2^2, the two
Nehari conditions become

    mu1 A e^a + beta C e^b + theta1 P a = |grad u|^2 - lambda1 P - theta1 Q
    beta C e^a + mu2 B e^b + theta2 P' b = (same for v)

with A = |u+|_4^4, C = |u+ v+|_2^2, P = |u+|_2^2, Q = int u+^2 log u+^2.

Tolerances are relative: the Nehari residual of each component is divided
by its Dirichlet energy, which is the size of the terms that cancel.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError, PreconditionError
from .functionals import Model, StatePair, nehari_matrix, nehari_residuals

MAX_STEP = 4.0


@dataclass
class NehariProjection:
    t1: float
    t2: float
    projected: StatePair
    iterations: int
    residuals: tuple
    multiplicity_unknown: bool = False
    relative: tuple = ()
    trace: list = field(default_factory=list)

    def to_dict(self):
        return {"t1": self.t1, "t2": self.t2, "iterations": self.iterations,
                "residuals": list(self.residuals), "relative": list(self.relative),
                "multiplicity_unknown": self.multiplicity_unknown,
                "trace": self.trace}


def _coefficients(md, X):
    grad, l2, l4, ll, cross = md.moments(X)
    rhs = [grad[i] - md.lams[i] * l2[i] - md.thetas[i] * ll[i] for i in range(md.m)]
    return grad, l2, l4, cross, rhs


def _newton(phi, jac, x0, tol, max_iter, scale):
    """Damped Newton on phi(x) = 0; tol applies to scale(x) * phi(x)."""
    x = np.array(x0, dtype=float)
    f = phi(x)
    trace = [(0, x.tolist(), float(np.max(np.abs(scale(x) * f))))]
    it = 0
    while np.max(np.abs(scale(x) * f)) > tol:
        if it >= max_iter:
            raise NumericError(f"Nehari Newton did not converge in {max_iter} iterations", trace)
        it += 1
        J = jac(x)
        step = -np.linalg.solve(J, f)
        big = np.max(np.abs(step))
        if big > MAX_STEP:
            step *= MAX_STEP / big
        norm0 = np.linalg.norm(f)
        alpha = 1.0
        while True:
            xn = x + alpha * step
            fn = phi(xn)
            if np.all(np.isfinite(fn)) and np.linalg.norm(fn) < norm0:
                break
            alpha *= 0.5
            if alpha < 1e-12:
                # accept a full step when no decrease is found at roundoff level
                xn, fn = x + step, phi(x + step)
                if not np.all(np.isfinite(fn)):
                    raise NumericError("Nehari Newton produced non-finite residuals", trace)
                break
        x, f = xn, fn
        trace.append((it, x.tolist(), float(np.max(np.abs(scale(x) * f)))))
    return x, it, trace


def project_to_nehari(s, p, tol=1e-10, max_iter=50):
    md = Model.system(s.grid, p)
    X = s.array()
    grad, l2, l4, cross, rhs = _coefficients(md, X)
    if l2[0] == 0 or l2[1] == 0:
        raise PreconditionError("projection needs u+ and v+ nonzero")
    b = p.beta

    def phi(x):
        ea, eb = math.exp(min(x[0], 700)), math.exp(min(x[1], 700))
        return np.array([p.mu1 * l4[0] * ea + b * cross * eb + p.theta1 * l2[0] * x[0] - rhs[0],
                         b * cross * ea + p.mu2 * l4[1] * eb + p.theta2 * l2[1] * x[1] - rhs[1]])

    def jac(x):
        ea, eb = math.exp(min(x[0], 700)), math.exp(min(x[1], 700))
        return np.array([[p.mu1 * l4[0] * ea + p.theta1 * l2[0], b * cross * eb],
                         [b * cross * ea, p.mu2 * l4[1] * eb + p.theta2 * l2[1]]])

    # the scaled state has residual -t_i^2 phi_i and Dirichlet energy t_i^2 grad_i
    inv = np.array([1.0 / grad[0], 1.0 / grad[1]])
    x, it, trace = _newton(phi, jac, (0.0, 0.0), tol, max_iter, lambda x: inv)
    t1, t2 = math.exp(0.5 * x[0]), math.exp(0.5 * x[1])
    proj = s.scaled(t1, t2) if it else s
    res = nehari_residuals(proj, p)
    unknown = not (p.theta1 > 0 and p.theta2 > 0)
    return NehariProjection(t1 if it else 1.0, t2 if it else 1.0, proj, it, res, unknown,
                            relative=relative_residuals(proj, p), trace=trace)


def relative_residuals(s, p):
    """Nehari residuals divided by the Dirichlet energies of the components."""
    grad = Model.system(s.grid, p).moments(s.array())[0]
    return tuple(abs(r) / g if g > 0 else abs(r) for r, g in zip(nehari_residuals(s, p), grad))


def project_single(u, lam, mu, theta, tol=1e-10, max_iter=50):
    """Scale u onto the single-equation Nehari set. Returns (t, t u)."""
    md = Model.single(u.grid, lam, mu, theta)
    X = u.values[None, :]
    grad, l2, l4, _, rhs = _coefficients(md, X)
    if l2[0] == 0:
        raise PreconditionError("projection needs u+ nonzero")
    c4, c2, r = mu * l4[0], theta * l2[0], rhs[0]
    phi = lambda x: np.array([c4 * math.exp(min(x[0], 700)) + c2 * x[0] - r])
    jac = lambda x: np.array([[c4 * math.exp(min(x[0], 700)) + c2]])
    inv = 1.0 / grad[0]
    x, it, _ = _newton(phi, jac, (0.0,), tol, max_iter, lambda x: inv)
    if it == 0:
        return 1.0, u
    t = math.exp(0.5 * x[0])
    return t, u * t


def single_residual(u, lam, mu, theta):
    md = Model.single(u.grid, lam, mu, theta)
    grad, l2, l4, _, rhs = _coefficients(md, u.values[None, :])
    return rhs[0] - mu * l4[0]


def fiber_map(s, p):
    """F(t1, t2) = L(t1 u, t2 v) as a cheap closure over the moments of s."""
    md = Model.system(s.grid, p)
    grad, l2, l4, ll, cross = md.moments(s.array())

    def F(t1, t2):
        out = 0.0
        for i, t in enumerate((t1, t2)):
            lam, mu, th = p.component(i + 1)
            a = math.log(t * t)
            out += (0.5 * t * t * grad[i] - 0.5 * lam * t * t * l2[i] - 0.25 * mu * t ** 4 * l4[i]
                    - 0.5 * th * t * t * (ll[i] + a * l2[i] - l2[i]))
        return out - 0.5 * p.beta * (t1 * t2) ** 2 * cross
    return F


def q_certificate(s, p):
    return nehari_matrix(s, p)[1]
