"""Minimization and mountain-pass pipelines.

All pipelines share one engine: Sobolev gradient descent (the H_0^1 Riesz
representative of the derivative as search direction) with backtracking,
followed by a banded Newton polish once the relative gradient norm is small.
The Newton stage is what drives the strong residual down to round-off; it is
rejected if it wanders away from the descent limit.
"""
import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import params as P
from .errors import NumericError, PreconditionError
from .functionals import (Model, StatePair, identity_half, identity_quarter, nehari_residuals,
                          strong_residuals)
from .nehari import project_single, project_to_nehari, q_certificate, relative_residuals
from .radial import RadialField, principal_eigenpair

NEWTON_SWITCH = 1e-6
ARMIJO = 1e-4
ALPHA_MAX = 4.0
POSITIVE = 1e-8

rho_delta = P.rho_delta


@dataclass
class SolveResult:
    state: object            # StatePair, or RadialField for single-equation runs
    energy: float
    gradient_norm: float
    iterations: int
    positivity: dict
    classification: str
    converged: bool
    tol: float
    trace: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    hypotheses: str = "met"

    def array(self):
        s = self.state
        return s.array() if isinstance(s, StatePair) else s.values[None, :]

    def to_dict(self):
        return {"energy": self.energy, "gradient_norm": self.gradient_norm,
                "iterations": self.iterations, "positivity": dict(self.positivity),
                "classification": self.classification, "converged": self.converged,
                "tol": self.tol, "notes": list(self.notes), "hypotheses": self.hypotheses,
                "grid": self.state.grid.describe()}


@dataclass
class PathState:
    grid: object
    arrays: list
    energies: list
    history: list = field(default_factory=list)
    gradient_norm: float = math.inf
    sweeps: int = 0

    @property
    def level(self):
        """Largest energy on the densely sampled polyline."""
        return float(self.history[-1]) if self.history else self.max_energy

    @property
    def max_index(self):
        return int(np.argmax(self.energies))

    @property
    def max_energy(self):
        return float(max(self.energies))

    @property
    def samples(self):
        return [_wrap(self.grid, X) for X in self.arrays]

    def to_dict(self):
        return {"segments": len(self.arrays) - 1, "max_index": self.max_index,
                "max_energy": self.max_energy, "level": self.level,
                "gradient_norm": self.gradient_norm, "sweeps": self.sweeps,
                "energies": [float(e) for e in self.energies],
                "level_history": [float(e) for e in self.history]}


def _wrap(grid, X):
    if X.shape[0] == 2:
        return StatePair.from_array(grid, X)
    return RadialField(grid, np.array(X[0]))


def _positivity(X):
    out = {"u_min_interior": float(X[0].min())}
    out["v_min_interior"] = float(X[1].min()) if X.shape[0] == 2 else None
    return out


def write_trace(fh, result):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["iteration", "energy", "gradient_norm"])
    for it, e, g in result.trace:
        w.writerow([it, f"{e:.17g}", f"{g:.17g}"])


# -------------------------------------------------------------- bounds

def coercivity_gap(md, X):
    """(L - L'(X)X/4) - (|X|^2/4 + sum theta_i/4 e^{1-lam_i/theta_i} |Omega|).

    Nonnegative whenever every theta_i < 0; None otherwise.
    """
    if any(t >= 0 for t in md.thetas):
        return None
    vol = md.grid.volume
    lhs = md.energy(X) - 0.25 * md.derivative(X, X)
    rhs = 0.25 * md.hnorm(X) ** 2 + sum(
        0.25 * t * math.exp(1.0 - l / t) * vol for l, t in zip(md.lams, md.thetas))
    return lhs - rhs


def energy_lower_bounds(s, p, dc):
    """Lower bounds for the energy of a critical point, one per applicable case."""
    md = Model.system(s.grid, p)
    X = s.array()
    E = md.energy(X)
    slack = 0.5 * abs(md.derivative(X, X)) + 1e-12 * max(1.0, abs(E))
    out = []
    if not (p.theta1 < 0 and p.theta2 < 0):
        return out
    vol = s.grid.volume
    _, l2, l4, _, _ = md.moments(X)
    q4 = [math.sqrt(max(x, 0.0)) for x in l4]       # |u+|_4^2
    hold = 0.5 * math.sqrt(vol) * (p.theta1 * q4[0] + p.theta2 * q4[1])
    if 2 * min(p.theta1, p.theta2) >= -dc.lambda1_omega:
        b = sum(0.25 * t * math.exp(-l / t - 1.0) * vol
                for l, t in ((p.lambda1, p.theta1), (p.lambda2, p.theta2)))
        out.append({"case": 1, "bound": b})
    if p.beta > 0:
        out.append({"case": 2, "bound": 0.25 * (p.mu1 * l4[0] + p.mu2 * l4[1]) + hold})
    if -math.sqrt(p.mu1 * p.mu2) < p.beta < 0:
        c1 = p.mu1 + p.beta * math.sqrt(p.mu1 / p.mu2)
        c2 = p.mu2 + p.beta * math.sqrt(p.mu2 / p.mu1)
        out.append({"case": 3, "bound": 0.25 * (c1 * l4[0] + c2 * l4[1]) + hold})
    for o in out:
        o["energy"] = E
        o["slack"] = slack
        o["holds"] = bool(o["bound"] <= E + slack)
    return out


# -------------------------------------------------------------- engine

def _clip(md, Y, radius):
    nrm = md.hnorm(Y)
    return Y * (radius / nrm) if nrm > radius else Y


def _newton_polish(md, X, tol, max_iter=30, reach=1e-2):
    """Newton on the weak residual with backtracking on the gradient norm."""
    gn = md.rel_gradient_norm(X)
    x0n = md.hnorm(X)
    X0 = X
    its = 0
    for its in range(1, max_iter + 1):
        try:
            dX = md.newton_step(X)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NumericError(f"Newton step failed: {exc}")
        if not np.all(np.isfinite(dX)):
            raise NumericError("Newton step is not finite")
        t = 1.0
        while True:
            Y = X + t * dX
            gy = md.rel_gradient_norm(Y)
            if gy < gn:
                break
            t *= 0.5
            if t < 1e-4:
                return X, gn, its
        X, gn = Y, gy
        if md.hnorm(X - X0) > reach * max(x0n, 1e-300):
            raise NumericError("Newton polish left the neighbourhood of the descent limit")
        if gn <= 1e-3 * tol:
            break
    return X, gn, its


def _minimize(md, X, tol, max_iter, ball=None, project=None, newton=True, check_coercive=False):
    E = md.energy(X)
    G = md.gradient(X)
    gn = md.rel_gradient_norm(X, G)
    trace = [(0, E, gn)]
    notes = []
    alpha = 0.5
    it = 0
    worst_gap = math.inf
    while gn > tol and it < max_iter:
        if newton and gn <= NEWTON_SWITCH:
            break
        g2 = md.hinner(G, G)
        accepted = False
        while alpha >= 1e-12:
            Y = X - alpha * G
            if ball is not None:
                Y = _clip(md, Y, ball)
            try:
                if project is not None:
                    Y = project(Y)
                Ey = md.energy(Y)
            except (NumericError, PreconditionError):
                Ey = math.inf
            dec = E - Ey
            if ball is None and project is None:
                ok = dec >= ARMIJO * alpha * g2
            else:
                ok = dec > 0
            if ok and np.isfinite(Ey):
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            notes.append("line search stagnated")
            break
        X, E = Y, Ey
        it += 1
        G = md.gradient(X)
        gn = md.rel_gradient_norm(X, G)
        trace.append((it, E, gn))
        alpha = min(2.0 * alpha, ALPHA_MAX)
        if check_coercive:
            gap = coercivity_gap(md, X)
            if gap is not None:
                worst_gap = min(worst_gap, gap)
    if newton and gn > 1e-3 * tol:
        try:
            Xn, gnn, nits = _newton_polish(md, X, tol)
            if project is not None:
                Xn = project(Xn)
                gnn = md.rel_gradient_norm(Xn)
            if ball is not None and md.hnorm(Xn) > ball:
                notes.append("Newton polish rejected: left the ball")
            elif gnn < gn:
                X, gn = Xn, gnn
                E = md.energy(X)
                it += nits
                trace.append((it, E, gn))
        except (NumericError, PreconditionError) as exc:
            notes.append(f"Newton polish rejected: {exc}")
    if check_coercive and worst_gap < -1e-10 * max(1.0, abs(E)):
        notes.append(f"boundedness inequality violated on an iterate (gap {worst_gap:.3e})")
    return X, E, gn, it, trace, notes


# -------------------------------------------------------------- seeds

def seed_pair(grid, amplitude):
    _, e1 = principal_eigenpair(grid)
    return StatePair(e1 * amplitude, e1 * amplitude)


def _negative_seed(md, radius, max_halvings=80):
    """Small multiple of the principal eigenfunction with negative energy."""
    _, e1 = principal_eigenpair(md.grid)
    X = np.vstack([e1.values] * md.m)
    t = 0.5 * radius / md.hnorm(X)
    for _ in range(max_halvings):
        if md.energy(t * X) < 0:
            return t * X
        t *= 0.5
    raise NumericError("no small multiple of e1 has negative energy")


def default_endpoints(p, grid, local_min=None):
    """end_a = local minimizer if given else 0; end_b = t0 (e1, e1), t0 doubled."""
    md = Model.system(grid, p)
    if local_min is None:
        A = np.zeros((2, grid.n))
    else:
        A = local_min.array()
    Ea = md.energy(A)
    _, e1 = principal_eigenpair(grid)
    B = np.vstack([e1.values, e1.values])
    t = 1.0
    for _ in range(60):
        if md.energy(t * B) < Ea:
            return StatePair.from_array(grid, A), StatePair.from_array(grid, t * B)
        t *= 2.0
    raise NumericError("no large multiple of (e1, e1) drops below the start energy")


def bubble_endpoint(p, end_a, eps_list=(0.05, 0.1, 0.15, 0.2), r_cut=None, component=1,
                    samples=201):
    """end_a + T w with w a cut-off bubble in one component.

    The bubble width is picked from eps_list to minimize the largest energy
    along the straight segment; T is doubled until the energy drops below
    that of end_a. Returns (end_b, eps, straight_max).
    """
    from .bubbles import bubble_field

    grid = end_a.grid
    md = Model.system(grid, p)
    A = end_a.array()
    Ea = md.energy(A)
    if r_cut is None:
        r_cut = grid.radius / 2
    best = None
    for eps in eps_list:
        W = np.zeros_like(A)
        W[component - 1] = bubble_field(eps, grid, r_cut).values
        T = 1.0
        while md.energy(A + T * W) >= Ea:
            T *= 2.0
            if T > 1e12:
                raise NumericError("bubble leg never drops below the start energy")
        top = max(md.energy(A + t * W) for t in np.linspace(0.0, T, samples))
        if best is None or top < best[2]:
            best = (A + T * W, eps, top)
    return StatePair.from_array(grid, best[0]), best[1], best[2]


# -------------------------------------------------------------- pipelines

def minimize_local_ball(p, init=None, rho=None, tol=1e-8, grid=None, max_iter=5000):
    if init is not None:
        grid = init.grid
    if grid is None:
        raise PreconditionError("need an initial state or a grid")
    md = Model.system(grid, p)
    if rho is None:
        rho = rho_delta(p, P.ball_geometry(p.radius))[0]
    r = 0.99 * rho
    if init is None:
        X = _negative_seed(md, r)
    else:
        X = init.array()
        if md.hnorm(X) > r:
            raise PreconditionError("initial state lies outside the ball")
    check = p.theta1 < 0 and p.theta2 < 0
    X, E, gn, it, trace, notes = _minimize(md, X, tol, max_iter, ball=r, check_coercive=check)
    conv = gn <= tol and md.hnorm(X) < r
    return SolveResult(StatePair.from_array(grid, X), E, gn, it, _positivity(X),
                       "local_min_ball", bool(conv), tol, trace, notes)


def _nehari_projector(grid, p, ptol):
    def proj(Y):
        return project_to_nehari(StatePair.from_array(grid, Y), p, tol=ptol).projected.array()
    return proj


def nehari_seed(p, grid, u_single=None, eps=None, r_cut=None):
    """Projected (u_single, bubble) pair, or (sqrt(k) v, sqrt(l) v) when beta > beta2."""
    from .bubbles import bubble_field

    if r_cut is None:
        r_cut = grid.radius / 4
    if eps is None:
        eps = r_cut / 4
    v = bubble_field(eps, grid, r_cut)
    b2 = None
    if p.beta > max(p.mu1, p.mu2):
        try:
            b2 = P.beta2_threshold(p)
        except NumericError:
            b2 = None
    if b2 is not None and p.beta > b2:
        k, l = P.solve_kl(p.mu1, p.mu2, p.beta)
        s = StatePair(v * math.sqrt(k), v * math.sqrt(l))
    else:
        if u_single is None:
            u_single = solve_single(p.lambda1, p.mu1, p.theta1, "nehari_min", grid=grid).state
        s = StatePair(u_single, v)
    return project_to_nehari(s, p).projected


def minimize_on_nehari(p, init=None, tol=1e-8, grid=None, max_iter=5000, ptol=1e-12):
    if init is None:
        if grid is None:
            raise PreconditionError("need an initial state or a grid")
        init = nehari_seed(p, grid)
    grid = init.grid
    md = Model.system(grid, p)
    proj = _nehari_projector(grid, p, ptol)
    X = proj(init.array())
    E0 = md.energy(X)
    X, E, gn, it, trace, notes = _minimize(md, X, tol, max_iter, project=proj)
    s = StatePair.from_array(grid, X)
    res = nehari_residuals(s, p)
    if E > E0:
        notes.append("final energy above the projected seed")
    if p.beta < 0:
        notes.append(f"q_certificate={q_certificate(s, p)}")
    conv = gn <= tol and max(relative_residuals(s, p)) <= 1e-10
    return SolveResult(s, E, gn, it, _positivity(X), "nehari_min", bool(conv), tol, trace, notes)


def _arclength(md, path):
    d = [md.hnorm(path[i + 1] - path[i]) for i in range(len(path) - 1)]
    if min(d) < 1e-12:
        raise NumericError(f"path collapse: adjacent samples {min(d):.3e} apart")
    return np.concatenate([[0.0], np.cumsum(d)])


def _point_at(path, s, t):
    j = int(np.clip(np.searchsorted(s, t, side="right") - 1, 0, len(path) - 2))
    w = (t - s[j]) / (s[j + 1] - s[j])
    return (1.0 - w) * path[j] + w * path[j + 1]


def _reparametrize(md, path, peak=None):
    """Resample the polyline at equal arclength.

    With peak = (segment, fraction) the point of largest energy becomes a
    sample, and each side of it is resampled at equal arclength.
    """
    s = _arclength(md, path)
    N = len(path) - 1
    sp = None if peak is None else s[peak[0]] + peak[1] * (s[peak[0] + 1] - s[peak[0]])
    if sp is None or not 0.0 < sp < s[-1]:
        target = np.linspace(0.0, s[-1], N + 1)
    else:
        k = int(np.clip(round(sp / s[-1] * N), 1, N - 1))
        target = np.concatenate([np.linspace(0.0, sp, k + 1),
                                 np.linspace(sp, s[-1], N - k + 1)[1:]])
    return [path[0]] + [_point_at(path, s, t) for t in target[1:-1]] + [path[-1]]


def _dense_max(md, path, E, sub, refine=3):
    """Largest energy over the polyline and where it sits, as (value, (segment, fraction)).

    Each segment is sampled at sub points. The energy along a segment can be
    sharply peaked, so the best few segments are then maximized with a
    bounded scalar search around their best sample.
    """
    ts = np.arange(0, sub + 1) / sub
    cand = []
    for i in range(len(path) - 1):
        vals = [E[i]] + [md.energy((1.0 - t) * path[i] + t * path[i + 1]) for t in ts[1:-1]] + [E[i + 1]]
        j = int(np.argmax(vals))
        cand.append((vals[j], i, j))
    cand.sort(reverse=True)
    best = (cand[0][0], (cand[0][1], ts[cand[0][2]]))
    for v0, i, j in cand[:refine]:
        f = lambda t, i=i: -md.energy((1.0 - t) * path[i] + t * path[i + 1])
        lo, hi = ts[max(j - 1, 0)], ts[min(j + 1, sub)]
        res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-6 / sub})
        if -res.fun > best[0]:
            best = (-res.fun, (i, float(res.x)))
    return best


def _string(md, path, tol, max_iter, sub=8):
    """String deformation whose polyline maximum never increases.

    Stops when the perpendicular gradient at the highest sample is below tol
    (relative), or when no step size keeps the maximum from rising.

    Interior samples take perpendicular Sobolev-gradient steps, each capped at
    a quarter of the sample spacing, then the path is reparametrized by
    arclength. Samples already below both end points are frozen so the tail
    cannot run off towards minus infinity. A step is accepted only if the
    maximum over the densely sampled polyline does not go up.
    """
    path = [np.array(X, dtype=float) for X in path]
    E = [md.energy(X) for X in path]
    floor = min(E[0], E[-1])
    top, peak = _dense_max(md, path, E, sub)
    path = _reparametrize(md, path, peak)
    E = [md.energy(X) for X in path]
    top, peak = _dense_max(md, path, E, sub)
    history = [top]
    alpha = 0.1
    gmax = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        spacing = min(md.hnorm(path[i + 1] - path[i]) for i in range(len(path) - 1))
        if spacing < 1e-12:
            raise NumericError(f"path collapse: adjacent samples {spacing:.3e} apart")
        steps = []
        gmax = 0.0
        k = int(np.argmax(E))
        for i in range(1, len(path) - 1):
            if E[i] < floor:
                steps.append(np.zeros_like(path[i]))
                continue
            tau = path[i + 1] - path[i - 1]
            tau = tau / md.hnorm(tau)
            G = md.gradient(path[i])
            Gp = G - md.hinner(G, tau) * tau
            gp = md.hnorm(Gp)
            if i == k:
                gmax = gp / max(md.hnorm(path[i]), 1e-300)
            steps.append(Gp * min(1.0, 0.25 * spacing / max(alpha * gp, 1e-300)))
        if gmax <= tol:
            break
        while True:
            moved = [path[0]] + [X - alpha * D for X, D in zip(path[1:-1], steps)] + [path[-1]]
            Em = [md.energy(X) for X in moved]
            if all(np.isfinite(Em)) and max(Em) <= history[-1]:
                top, peak = _dense_max(md, moved, Em, sub)
                if top <= history[-1]:
                    try:
                        cand = _reparametrize(md, moved, peak)
                        Ec = [md.energy(X) for X in cand]
                        tc, _ = _dense_max(md, cand, Ec, sub)
                        if tc <= history[-1]:
                            moved, Em, top = cand, Ec, tc
                    except NumericError:
                        pass
                    break
            alpha *= 0.5
            if alpha < 1e-12:
                return path, E, history, gmax, it
        path, E = moved, Em
        history.append(top)
        alpha = min(1.5 * alpha, 1.0)
    return path, E, history, gmax, it


def _mountain_pass(md, A, B, segments, tol, max_iter):
    if segments < 2:
        raise PreconditionError("need at least two segments")
    Ea, Eb = md.energy(A), md.energy(B)
    if not Eb < Ea:
        raise PreconditionError("end_b must have lower energy than end_a")
    ts = np.linspace(0.0, 1.0, segments + 1)
    path = [(1 - t) * A + t * B for t in ts]
    if max(md.energy(X) for X in path[1:-1]) <= Ea:
        raise NumericError("no mountain: the straight path never rises above end_a")
    path, E, history, gmax, it = _string(md, path, tol, max_iter)
    ps = PathState(md.grid, path, E, history, gmax, it)
    return ps, ps.level


def mountain_pass(p, end_a, end_b, segments=24, tol=1e-4, max_iter=3000):
    """Deform the straight path from end_a to end_b; returns (PathState, level).

    level is the largest sampled energy, an upper bound for the minimax level
    over paths through the samples' neighbourhood.
    """
    md = Model.system(end_a.grid, p)
    return _mountain_pass(md, end_a.array(), end_b.array(), segments, tol, max_iter)


def refine_saddle(path, p=None, tol=1e-8, single=None):
    """Newton from the highest sample; returns a SolveResult for the critical point."""
    md = Model.system(path.grid, p) if single is None else Model.single(path.grid, *single)
    X = path.arrays[path.max_index]
    gn0 = md.rel_gradient_norm(X)
    notes = []
    try:
        X, gn, its = _newton_polish(md, X, tol, max_iter=60, reach=0.5)
    except NumericError as exc:
        gn, its = gn0, 0
        notes.append(f"saddle refinement failed: {exc}")
    E = md.energy(X)
    return SolveResult(_wrap(path.grid, X), E, gn, its, _positivity(X), "mountain_pass",
                       bool(gn <= tol), tol, [(0, path.max_energy, gn0), (its, E, gn)], notes)


# -------------------------------------------------------------- single equation

def single_rho(lam, mu, theta, dc):
    sm = P.sigma_margins(lam, mu, theta, dc)
    S, L1 = dc.sobolev_S, dc.lambda1_omega
    if sm["Sigma3"] is not None and sm["Sigma3"] > 0:
        return math.sqrt((L1 - lam) / (L1 * mu)) * S
    if sm["Sigma4"] is not None and sm["Sigma4"] > 0:
        return S / math.sqrt(mu)
    raise PreconditionError("single-equation local minimum needs Sigma3 or Sigma4")


def solve_single(lam, mu, theta, mode, init=None, tol=1e-8, grid=None, dc=None,
                 max_iter=5000, segments=24):
    if init is not None:
        grid = init.grid
    if grid is None:
        raise PreconditionError("need an initial field or a grid")
    if dc is None:
        dc = P.ball_geometry(grid.radius)
    md = Model.single(grid, lam, mu, theta)
    if mode == "local_min":
        if theta >= 0:
            raise PreconditionError("local_min needs theta < 0")
        r = 0.99 * single_rho(lam, mu, theta, dc)
        X = _negative_seed(md, r) if init is None else init.values[None, :]
        X, E, gn, it, trace, notes = _minimize(md, X, tol, max_iter, ball=r, check_coercive=True)
        conv = gn <= tol and md.hnorm(X) < r
    elif mode == "nehari_min":
        if theta <= 0:
            raise PreconditionError("nehari_min needs theta > 0")
        if init is None:
            _, init = principal_eigenpair(grid)

        def proj(Y):
            return project_single(RadialField(grid, Y[0]), lam, mu, theta, tol=1e-12)[1].values[None, :]
        X = proj(init.values[None, :])
        X, E, gn, it, trace, notes = _minimize(md, X, tol, max_iter, project=proj)
        conv = gn <= tol
    elif mode == "mountain_pass":
        if theta < 0:
            lm = solve_single(lam, mu, theta, "local_min", grid=grid, dc=dc, tol=tol)
            A = lm.state.values[None, :]
        else:
            A = np.zeros((1, grid.n))
        Ea = md.energy(A)
        if init is None:
            _, init = principal_eigenpair(grid)
        B = init.values[None, :]
        t = 1.0
        while md.energy(A + t * B) >= Ea:
            t *= 2.0
            if t > 1e12:
                raise NumericError("no end point below the start energy")
        path, level = _mountain_pass(md, A, A + t * B, segments, 1e-4, max_iter)
        if theta > 0:
            # each ray crosses the Nehari set once, so its minimum is the saddle
            top = RadialField(grid, path.arrays[path.max_index][0])
            r = solve_single(lam, mu, theta, "nehari_min", init=top, tol=tol, dc=dc)
        else:
            r = refine_saddle(path, tol=tol, single=(lam, mu, theta))
        r.notes.append(f"path level {level:.17g}")
        r.classification = "single"
        return r
    else:
        raise PreconditionError(f"unknown mode {mode!r}")
    return SolveResult(RadialField(grid, X[0]), E, gn, it, _positivity(X), "single",
                       bool(conv), tol, trace, notes)


# -------------------------------------------------------------- audit

def escape_probe(s, p, component, bumps=(1e-2, 1e-3, 1e-4, 1e-5)):
    """Energy change from adding t e1 to a vanishing component, for small t."""
    md = Model.system(s.grid, p)
    X = s.array()
    _, e1 = principal_eigenpair(s.grid)
    E0 = md.energy(X)
    out = []
    for t in bumps:
        Y = X.copy()
        Y[component - 1] = Y[component - 1] + t * e1.values
        out.append((t, md.energy(Y) - E0))
    return out


def residual_certificate(r, p=None, dc=None):
    """Strong residuals, positivity, identities and, for systems, certificate data."""
    X = r.array()
    grid = r.state.grid
    if X.shape[0] == 2:
        md = Model.system(grid, p)
    else:
        if p is None:
            raise PreconditionError("single-equation certificates need (lam, mu, theta)")
        md = Model.single(grid, *p)
    rep = {"strong_residual": strong_residuals(md, X),
           "gradient_norm": md.rel_gradient_norm(X),
           "positivity": _positivity(X),
           "tol": r.tol}
    rep["strong_ok"] = bool(max(rep["strong_residual"]) <= 10 * r.tol)
    if X.shape[0] == 2:
        s = r.state
        lq, rq = identity_quarter(s, p)
        l1, r1 = identity_half(s, p)
        rep["identity_quarter"] = abs(lq - rq) / max(abs(lq), abs(rq), 1e-300)
        rep["identity_half"] = abs(l1 - r1) / max(abs(l1), abs(r1), 1e-300)
        rep["q_certificate"] = q_certificate(s, p)
        rep["nehari_residuals"] = list(nehari_residuals(s, p))
        if dc is None:
            dc = P.ball_geometry(p.radius)
        rep["lower_bounds"] = energy_lower_bounds(s, p, dc)
        for i in (1, 2):
            if np.max(np.abs(X[i - 1])) < 1e-12:
                rep[f"escape_probe_{i}"] = escape_probe(s, p, i)
    rep["coercivity_gap"] = coercivity_gap(md, X)
    return rep
