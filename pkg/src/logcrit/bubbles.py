"""Cut-off Aubin-Talenti bubbles, their integrals, and energy-gap reports.

The bubble is U(r) = 2 sqrt(2) eps / (eps^2 + r^2) times a cutoff that is 1
on [0, r_cut], 0 beyond 2 r_cut, with a quintic smoothstep in between.
"""
import csv
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from . import params as P
from .errors import DomainError, NumericError, PreconditionError
from .functionals import Model, StatePair, energy_L
from .nehari import project_to_nehari
from .radial import OMEGA4, RadialField, principal_eigenpair


def _smoothstep(x):
    # quintic, C^2 at both ends
    x = np.clip(x, 0.0, 1.0)
    return x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)


def cutoff(r, r_cut):
    if math.isinf(r_cut):
        return np.ones_like(r)
    return 1.0 - _smoothstep((r - r_cut) / r_cut)


def bubble_profile(r, eps):
    return 2.0 * math.sqrt(2.0) * eps / (eps * eps + r * r)


def bubble_field(eps, grid, r_cut):
    if not 0 < eps < r_cut:
        raise DomainError(f"need 0 < eps < r_cut, got eps={eps}, r_cut={r_cut}")
    if not math.isinf(r_cut) and 2 * r_cut > grid.radius * (1 + 1e-12):
        raise DomainError(f"cutoff support 2*r_cut={2 * r_cut} exceeds the radius {grid.radius}")
    r = grid.nodes
    return RadialField(grid, cutoff(r, r_cut) * bubble_profile(r, eps))


@dataclass(frozen=True)
class BubbleIntegrals:
    eps: float
    grad2: float
    l4: float
    l2: float
    l2log: float
    cutoff_inner: float
    cutoff_outer: float

    def to_dict(self):
        return asdict(self)


def bubble_integrals(eps, grid, r_cut):
    v = bubble_field(eps, grid, r_cut)
    md = Model.single(grid, 0.0, 0.0, 0.0)
    grad, l2, l4, ll, _ = md.moments(v.values[None, :])
    return BubbleIntegrals(float(eps), grad[0], l4[0], l2[0], ll[0], float(r_cut), 2.0 * float(r_cut))


def sobolev_quotient_sq(grid, eps, r_cut):
    """(int |grad v|^2)^2 / int v^4 for the cut-off bubble; never below S^2."""
    b = bubble_integrals(eps, grid, r_cut)
    return b.grad2 ** 2 / b.l4


def l2_leading(eps):
    return 8.0 * OMEGA4 * eps * eps * abs(math.log(eps))


def l2log_brackets(eps, r_cut):
    """Leading terms of the lower and upper bounds for int v^2 log v^2."""
    e2, R2 = eps * eps, r_cut * r_cut
    base = 8.0 * OMEGA4 * e2 * math.log(1.0 / eps)
    lower = math.log(8.0 * (e2 + R2) / (math.e * (e2 + 4 * R2) ** 2)) * base
    upper = math.log(8.0 * math.e * (e2 + 4 * R2) / (e2 + R2) ** 2) * base
    return lower, upper


def l2log_leading(eps, r_cut):
    # sharp leading term, sits between the two brackets
    return 8.0 * OMEGA4 * eps * eps * abs(math.log(eps)) * math.log(8.0 / (r_cut * r_cut))


def asymptotics_table(eps_list, grid, r_cut):
    """One row per eps with ratios and bracket checks.

    The O(eps^2) slack for the log-moment brackets is C eps^2, with C the
    largest |l2log - sharp leading term| / eps^2 over the two smallest eps.
    """
    S2 = P.sobolev_constant() ** 2
    rows, notes = [], []
    for eps in eps_list:
        try:
            b = bubble_integrals(eps, grid, r_cut)
        except DomainError as exc:
            notes.append(f"eps={eps!r} skipped: {exc}")
            continue
        lo, hi = l2log_brackets(eps, r_cut)
        rows.append({"eps": b.eps, "grad2": b.grad2, "l4": b.l4, "l2": b.l2, "l2log": b.l2log,
                     "grad2_ratio": b.grad2 / S2, "l4_ratio": b.l4 / S2,
                     "l2_ratio": b.l2 / l2_leading(eps), "bracket_lower": lo, "bracket_upper": hi})
    if rows:
        small = sorted(rows, key=lambda r: r["eps"])[:2]
        C = max(abs(r["l2log"] - l2log_leading(r["eps"], r_cut)) / r["eps"] ** 2 for r in small)
        for r in rows:
            slack = C * r["eps"] ** 2
            r["slack"] = slack
            r["bracket_ok"] = bool(r["bracket_lower"] - slack <= r["l2log"] <= r["bracket_upper"] + slack)
    return rows, notes


TABLE_COLUMNS = ["eps", "grad2", "l4", "l2", "l2log", "grad2_ratio", "l4_ratio", "l2_ratio",
                 "bracket_lower", "bracket_upper", "slack", "bracket_ok"]


def write_table(fh, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in TABLE_COLUMNS])


def _fmt(x):
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        return f"{x:.17g}"
    return "" if x is None else str(x)


# ---------------------------------------------------------------- gap reports

def gap_report_prop26(p, eps_list, grid, u_single=None, c_theta1=None, c_theta2=None, r_cut=None):
    """Upper bound for the Nehari level from projected (u_single, bubble) pairs."""
    if not (p.theta1 > 0 and p.theta2 > 0):
        raise PreconditionError("needs theta1, theta2 > 0")
    from .solvers import solve_single

    S2 = P.sobolev_constant() ** 2
    if r_cut is None:
        r_cut = grid.radius / 4
    if u_single is None or c_theta1 is None:
        r1 = solve_single(p.lambda1, p.mu1, p.theta1, "nehari_min", grid=grid)
        u_single, c_theta1 = r1.state, r1.energy
    if c_theta2 is None:
        c_theta2 = solve_single(p.lambda2, p.mu2, p.theta2, "nehari_min", grid=grid).energy
    md = Model.system(grid, p)
    inside = grid.nodes <= 2 * r_cut
    pi2 = float(np.max(u_single.values[inside] ** 2))
    rows, notes = [], []
    for eps in eps_list:
        try:
            v = bubble_field(eps, grid, r_cut)
            pr = project_to_nehari(StatePair(u_single, v), p)
        except (DomainError, NumericError, PreconditionError) as exc:
            notes.append(f"eps={eps!r} skipped: {exc}")
            continue
        X = np.vstack([u_single.values, v.values])
        _, l2, _, _, cross = md.moments(X)
        rows.append({"eps": float(eps), "energy": energy_L(pr.projected, p).total,
                     "s1": pr.t1, "s2": pr.t2,
                     "s1_sq_in_range": bool(0.5 <= pr.t1 ** 2 <= 2.0),
                     "s2_sq_in_range": bool(0.5 / p.mu2 <= pr.t2 ** 2 <= 2.0 / p.mu2),
                     "beta_term": abs(p.beta) * cross, "theta2_half_l2": 0.5 * p.theta2 * l2[1],
                     "beta_term_small": bool(abs(p.beta) * cross <= 0.5 * p.theta2 * l2[1])})
    targets = {"C_theta1_plus": c_theta1 + 0.25 * S2 / p.mu2,
               "C_theta2_plus": c_theta2 + 0.25 * S2 / p.mu1,
               "A_sum": 0.25 * (1 / p.mu1 + 1 / p.mu2) * S2}
    best = min((r["energy"] for r in rows), default=math.inf)
    return {"rows": rows, "notes": notes, "upper_bound": best, "targets": targets,
            "strict_gap": bool(best < min(targets.values())),
            "Pi_sq": pi2, "Pi_condition": bool(p.beta == 0 or pi2 <= p.theta2 / (2 * abs(p.beta))),
            "C_theta_surrogates": {"C_theta1": c_theta1, "C_theta2": c_theta2,
                                   "label": "numerical upper bound for C_theta_i"}}


def quartic_surrogate(k, l, mu1, mu2, beta):
    """g(t1, t2) = (t1^2 k + t2^2 l)/2 - (mu1 k^2 t1^4 + 2 beta k l t1^2 t2^2 + mu2 l^2 t2^4)/4."""
    def g(t1, t2):
        return (0.5 * (t1 * t1 * k + t2 * t2 * l)
                - 0.25 * (mu1 * k * k * t1 ** 4 + 2 * beta * k * l * (t1 * t2) ** 2
                          + mu2 * l * l * t2 ** 4))
    return g


def quartic_maximizer(k, l, mu1, mu2, beta):
    g = quartic_surrogate(k, l, mu1, mu2, beta)
    res = minimize(lambda x: -g(math.exp(x[0]), math.exp(x[1])), [0.3, -0.3],
                   method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
    return math.exp(res.x[0]), math.exp(res.x[1])


def _max_on_rays(md, W, Z, variant):
    """max over (t1, t2) > 0 of L(t1 W, t2 Z), or over one t for the ray variant."""
    def F(a, b):
        return md.energy(np.vstack([math.exp(a) * W, math.exp(b) * Z]))
    if variant == "ray":
        res = minimize_scalar(lambda a: -F(a, a), bounds=(-5.0, 5.0), method="bounded",
                              options={"xatol": 1e-12})
        return -res.fun, (math.exp(res.x), math.exp(res.x))
    res = minimize(lambda x: -F(x[0], x[1]), [0.0, 0.0], method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000})
    return -res.fun, (math.exp(res.x[0]), math.exp(res.x[1]))


def gap_report_prop28(p, eps_list, grid, r_cut=None, variant="pair"):
    """Energy of (t1 sqrt(k) v, t2 sqrt(l) v) maximized over the scalings, against A.

    variant="pair" maximizes over (t1, t2); variant="ray" over a common t and
    additionally checks the radius gate of the positive-beta case.
    """
    lo, hi = min(p.mu1, p.mu2), max(p.mu1, p.mu2)
    if not (0 < p.beta < lo or p.beta > hi):
        raise PreconditionError("needs 0 < beta < min mu or beta > max mu")
    if variant == "pair" and p.beta > hi:
        raise PreconditionError("the two-scaling comparison needs 0 < beta < min mu; use variant='ray'")
    if variant not in ("pair", "ray"):
        raise DomainError(f"unknown variant {variant!r}")
    if r_cut is None:
        r_cut = grid.radius / 2 if variant == "ray" else grid.radius / 4
    k, l = P.solve_kl(p.mu1, p.mu2, p.beta)
    A = P.limit_level_A(p)
    md = Model.system(grid, p)
    rows, notes = [], []
    for eps in eps_list:
        try:
            v = bubble_field(eps, grid, r_cut).values
        except DomainError as exc:
            notes.append(f"eps={eps!r} skipped: {exc}")
            continue
        top, (t1, t2) = _max_on_rays(md, math.sqrt(k) * v, math.sqrt(l) * v, variant)
        rows.append({"eps": float(eps), "max_energy": top, "t1": t1, "t2": t2})
    best = min((r["max_energy"] for r in rows), default=math.inf)
    out = {"rows": rows, "notes": notes, "k": k, "l": l, "A": A, "upper_bound": best,
           "below_A": bool(best < A), "variant": variant,
           "quartic_maximizer": quartic_maximizer(k, l, p.mu1, p.mu2, p.beta)}
    if p.theta1 > 0 and p.theta2 > 0 and p.beta > max(p.mu1, p.mu2):
        lc = P.lambda_cap(p)
        out["Lambda"] = lc
        out["Lambda_exceeds_k_plus_l"] = bool(lc > k + l)
    if variant == "ray":
        out["rmax_gate"] = P.rmax_gate(p)
    return out


# ------------------------------------------------------------ geometry checks

def ray_escape(p, grid, threshold=-1e6, max_doublings=80):
    """Double t until L(t e1, t e1) < threshold; returns (t, energy)."""
    md = Model.system(grid, p)
    _, e1 = principal_eigenpair(grid)
    X = np.vstack([e1.values, e1.values])
    t = 1.0
    for _ in range(max_doublings):
        E = md.energy(t * X)
        if E < threshold:
            return t, E
        t *= 2.0
    raise NumericError("energy along the ray did not fall below the threshold")


def sphere_radius(p):
    """(zeta, alpha) from the lower bound L >= |X|^2/2 - C |X|^4 (theta_i > 0)."""
    if not (p.theta1 > 0 and p.theta2 > 0):
        raise PreconditionError("needs theta1, theta2 > 0")
    S2 = P.sobolev_constant() ** 2
    b = max(p.beta, 0.0)
    C = max((mu + b) / 4 + 0.5 * th * math.exp(lam / th - 1.0)
            for lam, mu, th in (p.component(1), p.component(2))) / S2
    return 0.5 / math.sqrt(C), 1.0 / (16.0 * C)


def sphere_check(p, grid, samples=200, seed=0):
    """Smallest energy over random directions on the sphere of radius zeta."""
    zeta, alpha = sphere_radius(p)
    md = Model.system(grid, p)
    rng = np.random.default_rng(seed)
    r = grid.nodes / grid.radius
    basis = np.array([np.cos((j + 0.5) * np.pi * r) for j in range(12)])
    worst = math.inf
    for _ in range(samples):
        X = rng.normal(size=(2, basis.shape[0])) @ basis
        if rng.random() < 0.5:
            X = np.abs(X)
        X *= zeta / md.hnorm(X)
        worst = min(worst, md.energy(X))
    return {"zeta": zeta, "alpha": alpha, "min_energy": worst, "holds": bool(worst >= alpha)}
