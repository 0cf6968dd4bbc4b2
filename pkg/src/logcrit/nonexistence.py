"""Closed-form nonexistence conditions and a numerical falsification battery.

Both conditions come from pointwise lower bounds on the reaction: if
g(u^2) >= lambda_1(Omega) everywhere with the right strictness, testing the
equation against the principal eigenfunction rules out positive solutions.
The battery only corroborates that; it proves nothing.
"""
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from . import params as P
from . import solvers
from .errors import NumericError, PreconditionError
from .functionals import Model, StatePair
from .radial import fields_to_csv, make_grid

POSITIVE = solvers.POSITIVE


@dataclass
class NonexistenceVerdict:
    theorem: str
    condition_holds: bool
    margin: float
    probe_summary: dict = field(default_factory=dict)
    oracle_margin: float = None
    mirrored: bool = False

    def to_dict(self):
        return {"theorem": self.theorem, "condition_holds": self.condition_holds,
                "margin": self.margin, "oracle_margin": self.oracle_margin,
                "mirrored": self.mirrored, "probe_summary": dict(self.probe_summary)}


def _log_grid_min(f, lo=-40.0, hi=40.0, n=4001):
    """Minimum of f(exp(x)) from a log grid, polished on the bracketing cell."""
    xs = np.linspace(lo, hi, n)
    vals = np.array([f(math.exp(x)) for x in xs])
    i = int(np.argmin(vals))
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, n - 1)]
    res = minimize_scalar(lambda x: f(math.exp(x)), bounds=(a, b), method="bounded",
                          options={"xatol": 1e-13})
    return min(float(res.fun), float(vals[i]))


def t16_g(lam, mu, theta):
    return lambda t: mu * t + theta * math.log(t) + lam


def theorem16_condition(lam, mu, theta, dc):
    """margin = |theta| + theta log|theta| - theta log mu + lam - lambda_1(Omega) >= 0."""
    if not theta < 0:
        raise PreconditionError("needs theta < 0")
    if not mu > 0:
        raise PreconditionError("needs mu > 0")
    margin = P.t16_margin(lam, mu, theta, dc)
    oracle = _log_grid_min(t16_g(lam, mu, theta)) - dc.lambda1_omega
    return NonexistenceVerdict("T16", bool(margin >= 0), margin, {}, oracle)


def t17_g(p):
    return lambda s, t: ((p.mu2 - p.beta) * s - (p.mu1 - p.beta) * t
                         + p.theta2 * math.log(s) - p.theta1 * math.log(t))


def theorem17_condition(p, mirrored=False):
    """Strict condition; mirrored=True uses the version with the roles of the components swapped."""
    q = p.swapped() if mirrored else p
    if not (q.mu1 < q.mu2 and q.mu1 < q.beta < q.mu2):
        raise PreconditionError("needs mu1 < beta < mu2" if not mirrored
                                else "mirrored variant needs mu2 < beta < mu1")
    if not (q.theta2 < 0 < q.theta1):
        raise PreconditionError("needs theta2 < 0 < theta1" if not mirrored
                                else "mirrored variant needs theta1 < 0 < theta2")
    margin = P.t17_margin(p, mirrored=mirrored)
    g = t17_g(q)
    # coarse 2-D log grid, then a local polish
    xs = np.linspace(-20.0, 20.0, 201)
    E, F = np.meshgrid(np.exp(xs), np.exp(xs), indexing="ij")
    vals = ((q.mu2 - q.beta) * E - (q.mu1 - q.beta) * F
            + q.theta2 * np.log(E) - q.theta1 * np.log(F))
    i, j = np.unravel_index(np.argmin(vals), vals.shape)
    res = minimize(lambda x: g(math.exp(x[0]), math.exp(x[1])), [xs[i], xs[j]],
                   method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
    oracle = min(float(res.fun), float(vals[i, j])) + q.lambda2 - q.lambda1
    return NonexistenceVerdict("T17", bool(margin > 0), margin, {}, oracle, mirrored)


# ------------------------------------------------------------------ battery

def _random_pair(grid, rng, norm, md):
    r = grid.nodes / grid.radius
    modes = np.array([np.cos((j + 0.5) * np.pi * r) for j in range(6)])
    X = np.abs(rng.normal(size=(2, 6)) * (1.0 / (1.0 + np.arange(6))) @ modes)
    return X * (norm / md.hnorm(X))


def _attempt(args):
    p, radius, n, rho, seed, k = args
    grid = make_grid(radius, n)
    rng = np.random.default_rng(seed)
    md = Model.system(grid, p)
    X = _random_pair(grid, rng, rng.uniform(0.05, 0.9) * 0.99 * rho, md)
    try:
        if k % 2 == 0:
            r = solvers.minimize_local_ball(p, StatePair.from_array(grid, X), rho=rho,
                                            tol=1e-8, max_iter=1500)
        else:
            low = solvers.minimize_local_ball(p, StatePair.from_array(grid, 0.1 * X), rho=rho,
                                              tol=1e-8, max_iter=1500)
            A = low.array()
            Ea = md.energy(A)
            t = 1.0
            while md.energy(t * X) >= Ea:
                t *= 2.0
                if t > 1e12:
                    raise NumericError("random direction never reaches negative energy")
            path, _ = solvers.mountain_pass(p, StatePair.from_array(grid, A),
                                            StatePair.from_array(grid, t * X),
                                            segments=12, tol=1e-4, max_iter=400)
            r = solvers.refine_saddle(path, p, tol=1e-8)
    except (NumericError, PreconditionError) as exc:
        return {"seed_index": k, "pipeline": "local_ball" if k % 2 == 0 else "mountain_pass",
                "hit": False, "error": str(exc)}
    pos = r.positivity
    hit = bool(r.converged and pos["u_min_interior"] > POSITIVE and pos["v_min_interior"] > POSITIVE)
    out = {"seed_index": k, "pipeline": r.classification, "hit": hit, "energy": r.energy,
           "converged": r.converged, "gradient_norm": r.gradient_norm, "positivity": pos}
    if hit:
        out["certificate"] = solvers.residual_certificate(r, p)
        out["state"] = r.array()
    return out


def falsification_battery(p, restarts, seed=0, radius=None, n=128, rho=None, workers=1):
    """Randomized local-ball and mountain-pass attempts; counts positive critical points.

    Even restarts run the local-ball minimizer, odd ones a short mountain pass
    from the local-ball state followed by Newton refinement. A hit is a converged state whose
    interior minima both exceed 1e-8.
    """
    if restarts == 0:
        return {"restarts": 0, "positive_hits": 0, "attempts": [], "hits": []}
    radius = p.radius if radius is None else radius
    if rho is None:
        dc = P.ball_geometry(radius)
        try:
            rho = P.rho_delta(p, dc)[0]
        except PreconditionError:
            rho = dc.sobolev_S / math.sqrt(max(p.mu1, p.mu2))
    seeds = np.random.SeedSequence(seed).generate_state(restarts)
    jobs = [(p, radius, n, rho, int(s), k) for k, s in enumerate(seeds)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            attempts = list(ex.map(_attempt, jobs))
    else:
        attempts = [_attempt(j) for j in jobs]
    hits = [a for a in attempts if a["hit"]]
    summary = [{k: v for k, v in a.items() if k not in ("state", "certificate")} for a in attempts]
    return {"restarts": restarts, "positive_hits": len(hits), "attempts": summary, "hits": hits,
            "grid": {"radius": radius, "n": n}, "rho": rho}


def write_hits_csv(fh, report):
    """One u and v column per positive hit, on the battery grid."""
    if not report["hits"]:
        fh.write("r\n")
        return
    grid = make_grid(report["grid"]["radius"], report["grid"]["n"])
    cols = {}
    for h in report["hits"]:
        cols[f"u_{h['seed_index']}"] = h["state"][0]
        cols[f"v_{h['seed_index']}"] = h["state"][1]
    fields_to_csv(fh, grid, **cols)


def verdict_with_battery(verdict, p, restarts, **kw):
    rep = falsification_battery(p, restarts, **kw)
    verdict.probe_summary = {"restarts": rep["restarts"], "positive_hits": rep["positive_hits"]}
    return verdict, rep
