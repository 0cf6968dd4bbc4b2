"""Parameter sets, closed-form thresholds, region margins and theorem gates."""
import math
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.special import jn_zeros

from .errors import DomainError, NumericError, PreconditionError
from .radial import OMEGA4, make_grid, principal_eigenpair

DEFAULT_EIGEN_N = 512
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def sobolev_constant():
    """Best constant S of D^{1,2}(R^4) in L^4; S^2 = 32 pi^2 / 3."""
    return math.sqrt(32.0 * math.pi ** 2 / 3.0)


@dataclass(frozen=True)
class ParameterSet:
    lambda1: float
    mu1: float
    theta1: float
    lambda2: float
    mu2: float
    theta2: float
    beta: float
    radius: float = 1.0

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not math.isfinite(v):
                raise DomainError(f"{k} must be finite")
        if self.mu1 <= 0 or self.mu2 <= 0:
            raise DomainError("mu1 and mu2 must be positive")
        if self.beta == 0:
            raise DomainError("beta must be nonzero")
        if self.radius <= 0:
            raise DomainError("radius must be positive")

    def component(self, i):
        if i == 1:
            return self.lambda1, self.mu1, self.theta1
        if i == 2:
            return self.lambda2, self.mu2, self.theta2
        raise ValueError(i)

    def swapped(self):
        return ParameterSet(self.lambda2, self.mu2, self.theta2,
                            self.lambda1, self.mu1, self.theta1, self.beta, self.radius)

    def with_(self, **kw):
        return replace(self, **kw)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class DomainConstants:
    radius: float
    volume: float
    lambda1_omega: float
    sobolev_S: float
    omega4: float
    lambda1_bessel: float
    source: str


@dataclass(frozen=True)
class RegionLabel:
    region: str
    margin: float
    component: int | None = None

    def to_dict(self):
        return {"region": self.region, "margin": self.margin, "component": self.component}


@dataclass
class TheoremEntry:
    theorem: str
    hypotheses: dict
    note: str = ""

    def to_dict(self):
        return {"theorem": self.theorem, "hypotheses": self.hypotheses, "note": self.note}


@dataclass
class ClassificationReport:
    params: ParameterSet
    domain: DomainConstants
    regions: list
    applicable_theorems: list
    thresholds: dict
    notes: list = field(default_factory=list)

    def theorem_ids(self):
        return [t.theorem for t in self.applicable_theorems]

    def to_dict(self):
        return {
            "params": self.params.to_dict(),
            "domain": asdict(self.domain),
            "regions": [r.to_dict() for r in self.regions],
            "applicable_theorems": [t.to_dict() for t in self.applicable_theorems],
            "thresholds": self.thresholds,
            "notes": list(self.notes),
        }


# ---------------------------------------------------------------- geometry

@lru_cache(maxsize=64)
def _grid_eigenvalue(radius, n):
    return principal_eigenpair(make_grid(radius, n))[0]


def bessel_eigenvalue(radius):
    return float(jn_zeros(1, 1)[0]) ** 2 / radius ** 2


def ball_geometry(radius, n=None):
    """Constants of the 4-ball of the given radius.

    With n given, lambda1_omega is the eigenvalue of the discrete operator on
    that grid (so margins are consistent with solves on the same grid).
    Without n it is the Richardson extrapolation of the grid values at
    512 and 1024 nodes, accurate to about 1e-9.
    """
    if not radius > 0:
        raise DomainError(f"radius must be positive, got {radius}")
    radius = float(radius)
    if n is None:
        a = _grid_eigenvalue(radius, DEFAULT_EIGEN_N)
        b = _grid_eigenvalue(radius, 2 * DEFAULT_EIGEN_N)
        lam = (4.0 * b - a) / 3.0
        src = "richardson(512,1024)"
    else:
        lam = _grid_eigenvalue(radius, int(n))
        src = f"grid(n={int(n)})"
    return DomainConstants(
        radius=radius,
        volume=math.pi ** 2 * radius ** 4 / 2.0,
        lambda1_omega=lam,
        sobolev_S=sobolev_constant(),
        omega4=OMEGA4,
        lambda1_bessel=bessel_eigenvalue(radius),
        source=src,
    )


# -------------------------------------------------------------- thresholds

def lambda_cap(p):
    if p.theta1 <= 0 or p.theta2 <= 0:
        raise PreconditionError("Lambda needs theta1, theta2 > 0")
    vals = []
    for i in (1, 2):
        lam, mu, th = p.component(i)
        vals.append(mu / (mu + th * math.exp(lam / th - 1.0)) ** 2)
    return min(vals)


def beta1_threshold(p):
    mu1, mu2 = p.mu1, p.mu2
    s = 2.0 * math.sqrt(2.0 * (1.0 / mu1 + 1.0 / mu2))
    return min(mu1, mu2, math.sqrt(mu1) / s, math.sqrt(mu2) / s)


def beta2_from_cap(lam_cap, mu1, mu2):
    """Larger root of b^2 - (2/L) b + (mu1+mu2)/L - mu1 mu2."""
    a = 1.0 / lam_cap
    disc = a * a - (mu1 + mu2) * a + mu1 * mu2
    scale = a * a + mu1 * mu2
    if disc < 0:
        raise NumericError(f"beta2 quadratic has no real roots (discriminant {disc:.6g})")
    b2 = a + math.sqrt(disc)
    if disc <= 1e-14 * scale or not b2 > max(mu1, mu2):
        raise NumericError(
            f"degenerate beta2 = {b2:.17g}: double root or not above max(mu1, mu2)")
    return b2


def beta2_threshold(p):
    return beta2_from_cap(lambda_cap(p), p.mu1, p.mu2)


def solve_kl(mu1, mu2, beta):
    det = mu1 * mu2 - beta * beta
    if abs(det) <= 1e-14 * max(mu1 * mu2, beta * beta):
        raise NumericError("singular system: beta^2 = mu1 mu2")
    return (mu2 - beta) / det, (mu1 - beta) / det


def limit_level_A(p, dc=None):
    S2 = sobolev_constant() ** 2
    b, m1, m2 = p.beta, p.mu1, p.mu2
    if b < 0:
        return 0.25 * (1.0 / m1 + 1.0 / m2) * S2
    if (0 < b < min(m1, m2)) or b > max(m1, m2):
        k, l = solve_kl(m1, m2, b)
        return 0.25 * (k + l) * S2
    raise PreconditionError("limit level not available for beta between min and max of mu")


# ----------------------------------------------------------------- regions

def _e(lam, th):
    return math.exp(-lam / th)


def sigma_margins(lam, mu, th, dc):
    """Margins of the single-component sets; None where side conditions fail."""
    S2 = dc.sobolev_S ** 2
    L1, vol = dc.lambda1_omega, dc.volume
    out = {"Sigma1": th if th > 0 else None}
    if th < 0:
        out["Sigma2"] = abs(th) + th * math.log(abs(th)) - th * math.log(mu) + lam - L1
        out["Sigma4"] = S2 / mu + 2.0 * th * _e(lam, th) * vol
        if 0 <= lam < L1:
            out["Sigma3"] = (L1 - lam) ** 2 * S2 / (L1 ** 2 * mu) + 2.0 * th * vol
        else:
            out["Sigma3"] = None
    else:
        out.update(Sigma2=None, Sigma3=None, Sigma4=None)
    return out


def a_margins(lams, mus, thetas, dc):
    """Left-hand sides of the A1..A3 inequalities; None where side conditions fail."""
    (l1, l2), (m1, m2), (t1, t2) = lams, mus, thetas
    S2 = dc.sobolev_S ** 2
    L1, vol = dc.lambda1_omega, dc.volume
    mmax = max(m1, m2)
    out = {"A1": None, "A2": None, "A3": None}
    if not (t1 < 0 and t2 < 0 and m1 > 0 and m2 > 0):
        return out
    if 0 <= l1 < L1 and 0 <= l2 < L1:
        d = min(L1 - l1, L1 - l2)
        out["A1"] = d * d * S2 / (L1 * L1 * mmax) + 2.0 * (t1 + t2) * vol
    if 0 <= l1 < L1:
        out["A2"] = (L1 - l1) ** 2 * S2 / (L1 * L1 * mmax) + 2.0 * (t1 + t2 * _e(l2, t2)) * vol
    out["A3"] = S2 / mmax + 2.0 * (t1 * _e(l1, t1) + t2 * _e(l2, t2)) * vol
    return out


def _check_dc(p, dc):
    if not math.isclose(p.radius, dc.radius, rel_tol=1e-12):
        raise DomainError("domain constants do not match the parameter radius")


def region_membership(p, dc):
    _check_dc(p, dc)
    out = []
    for i in (1, 2):
        lam, mu, th = p.component(i)
        sm = sigma_margins(lam, mu, th, dc)
        for name in ("Sigma1", "Sigma2", "Sigma3", "Sigma4"):
            m = sm[name]
            if m is None:
                continue
            inside = m >= 0 if name == "Sigma2" else m > 0
            if inside:
                out.append(RegionLabel(name, m, i))
    am = a_margins((p.lambda1, p.lambda2), (p.mu1, p.mu2), (p.theta1, p.theta2), dc)
    for name in ("A1", "A2", "A3"):
        if am[name] is not None and am[name] > 0:
            out.append(RegionLabel(name, am[name]))
    return out


def _shifted_margin(p, dc, region, eps):
    am = a_margins((p.lambda1, p.lambda2), (p.mu1 + p.beta * eps, p.mu2 + p.beta / eps),
                   (p.theta1, p.theta2), dc)
    return am[region]


def epsilon_shift_search(p, dc, n_grid=121, window=(1e-6, 1e6), rtol=1e-10):
    """Find eps with the shifted tuple in A1, A2 or A3 (first region that works).

    Returns (eps, RegionLabel) or None.
    """
    if p.beta <= 0:
        raise PreconditionError("epsilon shift search needs beta > 0")
    _check_dc(p, dc)
    le = np.linspace(math.log(window[0]), math.log(window[1]), n_grid)
    for region in ("A1", "A2", "A3"):
        if _shifted_margin(p, dc, region, 1.0) is None:
            continue
        f = lambda x: _shifted_margin(p, dc, region, math.exp(x))
        vals = np.array([f(x) for x in le])
        j = int(np.argmax(vals))
        a = le[max(j - 1, 0)]
        b = le[min(j + 1, n_grid - 1)]
        x = _golden_max(f, a, b, rtol)
        best, m = (x, f(x)) if f(x) >= vals[j] else (le[j], vals[j])
        if m > 0:
            return float(math.exp(best)), RegionLabel(region, float(m))
    return None


def _golden_max(f, a, b, rtol):
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > rtol * max(1.0, abs(a) + abs(b)):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


# ---------------------------------------------------------- rho and delta

def rho_delta(p, dc, eps=None):
    """Radius and height of the mountain ring around the origin.

    For beta > 0 the critical coefficients are replaced by mu1 + beta eps and
    mu2 + beta/eps, with eps from epsilon_shift_search unless given.
    Returns (rho, delta, case) with case in {"A1", "A2", "A3"}.
    """
    _check_dc(p, dc)
    m1, m2 = p.mu1, p.mu2
    if p.beta > 0:
        if eps is None:
            hit = epsilon_shift_search(p, dc)
            if hit is None:
                raise PreconditionError("no eps places the shifted parameters in A1..A3")
            eps = hit[0]
        m1, m2 = m1 + p.beta * eps, m2 + p.beta / eps
    am = a_margins((p.lambda1, p.lambda2), (m1, m2), (p.theta1, p.theta2), dc)
    S, L1, vol = dc.sobolev_S, dc.lambda1_omega, dc.volume
    mmax = max(m1, m2)
    l1, l2, t1, t2 = p.lambda1, p.lambda2, p.theta1, p.theta2
    if am["A1"] is not None and am["A1"] > 0:
        d = min(L1 - l1, L1 - l2)
        rho = math.sqrt(d / (L1 * mmax)) * S
        delta = 0.25 * d * d * S * S / (L1 * L1 * mmax) + 0.5 * (t1 + t2) * vol
        return rho, delta, "A1"
    if am["A2"] is not None and am["A2"] > 0:
        d = L1 - l1
        rho = math.sqrt(d / (L1 * mmax)) * S
        delta = 0.25 * d * d * S * S / (L1 * L1 * mmax) + 0.5 * (t1 + t2 * _e(l2, t2)) * vol
        return rho, delta, "A2"
    if am["A3"] is not None and am["A3"] > 0:
        rho = S / math.sqrt(mmax)
        delta = 0.25 * S * S / mmax + 0.5 * (t1 * _e(l1, t1) + t2 * _e(l2, t2)) * vol
        return rho, delta, "A3"
    raise PreconditionError("parameters lie in none of A1, A2, A3")


# ------------------------------------------------------------ theorem gates

def default_beta0_cap(p):
    return 0.05 * math.sqrt(p.mu1 * p.mu2)


def rmax_gate(p):
    """Values of 32 e^{lam_i/theta_i} / (mu_i R^2); the gate wants both < 1."""
    out = []
    for i in (1, 2):
        lam, mu, th = p.component(i)
        if th >= 0:
            out.append(math.inf)
        else:
            out.append(32.0 * math.exp(lam / th) / (mu * p.radius ** 2))
    return out


def t16_margin(lam, mu, th, dc):
    return abs(th) + th * math.log(abs(th)) - th * math.log(mu) + lam - dc.lambda1_omega


def t17_margin(p, mirrored=False):
    q = p.swapped() if mirrored else p
    l1, m1, t1 = q.lambda1, q.mu1, q.theta1
    l2, m2, t2 = q.lambda2, q.mu2, q.theta2
    b = q.beta
    return (-t1 * math.log(t1 / (b - m1)) + t2 * math.log(t2 / (b - m2))
            + t1 - t2 + l2 - l1)


def t17_admissible(p, mirrored=False):
    q = p.swapped() if mirrored else p
    return q.mu1 < q.mu2 and q.mu1 < q.beta < q.mu2 and q.theta2 < 0 < q.theta1


def _thm12_hyp(p, dc):
    if p.beta < 0:
        am = a_margins((p.lambda1, p.lambda2), (p.mu1, p.mu2), (p.theta1, p.theta2), dc)
        hits = {k: v for k, v in am.items() if v is not None and v > 0}
        return hits, None
    hit = epsilon_shift_search(p, dc)
    if hit is None:
        return {}, None
    return {hit[1].region: hit[1].margin}, hit[0]


def classify(p, dc=None, beta0_cap=None):
    if dc is None:
        dc = ball_geometry(p.radius)
    _check_dc(p, dc)
    regions = region_membership(p, dc)
    notes = []
    thms = []
    th = {"beta1": beta1_threshold(p), "beta2": None, "Lambda": None, "k": None,
          "l": None, "A_level": None, "rho": None, "delta": None, "eps_shift": None}
    both_sigma1 = p.theta1 > 0 and p.theta2 > 0
    b = p.beta

    if both_sigma1:
        lc = lambda_cap(p)
        th["Lambda"] = lc
        try:
            th["beta2"] = beta2_from_cap(lc, p.mu1, p.mu2)
        except NumericError as exc:
            notes.append(f"beta2 unavailable: {exc}")
        cap = default_beta0_cap(p) if beta0_cap is None else beta0_cap
        if b < 0:
            if -b <= cap:
                thms.append(TheoremEntry("T1.1(1)", {"sigma1_both": True, "beta_negative": b,
                                                     "beta_abs_cap": cap},
                                         "beta<0, applicability window not computable"))
            else:
                notes.append(f"T1.1(1): |beta| exceeds the configured cap {cap:.17g}")
        if 0 < b < th["beta1"]:
            thms.append(TheoremEntry("T1.1(2)", {"sigma1_both": True,
                                                 "beta1_margin": th["beta1"] - b}))
        if th["beta2"] is not None and b > th["beta2"]:
            thms.append(TheoremEntry("T1.1(3)", {"sigma1_both": True,
                                                 "beta2_margin": b - th["beta2"]}))

    if b < 0 or 0 < b < min(p.mu1, p.mu2) or b > max(p.mu1, p.mu2):
        th["A_level"] = limit_level_A(p)
        if b > 0:
            th["k"], th["l"] = solve_kl(p.mu1, p.mu2, b)

    if p.theta1 < 0 and p.theta2 < 0:
        hits, eps = _thm12_hyp(p, dc)
        if hits:
            th["eps_shift"] = eps
            rho, delta, case = rho_delta(p, dc, eps=eps)
            th["rho"], th["delta"] = rho, delta
            thms.append(TheoremEntry("T1.2", {"regions": hits, "eps_shift": eps}))
            g13 = {"two_min_theta_plus_lambda1": 2 * min(p.theta1, p.theta2) + dc.lambda1_omega,
                   "beta_positive": b > 0,
                   "beta_window": -math.sqrt(p.mu1 * p.mu2) < b < 0}
            if g13["two_min_theta_plus_lambda1"] >= 0 or g13["beta_positive"] or g13["beta_window"]:
                thms.append(TheoremEntry("T1.3", g13))
            rg = rmax_gate(p)
            outside = not (min(p.mu1, p.mu2) <= b <= max(p.mu1, p.mu2))
            if outside and max(rg) < 1:
                thms.append(TheoremEntry("T1.5", {"regions": hits, "rmax_gate": rg,
                                                  "beta_outside_mu_range": True}))
        else:
            notes.append("theta1, theta2 < 0 but no A-region gate holds")

    if b > 0:
        for i in (1, 2):
            lam, mu, t = p.component(i)
            if t < 0:
                m = t16_margin(lam, mu, t, dc)
                if m >= 0:
                    thms.append(TheoremEntry("T1.6", {"component": i, "sigma2_margin": m,
                                                      "beta_positive": True}))
    for mirrored in (False, True):
        if t17_admissible(p, mirrored):
            m = t17_margin(p, mirrored)
            if m > 0:
                thms.append(TheoremEntry("T1.7" + ("(mirror)" if mirrored else ""),
                                         {"margin": m}))

    for i in (1, 2):
        lam, mu, t = p.component(i)
        sm = sigma_margins(lam, mu, t, dc)
        if (sm["Sigma3"] is not None and sm["Sigma3"] > 0) or (sm["Sigma4"] is not None and sm["Sigma4"] > 0):
            thms.append(TheoremEntry(f"A.2[{i}]", {"Sigma3": sm["Sigma3"], "Sigma4": sm["Sigma4"]}))
            thms.append(TheoremEntry(f"A.3[{i}]", {"Sigma3": sm["Sigma3"], "Sigma4": sm["Sigma4"]}))

    if abs(dc.lambda1_omega / dc.lambda1_bessel - 1.0) > 1e-3:
        notes.append("grid eigenvalue differs from the Bessel value by more than 0.1%")
    return ClassificationReport(p, dc, regions, thms, th, notes)


def gate_for_pipeline(report, pipeline, component=1):
    """Hypotheses that license a solve pipeline; an empty list means the gate fails."""
    ids = set(report.theorem_ids())
    p = report.params
    lam, mu, th = p.component(component)
    if pipeline == "local_ball":
        return sorted(ids & {"T1.2"})
    if pipeline == "nehari":
        return sorted(ids & {"T1.1(1)", "T1.1(2)", "T1.1(3)"})
    if pipeline == "mountain_pass":
        return sorted(ids & {"T1.5"})
    if pipeline == "single_local_min":
        return sorted(ids & {f"A.2[{component}]"})
    if pipeline == "single_nehari_min":
        return [f"theta{component}>0"] if th > 0 else []
    if pipeline == "single_mountain_pass":
        if th > 0:
            return [f"theta{component}>0"]
        if rmax_gate(p)[component - 1] < 1 and f"A.2[{component}]" in ids:
            return [f"A.2[{component}]", f"rmax_gate[{component}]"]
        return []
    raise ValueError(f"unknown pipeline {pipeline!r}")
