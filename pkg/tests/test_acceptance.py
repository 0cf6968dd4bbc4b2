"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with pytest (the lines appear in the terminal summary) or directly:
    python3 tests/test_acceptance.py
"""
import io
import math
import os
import subprocess
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from conftest import ACCEPTANCE, smooth_pair  # noqa: E402
from logcrit import bubbles as B  # noqa: E402
from logcrit import cli  # noqa: E402
from logcrit import nonexistence as NX  # noqa: E402
from logcrit import params as P  # noqa: E402
from logcrit import solvers as S  # noqa: E402
from logcrit.errors import NumericError  # noqa: E402
from logcrit.functionals import Model, StatePair, identity_half, identity_quarter  # noqa: E402
from logcrit.nehari import project_to_nehari  # noqa: E402
from logcrit.radial import log_sobolev_gap, make_grid, principal_eigenpair  # noqa: E402

S2_EXACT = 32.0 * math.pi ** 2 / 3.0
J11_SQ = 3.8317059702075125 ** 2


def record(num, ok, detail):
    line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[num] = line
    print(line)
    return ok


def _sign(rng):
    return float(rng.choice([-1.0, 1.0]))


# ------------------------------------------------------------------ criteria

def criterion_1():
    errs = [abs(B.sobolev_quotient_sq(make_grid(1.0, n), 0.01, 0.5) / S2_EXACT - 1)
            for n in (256, 512, 1024)]
    ok = errs[-1] <= 5e-3 and all(a > b for a, b in zip(errs, errs[1:]))
    return record(1, ok, "S^2 rel. error by n=256,512,1024: " + ", ".join(f"{e:.2e}" for e in errs))


def criterion_2():
    lam = principal_eigenpair(make_grid(1.0, 1024))[0]
    err = abs(lam / J11_SQ - 1)
    scaled = [principal_eigenpair(make_grid(R, 512))[0] * R * R for R in (0.5, 1.0, 2.0)]
    spread = (max(scaled) - min(scaled)) / scaled[1]
    ok = err <= 1e-3 and spread <= 1e-6
    return record(2, ok, f"lambda_1 rel. error {err:.2e}, spread of lambda_1 R^2 {spread:.1e}")


def criterion_3():
    rows, _ = B.asymptotics_table([0.2, 0.1, 0.05], make_grid(2.0, 1024), 1.0)
    grad_ok = all(abs(r["grad2_ratio"] - 1) <= 5 * r["eps"] ** 2 for r in rows)
    l2 = [abs(r["l2_ratio"] - 1) for r in rows]
    ok = len(rows) == 3 and grad_ok and l2[0] > l2[1] > l2[2] and all(r["bracket_ok"] for r in rows)
    return record(3, ok, "grad2 dev " + ", ".join(f"{abs(r['grad2_ratio'] - 1):.3g}" for r in rows)
                  + "; l2 dev " + ", ".join(f"{x:.3g}" for x in l2)
                  + f"; brackets {'ok' if all(r['bracket_ok'] for r in rows) else 'violated'}")


def criterion_4():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(1000):
        mu1, mu2 = rng.uniform(0.1, 5, size=2)
        beta = float(rng.uniform(-0.99, 0.99) * math.sqrt(mu1 * mu2)) if rng.random() < 0.5 \
            else float(max(mu1, mu2) * rng.uniform(1.01, 5))
        k, l = P.solve_kl(mu1, mu2, beta)
        worst = max(worst, abs(mu1 * k + beta * l - 1), abs(beta * k + mu2 * l - 1))
    count, above = 0, True
    while count < 1000:
        lam1, lam2 = rng.uniform(-5, 5, size=2)
        mu1, mu2, th1, th2 = rng.uniform(0.1, 4, size=4)
        p = P.ParameterSet(lam1, mu1, th1, lam2, mu2, th2, 1.0)
        try:
            b2 = P.beta2_threshold(p)
        except NumericError:
            continue
        count += 1
        above = above and b2 > max(mu1, mu2)
    exact = all(P.beta1_threshold(P.ParameterSet(0, m, 1, 0, m, 1, 0.1)) == m / 4
                for m in (0.25, 1.0, 4.0, 16.0))
    ok = worst <= 1e-12 and above and exact
    return record(4, ok, f"solve_kl residual {worst:.1e}; beta2 > max mu on {count} tuples: "
                  f"{above}; beta1(mu,mu) = mu/4: {exact}")


def _random_params(rng):
    return P.ParameterSet(float(rng.uniform(-2, 2)), float(rng.uniform(0.5, 2)),
                          _sign(rng) * float(rng.uniform(0.2, 2)), float(rng.uniform(-2, 2)),
                          float(rng.uniform(0.5, 2)), _sign(rng) * float(rng.uniform(0.2, 2)),
                          _sign(rng) * float(rng.uniform(0.05, 2)))


def criterion_5():
    grid = make_grid(1.0, 256)
    rng = np.random.default_rng(5)
    fd_worst = id_worst = 0.0
    h = 1e-5
    for _ in range(20):
        p = _random_params(rng)
        md = Model.system(grid, p)
        X = smooth_pair(grid, rng)
        Phi = smooth_pair(grid, rng)
        fd = (md.energy(X + h * Phi) - md.energy(X - h * Phi)) / (2 * h)
        an = md.hinner(md.gradient(X), Phi)
        fd_worst = max(fd_worst, abs(fd - an) / abs(an))
        s = StatePair.from_array(grid, X)
        for a, b in (identity_quarter(s, p), identity_half(s, p)):
            id_worst = max(id_worst, abs(a - b) / max(abs(a), abs(b)))
    ok = fd_worst <= 1e-6 and id_worst <= 1e-11
    return record(5, ok, f"FD vs Riesz gradient {fd_worst:.1e}; identities {id_worst:.1e} (20 states)")


def criterion_6():
    grid = make_grid(1.0, 256)
    rng = np.random.default_rng(6)
    res = inv = 0.0
    its = 0
    for _ in range(20):
        p = P.ParameterSet(float(rng.uniform(-1, 1)), float(rng.uniform(0.5, 2)),
                           float(rng.uniform(0.2, 2)), float(rng.uniform(-1, 1)),
                           float(rng.uniform(0.5, 2)), float(rng.uniform(0.2, 2)),
                           _sign(rng) * float(rng.uniform(0.02, 0.2)))
        s = StatePair.from_array(grid, smooth_pair(grid, rng, positive=True))
        pr = project_to_nehari(s, p)
        its = max(its, pr.iterations)
        res = max(res, *pr.relative)
        again = project_to_nehari(pr.projected, p)
        ray = project_to_nehari(s.scaled(2.0, 2.0), p)
        inv = max(inv, abs(again.t1 - 1), abs(again.t2 - 1),
                  abs(2 * ray.t1 - pr.t1) / pr.t1, abs(2 * ray.t2 - pr.t2) / pr.t2)
    ok = res <= 1e-10 and its <= 20 and inv <= 1e-9
    return record(6, ok, f"relative residual {res:.1e}, max iterations {its}, "
                  f"fixed-point/ray deviation {inv:.1e}")


def criterion_7():
    p = P.ParameterSet(0, 1, -1, 0, 1, -1, -0.5)
    r = S.minimize_local_ball(p, grid=make_grid(1.0, 512))
    cert = S.residual_certificate(r, p)
    pos = r.positivity
    ok = (r.converged and r.energy < 0 and pos["u_min_interior"] > 0
          and pos["v_min_interior"] > 0 and cert["strong_ok"])
    return record(7, ok, f"energy {r.energy:.4g}, minima {pos['u_min_interior']:.2e}/"
                  f"{pos['v_min_interior']:.2e}, strong residual {max(cert['strong_residual']):.1e}"
                  f" vs {10 * r.tol:.0e}")


def criterion_8():
    p = P.ParameterSet(0, 1, 1, 0, 1, 1, 0.1)
    grid = make_grid(1.0, 512)
    S2 = P.sobolev_constant() ** 2
    singles = [S.solve_single(*p.component(i), "nehari_min", grid=grid) for i in (1, 2)]
    r = S.minimize_on_nehari(p, grid=grid)
    bound = min(singles[0].energy + 0.25 * S2 / p.mu2, 0.25 * (1 / p.mu1 + 1 / p.mu2) * S2)
    brackets = []
    for i, sr in zip((1, 2), singles):
        lam, mu, th = p.component(i)
        lo = mu * S2 / (4 * (mu + th * math.exp(lam / th - 1)) ** 2)
        brackets.append(sr.converged and lo <= sr.energy < 0.25 * S2 / mu)
    ok = r.converged and p.beta < P.beta1_threshold(p) and r.energy < bound and all(brackets)
    return record(8, ok, f"Nehari energy {r.energy:.6g} < {bound:.6g}; single energy "
                  f"{singles[0].energy:.6g} in bracket: {all(brackets)}")


def criterion_9():
    p = P.ParameterSet(6.0, 1, -1, 6.0, 1, -1, -0.5)
    assert "T1.5" in P.classify(p).theorem_ids()
    grid = make_grid(1.0, 512)
    S2 = P.sobolev_constant() ** 2
    low = S.minimize_local_ball(p, grid=grid)
    end_b, _, _ = S.bubble_endpoint(p, low.state)
    path, level = S.mountain_pass(p, low.state, end_b, segments=24, tol=1e-4, max_iter=3000)
    A = P.limit_level_A(p)
    mono = all(b <= a for a, b in zip(path.history, path.history[1:]))
    cap = 0.25 * min(1 / p.mu1, 1 / p.mu2) * S2
    ok = level < cap and (p.beta >= 0 or level < A) and mono
    return record(9, ok, f"level {level:.6g} < {cap:.6g} and < A = {A:.6g}; "
                  f"non-increasing over {len(path.history)} sweeps: {mono}")


def criterion_10():
    dc = P.ball_geometry(1.0)
    rng = np.random.default_rng(10)
    w16 = w17 = 0.0
    for _ in range(100):
        v = NX.theorem16_condition(float(rng.uniform(-20, 40)), float(rng.uniform(0.1, 5)),
                                   -float(rng.uniform(0.05, 5)), dc)
        w16 = max(w16, abs(v.margin - v.oracle_margin) / max(1.0, abs(v.margin)))
        m1 = float(rng.uniform(0.2, 2))
        m2 = m1 + float(rng.uniform(0.2, 3))
        q = P.ParameterSet(float(rng.uniform(-5, 5)), m1, float(rng.uniform(0.1, 3)),
                           float(rng.uniform(-5, 5)), m2, -float(rng.uniform(0.1, 3)),
                           float(rng.uniform(m1 + 0.01, m2 - 0.01)))
        v = NX.theorem17_condition(q)
        w17 = max(w17, abs(v.margin - v.oracle_margin) / max(1.0, abs(v.margin)))
    L1 = dc.lambda1_omega
    sigma2 = P.ParameterSet(L1, 1, -1, L1, 1, -1, 1.0)
    control = P.ParameterSet(0, 1, -1, 0, 1, -1, -0.5)
    none = NX.falsification_battery(sigma2, 50, seed=0)["positive_hits"]
    some = NX.falsification_battery(control, 50, seed=0)["positive_hits"]
    ok = w16 <= 1e-9 and w17 <= 1e-8 and none == 0 and some >= 1
    return record(10, ok, f"T16 match {w16:.1e}, T17 match {w17:.1e}; battery hits "
                  f"{none}/50 on the nonexistence instance, {some}/50 on the control")


def criterion_11():
    rng = np.random.default_rng(11)
    worst = math.inf
    for R in (0.3, 1.0, 3.0):
        grid = make_grid(R, 256)
        r = grid.nodes / R
        basis = np.array([np.cos((j + 0.5) * np.pi * r) for j in range(8)])
        for _ in range(50):
            f = grid.field(np.abs(rng.normal(size=8) / (1 + np.arange(8)) @ basis)
                           * rng.uniform(0.01, 100))
            for a in (0.5, 1.0, 2.0):
                worst = min(worst, log_sobolev_gap(f, a))
    s = np.logspace(-8, 8, 100001)
    elem = bool(np.all(s * s * np.log(s * s) <= s ** 4 / math.e * (1 + 1e-14)))
    ok = worst >= 0 and elem
    return record(11, ok, f"smallest log-Sobolev gap {worst:.3g} over 450 checks; "
                  f"s^2 log s^2 <= s^4/e on [1e-8, 1e8]: {elem}")


_GOOD = """[params]
lambda1 = 0
mu1 = 1
theta1 = -1
lambda2 = 0
mu2 = 1
theta2 = -1
beta = -0.5
[grid]
n = 128
[sweep]
axis1 = beta -1 1 5
[run]
pipeline = local_ball
"""


def _cli(path, *args):
    buf = io.StringIO()
    code = cli.main([args[0], path, *args[1:]], stdout=buf)
    return code, buf.getvalue()


def criterion_12(tmpdir):
    def write(name, text):
        path = os.path.join(tmpdir, name)
        with open(path, "w") as fh:
            fh.write(text)
        return path

    good = write("good.ini", _GOOD)
    same = all(_cli(good, cmd) == _cli(good, cmd) for cmd in ("classify", "solve", "sweep", "bubbles"))
    # and across fresh interpreters
    fresh = [subprocess.run([sys.executable, "-m", "logcrit", "solve", good],
                            capture_output=True).stdout for _ in range(2)]
    same = same and fresh[0] == fresh[1] == _cli(good, "solve")[1].encode()
    codes = {"good": _cli(good, "solve")[0]}
    codes["unknown key"] = _cli(write("k.ini", _GOOD + "typo = 1\n"), "classify")[0]
    codes["bad value"] = _cli(write("v.ini", _GOOD.replace("mu1 = 1", "mu1 = one")), "classify")[0]
    codes["invalid params"] = _cli(write("p.ini", _GOOD.replace("beta = -0.5", "beta = 0")),
                                   "classify")[0]
    gate = _GOOD.replace("lambda1 = 0", "lambda1 = 14.7").replace("lambda2 = 0", "lambda2 = 14.7") \
                .replace("beta = -0.5", "beta = 1.0")
    codes["gate"] = _cli(write("g.ini", gate), "solve")[0]
    codes["forced"] = _cli(write("f.ini", gate + "max_iter = 50\n"), "solve", "--force")[0]
    want = {"good": 0, "unknown key": 2, "bad value": 2, "invalid params": 2, "gate": 3, "forced": 4}
    ok = same and codes == want
    return record(12, ok, f"byte-identical reruns: {same}; exit codes " +
                  ", ".join(f"{k}={v}" for k, v in codes.items()))


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11]


@pytest.mark.parametrize("fn", CRITERIA, ids=[f"criterion_{i + 1:02d}" for i in range(11)])
def test_criterion(fn):
    assert fn()


def test_criterion_12(tmp_path):
    assert criterion_12(str(tmp_path))


if __name__ == "__main__":
    import tempfile
    results = [fn() for fn in CRITERIA]
    with tempfile.TemporaryDirectory() as d:
        results.append(criterion_12(d))
    sys.exit(0 if all(results) else 1)
