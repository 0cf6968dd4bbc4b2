import io
import math

import numpy as np
import pytest

from logcrit.errors import NumericError, PreconditionError
from logcrit.functionals import Model, StatePair
from logcrit.nehari import relative_residuals
from logcrit.params import ParameterSet, limit_level_A, sobolev_constant
from logcrit.radial import principal_eigenpair
from logcrit import solvers as S

S2 = sobolev_constant() ** 2
A1 = ParameterSet(0, 1, -1, 0, 1, -1, -0.5)
SIGMA1 = ParameterSet(0, 1, 1, 0, 1, 1, 0.1)
MP = ParameterSet(6.0, 1, -1, 6.0, 1, -1, -0.5)


@pytest.fixture(scope="module")
def a1_min(grid256):
    return S.minimize_local_ball(A1, grid=grid256)


@pytest.fixture(scope="module")
def sigma1_single(grid256):
    return S.solve_single(0, 1, 1, "nehari_min", grid=grid256)


@pytest.fixture(scope="module")
def sigma1_min(grid256):
    return S.minimize_on_nehari(SIGMA1, grid=grid256)


def test_local_ball_minimizer(a1_min):
    r = a1_min
    assert r.converged
    assert r.energy < 0
    assert r.positivity["u_min_interior"] > 0 and r.positivity["v_min_interior"] > 0
    cert = S.residual_certificate(r, A1)
    assert cert["strong_ok"]
    assert cert["identity_quarter"] < 1e-11 and cert["identity_half"] < 1e-11
    assert all(b["holds"] for b in cert["lower_bounds"])
    assert cert["coercivity_gap"] >= 0


def test_local_ball_is_symmetric(a1_min):
    u, v = a1_min.state.u.values, a1_min.state.v.values
    assert np.max(np.abs(u - v)) <= 1e-8 * np.max(np.abs(u))


def test_local_ball_rejects_outside_init(grid256):
    big = S.seed_pair(grid256, 1e3)
    with pytest.raises(PreconditionError):
        S.minimize_local_ball(A1, init=big)


def test_single_nehari_bracket(sigma1_single):
    r = sigma1_single
    lo = S2 / (4 * (1 + math.exp(-1)) ** 2)
    assert r.converged
    assert lo <= r.energy < S2 / 4


def test_nehari_minimizer(sigma1_min, sigma1_single):
    r = sigma1_min
    assert r.converged
    assert max(relative_residuals(r.state, SIGMA1)) <= 1e-10
    assert r.energy < min(sigma1_single.energy + S2 / 4, limit_level_A(SIGMA1))
    assert r.positivity["u_min_interior"] > 0


def test_single_local_min_needs_negative_theta(grid256):
    with pytest.raises(PreconditionError):
        S.solve_single(0, 1, 1, "local_min", grid=grid256)
    with pytest.raises(PreconditionError):
        S.solve_single(0, 1, -1, "nehari_min", grid=grid256)
    with pytest.raises(PreconditionError):
        S.solve_single(0, 1, -1, "bogus", grid=grid256)


def test_single_local_min(grid256):
    r = S.solve_single(0, 1, -1, "local_min", grid=grid256)
    assert r.converged and r.energy < 0
    assert S.residual_certificate(r, (0, 1, -1))["strong_ok"]


def test_single_mountain_pass(grid256):
    r = S.solve_single(6, 1, -1, "mountain_pass", grid=grid256)
    level = float(r.notes[-1].split()[-1])
    assert r.converged
    # the refined saddle cannot sit above the sampled path maximum
    assert r.energy <= level + 1e-9
    assert 0 < r.energy < S2 / 4


def test_system_mountain_pass(grid256):
    lm = S.minimize_local_ball(MP, grid=grid256)
    B, eps, top = S.bubble_endpoint(MP, lm.state)
    ps, level = S.mountain_pass(MP, lm.state, B, segments=12, tol=1e-3, max_iter=300)
    assert all(np.diff(ps.history) <= 0)
    assert level <= top + 1e-12
    assert level < min(S2 / 4, limit_level_A(MP))
    d = ps.to_dict()
    assert d["segments"] == 12 and d["level"] == level


def test_mountain_pass_preconditions(grid256):
    md = Model.system(grid256, MP)
    Z = np.zeros((2, grid256.n))
    with pytest.raises(PreconditionError):
        S._mountain_pass(md, Z, Z, 1, 1e-3, 10)
    with pytest.raises(PreconditionError):
        S._mountain_pass(md, Z, Z, 8, 1e-3, 10)


def test_no_mountain(grid256):
    # past the fiber maximum the energy only falls along the ray
    _, e1 = principal_eigenpair(grid256)
    md = Model.single(grid256, 0, 1, 1)
    A = 10 * e1.values[None, :]
    B = 40 * e1.values[None, :]
    assert md.energy(B) < md.energy(A)
    with pytest.raises(NumericError):
        S._mountain_pass(md, A, B, 8, 1e-3, 10)


def test_default_endpoints(grid256):
    A, B = S.default_endpoints(SIGMA1, grid256)
    md = Model.system(grid256, SIGMA1)
    assert md.energy(B.array()) < md.energy(A.array()) == 0


def test_trace_csv(a1_min):
    fh = io.StringIO()
    S.write_trace(fh, a1_min)
    lines = fh.getvalue().splitlines()
    assert lines[0] == "iteration,energy,gradient_norm"
    assert len(lines) == len(a1_min.trace) + 1


def test_escape_probe_on_semitrivial(grid256):
    r = S.solve_single(0, 1, -1, "local_min", grid=grid256)
    s = StatePair(r.state, r.state * 0.0)
    out = S.escape_probe(s, A1, 2)
    # the log term wins once the bump is small enough
    assert len(out) == 4 and all(dE < 0 for _, dE in out[1:])
