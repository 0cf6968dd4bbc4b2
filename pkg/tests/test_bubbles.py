import csv
import io
import math

import numpy as np
import pytest
from scipy.integrate import quad

from logcrit import bubbles as B
from logcrit.errors import DomainError, PreconditionError
from logcrit.params import ParameterSet, limit_level_A, sobolev_constant
from logcrit.radial import OMEGA4, make_grid

S2 = sobolev_constant() ** 2
SIGMA1 = ParameterSet(0, 1, 1, 0, 1, 1, 0.1)


@pytest.fixture(scope="module")
def grid_fine():
    return make_grid(1.0, 4096)


def test_cutoff_shape():
    r = np.array([0.0, 0.5, 0.75, 1.0, 1.5])
    c = B.cutoff(r, 0.5)
    assert c[0] == 1 and c[1] == 1 and c[3] == 0 and c[4] == 0
    assert c[2] == pytest.approx(0.5)
    assert np.all(B.cutoff(r, math.inf) == 1)


def test_bubble_domain(grid256):
    with pytest.raises(DomainError):
        B.bubble_field(0.6, grid256, 0.5)
    with pytest.raises(DomainError):
        B.bubble_field(0.0, grid256, 0.25)
    with pytest.raises(DomainError):
        B.bubble_field(0.1, grid256, 0.6)
    B.bubble_field(0.1, grid256, 0.5)


def _quad_moment(f, eps, r_cut):
    v = lambda r: float(B.cutoff(np.array([r]), r_cut)[0]) * B.bubble_profile(r, eps)
    pts = [eps, r_cut, 2 * r_cut]
    return OMEGA4 * quad(lambda r: f(v(r)) * r ** 3, 0, 2 * r_cut, points=pts,
                         epsabs=0, epsrel=1e-12, limit=400)[0]


def test_integrals_against_quadrature(grid_fine):
    eps, rc = 0.1, 0.5
    b = B.bubble_integrals(eps, grid_fine, rc)
    assert b.l2 == pytest.approx(_quad_moment(lambda x: x * x, eps, rc), rel=1e-5)
    assert b.l4 == pytest.approx(_quad_moment(lambda x: x ** 4, eps, rc), rel=1e-4)
    assert b.l2log == pytest.approx(
        _quad_moment(lambda x: x * x * math.log(x * x) if x > 0 else 0.0, eps, rc), rel=1e-4)
    assert b.to_dict()["cutoff_outer"] == 1.0


@pytest.mark.parametrize("eps", [0.3, 0.1, 0.03, 0.01])
def test_discrete_quotient_never_below_S2(grid256, eps):
    assert B.sobolev_quotient_sq(grid256, eps, 0.5) >= S2 * (1 - 1e-12)


def test_quotient_converges(grid_fine):
    # the cutoff costs O((eps/r_cut)^2), so eps must be small against r_cut
    err = B.sobolev_quotient_sq(grid_fine, 0.01, 0.5) / S2 - 1
    assert 0 <= err < 5e-3


def test_bracket_order():
    for eps in (0.2, 0.05, 1e-3):
        lo, hi = B.l2log_brackets(eps, 0.5)
        assert lo < B.l2log_leading(eps, 0.5) < hi
    assert B.l2_leading(0.1) == pytest.approx(8 * OMEGA4 * 0.01 * math.log(10))


def test_asymptotics_table():
    rows, notes = B.asymptotics_table([0.2, 0.1, 0.05, 1.5], make_grid(2.0, 2048), 1.0)
    assert len(rows) == 3 and "1.5" in notes[0]
    for r in rows:
        assert abs(r["grad2_ratio"] - 1) <= 5 * r["eps"] ** 2
        assert r["bracket_ok"]
    fh = io.StringIO()
    B.write_table(fh, rows)
    back = list(csv.DictReader(io.StringIO(fh.getvalue())))
    assert list(back[0]) == B.TABLE_COLUMNS
    assert float(back[1]["l2"]) == rows[1]["l2"]
    assert back[0]["bracket_ok"] == "1"


def test_quartic_maximizer_is_one_one():
    from logcrit.params import solve_kl
    for mu1, mu2, beta in ((1, 1, 0.5), (1, 2, 0.3), (2, 1.5, -0.4)):
        k, l = solve_kl(mu1, mu2, beta)
        t1, t2 = B.quartic_maximizer(k, l, mu1, mu2, beta)
        assert t1 == pytest.approx(1, abs=1e-6) and t2 == pytest.approx(1, abs=1e-6)
        g = B.quartic_surrogate(k, l, mu1, mu2, beta)
        assert g(1, 1) == pytest.approx(0.25 * (k + l))


def test_prop26_report(grid256):
    rep = B.gap_report_prop26(SIGMA1, [0.1, 0.05, 0.02, 0.9], grid256)
    assert rep["strict_gap"]
    assert rep["upper_bound"] < rep["targets"]["A_sum"]
    assert len(rep["rows"]) == 3 and rep["notes"]
    assert rep["C_theta_surrogates"]["label"] == "numerical upper bound for C_theta_i"
    with pytest.raises(PreconditionError):
        B.gap_report_prop26(SIGMA1.with_(theta2=-1.0), [0.1], grid256)


def test_prop28_ray_below_A(grid256):
    p = ParameterSet(6, 1, -1, 6, 1, -1, 0.5)
    rep = B.gap_report_prop28(p, [0.1, 0.05, 0.02], grid256, variant="ray")
    assert rep["below_A"] and rep["upper_bound"] < limit_level_A(p)
    assert "rmax_gate" in rep


def test_prop28_pair_approaches_A(grid256):
    # for theta > 0 the bound decreases towards A as eps shrinks
    rep = B.gap_report_prop28(SIGMA1, [0.1, 0.05, 0.02], grid256, variant="pair")
    tops = [r["max_energy"] for r in rep["rows"]]
    assert tops[0] > tops[1] > tops[2]
    assert abs(tops[2] / rep["A"] - 1) < 0.05


def test_prop28_preconditions(grid256):
    with pytest.raises(PreconditionError):
        B.gap_report_prop28(SIGMA1.with_(beta=-0.5), [0.1], grid256)
    with pytest.raises(PreconditionError):
        B.gap_report_prop28(SIGMA1.with_(beta=3.0), [0.1], grid256, variant="pair")
    with pytest.raises(DomainError):
        B.gap_report_prop28(SIGMA1, [0.1], grid256, variant="other")
    rep = B.gap_report_prop28(SIGMA1.with_(beta=3.0), [0.1], grid256, variant="ray")
    assert "Lambda" in rep


def test_sphere_and_ray(grid256):
    zeta, alpha = B.sphere_radius(SIGMA1)
    assert zeta == pytest.approx(7.57, abs=0.01) and alpha == pytest.approx(14.34, abs=0.01)
    rep = B.sphere_check(SIGMA1, grid256, samples=50)
    assert rep["holds"]
    t, E = B.ray_escape(SIGMA1, grid256)
    assert E < -1e6 and t > 1
