import os
import subprocess
import sys

import numpy as np
import pytest

from logcrit import _kernels_py as py
from logcrit import kernels
from logcrit.radial import BASIS_LEFT, BASIS_RIGHT, make_grid

backends = kernels.available_backends()
needs_c = pytest.mark.skipif("cython" not in backends, reason="compiled kernels not built")


@pytest.fixture
def data():
    rng = np.random.default_rng(3)
    g = make_grid(1.0, 200)
    x = rng.normal(size=g.n)
    q = rng.normal(size=g.qweights.size)
    return g, x, q


@needs_c
def test_backends_agree(data):
    g, x, q = data
    c = backends["cython"]
    ax = np.abs(x)
    pairs = [
        # factors are backend-specific, so each backend solves with its own
        (c.tridiag_solve(c.tridiag_factor(g.stiff_diag, g.stiff_off), x),
         py.tridiag_solve(py.tridiag_factor(g.stiff_diag, g.stiff_off), x)),
        (c.stiff_apply(g.coupling, g.boundary_coupling, x),
         py.stiff_apply(g.coupling, g.boundary_coupling, x)),
        (c.stiff_form(g.coupling, g.boundary_coupling, x),
         py.stiff_form(g.coupling, g.boundary_coupling, x)),
        (c.to_points(x, BASIS_LEFT, BASIS_RIGHT), py.to_points(x, BASIS_LEFT, BASIS_RIGHT)),
        (c.from_points(q, BASIS_LEFT, BASIS_RIGHT), py.from_points(q, BASIS_LEFT, BASIS_RIGHT)),
        (c.positive_moments(q, g.qweights), py.positive_moments(q, g.qweights)),
        (c.cross_moment(q, q[::-1].copy(), g.qweights), py.cross_moment(q, q[::-1].copy(), g.qweights)),
        (c.reaction(x, ax, 1.5, 1.0, -0.7, 0.3), py.reaction(x, ax, 1.5, 1.0, -0.7, 0.3)),
    ]
    for a, b in pairs:
        np.testing.assert_allclose(np.asarray(a), np.asarray(b), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("name", sorted(backends))
def test_points_adjoint(data, name):
    g, x, q = data
    k = backends[name]
    lhs = q @ k.to_points(x, BASIS_LEFT, BASIS_RIGHT)
    rhs = x @ k.from_points(q, BASIS_LEFT, BASIS_RIGHT)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


@pytest.mark.parametrize("name", sorted(backends))
def test_tridiag_solves(data, name):
    g, x, _ = data
    k = backends[name]
    y = k.tridiag_solve(k.tridiag_factor(g.stiff_diag, g.stiff_off), x)
    np.testing.assert_allclose(g.apply_stiffness(y), x, atol=1e-9 * np.abs(x).max())


@pytest.mark.parametrize("name", sorted(backends))
def test_indefinite_matrix_rejected(name):
    k = backends[name]
    with pytest.raises(np.linalg.LinAlgError):
        k.tridiag_factor(np.array([1.0, -1.0, 1.0]), np.array([0.0, 0.0]))


@pytest.mark.parametrize("name", sorted(backends))
def test_moments_skip_nonpositive(name):
    k = backends[name]
    u = np.array([-1.0, 0.0, 1e-200, 2.0])
    w = np.ones(4)
    a, b, c = k.positive_moments(u, w)
    assert (a, b) == (4.0, 16.0)
    assert c == pytest.approx(4.0 * np.log(4.0), rel=1e-15)
    f = k.reaction(u, np.array([5.0, 5.0, 5.0, -1.0]), 0.0, 1.0, 1.0, 1.0)
    assert list(f[:3]) == [0.0, 0.0, 0.0]
    assert f[3] == pytest.approx(2.0 * (4.0 + np.log(4.0)))


def test_env_forces_python_backend():
    env = dict(os.environ, LOGCRIT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import logcrit.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_c
def test_compiled_backend_is_default():
    if os.environ.get("LOGCRIT_PURE_PYTHON"):
        pytest.skip("fallback forced by the environment")
    assert kernels.BACKEND == "cython"
