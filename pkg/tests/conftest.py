import numpy as np
import pytest

from logcrit.radial import make_grid

# criterion number -> PASS/FAIL line, filled by test_acceptance
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def grid256():
    return make_grid(1.0, 256)


@pytest.fixture(scope="session")
def grid512():
    return make_grid(1.0, 512)


def smooth_pair(grid, rng, modes=8, positive=None):
    """Random pair built from the first few Dirichlet-compatible cosines."""
    r = grid.nodes / grid.radius
    basis = np.array([np.cos((j + 0.5) * np.pi * r) for j in range(modes)])
    X = rng.normal(size=(2, modes)) / (1.0 + np.arange(modes)) @ basis
    if positive or (positive is None and rng.random() < 0.5):
        X = np.abs(X)
    return X * rng.uniform(0.5, 3.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
