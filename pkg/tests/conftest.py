import numpy as np
import pytest

from billiards import PhasePoint, ShootVector, builtin_table, orbit


def circ(a, b):
    """Distance between angles in turns, taken mod 1."""
    d = np.mod(np.asarray(a) - np.asarray(b), 1.0)
    return np.minimum(d, 1.0 - d)


def seed_orbit(spec, theta, r, K):
    """ShootVector built from the first ``K`` points of the orbit through ``(theta, r)``."""
    if K == 1:
        return ShootVector([[theta, r]])
    o = orbit(spec, PhasePoint(theta, r), K - 1)
    return ShootVector(np.column_stack([o.theta, o.r]))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def table_b_period2():
    from billiards import multipliers_and_eigvecs, newton_periodic
    spec = builtin_table("B")
    u = newton_periodic(spec, ShootVector([[0.5, 0.01], [0.0, -0.01]]))
    return spec, u, multipliers_and_eigvecs(spec, u)


@pytest.fixture(scope="session")
def table_b_charts(table_b_period2):
    from billiards import newton_parameterization
    spec, u, eig = table_b_period2
    cu = newton_parameterization(spec, u, eig, "unstable", 0.45 ** 2, 60)
    cs = newton_parameterization(spec, u, eig, "stable", 0.43 ** 2, 60)
    return cu, cs


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
