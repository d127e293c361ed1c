import numpy as np
import pytest

from billiards import ShootVector, builtin_table, circle
from billiards.errors import NotHyperbolicError
from billiards.periodic import (multipliers_and_eigvecs, multishoot_jacobian,
                                multishoot_residual, newton_periodic)

from conftest import circ, seed_orbit

AXIS = ShootVector([[0.5, 0.0], [0.0, 0.0]])


def test_residual_on_known_orbits():
    assert np.linalg.norm(multishoot_residual(builtin_table("A"), AXIS)) < 1e-10
    assert np.linalg.norm(multishoot_residual(circle(), ShootVector([[0, 0], [0.5, 0]]))) < 1e-14


def test_residual_is_order_delta():
    spec = builtin_table("A")
    for delta in (1e-3, 1e-5):
        u = ShootVector(AXIS.points + delta)
        assert 0.1 * delta < np.linalg.norm(multishoot_residual(spec, u), np.inf) < 10 * delta


def test_jacobian_matches_finite_differences():
    spec = builtin_table("C")
    u = seed_orbit(spec, 0.2, 0.3, 3)
    D = multishoot_jacobian(spec, u)
    h = 1e-6
    x = u.flat()
    fd = np.zeros_like(D)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g1 = multishoot_residual(spec, ShootVector.from_flat(x + e))
        g0 = multishoot_residual(spec, ShootVector.from_flat(x - e))
        fd[:, i] = (g1 - g0) / (2 * h)
    assert np.allclose(D - np.eye(x.size), fd, atol=1e-6)


@pytest.mark.parametrize("name", "ABCDE")
def test_period_two_from_perturbed_seed(name):
    spec = builtin_table(name)
    u = newton_periodic(spec, ShootVector([[0.5, 0.01], [0.0, -0.01]]))
    assert np.linalg.norm(multishoot_residual(spec, u), np.inf) < 1e-12
    assert np.all(circ(u.points[:, 0], [0.5, 0.0]) < 1e-10)
    assert np.all(np.abs(u.points[:, 1]) < 1e-10)
    eig = multipliers_and_eigvecs(spec, u)
    assert 0 < eig.alpha < 1 < eig.beta
    assert eig.alpha * eig.beta == pytest.approx(1.0, abs=1e-10)


def test_period_three_table_a():
    spec = builtin_table("A")
    u = newton_periodic(spec, seed_orbit(spec, 0.85, 0.53, 3))
    j = int(np.argmin(circ(u.points[:, 0], 0.8534) + np.abs(u.points[:, 1] - 0.5333)))
    assert circ(u.points[j, 0], 0.8534) < 5e-3 and abs(u.points[j, 1] - 0.5333) < 5e-3
    eig = multipliers_and_eigvecs(spec, u)
    assert eig.alpha * eig.beta == pytest.approx(1.0, abs=1e-8)


def test_exact_orbit_needs_no_newton_step():
    spec = builtin_table("B")
    u = newton_periodic(spec, AXIS)
    assert np.array_equal(u.points, AXIS.points)


def test_eigenvalue_magnitudes_split_into_two_levels():
    spec = builtin_table("A")
    u = newton_periodic(spec, seed_orbit(spec, 0.85, 0.53, 3))
    eig = multipliers_and_eigvecs(spec, u)
    mags = np.sort(np.abs(eig.eigenvalues))
    assert np.allclose(mags[:3], eig.alpha ** (1 / 3), atol=1e-7)
    assert np.allclose(mags[3:], eig.beta ** (1 / 3), atol=1e-7)


def test_eigenpairs_of_the_monodromy():
    spec = builtin_table("A")
    u = newton_periodic(spec, seed_orbit(spec, 0.85, 0.53, 3))
    eig = multipliers_and_eigvecs(spec, u)
    D = multishoot_jacobian(spec, u)
    K = u.K
    DK = np.linalg.matrix_power(D, K)
    for j in range(K):
        block = DK[2 * j:2 * j + 2, 2 * j:2 * j + 2]
        for xi, m in ((eig.xi_s[j], eig.alpha), (eig.xi_u[j], eig.beta)):
            assert np.linalg.norm(block @ xi - m * xi) < 1e-8 * max(1.0, m)
            assert np.linalg.norm(xi) == pytest.approx(1.0)
            nz = xi[np.abs(xi) > 1e-14]
            assert nz[0] > 0
    assert np.allclose(D @ eig.vec_s, eig.lam * eig.vec_s, atol=1e-10)
    assert np.allclose(D @ eig.vec_u, eig.vec_u / eig.mu, atol=1e-10)


def test_shift_covariance():
    spec = builtin_table("A")
    u = newton_periodic(spec, seed_orbit(spec, 0.85, 0.53, 3))
    v = newton_periodic(spec, u.shifted(1))
    assert np.allclose(v.points, u.shifted(1).points, atol=1e-12)
    a, b = multipliers_and_eigvecs(spec, u), multipliers_and_eigvecs(spec, v)
    assert a.alpha == pytest.approx(b.alpha, rel=1e-9)


def test_circle_orbit_is_not_hyperbolic():
    with pytest.raises(NotHyperbolicError):
        multipliers_and_eigvecs(circle(), ShootVector([[0.0, 0.0], [0.5, 0.0]]))


def test_negative_multiplier_saddle_is_rejected():
    # the tabulated Table B period-5 point sits on a saddle with two negative multipliers
    spec = builtin_table("B")
    u = newton_periodic(spec, seed_orbit(spec, 0.4223, 0.2641, 5))
    assert np.any((circ(u.points[:, 0], 0.4223) < 5e-3) & (np.abs(u.points[:, 1] - 0.2641) < 5e-3))
    with pytest.raises(NotHyperbolicError, match="not both positive"):
        multipliers_and_eigvecs(spec, u)


def test_table_d_period_ten():
    spec = builtin_table("D")
    u = newton_periodic(spec, seed_orbit(spec, 0.3802, 0.0, 10))
    assert np.linalg.norm(multishoot_residual(spec, u), np.inf) < 1e-12
    eig = multipliers_and_eigvecs(spec, u)
    assert eig.alpha * eig.beta == pytest.approx(1.0, abs=1e-8)


def test_shoot_vector_is_read_only():
    with pytest.raises(ValueError):
        AXIS.points[0, 0] = 1.0
