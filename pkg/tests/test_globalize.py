import numpy as np
import pytest

from billiards import PhasePoint, ShootVector, builtin_table, orbit
from billiards.globalize import (distance_to_points, fundamental_domain_points, grow_manifolds,
                                 lambda_lemma_distances, min_distance_to_curves,
                                 polyline_distance)
from billiards.spectral import SpectralChart


def _toy_chart(rate, K=2, N=6, tail=0.0):
    coeffs = np.zeros((2 * K, N + 1))
    coeffs[:, 1] = 0.1
    coeffs[:, -1] = tail
    return SpectralChart("stable", rate, coeffs, 0.01 * 2 * K, ShootVector(np.zeros((K, 2))))


def test_fundamental_domain_endpoints():
    doms = fundamental_domain_points(_toy_chart(0.3), 2)
    assert [d[0] for d in doms] == [1, -1]
    assert np.allclose(doms[0][1], [0.09, 1.0])
    assert np.allclose(doms[1][1], [-0.09, -1.0])
    assert doms[0][2].shape == (2, 2, 2)


def test_fundamental_domain_log_spacing():
    doms = fundamental_domain_points(_toy_chart(0.5), 3)
    assert np.allclose(doms[0][1], [0.25, 0.5, 1.0])


def test_refuses_unresolved_chart():
    with pytest.raises(ValueError, match="larger N"):
        fundamental_domain_points(_toy_chart(0.5, tail=1e-3), 4)
    with pytest.raises(ValueError):
        fundamental_domain_points(_toy_chart(0.5), 1)


def test_seam_conjugacy(table_b_charts):
    for chart in table_b_charts:
        K = chart.K
        lo = chart.rate ** K
        for j in range(K):
            a = chart.component(j, 1.0 if chart.kind == "stable" else lo)
            b = chart.component(j, lo if chart.kind == "stable" else 1.0)
            o = orbit(chart.spec, PhasePoint(float(a[0]), float(a[1])), K)
            d = o.theta[-1] - b[0]
            assert abs(d - np.round(d)) < 1e-8 and abs(o.r[-1] - b[1]) < 1e-8


def test_zero_iterates_is_the_local_manifold(table_b_charts):
    cu, _ = table_b_charts
    curves = grow_manifolds(cu.spec, cu, J=20, M=0)
    assert len(curves) == 2 * cu.K
    for c in curves:
        th, r = cu.component(c.component, c.sigma)
        assert np.allclose(c.iterates[0, :, 0], th) and np.allclose(c.iterates[0, :, 1], r)
        assert c.M == 0


def test_strands_tile_across_iterates(table_b_charts):
    for chart in table_b_charts:
        for c in grow_manifolds(chart.spec, chart, J=40, M=3):
            for n in range(c.M):
                start_next = c.iterates[n + 1, 0]
                end_prev = c.iterates[n, -1]
                d = start_next - end_prev
                d[0] -= np.round(d[0])
                assert np.hypot(*d) < 1e-6
            assert np.all(np.abs(c.iterates[..., 1]) < 1)


def test_stable_manifold_is_the_reflected_unstable_manifold(table_b_period2):
    # the period-2 axis orbit is fixed by (theta, r) -> (theta, -r), which swaps f and its inverse
    from billiards import newton_parameterization
    spec, u, eig = table_b_period2
    s = 0.2
    cu = newton_parameterization(spec, u, eig, "unstable", s, 40)
    cs = newton_parameterization(spec, u, eig, "stable", s, 40)
    gu = {c.branch[:2]: c for c in grow_manifolds(spec, cu, J=30, M=3)}
    gs = [c for c in grow_manifolds(spec, cs, J=30, M=3)]
    for c in gs:
        pts = c.iterates.reshape(-1, 2).copy()
        pts[:, 1] *= -1
        best = min(np.max(polyline_distance(pts, g.iterates.reshape(-1, 2)[order]))
                   for g in gu.values() for order in [np.argsort(g.iterates.reshape(-1, 2)[:, 0])])
        assert best < 1e-8


def test_polyline_distance_is_periodic_in_theta():
    line = np.array([[0.0, 0.0], [1.0, 0.0]])
    assert polyline_distance([[0.5, 0.2]], line)[0] == pytest.approx(0.2)
    assert polyline_distance([[2.5, 0.2]], line)[0] == pytest.approx(0.2)
    line = np.array([[0.9, 0.0], [1.1, 0.0], [np.nan, np.nan], [1.2, 0.0]])
    assert polyline_distance([[0.05, 0.1]], line)[0] == pytest.approx(0.1)


def test_distance_to_points_wraps_theta():
    assert distance_to_points([[0.99, 0.0]], [[0.01, 0.0]]) == pytest.approx(0.02)
    assert distance_to_points([[np.nan, 0.0]], [[0.0, 0.0]]) == np.inf


def test_lambda_lemma_distances_shrink(table_b_charts, table_b_period2):
    _, u, _ = table_b_period2
    cu, _ = table_b_charts
    d = lambda_lemma_distances(grow_manifolds(cu.spec, cu, J=100, M=4), u.points)
    assert len(d) == 4 and all(a > b for a, b in zip(d, d[1:]))


def test_min_distance_to_own_curve_is_zero(table_b_charts):
    cu, _ = table_b_charts
    curves = grow_manifolds(cu.spec, cu, J=20, M=1)
    assert min_distance_to_curves(curves[0].strand(1), curves) < 1e-12
