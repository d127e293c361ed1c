import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from billiards import PhasePoint, builtin_table, circle, ellipse_table, orbit
from billiards.birkhoff import (ChaoticRegion, bump_weights, classify_orbit, grid_seeds,
                                phase_portrait_scan, random_seeds, wba_gap,
                                weighted_birkhoff_average)


@given(st.floats(-10, 10))
def test_constant_sequence(c):
    assert weighted_birkhoff_average(np.full(1000, c)) == pytest.approx(c, abs=1e-12)


def test_alternating_sequence():
    h = np.arange(1000) % 2
    assert weighted_birkhoff_average(h) == pytest.approx(0.5, abs=1e-3)


def test_weights_vanish_at_ends_and_are_symmetric():
    w = bump_weights(101)
    assert w[0] == 0.0 and np.all(w[1:] > 0)
    assert np.allclose(w[1:], w[1:][::-1])


def test_circle_frequency_is_exact():
    o = orbit(circle(), PhasePoint(0.0, 0.3), 1000)
    assert weighted_birkhoff_average(o.dtheta) == pytest.approx(math.acos(0.3) / math.pi, abs=1e-9)
    c = classify_orbit(circle(), (0.0, 0.3))
    assert not c.chaotic and c.frequency == pytest.approx(0.40301, abs=1e-5)


def test_ellipse_is_regular():
    res = phase_portrait_scan(ellipse_table(1.1, 1.0), random_seeds(100, seed=2))
    assert not any(c.chaotic for c in res)


def test_table_a_separatrix_is_chaotic():
    c = classify_orbit(builtin_table("A"), (0.5, 0.02))
    assert c.chaotic and c.frequency is None and c.wba_gap > 1e-6


def test_single_seed_scan_equals_classify():
    spec = builtin_table("A")
    a = phase_portrait_scan(spec, [[0.3, 0.4]])[0]
    b = classify_orbit(spec, (0.3, 0.4))
    assert a.chaotic == b.chaotic and a.frequency == pytest.approx(b.frequency, abs=1e-15)


def test_scan_is_deterministic_across_thread_counts():
    spec = builtin_table("B")
    seeds = grid_seeds(12, 10)
    a = phase_portrait_scan(spec, seeds, n=300, threads=1, chunk=16)
    b = phase_portrait_scan(spec, seeds, n=300, threads=3, chunk=16)
    assert [(c.chaotic, c.frequency, c.wba_gap) for c in a] == \
        [(c.chaotic, c.frequency, c.wba_gap) for c in b]


def test_gap_reports_both_halves():
    gap, full = wba_gap(np.r_[np.zeros(500), np.ones(500)])
    assert gap == pytest.approx(1.0) and full == pytest.approx(0.5, abs=5e-3)


def test_failed_orbits_are_recorded():
    from billiards import convexity_family
    res = phase_portrait_scan(convexity_family(14.0), [[0.3, r] for r in np.linspace(-0.9, 0.9, 40)], n=200)
    bad = [c for c in res if not c.ok]
    assert bad and all(c.chaotic is None and "failed" in c.error for c in bad)


def test_seed_helpers():
    g = grid_seeds(4, 3)
    assert g.shape == (12, 2) and np.all((g[:, 0] > 0) & (g[:, 0] < 1))
    assert np.array_equal(random_seeds(5, seed=1), random_seeds(5, seed=1))
    with pytest.raises(ValueError):
        phase_portrait_scan(circle(), np.empty((0, 2)))


def test_chaotic_region_of_an_integrable_table_is_empty():
    spec = ellipse_table(1.1, 1.0)
    seeds = random_seeds(50, seed=4)
    region = ChaoticRegion.from_scan(spec, phase_portrait_scan(spec, seeds), n=200, bins=20)
    assert region.counts.sum() > 0
    assert not region.contains(seeds).any()


def test_chaotic_region_contains_chaotic_orbits():
    spec = builtin_table("B")
    seeds = random_seeds(200, seed=5)
    scan = phase_portrait_scan(spec, seeds)
    region = ChaoticRegion.from_scan(spec, scan, bins=50)
    chaotic = np.array([c.chaotic for c in scan])
    assert region.contains(seeds[chaotic]).mean() > 0.85
    assert region.contains(seeds[~chaotic]).mean() < 0.15
