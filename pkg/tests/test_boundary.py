import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from billiards.boundary import (DegenerateTangentError, EllipseSpec, TableSpec,
                                associated_ellipse, builtin_table, circle, convexity_family,
                                eccentricities, ellipse_table, eval_boundary, eval_tangent,
                                format_table_file, min_signed_curvature, read_table_file,
                                signed_curvature)

TWO_PI = 2 * math.pi


def test_table_a_axis_points():
    spec = builtin_table("A")
    assert np.allclose(eval_boundary(spec, 0.0), (1.13, 0.0), atol=1e-15)
    assert np.allclose(eval_boundary(spec, 0.5), (-1.07, 0.0), atol=1e-15)


def test_circle_quarter_turn():
    assert np.allclose(eval_boundary(circle(), 0.25), (0.0, 1.0), atol=1e-15)


def test_tangents():
    assert np.allclose(eval_tangent(builtin_table("A"), 0.0, 1), (0.0, TWO_PI * 1.06))
    assert np.allclose(eval_tangent(ellipse_table(1.1, 1.0), 0.0, 1), (0.0, TWO_PI))
    assert np.allclose(eval_tangent(circle(), 0.0, 2), (-TWO_PI ** 2, 0.0))


@given(st.floats(0, 1), st.integers(1, 3))
@settings(max_examples=50, deadline=None)
def test_tangent_matches_finite_difference(theta, order):
    spec = builtin_table("C")
    h = 1e-5
    lower = eval_boundary if order == 1 else (lambda sp, t: eval_tangent(sp, t, order - 1))
    fp = np.array(lower(spec, theta + h))
    fm = np.array(lower(spec, theta - h))
    fd = (fp - fm) / (2 * h)
    exact = np.array(eval_tangent(spec, theta, order))
    assert np.allclose(fd, exact, rtol=1e-6, atol=1e-6 * TWO_PI ** order)


def test_complex_evaluation_is_analytic():
    spec = builtin_table("B")
    z = 0.3 + 0.02j
    h = 1e-6
    d = (np.array(eval_boundary(spec, z + 1j * h)) - np.array(eval_boundary(spec, z - 1j * h))) / (2j * h)
    assert np.allclose(d, eval_tangent(spec, z, 1), rtol=1e-8)


def test_curvatures():
    assert min_signed_curvature(ellipse_table(1.1, 1.0)) == pytest.approx(1 / 1.21, rel=1e-6)
    assert min_signed_curvature(circle()) == pytest.approx(1.0, abs=1e-12)
    assert min_signed_curvature(builtin_table("C")) > 0
    assert signed_curvature(circle(2.0), 0.3) == pytest.approx(0.5)


def test_convexity_family_changes_sign_near_nine():
    assert min_signed_curvature(convexity_family(8.5)) > 0
    assert min_signed_curvature(convexity_family(9.5)) < 0


def test_degenerate_tangent_rejected():
    with pytest.raises(DegenerateTangentError):
        min_signed_curvature(TableSpec([0.0], None, None, [0.0]))


def test_associated_ellipse():
    assert associated_ellipse(builtin_table("A")) == EllipseSpec(1.1, 1.0)
    assert associated_ellipse(builtin_table("D")) == EllipseSpec(2.0, 1.0)
    assert associated_ellipse(ellipse_table(1.3, 0.7)) == EllipseSpec(1.3, 0.7)


def test_builtin_tables():
    b = builtin_table("B")
    assert np.array_equal(b.cos_x, [1.1, 0.05, 0.00015])
    assert np.array_equal(b.sin_y, [1.0, 0.035, 0.0001])
    e = builtin_table("e")
    assert np.array_equal(e.cos_x, [2.0, 0.05, 0.0])
    assert np.array_equal(e.sin_y, [1.0, 0.065, 0.0])
    with pytest.raises(KeyError, match="unknown table"):
        builtin_table("Z")


def test_published_eccentricity_figures():
    for name, value in (("A", 0.4583), ("D", 1.7321)):
        ecc = eccentricities(associated_ellipse(builtin_table(name)))
        assert ecc["focal_over_minor"] == pytest.approx(value, abs=5e-5)


def test_table_file_round_trip(tmp_path):
    spec = builtin_table("B")
    path = tmp_path / "b.txt"
    path.write_text(format_table_file(spec))
    assert read_table_file(path) == spec


def test_table_file_rejects_bad_keys(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("ax.0 = 1\n")
    with pytest.raises(ValueError, match="bad key"):
        read_table_file(path)


def test_coefficients_are_immutable():
    spec = builtin_table("A")
    with pytest.raises(ValueError):
        spec.cos_x[0] = 2.0
