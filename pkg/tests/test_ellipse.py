import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from billiards import PhasePoint, billiard_step, ellipse_step, reverse
from billiards.boundary import EllipseSpec, eval_boundary
from billiards.errors import DomainError

from conftest import circ


def test_major_axis_bounce():
    q, s = ellipse_step(EllipseSpec(1.1, 1.0), PhasePoint(0.0, 0.0))
    assert circ(q.theta, 0.5) < 1e-14 and abs(q.r) < 1e-14
    assert s == pytest.approx(2.2, abs=1e-14)


def test_minor_axis_bounce():
    q, s = ellipse_step(EllipseSpec(2.0, 1.0), PhasePoint(0.25, 0.0))
    assert circ(q.theta, 0.75) < 1e-14 and abs(q.r) < 1e-14
    assert s == pytest.approx(2.0, abs=1e-14)


@given(st.floats(0, 1, exclude_max=True))
@settings(max_examples=50)
def test_circle_rotation(theta0):
    q, s = ellipse_step(EllipseSpec(1.0, 1.0), PhasePoint(theta0, 0.5))
    assert circ(q.theta, theta0 + 1 / 3) < 1e-12
    assert q.r == pytest.approx(0.5, abs=1e-12)
    assert s == pytest.approx(math.sqrt(3), abs=1e-12)


@given(st.floats(0, 1, exclude_max=True), st.floats(-0.95, 0.95))
@settings(max_examples=100)
def test_landing_point_on_ellipse_and_reversible(theta, r):
    ell = EllipseSpec(1.3, 0.8)
    q, s = ellipse_step(ell, PhasePoint(theta, r))
    assert s > 0
    x0, y0 = eval_boundary(ell.as_table(), theta)
    x1, y1 = eval_boundary(ell.as_table(), q.theta)
    assert math.hypot(x1 - x0, y1 - y0) == pytest.approx(s, abs=1e-11)
    back, _ = ellipse_step(ell, reverse(q))
    assert circ(back.theta, theta) < 1e-10 and back.r == pytest.approx(-r, abs=1e-10)


@given(st.floats(0, 1, exclude_max=True), st.floats(-0.95, 0.95))
@settings(max_examples=50, deadline=None)
def test_general_solver_agrees_on_pure_ellipse(theta, r):
    ell = EllipseSpec(1.1, 1.0)
    q, _ = ellipse_step(ell, PhasePoint(theta, r))
    p, _ = billiard_step(ell.as_table(), PhasePoint(theta, r))
    assert circ(p.theta, q.theta) < 1e-11 and p.r == pytest.approx(q.r, abs=1e-11)


def test_domain_error():
    with pytest.raises(DomainError):
        ellipse_step(EllipseSpec(1.1, 1.0), PhasePoint(0.0, 1.0))
