"""Closed-form billiard step on an ellipse (the guess generator for general tables)."""
from __future__ import annotations

import math
from typing import NamedTuple

from .boundary import EllipseSpec
from .errors import DomainError

TWO_PI = 2.0 * math.pi


class PhasePoint(NamedTuple):
    """Billiard state: boundary parameter ``theta`` and ``r = cos(angle to tangent)``."""

    theta: float
    r: float


def reverse(p: PhasePoint) -> PhasePoint:
    """Time-reversal involution ``(theta, r) -> (theta, -r)``."""
    return PhasePoint(p.theta, -p.r)


def ellipse_step(ell: EllipseSpec, p: PhasePoint) -> tuple[PhasePoint, float]:
    """Exact bounce on ``ell``; returns the next phase point and the chord length."""
    theta, r = float(p.theta), float(p.r)
    if not -1.0 < r < 1.0:
        raise DomainError(f"|r| must be < 1, got r={r}")
    a, b = ell.a1, ell.b1
    c, sn = math.cos(TWO_PI * theta), math.sin(TWO_PI * theta)
    tau = math.atan2(b * c, -a * sn)
    gamma = math.acos(r)
    vx, vy = math.cos(gamma + tau), math.sin(gamma + tau)
    d1, d2 = vx / a, vy / b
    s_star = -2.0 * (d1 * c + d2 * sn) / max(d1 * d1 + d2 * d2, 1e-300)
    xh, yh = a * c + s_star * vx, b * sn + s_star * vy
    th = math.atan2(yh / b, xh / a) / TWO_PI
    th -= math.floor(th)
    ch, shh = math.cos(TWO_PI * th), math.sin(TWO_PI * th)
    tau_hat = math.atan2(b * ch, -a * shh)
    rho_hat = math.atan2(vy, vx)
    return PhasePoint(th, math.cos(rho_hat - tau_hat)), s_star
