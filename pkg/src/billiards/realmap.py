"""The billiard map on a general convex Fourier table.

The next bounce is the second intersection of the chord ``B(theta) + s v`` with
the boundary, found by Newton's method on the deflated residual
``h(s, th) / |(s, th - theta)|`` seeded from the associated ellipse. The inner
loop lives in the compiled kernel (see :mod:`billiards._backend`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels as _default_kernels
from .boundary import TableSpec, eval_tangent
from .ellipse import PhasePoint, reverse
from .errors import DegenerateError, DomainError, NewtonDivergence

__all__ = [
    "AngleBundle",
    "OrbitResult",
    "reflection_data",
    "billiard_step",
    "billiard_step_inverse",
    "orbit",
    "orbit_batch",
    "lift_dtheta",
]

_STATUS_TEXT = {
    1: "phase point outside |r| < 1",
    2: "degenerate tangent",
    3: "Newton did not converge",
    4: "Newton converged to an invalid chord",
}


@dataclass
class AngleBundle:
    """Auxiliary solve state of one bounce (real or complex scalars/arrays).

    ``tau``/``gamma`` give the outgoing direction ``v``; ``s`` and ``theta_hat``
    the chord; ``rho_hat``/``tau_hat`` the angles at the landing point.
    """

    tau: object
    gamma: object
    vx: object
    vy: object
    s: object = None
    theta_hat: object = None
    rho_hat: object = None
    tau_hat: object = None

    @property
    def v(self):
        return (self.vx, self.vy)

    @property
    def gamma_hat(self):
        return self.rho_hat - self.tau_hat

    @property
    def r_hat(self):
        return np.cos(self.rho_hat - self.tau_hat)

    def take(self, idx) -> "AngleBundle":
        return AngleBundle(*(None if f is None else np.asarray(f)[idx] for f in self._fields()))

    def _fields(self):
        return (self.tau, self.gamma, self.vx, self.vy, self.s, self.theta_hat,
                self.rho_hat, self.tau_hat)

    def copy(self) -> "AngleBundle":
        return AngleBundle(*(None if f is None else np.array(f, copy=True) for f in self._fields()))


def _raise_status(status, point, index=None, last=None):
    msg = _STATUS_TEXT.get(int(status), f"status {status}")
    where = f" at step {index}" if index is not None else ""
    if status == 1:
        raise DomainError(f"{msg}{where}: {point}")
    if status == 2:
        raise DegenerateError(f"{msg}{where}: {point}")
    raise NewtonDivergence(f"{msg}{where} from {point}", last_iterate=last, index=index)


def reflection_data(spec: TableSpec, p: PhasePoint) -> AngleBundle:
    """Tangent angle ``tau``, bounce angle ``gamma`` and unit direction ``v`` at ``p``."""
    theta, r = float(p[0]), float(p[1])
    if not -1.0 < r < 1.0:
        raise DomainError(f"|r| must be < 1, got r={r}")
    tx, ty = eval_tangent(spec, theta, 1)
    if math.hypot(tx, ty) < 1e-12:
        raise DegenerateError(f"degenerate tangent at theta={theta}")
    tau = math.atan2(ty, tx)
    gamma = math.acos(r)
    return AngleBundle(tau, gamma, math.cos(gamma + tau), math.sin(gamma + tau))


def billiard_step(spec: TableSpec, p: PhasePoint, prev_v=None, kernels=None):
    """One bounce ``f(theta, r)``.

    ``prev_v`` is the previous chord direction (enables the reflected-guess
    fallback). Returns ``(PhasePoint, AngleBundle)`` with ``theta_hat`` in ``[0, 1)``.
    """
    k = kernels or _default_kernels
    has_prev = prev_v is not None
    vpx, vpy = prev_v if has_prev else (0.0, 0.0)
    out = k.step(spec.packed(), float(p[0]), float(p[1]), vpx, vpy, has_prev)
    status, th, rh, s, vx, vy, tau, gamma, rho_hat, tau_hat, _ = out
    if status != 0:
        _raise_status(status, tuple(p), last=(s, th))
    return PhasePoint(th, rh), AngleBundle(tau, gamma, vx, vy, s, th, rho_hat, tau_hat)


def billiard_step_inverse(spec: TableSpec, p: PhasePoint, kernels=None) -> PhasePoint:
    """``f^{-1} = R f R`` with the reversal ``R(theta, r) = (theta, -r)``."""
    q, _ = billiard_step(spec, reverse(PhasePoint(*p)), kernels=kernels)
    return reverse(q)


@dataclass
class OrbitResult:
    theta: np.ndarray
    r: np.ndarray
    s: np.ndarray
    dtheta: np.ndarray

    @property
    def points(self) -> list[PhasePoint]:
        return [PhasePoint(float(t), float(r)) for t, r in zip(self.theta, self.r)]

    def __len__(self):
        return self.theta.size


def orbit(spec: TableSpec, p0: PhasePoint, n: int, reverse_time: bool = False,
          kernels=None) -> OrbitResult:
    """``n`` iterates of ``f`` (or ``f^{-1}``) from ``p0``, including ``p0`` itself.

    ``dtheta`` holds the per-bounce advance lifted to ``(0, 1)`` (``[0, 1)`` for
    inverse iteration it measures ``theta_k - theta_{k+1}``).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    k = kernels or _default_kernels
    status, fail, th, r, s, dth = k.orbit(spec.packed(), float(p0[0]), float(p0[1]), int(n),
                                          bool(reverse_time))
    if status != 0:
        _raise_status(status, (th[fail], r[fail]), index=int(fail),
                      last=OrbitResult(th[: fail + 1], r[: fail + 1], s[:fail], dth[:fail]))
    return OrbitResult(th, r, s, dth)


def orbit_batch(spec: TableSpec, theta0, r0, n: int, kernels=None):
    """Forward orbits of many seeds; failures are reported, not raised.

    Returns ``(status, fail_index, dtheta[m, n], theta_end, r_end)``.
    """
    k = kernels or _default_kernels
    return k.orbit_batch(spec.packed(), np.asarray(theta0, float), np.asarray(r0, float), int(n))


def lift_dtheta(theta_hat, theta):
    """Representative of ``theta_hat - theta`` in ``[0, 1)``."""
    d = np.asarray(theta_hat) - np.asarray(theta)
    return d - np.floor(d)
