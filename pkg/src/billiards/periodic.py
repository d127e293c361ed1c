"""Period-K saddle orbits by multiple shooting, and their Floquet data."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boundary import TableSpec
from .complexmap import jacobian_df, real_guess
from .ellipse import PhasePoint
from .errors import DegenerateError, NewtonDivergence, NotHyperbolicError
from .realmap import billiard_step

__all__ = [
    "ShootVector",
    "EigenData",
    "shoot_map",
    "multishoot_residual",
    "multishoot_jacobian",
    "newton_periodic",
    "multipliers_and_eigvecs",
]


@dataclass(frozen=True)
class ShootVector:
    """``K`` phase points ``u_1 .. u_K``; stored as a ``(K, 2)`` array of ``(theta, r)``."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, 2)
        if pts.shape[0] < 1:
            raise ValueError("need at least one point")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def K(self) -> int:
        return self.points.shape[0]

    def flat(self) -> np.ndarray:
        return self.points.ravel().copy()

    @classmethod
    def from_flat(cls, u) -> "ShootVector":
        return cls(np.asarray(u, float).reshape(-1, 2))

    def shifted(self, m: int) -> "ShootVector":
        """Cyclic relabeling starting at ``u_{m+1}``."""
        return ShootVector(np.roll(self.points, -m, axis=0))

    def reduced(self) -> "ShootVector":
        """``theta`` reduced to ``[0, 1)``."""
        pts = self.points.copy()
        th = np.mod(pts[:, 0], 1.0)
        pts[:, 0] = np.where(th >= 1.0, 0.0, th)
        return ShootVector(pts)

    def as_phase_points(self) -> list[PhasePoint]:
        return [PhasePoint(float(t), float(r)) for t, r in self.points]


@dataclass(frozen=True)
class EigenData:
    """Floquet data of a saddle orbit.

    ``alpha < 1 < beta`` are the multipliers of ``Df^K``; ``lam = alpha^(1/K)``
    and ``mu = beta^(-1/K)`` are the conjugacy rates for the multiple-shooting
    map. ``xi_s``/``xi_u`` are per-point unit eigenvectors of ``Df^K(u_j)``;
    ``vec_s``/``vec_u`` the corresponding ``2K`` eigenvectors of ``DF``.
    """

    alpha: float
    beta: float
    lam: float
    mu: float
    xi_s: np.ndarray
    xi_u: np.ndarray
    vec_s: np.ndarray = field(repr=False)
    vec_u: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)

    @property
    def K(self) -> int:
        return self.xi_s.shape[0]


def _wrap(d):
    return d - np.round(d)


def shoot_map(spec: TableSpec, u: ShootVector) -> np.ndarray:
    """``F(u) = (f(u_K), f(u_1), ..., f(u_{K-1}))`` as a ``(K, 2)`` array, ``theta`` mod 1."""
    out = np.empty((u.K, 2))
    for j in range(u.K):
        try:
            q, _ = billiard_step(spec, PhasePoint(*u.points[j - 1]))
        except NewtonDivergence as exc:
            raise NewtonDivergence(f"component {j - 1 if j else u.K - 1}: {exc}",
                                   index=(j - 1) % u.K) from exc
        out[j] = q
    return out


def multishoot_residual(spec: TableSpec, u: ShootVector) -> np.ndarray:
    """``G(u) = F(u) - u`` with ``theta`` differences taken to the nearest integer."""
    g = shoot_map(spec, u) - u.points
    g[:, 0] = _wrap(g[:, 0])
    return g.ravel()


def multishoot_jacobian(spec: TableSpec, u: ShootVector) -> np.ndarray:
    """Block-cyclic ``DF(u)``: ``Df(u_K)`` in the top-right block, ``Df(u_j)`` below the diagonal."""
    K = u.K
    guess = real_guess(spec, u.points[:, 0], u.points[:, 1])
    blocks = jacobian_df(spec, guess.point, guess).real
    D = np.zeros((2 * K, 2 * K))
    for j in range(K):
        i = (j + 1) % K
        D[2 * i:2 * i + 2, 2 * j:2 * j + 2] = blocks[j]
    return D


def newton_periodic(spec: TableSpec, u0: ShootVector, tol: float = 1e-12,
                    max_iter: int = 30) -> ShootVector:
    """Solve ``G(u) = 0`` by Newton's method with ``DG = DF - I``.

    Returns the converged orbit with ``theta`` in ``[0, 1)``.
    """
    u = ShootVector(u0.points)
    for it in range(max_iter + 1):
        g = multishoot_residual(spec, u)
        if np.linalg.norm(g, np.inf) < tol:
            return u.reduced()
        if it == max_iter:
            break
        DG = multishoot_jacobian(spec, u) - np.eye(2 * u.K)
        cond = np.linalg.cond(DG)
        if not np.isfinite(cond) or cond > 1e14:
            raise DegenerateError("singular multiple-shooting Jacobian (orbit not hyperbolic "
                                  "or K is not the least period)")
        step = np.linalg.solve(DG, -g)
        pts = u.points + step.reshape(-1, 2)
        if np.any(np.abs(pts[:, 1]) >= 1.0):
            raise NewtonDivergence("Newton iterate left |r| < 1", last_iterate=u, index=it)
        u = ShootVector(pts)
    raise NewtonDivergence(f"no convergence in {max_iter} iterations, "
                           f"|G| = {np.linalg.norm(g, np.inf):.3e}", last_iterate=u)


def _fix_sign(v):
    v = np.asarray(v)
    if np.iscomplexobj(v):
        k = int(np.argmax(np.abs(v)))
        v = (v * np.exp(-1j * np.angle(v[k]))).real
    nz = np.flatnonzero(np.abs(v) > 1e-14 * np.max(np.abs(v)))
    return -v if v[nz[0]] < 0 else v


def multipliers_and_eigvecs(spec: TableSpec, u: ShootVector) -> EigenData:
    """Multipliers and eigenvectors of a converged saddle orbit.

    The multipliers come from the monodromy ``Df^K(u_1)``; the rates are the
    positive real ``K``-th roots. Full ``DF`` eigenvectors are taken from a dense
    eigendecomposition, split into per-point blocks, normalized and sign-fixed.
    """
    K = u.K
    DF = multishoot_jacobian(spec, u)
    mono = np.eye(2)
    for j in range(K):
        mono = DF[2 * ((j + 1) % K):2 * ((j + 1) % K) + 2, 2 * j:2 * j + 2] @ mono
    ev = np.linalg.eigvals(mono)
    if np.max(np.abs(ev.imag)) > 1e-10 * np.max(np.abs(ev)):
        raise NotHyperbolicError(f"complex multipliers {ev} (elliptic orbit)")
    ev = np.sort(ev.real)
    if abs(abs(ev[0]) - 1.0) < 1e-8 and abs(abs(ev[1]) - 1.0) < 1e-8:
        raise NotHyperbolicError(f"unit multipliers {ev}: orbit is not hyperbolic")
    alpha, beta = (ev[0], ev[1]) if abs(ev[0]) < abs(ev[1]) else (ev[1], ev[0])
    if alpha <= 0 or beta <= 0:
        raise NotHyperbolicError(f"multipliers ({alpha}, {beta}) are not both positive")
    lam = alpha ** (1.0 / K)
    mu = beta ** (-1.0 / K)

    vals, vecs = np.linalg.eig(DF)

    def pick(target):
        i = int(np.argmin(np.abs(vals - target)))
        v = _fix_sign(vecs[:, i])
        blocks = v.reshape(K, 2)
        xi = np.array([_fix_sign(b / np.linalg.norm(b)) for b in blocks])
        return v / np.linalg.norm(v), xi

    vec_s, xi_s = pick(lam)
    vec_u, xi_u = pick(1.0 / mu)
    return EigenData(float(alpha), float(beta), float(lam), float(mu), xi_s, xi_u,
                     vec_s, vec_u, vals)
