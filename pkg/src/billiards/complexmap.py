"""Analytic continuation of the billiard map to complex phase points.

Off the real slice the map is still defined implicitly by three small systems:

* ``g`` fixes the outgoing angles: ``cos(gamma) = r`` and
  ``T1 sin(tau) - T2 cos(tau) = 0`` with ``T = B'(theta)``;
* ``h`` fixes the chord: ``B(theta) + s v - B(theta_hat) = 0``;
* ``k`` fixes the landing angles: ``T1^ sin(tau_hat) - T2^ cos(tau_hat) = 0``
  and ``v1 sin(rho_hat) - v2 cos(rho_hat) = 0``; then ``r_hat = cos(rho_hat - tau_hat)``.

Each system has several complex roots, so the branch is selected entirely by
continuation from a solved nearby point (never by an ellipse seed and never by
reducing ``theta`` mod 1). Every routine is vectorized: phase points and bundles
may be numpy arrays of any common shape, and convergence is tracked per entry.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._backend import kernels as _kernels
from .boundary import TableSpec
from .errors import ContinuationError, DegenerateError, NewtonDivergence
from .realmap import AngleBundle

__all__ = [
    "CPhasePoint",
    "GuessBundle",
    "TOL",
    "MAX_ITER",
    "SUBSTEPS",
    "MAX_DEPTH",
    "curve_jet",
    "solve_angles_g",
    "solve_chord_h",
    "solve_reflection_k",
    "real_guess",
    "complex_step",
    "continue_paths",
    "jacobian_df",
    "residuals",
]

TOL = 1e-13
MAX_ITER = 30
SUBSTEPS = 16
MAX_DEPTH = 20
TWO_PI = 2.0 * math.pi
# residual accepted when Newton stalls at roundoff level instead of reaching TOL
_STALL_TOL = 1e-11
_SINGULAR = 1e-12


@dataclass
class CPhasePoint:
    """Complex phase point; ``theta`` and ``r`` are complex scalars or arrays."""

    theta: object
    r: object

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=complex)
        self.r = np.asarray(self.r, dtype=complex)

    def __iter__(self):
        return iter((self.theta, self.r))

    def conj(self) -> "CPhasePoint":
        return CPhasePoint(np.conj(self.theta), np.conj(self.r))


@dataclass
class GuessBundle:
    """A solved complex bounce: the full angle bundle plus the point it belongs to."""

    bundle: AngleBundle
    point: CPhasePoint

    def take(self, idx) -> "GuessBundle":
        return GuessBundle(self.bundle.take(idx),
                           CPhasePoint(self.point.theta[idx], self.point.r[idx]))

    def copy(self) -> "GuessBundle":
        return GuessBundle(self.bundle.copy(), CPhasePoint(self.point.theta.copy(),
                                                           self.point.r.copy()))

    def put(self, idx, other: "GuessBundle") -> None:
        """Overwrite entries ``idx`` in place with ``other`` (same length as ``idx``)."""
        for name in ("tau", "gamma", "vx", "vy", "s", "theta_hat", "rho_hat", "tau_hat"):
            getattr(self.bundle, name)[idx] = getattr(other.bundle, name)
        self.point.theta[idx] = other.point.theta
        self.point.r[idx] = other.point.r

    @property
    def image(self) -> CPhasePoint:
        return CPhasePoint(self.bundle.theta_hat, self.bundle.r_hat)


def curve_jet(spec: TableSpec, theta, order: int = 2):
    """``[B, B', ..., B^(order)]`` at ``theta``, each entry an ``(x, y)`` pair."""
    theta = np.asarray(theta)
    arg = TWO_PI * np.multiply.outer(theta, spec.modes)
    c, s = np.cos(arg), np.sin(arg)
    w = TWO_PI * spec.modes
    out = []
    # d/dtheta maps (c, s) -> w (-s, c)
    dc, ds, wk = c, s, np.ones_like(w)
    for m in range(order + 1):
        out.append((dc @ (wk * spec.cos_x) + ds @ (wk * spec.sin_x),
                    dc @ (wk * spec.cos_y) + ds @ (wk * spec.sin_y)))
        dc, ds, wk = -ds, dc, wk * w
    return out


def _norm2(a, b):
    return np.sqrt(np.abs(a) ** 2 + np.abs(b) ** 2)


def _newton(fun, x, tol=TOL, max_iter=MAX_ITER):
    """Masked vectorized Newton.

    ``fun(x)`` returns ``(res, dx, singular)`` for the tuple of arrays ``x``.
    Returns ``(x, ok, contracted, res)`` where ``contracted`` reports whether the
    first step shrank the residual at least twofold (or the guess already solved).
    """
    x = [np.array(xi, dtype=complex, copy=True) for xi in x]
    shape = x[0].shape
    done = np.zeros(shape, bool)
    fail = np.zeros(shape, bool)
    contracted = np.ones(shape, bool)
    res0 = None
    res = np.zeros(shape)
    with np.errstate(all="ignore"):
        for it in range(max_iter + 1):
            res, dx, singular = fun(x)
            res = np.where(np.isfinite(res), res, np.inf)
            if it == 0:
                res0 = res
            elif it == 1:
                contracted = (res <= 0.5 * res0) | (res0 <= tol)
            done |= ~fail & (res <= tol)
            fail |= ~done & (singular | ~np.isfinite(res))
            active = ~done & ~fail
            if not active.any() or it == max_iter:
                break
            for xi, di in zip(x, dx):
                xi[active] += di[active]
    ok = done | (~fail & (res <= _STALL_TOL))
    return x, ok, contracted, res


def _g_system(T1, T2, r):
    tn = _norm2(T1, T2)

    def fun(x):
        tau, gamma = x
        sg = np.sin(gamma)
        fg = np.cos(gamma) - r
        ft = T1 * np.sin(tau) - T2 * np.cos(tau)
        jt = T1 * np.cos(tau) + T2 * np.sin(tau)
        res = np.maximum(np.abs(fg), np.abs(ft) / tn)
        singular = (np.abs(sg) < _SINGULAR) | (np.abs(jt) < _SINGULAR * tn)
        return res, (-ft / jt, fg / sg), singular

    return fun


def _h_system(spec, bx, by, vx, vy):
    def fun(x):
        s, th = x
        (x1, y1), (tx, ty) = curve_jet(spec, th, 1)
        hx = bx + s * vx - x1
        hy = by + s * vy - y1
        scale = 1.0 + np.maximum(_norm2(bx, by), _norm2(x1, y1))
        res = _norm2(hx, hy) / scale
        # J = [v | -T^]; solve J (ds, dth) = -h
        det = -vx * ty + vy * tx
        singular = np.abs(det) < _SINGULAR * (1.0 + _norm2(tx, ty))
        ds = -(-ty * hx + tx * hy) / det
        dth = -(vx * hy - vy * hx) / det
        return res, (ds, dth), singular

    return fun


def _k_system(T1, T2, vx, vy):
    tn = _norm2(T1, T2)
    vn = _norm2(vx, vy)

    def fun(x):
        rho, tau = x
        ft = T1 * np.sin(tau) - T2 * np.cos(tau)
        jt = T1 * np.cos(tau) + T2 * np.sin(tau)
        fr = vx * np.sin(rho) - vy * np.cos(rho)
        jr = vx * np.cos(rho) + vy * np.sin(rho)
        res = np.maximum(np.abs(ft) / tn, np.abs(fr) / vn)
        singular = (np.abs(jt) < _SINGULAR * tn) | (np.abs(jr) < _SINGULAR * vn)
        return res, (-fr / jr, -ft / jt), singular

    return fun


def _raise(stage, ok, kind=NewtonDivergence):
    bad = np.flatnonzero(~np.asarray(ok).ravel())
    if bad.size:
        raise kind(f"{stage}: Newton failed at {bad.size} entr{'y' if bad.size == 1 else 'ies'}"
                   f" (first index {bad[0]})", index=int(bad[0]))


def solve_angles_g(spec: TableSpec, p: CPhasePoint, guess, tol=TOL, max_iter=MAX_ITER):
    """Solve ``g = 0`` for ``(tau, gamma)``; returns ``(tau, gamma, vx, vy)``."""
    p = CPhasePoint(*p)
    T1, T2 = curve_jet(spec, p.theta, 1)[1]
    if np.any(_norm2(T1, T2) < _SINGULAR):
        raise DegenerateError("tangent vanishes")
    (tau, gamma), ok, _, _ = _newton(_g_system(T1, T2, p.r), guess, tol, max_iter)
    _raise("g", ok)
    return tau, gamma, np.cos(gamma + tau), np.sin(gamma + tau)


def solve_chord_h(spec: TableSpec, p: CPhasePoint, v, guess, tol=TOL, max_iter=MAX_ITER):
    """Solve the (undeflated) chord equation ``h = 0`` for ``(s, theta_hat)``."""
    p = CPhasePoint(*p)
    bx, by = curve_jet(spec, p.theta, 0)[0]
    (s, th), ok, _, _ = _newton(_h_system(spec, bx, by, *v), guess, tol, max_iter)
    _raise("h", ok)
    return s, th


def solve_reflection_k(spec: TableSpec, theta_hat, v, guess, tol=TOL, max_iter=MAX_ITER):
    """Solve ``k = 0`` for ``(rho_hat, tau_hat)``; returns ``(rho_hat, tau_hat, r_hat)``."""
    T1, T2 = curve_jet(spec, np.asarray(theta_hat, complex), 1)[1]
    (rho, tau), ok, _, _ = _newton(_k_system(T1, T2, *v), guess, tol, max_iter)
    _raise("k", ok)
    return rho, tau, np.cos(rho - tau)


def _solve_all(spec, theta, r, guess: AngleBundle, tol=TOL, max_iter=MAX_ITER):
    """All three solves from ``guess``; returns ``(bundle, ok, contracted)``."""
    jet = curve_jet(spec, theta, 1)
    (bx, by), (T1, T2) = jet
    (tau, gamma), ok_g, c_g, _ = _newton(_g_system(T1, T2, r), (guess.tau, guess.gamma),
                                         tol, max_iter)
    vx, vy = np.cos(gamma + tau), np.sin(gamma + tau)
    (s, th), ok_h, c_h, _ = _newton(_h_system(spec, bx, by, vx, vy),
                                    (guess.s, guess.theta_hat), tol, max_iter)
    Th1, Th2 = curve_jet(spec, th, 1)[1]
    (rho, tauh), ok_k, c_k, _ = _newton(_k_system(Th1, Th2, vx, vy),
                                        (guess.rho_hat, guess.tau_hat), tol, max_iter)
    bundle = AngleBundle(tau, gamma, vx, vy, s, th, rho, tauh)
    return bundle, ok_g & ok_h & ok_k, c_g & c_h & c_k


def real_guess(spec: TableSpec, theta, r, target_theta=None) -> GuessBundle:
    """Solved bundles at real points from the real kernel, with ``theta_hat`` lifted.

    ``theta_hat`` is placed at ``theta + ((theta_hat - theta) mod 1)``; if
    ``target_theta`` is given it is then shifted by the integer bringing it
    closest to the target.
    """
    theta = np.atleast_1d(np.asarray(theta, float))
    r = np.atleast_1d(np.asarray(r, float))
    theta, r = np.broadcast_arrays(theta, r)
    coef = spec.packed()
    out = np.empty((8,) + theta.shape)
    for i in np.ndindex(theta.shape):
        st, th, _, s, vx, vy, tau, gamma, rho, tauh, _ = _kernels.step(coef, theta[i], r[i])
        if st != 0:
            raise NewtonDivergence(f"real start failed at theta={theta[i]}, r={r[i]}",
                                   index=int(np.ravel_multi_index(i, theta.shape)))
        d = th - theta[i]
        lifted = theta[i] + (d - math.floor(d))
        out[(slice(None),) + i] = (tau, gamma, vx, vy, s, lifted, rho, tauh)
    if target_theta is not None:
        out[5] += np.round(np.asarray(target_theta, float) - out[5])
    c = out.astype(complex)
    return GuessBundle(AngleBundle(*c), CPhasePoint(theta.astype(complex), r.astype(complex)))


def continue_paths(spec: TableSpec, path: Callable, start: GuessBundle, *,
                   substeps: int = SUBSTEPS, max_depth: int = MAX_DEPTH,
                   tol: float = TOL, max_iter: int = MAX_ITER, raise_on_fail: bool = True):
    """Continue solved bundles along paths ``t -> path(t, idx)``, ``t`` in ``[0, 1]``.

    ``start`` holds the solved bundles at ``t = 0`` (flat arrays, one entry per path).
    ``path(t, idx)`` returns ``(theta, r)`` for the paths ``idx`` at parameters ``t``.
    A step is accepted when every sub-solve converges and its first Newton step
    contracts the residual at least twofold; otherwise that path's step is halved,
    up to ``max_depth`` times.

    Returns ``(GuessBundle at t = 1, ok mask, reached t)``.
    """
    cur = start.copy()
    m = cur.point.theta.size
    base = 1.0 / substeps
    t = np.zeros(m)
    dt = np.full(m, base)
    depth = np.zeros(m, int)
    active = np.ones(m, bool)
    failed = np.zeros(m, bool)
    while active.any():
        idx = np.flatnonzero(active)
        t_try = np.minimum(t[idx] + dt[idx], 1.0)
        th, r = path(t_try, idx)
        th = np.asarray(th, complex)
        r = np.asarray(r, complex)
        bundle, ok, contracted = _solve_all(spec, th, r, cur.bundle.take(idx), tol, max_iter)
        good = ok & contracted
        gi = idx[good]
        if gi.size:
            cur.put(gi, GuessBundle(bundle.take(good), CPhasePoint(th[good], r[good])))
            t[gi] = t_try[good]
            grow = depth[gi] > 0
            dt[gi[grow]] *= 2.0
            depth[gi[grow]] -= 1
        bi = idx[~good]
        dt[bi] *= 0.5
        depth[bi] += 1
        failed[bi[depth[bi] > max_depth]] = True
        active = ~failed & (t < 1.0)
    if raise_on_fail and failed.any():
        j = int(np.flatnonzero(failed)[0])
        raise ContinuationError(
            f"continuation lost on {int(failed.sum())} path(s); first at index {j}, t={t[j]:.3g}",
            stage="continuation", node=j, reached=float(t[j]))
    return cur, ~failed, t


def complex_step(spec: TableSpec, p: CPhasePoint, guess: GuessBundle, **kw):
    """``f(p)`` continued along the straight segment from ``guess.point`` to ``p``.

    Returns ``(CPhasePoint image, GuessBundle at p)``; ``theta_hat`` is not reduced.
    """
    p = CPhasePoint(*p)
    shape = np.broadcast(p.theta, p.r, guess.point.theta).shape
    th1 = np.broadcast_to(p.theta, shape).ravel()
    r1 = np.broadcast_to(p.r, shape).ravel()
    flat = GuessBundle(AngleBundle(*(np.broadcast_to(np.asarray(f, complex), shape).ravel().copy()
                                     for f in guess.bundle._fields())),
                       CPhasePoint(np.broadcast_to(guess.point.theta, shape).ravel().copy(),
                                   np.broadcast_to(guess.point.r, shape).ravel().copy()))
    th0, r0 = flat.point.theta.copy(), flat.point.r.copy()

    def path(t, idx):
        return th0[idx] + t * (th1[idx] - th0[idx]), r0[idx] + t * (r1[idx] - r0[idx])

    solved, _, _ = continue_paths(spec, path, flat, **kw)
    b = AngleBundle(*(f.reshape(shape) for f in solved.bundle._fields()))
    out = GuessBundle(b, CPhasePoint(solved.point.theta.reshape(shape),
                                     solved.point.r.reshape(shape)))
    return out.image, out


def residuals(spec: TableSpec, solved: GuessBundle):
    """Max-abs residuals ``(g, h, k)`` of a solved bundle (scaled as in the solvers)."""
    b, p = solved.bundle, solved.point
    (bx, by), (T1, T2) = curve_jet(spec, p.theta, 1)
    rg = _g_system(T1, T2, p.r)((b.tau, b.gamma))[0]
    rh = _h_system(spec, bx, by, b.vx, b.vy)((b.s, b.theta_hat))[0]
    Th1, Th2 = curve_jet(spec, b.theta_hat, 1)[1]
    rk = _k_system(Th1, Th2, b.vx, b.vy)((b.rho_hat, b.tau_hat))[0]
    return float(np.max(rg)), float(np.max(rh)), float(np.max(rk))


def jacobian_df(spec: TableSpec, p: CPhasePoint, solved: GuessBundle) -> np.ndarray:
    """``Df`` at ``p`` by implicit differentiation of ``g``, ``h`` and ``k``.

    Returns an array of shape ``p.shape + (2, 2)`` with rows
    ``(d theta_hat, d r_hat)`` and columns ``(d/d theta, d/d r)``.
    """
    p = CPhasePoint(*p)
    b = solved.bundle
    tau, gamma, s = np.asarray(b.tau), np.asarray(b.gamma), np.asarray(b.s)
    vx, vy = np.asarray(b.vx), np.asarray(b.vy)
    _, (T1, T2), (T1p, T2p) = curve_jet(spec, p.theta, 2)
    _, (U1, U2), (U1p, U2p) = curve_jet(spec, np.asarray(b.theta_hat), 2)

    # g: d gamma / dr and d tau / d theta
    dgam_dr = -1.0 / np.sin(gamma)
    dtau_dth = -(T1p * np.sin(tau) - T2p * np.cos(tau)) / (T1 * np.cos(tau) + T2 * np.sin(tau))
    wx, wy = -np.sin(gamma + tau), np.cos(gamma + tau)

    # h: [v | -T^] (ds, dth^) = -(T + s dv/dtheta) for theta, -(s dv/dr) for r
    det = -vx * U2 + vy * U1

    def solve_h(rx, ry):
        ds = (-U2 * rx + U1 * ry) / det
        dthh = (vx * ry - vy * rx) / det
        return ds, dthh

    _, dthh_dth = solve_h(-(T1 + s * wx * dtau_dth), -(T2 + s * wy * dtau_dth))
    _, dthh_dr = solve_h(-(s * wx * dgam_dr), -(s * wy * dgam_dr))

    # k: tau_hat follows theta_hat, rho_hat follows v
    rho, tauh = np.asarray(b.rho_hat), np.asarray(b.tau_hat)
    dtauh = -(U1p * np.sin(tauh) - U2p * np.cos(tauh)) / (U1 * np.cos(tauh) + U2 * np.sin(tauh))
    jr = vx * np.cos(rho) + vy * np.sin(rho)

    def drho(dphi):  # dv = w dphi
        return -(wx * np.sin(rho) - wy * np.cos(rho)) * dphi / jr

    gh = -np.sin(rho - tauh)
    drh_dth = gh * (drho(dtau_dth) - dtauh * dthh_dth)
    drh_dr = gh * (drho(dgam_dr) - dtauh * dthh_dr)

    out = np.empty(np.shape(dthh_dth) + (2, 2), dtype=complex)
    out[..., 0, 0] = dthh_dth
    out[..., 0, 1] = dthh_dr
    out[..., 1, 0] = drh_dth
    out[..., 1, 1] = drh_dr
    return out
