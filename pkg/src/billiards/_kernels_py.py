"""Pure-Python billiard step kernels.

Reference implementation and import-time fallback for the compiled
``_ckernels`` module; both expose the same functions and status codes.
``coef`` is the ``(4, n)`` array ``[cos_x, sin_x, cos_y, sin_y]``.
"""
import math

import numpy as np

OK = 0
DOMAIN = 1
DEGENERATE = 2
DIVERGED = 3
BAD_CHORD = 4

TOL = 1e-13
MAX_ITER = 50
GRID = 64
TWO_PI = 2.0 * math.pi

BACKEND = "python"


def _curve(coef, th):
    """Return ``(x, y, x', y')`` at real ``th``."""
    n = len(coef[0])
    cx, sx, cy, sy = coef[0], coef[1], coef[2], coef[3]
    x = y = dx = dy = 0.0
    for k in range(1, n + 1):
        w = TWO_PI * k
        c = math.cos(w * th)
        s = math.sin(w * th)
        a, b, p, q = cx[k - 1], sx[k - 1], cy[k - 1], sy[k - 1]
        x += a * c + b * s
        y += p * c + q * s
        dx += w * (b * c - a * s)
        dy += w * (q * c - p * s)
    return x, y, dx, dy


def _ellipse_guess(a, b, theta, vx, vy):
    c = math.cos(TWO_PI * theta)
    sn = math.sin(TWO_PI * theta)
    d1 = vx / a
    d2 = vy / b
    den = max(d1 * d1 + d2 * d2, 1e-300)
    s_star = -2.0 * (d1 * c + d2 * sn) / den
    xh = a * c + s_star * vx
    yh = b * sn + s_star * vy
    th = math.atan2(yh / b, xh / a) / TWO_PI
    return s_star, th - math.floor(th)


def _grid_guess(coef, theta, bx, by, vx, vy):
    best = (math.inf, -1.0, theta)
    for j in range(GRID):
        th = theta + (j + 0.5) / GRID
        x, y, _, _ = _curve(coef, th)
        ex, ey = x - bx, y - by
        s = ex * vx + ey * vy
        if s <= 0.0:
            continue
        res = abs(ex * vy - ey * vx)
        if res < best[0]:
            best = (res, s, th)
    return best[1], best[2]


def _newton(coef, theta, bx, by, vx, vy, s, th):
    """Deflated Newton on ``h(s, th) / |(s, th - theta)|``; returns (ok, s, th, iters)."""
    for it in range(MAX_ITER):
        x, y, tx, ty = _curve(coef, th)
        hx = bx + s * vx - x
        hy = by + s * vy - y
        delta = th - theta - round(th - theta)
        d2 = s * s + delta * delta
        if d2 < 1e-20:
            s += 1e-8
            continue
        d = math.sqrt(d2)
        gx = hx / d
        gy = hy / d
        if math.hypot(gx, gy) < TOL:
            return s > 0.0, s, th, it
        d3 = d2 * d
        a11 = vx / d - hx * s / d3
        a12 = -tx / d - hx * delta / d3
        a21 = vy / d - hy * s / d3
        a22 = -ty / d - hy * delta / d3
        det = a11 * a22 - a12 * a21
        if det == 0.0:
            return False, s, th, it
        ds = -(a22 * gx - a12 * gy) / det
        dth = -(a11 * gy - a21 * gx) / det
        if dth > 0.25:
            dth = 0.25
        elif dth < -0.25:
            dth = -0.25
        s += ds
        th += dth
        if abs(ds) + abs(dth) < 1e-16:
            x, y, _, _ = _curve(coef, th)
            ok = math.hypot(bx + s * vx - x, by + s * vy - y) < 1e-12
            return ok and s > 0.0, s, th, it + 1
    return False, s, th, MAX_ITER


def step(coef, theta, r, vpx=0.0, vpy=0.0, has_prev=False):
    """One bounce. Returns ``(status, theta_hat, r_hat, s, vx, vy, tau, gamma,
    rho_hat, tau_hat, iters)``; ``theta_hat`` is reduced mod 1."""
    nan = math.nan
    if not (-1.0 < r < 1.0):
        return (DOMAIN, nan, nan, nan, nan, nan, nan, nan, nan, nan, 0)
    bx, by, tx, ty = _curve(coef, theta)
    if math.hypot(tx, ty) < 1e-12:
        return (DEGENERATE, nan, nan, nan, nan, nan, nan, nan, nan, nan, 0)
    tau = math.atan2(ty, tx)
    gamma = math.acos(r)
    vx = math.cos(gamma + tau)
    vy = math.sin(gamma + tau)

    a = coef[0][0]
    b = coef[3][0]
    s0, th0 = _ellipse_guess(a, b, theta, vx, vy)
    if not s0 > 1e-12 and has_prev:
        # reflect the previous chord direction off the associated ellipse at E(theta)
        ex = -a * math.sin(TWO_PI * theta)
        ey = b * math.cos(TWO_PI * theta)
        en = math.hypot(ex, ey)
        ex /= en
        ey /= en
        dot = vpx * ex + vpy * ey
        s0, th0 = _ellipse_guess(a, b, theta, 2.0 * dot * ex - vpx, 2.0 * dot * ey - vpy)
    tried_grid = False
    if not s0 > 1e-12:
        s0, th0 = _grid_guess(coef, theta, bx, by, vx, vy)
        tried_grid = True
    ok, s, th, iters = _newton(coef, theta, bx, by, vx, vy, s0, th0)
    if not ok and not tried_grid:
        s0, th0 = _grid_guess(coef, theta, bx, by, vx, vy)
        ok, s, th, more = _newton(coef, theta, bx, by, vx, vy, s0, th0)
        iters += more
    if not ok:
        status = BAD_CHORD if iters < MAX_ITER else DIVERGED
        return (status, th, nan, s, vx, vy, tau, gamma, nan, nan, iters)

    _, _, thx, thy = _curve(coef, th)
    tau_hat = math.atan2(thy, thx)
    rho_hat = math.atan2(vy, vx)
    r_hat = math.cos(rho_hat - tau_hat)
    th -= math.floor(th)
    return (OK, th, r_hat, s, vx, vy, tau, gamma, rho_hat, tau_hat, iters)


def orbit(coef, theta0, r0, n, reverse=False):
    """Iterate ``n`` bounces (or inverse bounces when ``reverse``).

    Returns ``(status, fail_index, theta[n+1], r[n+1], s[n], dtheta[n])``.
    On failure the arrays past ``fail_index`` are NaN.
    """
    theta = np.full(n + 1, np.nan)
    rr = np.full(n + 1, np.nan)
    ss = np.full(n, np.nan)
    dth = np.full(n, np.nan)
    theta[0] = theta0 - math.floor(theta0)
    rr[0] = r0
    sign = -1.0 if reverse else 1.0
    vpx = vpy = 0.0
    has_prev = False
    for i in range(n):
        out = step(coef, theta[i], sign * rr[i], vpx, vpy, has_prev)
        if out[0] != OK:
            return out[0], i, theta, rr, ss, dth
        theta[i + 1] = out[1]
        rr[i + 1] = sign * out[2]
        ss[i] = out[3]
        d = out[1] - theta[i]
        dth[i] = d - math.floor(d)
        vpx, vpy, has_prev = out[4], out[5], True
    return OK, -1, theta, rr, ss, dth


def orbit_batch(coef, theta0, r0, n):
    """Forward orbits for many seeds. Returns ``(status[m], fail_index[m],
    dtheta[m, n], theta_end[m], r_end[m])``."""
    theta0 = np.asarray(theta0, dtype=float)
    r0 = np.asarray(r0, dtype=float)
    m = theta0.size
    status = np.zeros(m, dtype=np.int32)
    fail = np.full(m, -1, dtype=np.int64)
    dth = np.full((m, n), np.nan)
    tend = np.full(m, np.nan)
    rend = np.full(m, np.nan)
    for j in range(m):
        st, fi, th, rr, _, d = orbit(coef, theta0[j], r0[j], n)
        status[j] = st
        fail[j] = fi
        dth[j] = d
        tend[j] = th[-1]
        rend[j] = rr[-1]
    return status, fail, dth, tend, rend
