# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled billiard step kernels; mirror of ``_kernels_py`` (same API, same codes)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, atan2, acos, sqrt, fabs, floor, round, hypot, NAN, INFINITY, M_PI

cnp.import_array()

cdef double TOL = 1e-13
cdef enum:
    MAX_ITER = 50
    GRID = 64

OK = 0
DOMAIN = 1
DEGENERATE = 2
DIVERGED = 3
BAD_CHORD = 4
BACKEND = "cython"

cdef double TWO_PI = 2.0 * M_PI


cdef struct StepOut:
    int status
    double theta_hat, r_hat, s, vx, vy, tau, gamma, rho_hat, tau_hat
    int iters


cdef inline void _curve(const double[:, ::1] coef, double th,
                        double* x, double* y, double* dx, double* dy) noexcept nogil:
    cdef Py_ssize_t n = coef.shape[1], k
    cdef double w, c, s, a, b, p, q
    x[0] = 0.0; y[0] = 0.0; dx[0] = 0.0; dy[0] = 0.0
    for k in range(n):
        w = TWO_PI * (k + 1)
        c = cos(w * th)
        s = sin(w * th)
        a = coef[0, k]; b = coef[1, k]; p = coef[2, k]; q = coef[3, k]
        x[0] += a * c + b * s
        y[0] += p * c + q * s
        dx[0] += w * (b * c - a * s)
        dy[0] += w * (q * c - p * s)


cdef inline void _ellipse_guess(double a, double b, double theta, double vx, double vy,
                                double* s_out, double* th_out) noexcept nogil:
    cdef double c = cos(TWO_PI * theta), sn = sin(TWO_PI * theta)
    cdef double d1 = vx / a, d2 = vy / b
    cdef double den = d1 * d1 + d2 * d2
    if den < 1e-300:
        den = 1e-300
    cdef double s_star = -2.0 * (d1 * c + d2 * sn) / den
    cdef double xh = a * c + s_star * vx, yh = b * sn + s_star * vy
    cdef double th = atan2(yh / b, xh / a) / TWO_PI
    s_out[0] = s_star
    th_out[0] = th - floor(th)


cdef inline void _grid_guess(const double[:, ::1] coef, double theta, double bx, double by,
                             double vx, double vy, double* s_out, double* th_out) noexcept nogil:
    cdef double best = INFINITY, bs = -1.0, bth = theta
    cdef double th, x, y, dx, dy, ex, ey, s, res
    cdef int j
    for j in range(GRID):
        th = theta + (j + 0.5) / GRID
        _curve(coef, th, &x, &y, &dx, &dy)
        ex = x - bx; ey = y - by
        s = ex * vx + ey * vy
        if s <= 0.0:
            continue
        res = fabs(ex * vy - ey * vx)
        if res < best:
            best = res; bs = s; bth = th
    s_out[0] = bs
    th_out[0] = bth


cdef int _newton(const double[:, ::1] coef, double theta, double bx, double by,
                 double vx, double vy, double* s_io, double* th_io, int* iters) noexcept nogil:
    cdef double s = s_io[0], th = th_io[0]
    cdef double x, y, tx, ty, hx, hy, delta, d2, d, d3, gx, gy
    cdef double a11, a12, a21, a22, det, ds, dth
    cdef int it, ok = 0
    iters[0] = MAX_ITER
    for it in range(MAX_ITER):
        _curve(coef, th, &x, &y, &tx, &ty)
        hx = bx + s * vx - x
        hy = by + s * vy - y
        delta = th - theta - round(th - theta)
        d2 = s * s + delta * delta
        if d2 < 1e-20:
            s += 1e-8
            continue
        d = sqrt(d2)
        gx = hx / d
        gy = hy / d
        if hypot(gx, gy) < TOL:
            ok = s > 0.0
            iters[0] = it
            break
        d3 = d2 * d
        a11 = vx / d - hx * s / d3
        a12 = -tx / d - hx * delta / d3
        a21 = vy / d - hy * s / d3
        a22 = -ty / d - hy * delta / d3
        det = a11 * a22 - a12 * a21
        if det == 0.0:
            iters[0] = it
            break
        ds = -(a22 * gx - a12 * gy) / det
        dth = -(a11 * gy - a21 * gx) / det
        if dth > 0.25:
            dth = 0.25
        elif dth < -0.25:
            dth = -0.25
        s += ds
        th += dth
        if fabs(ds) + fabs(dth) < 1e-16:
            _curve(coef, th, &x, &y, &tx, &ty)
            ok = hypot(bx + s * vx - x, by + s * vy - y) < 1e-12 and s > 0.0
            iters[0] = it + 1
            break
    s_io[0] = s
    th_io[0] = th
    return ok


cdef StepOut _step(const double[:, ::1] coef, double theta, double r,
                   double vpx, double vpy, bint has_prev) noexcept nogil:
    cdef StepOut out
    cdef double bx, by, tx, ty, a, b, s0, th0, ex, ey, en, dot, thx, thy, dummy1, dummy2
    cdef int ok, iters, more
    cdef bint tried_grid = False
    out.status = 0
    out.theta_hat = NAN; out.r_hat = NAN; out.s = NAN; out.vx = NAN; out.vy = NAN
    out.tau = NAN; out.gamma = NAN; out.rho_hat = NAN; out.tau_hat = NAN; out.iters = 0
    if not (-1.0 < r < 1.0):
        out.status = 1
        return out
    _curve(coef, theta, &bx, &by, &tx, &ty)
    if hypot(tx, ty) < 1e-12:
        out.status = 2
        return out
    out.tau = atan2(ty, tx)
    out.gamma = acos(r)
    out.vx = cos(out.gamma + out.tau)
    out.vy = sin(out.gamma + out.tau)

    a = coef[0, 0]
    b = coef[3, 0]
    _ellipse_guess(a, b, theta, out.vx, out.vy, &s0, &th0)
    if not s0 > 1e-12 and has_prev:
        ex = -a * sin(TWO_PI * theta)
        ey = b * cos(TWO_PI * theta)
        en = hypot(ex, ey)
        ex /= en
        ey /= en
        dot = vpx * ex + vpy * ey
        _ellipse_guess(a, b, theta, 2.0 * dot * ex - vpx, 2.0 * dot * ey - vpy, &s0, &th0)
    if not s0 > 1e-12:
        _grid_guess(coef, theta, bx, by, out.vx, out.vy, &s0, &th0)
        tried_grid = True
    ok = _newton(coef, theta, bx, by, out.vx, out.vy, &s0, &th0, &iters)
    if not ok and not tried_grid:
        _grid_guess(coef, theta, bx, by, out.vx, out.vy, &s0, &th0)
        ok = _newton(coef, theta, bx, by, out.vx, out.vy, &s0, &th0, &more)
        iters += more
    out.iters = iters
    out.s = s0
    if not ok:
        out.status = 4 if iters < MAX_ITER else 3
        out.theta_hat = th0
        return out
    _curve(coef, th0, &dummy1, &dummy2, &thx, &thy)
    out.tau_hat = atan2(thy, thx)
    out.rho_hat = atan2(out.vy, out.vx)
    out.r_hat = cos(out.rho_hat - out.tau_hat)
    out.theta_hat = th0 - floor(th0)
    return out


def step(const double[:, ::1] coef, double theta, double r,
         double vpx=0.0, double vpy=0.0, bint has_prev=False):
    """One bounce. Returns ``(status, theta_hat, r_hat, s, vx, vy, tau, gamma,
    rho_hat, tau_hat, iters)``; ``theta_hat`` is reduced mod 1."""
    cdef StepOut o = _step(coef, theta, r, vpx, vpy, has_prev)
    return (o.status, o.theta_hat, o.r_hat, o.s, o.vx, o.vy, o.tau, o.gamma,
            o.rho_hat, o.tau_hat, o.iters)


cdef int _orbit(const double[:, ::1] coef, double theta0, double r0, Py_ssize_t n, double sign,
                double[::1] theta, double[::1] rr, double[::1] ss, double[::1] dth,
                Py_ssize_t* fail) noexcept nogil:
    cdef Py_ssize_t i
    cdef double vpx = 0.0, vpy = 0.0, d
    cdef bint has_prev = False
    cdef StepOut o
    theta[0] = theta0 - floor(theta0)
    rr[0] = r0
    fail[0] = -1
    for i in range(n):
        o = _step(coef, theta[i], sign * rr[i], vpx, vpy, has_prev)
        if o.status != 0:
            fail[0] = i
            return o.status
        theta[i + 1] = o.theta_hat
        rr[i + 1] = sign * o.r_hat
        ss[i] = o.s
        d = o.theta_hat - theta[i]
        dth[i] = d - floor(d)
        vpx = o.vx; vpy = o.vy; has_prev = True
    return 0


def orbit(const double[:, ::1] coef, double theta0, double r0, Py_ssize_t n, bint reverse=False):
    """Iterate ``n`` bounces (or inverse bounces when ``reverse``).

    Returns ``(status, fail_index, theta[n+1], r[n+1], s[n], dtheta[n])``.
    """
    theta = np.full(n + 1, np.nan)
    rr = np.full(n + 1, np.nan)
    ss = np.full(n, np.nan)
    dth = np.full(n, np.nan)
    cdef double[::1] tv = theta, rv = rr, sv = ss, dv = dth
    cdef Py_ssize_t fail
    cdef int status
    cdef double sign = -1.0 if reverse else 1.0
    with nogil:
        status = _orbit(coef, theta0, r0, n, sign, tv, rv, sv, dv, &fail)
    return status, fail, theta, rr, ss, dth


def orbit_batch(const double[:, ::1] coef, theta0, r0, Py_ssize_t n):
    """Forward orbits for many seeds. Returns ``(status[m], fail_index[m],
    dtheta[m, n], theta_end[m], r_end[m])``. Runs without the GIL."""
    cdef double[::1] t0 = np.ascontiguousarray(theta0, dtype=float).ravel()
    cdef double[::1] q0 = np.ascontiguousarray(r0, dtype=float).ravel()
    cdef Py_ssize_t m = t0.shape[0], j
    status = np.zeros(m, dtype=np.int32)
    fail = np.full(m, -1, dtype=np.int64)
    dth = np.full((m, n), np.nan)
    tend = np.full(m, np.nan)
    rend = np.full(m, np.nan)
    cdef int[::1] stv = status
    cdef long long[::1] fv = fail
    cdef double[:, ::1] dv = dth
    cdef double[::1] tev = tend, rev = rend
    cdef double[::1] tw = np.empty(n + 1), rw = np.empty(n + 1), sw = np.empty(n)
    cdef Py_ssize_t fi
    with nogil:
        for j in range(m):
            stv[j] = _orbit(coef, t0[j], q0[j], n, 1.0, tw, rw, sw, dv[j], &fi)
            fv[j] = fi
            if stv[j] == 0:
                tev[j] = tw[n]
                rev[j] = rw[n]
    return status, fail, dth, tend, rend
