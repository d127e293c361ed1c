"""Global stable/unstable manifolds from local charts by fundamental-domain iteration.

For a chart of a period-``K`` orbit each component satisfies
``f^K(P_j(sigma)) = P_j(rate^K sigma)`` (stable) or
``f^K(P_j(rate^K sigma)) = P_j(sigma)`` (unstable), so the segment
``sigma`` in ``[rate^K, 1]`` is a fundamental domain: its images under ``f^{nK}``
(unstable) or ``f^{-nK}`` (stable) tile the global manifold. One iterate below
means one application of ``f^{+-K}``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .boundary import TableSpec
from .errors import BilliardError
from .realmap import orbit
from .spectral import SpectralChart, coeff_decay_report

__all__ = [
    "ManifoldCurve",
    "fundamental_domain_points",
    "grow_manifolds",
    "polyline_distance",
    "min_distance_to_curves",
    "distance_to_points",
    "lambda_lemma_distances",
]

log = logging.getLogger(__name__)


@dataclass
class ManifoldCurve:
    """One branch ``(component, sign, kind)`` of a grown manifold.

    ``iterates[n, i]`` is the ``(theta, r)`` image of the fundamental sample
    ``sigma[i]`` after ``n`` iterates; ``theta`` is unwrapped (continuous along
    each strand) and NaN marks samples lost to step failures.
    """

    component: int
    sign: int
    kind: str
    sigma: np.ndarray
    iterates: np.ndarray

    @property
    def branch(self) -> tuple[int, int, str]:
        return (self.component, self.sign, self.kind)

    @property
    def M(self) -> int:
        return self.iterates.shape[0] - 1

    def strand(self, n: int, wrap: bool = False) -> np.ndarray:
        s = self.iterates[n].copy()
        if wrap:
            s[:, 0] -= np.floor(s[:, 0])
        return s

    @property
    def samples(self):
        """``(iterate, theta mod 1, r)`` rows for every valid sample."""
        rows = []
        for n in range(self.M + 1):
            s = self.strand(n, wrap=True)
            ok = np.isfinite(s).all(axis=1)
            rows.extend((n, float(t), float(r)) for t, r in s[ok])
        return rows


def _check_tail(chart: SpectralChart, tail_tol: float):
    tail = coeff_decay_report(chart)[-1][1]
    if tail > np.log10(tail_tol):
        raise ValueError(f"chart tail 10^{tail:.1f} exceeds {tail_tol:g}; "
                         "use a larger N or a smaller scale")


def fundamental_domain_points(chart: SpectralChart, J: int, tail_tol: float = 1e-8):
    """Log-spaced samples of ``[rate^K, 1]`` on both sign branches.

    Returns a list of ``(sign, sigma (J,), points (K, J, 2))``.
    """
    if J < 2:
        raise ValueError("J must be >= 2")
    _check_tail(chart, tail_tol)
    lo = chart.rate ** chart.K
    sig = np.geomspace(lo, 1.0, J)
    out = []
    for sign in (1, -1):
        vals = chart.evaluate(sign * sig).real          # (2K, J)
        pts = np.stack([vals[0::2], vals[1::2]], axis=-1)
        out.append((sign, sign * sig, pts))
    return out


def _iterate_strand(spec, start, K, M, reverse):
    """``(M+1, J, 2)`` images of ``start`` under ``f^{+-K}``, theta unwrapped."""
    J = start.shape[0]
    res = np.full((M + 1, J, 2), np.nan)
    res[0] = start
    if M == 0:
        return res
    lost = 0
    for i in range(J):
        try:
            o = orbit(spec, start[i], M * K, reverse_time=reverse)
            th = o.theta[::K]
            r = o.r[::K]
        except BilliardError as exc:
            lost += 1
            part = exc.last_iterate
            n_ok = 0 if part is None else (len(part.theta) - 1) // K
            th = np.full(M + 1, np.nan)
            r = np.full(M + 1, np.nan)
            if part is not None:
                th[: n_ok + 1] = part.theta[: n_ok * K + 1: K]
                r[: n_ok + 1] = part.r[: n_ok * K + 1: K]
        res[1:, i, 0] = th[1:]
        res[1:, i, 1] = r[1:]
    if lost:
        log.warning("%d of %d strand samples truncated by step failures", lost, J)
    # unwrap theta along each strand so consecutive samples stay close
    for n in range(1, M + 1):
        t = res[n, :, 0]
        ok = np.isfinite(t)
        if ok.any():
            tt = t[ok]
            steps = (np.diff(tt) + 0.5) % 1.0 - 0.5
            res[n, ok, 0] = tt[0] + np.concatenate([[0.0], np.cumsum(steps)])
    return res


def grow_manifolds(spec: TableSpec, chart: SpectralChart, J: int = 500, M: int = 4,
                   tail_tol: float = 1e-8) -> list[ManifoldCurve]:
    """Forward (unstable) or inverse (stable) images of the fundamental samples."""
    reverse = chart.kind == "stable"
    curves = []
    for sign, sig, pts in fundamental_domain_points(chart, J, tail_tol):
        for j in range(chart.K):
            it = _iterate_strand(spec, pts[j], chart.K, M, reverse)
            curves.append(ManifoldCurve(j, sign, chart.kind, sig, it))
    return curves


def polyline_distance(points, line, period: float = 1.0) -> np.ndarray:
    """Distance from each of ``points (m, 2)`` to the polyline ``line (k, 2)``.

    ``theta`` is periodic: the polyline is compared against every integer shift
    of the points that can reach it. NaN vertices split the polyline.
    """
    points = np.asarray(points, float)
    line = np.asarray(line, float)
    a, b = line[:-1], line[1:]
    seg_ok = np.isfinite(a).all(1) & np.isfinite(b).all(1)
    a, b = a[seg_ok], b[seg_ok]
    best = np.full(len(points), np.inf)
    if a.size == 0:
        return best
    ab = b - a
    L2 = np.maximum(np.einsum("ij,ij->i", ab, ab), 1e-300)
    lo = np.floor(min(a[:, 0].min(), b[:, 0].min()) - points[:, 0].max()) - 1
    hi = np.ceil(max(a[:, 0].max(), b[:, 0].max()) - points[:, 0].min()) + 1
    for shift in np.arange(lo, hi + 1) * period:
        p = points + [shift, 0.0]
        ap = p[:, None, :] - a[None, :, :]
        t = np.clip(np.einsum("mkj,kj->mk", ap, ab) / L2, 0.0, 1.0)
        d = ap - t[..., None] * ab[None]
        best = np.minimum(best, np.sqrt(np.min(np.einsum("mkj,mkj->mk", d, d), axis=1)))
    return best


def min_distance_to_curves(points, curves: list[ManifoldCurve], iterates=None) -> float:
    """Minimum distance from ``points`` to the strands of ``curves`` (``theta`` periodic)."""
    pts = np.asarray(points, float)
    pts = pts[np.isfinite(pts).all(1)]
    if pts.size == 0:
        return np.inf
    best = np.inf
    for c in curves:
        for n in (range(c.M + 1) if iterates is None else iterates):
            best = min(best, float(np.min(polyline_distance(pts, c.strand(n)))))
    return best


def distance_to_points(points, targets) -> float:
    """Minimum Euclidean distance between two point sets, ``theta`` taken mod 1."""
    a = np.asarray(points, float).reshape(-1, 2)
    a = a[np.isfinite(a).all(1)]
    b = np.asarray(targets, float).reshape(-1, 2)
    if a.size == 0 or b.size == 0:
        return np.inf
    dth = np.mod(a[:, None, 0] - b[None, :, 0], 1.0)
    dth = np.minimum(dth, 1.0 - dth)
    dr = a[:, None, 1] - b[None, :, 1]
    return float(np.sqrt(np.min(dth * dth + dr * dr)))


def lambda_lemma_distances(curves: list[ManifoldCurve], orbit_points) -> list[float]:
    """Distance from the iterate-``n`` unstable samples to the saddle orbit, ``n = 1..M``.

    Unstable strands are stretched along the unstable direction and pulled
    towards the stable manifold, so under repeated iteration their closest
    approach to the orbit shrinks. This measure is free of the sampling
    resolution that limits distances to a discretized stable curve.
    """
    uns = [c for c in curves if c.kind == "unstable"]
    if not uns:
        raise ValueError("need unstable curves")
    M = min(c.M for c in uns)
    return [min(distance_to_points(c.strand(n), orbit_points) for c in uns)
            for n in range(1, M + 1)]
