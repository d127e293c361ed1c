"""Weighted Birkhoff averages, frequency computation and chaos detection."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .boundary import TableSpec
from .ellipse import PhasePoint
from .errors import BilliardError
from .realmap import orbit, orbit_batch

__all__ = [
    "ClassifiedPoint",
    "CHAOS_THRESHOLD",
    "bump_weights",
    "weighted_birkhoff_average",
    "wba_gap",
    "classify_orbit",
    "phase_portrait_scan",
    "grid_seeds",
    "random_seeds",
    "default_threads",
    "ChaoticRegion",
]

CHAOS_THRESHOLD = 1e-6


@dataclass(frozen=True)
class ClassifiedPoint:
    """Outcome of classifying one seed.

    ``chaotic`` is ``None`` and ``error`` is set when the orbit could not be
    computed. ``frequency`` is only populated for regular orbits.
    """

    seed: PhasePoint
    frequency: float | None
    chaotic: bool | None
    wba_gap: float
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def bump_weights(n: int) -> np.ndarray:
    """``w(k/n)``, ``k = 0..n-1``, for the bump ``w(t) = exp(-1/(t(1-t)))``."""
    if n < 2:
        raise ValueError("need at least two samples")
    t = np.arange(n) / n
    w = np.zeros(n)
    inner = (t > 0) & (t < 1)
    w[inner] = np.exp(-1.0 / (t[inner] * (1.0 - t[inner])))
    return w


def weighted_birkhoff_average(h) -> np.ndarray:
    """``sum_k w(k/N) h_k / sum_k w(k/N)`` along the last axis."""
    h = np.asarray(h, float)
    w = bump_weights(h.shape[-1])
    return h @ w / w.sum()


def wba_gap(dtheta) -> tuple[np.ndarray, np.ndarray]:
    """``(|WBA(first half) - WBA(second half)|, WBA(all))`` along the last axis."""
    dtheta = np.asarray(dtheta, float)
    half = dtheta.shape[-1] // 2
    gap = np.abs(weighted_birkhoff_average(dtheta[..., :half])
                 - weighted_birkhoff_average(dtheta[..., half:2 * half]))
    return gap, weighted_birkhoff_average(dtheta)


def classify_orbit(spec: TableSpec, p0: PhasePoint, n: int = 1000,
                   threshold: float = CHAOS_THRESHOLD) -> ClassifiedPoint:
    """Frequency and chaos flag from the WBA of the ``theta`` advance over ``n`` bounces."""
    p0 = PhasePoint(float(p0[0]), float(p0[1]))
    try:
        o = orbit(spec, p0, n)
    except BilliardError as exc:
        return ClassifiedPoint(p0, None, None, float("nan"), str(exc))
    gap, freq = wba_gap(o.dtheta)
    chaotic = bool(gap > threshold)
    return ClassifiedPoint(p0, None if chaotic else float(freq), chaotic, float(gap))


def default_threads() -> int:
    env = os.environ.get("BILLIARDS_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def phase_portrait_scan(spec: TableSpec, seeds, n: int = 1000,
                        threshold: float = CHAOS_THRESHOLD, threads: int | None = None,
                        chunk: int = 64) -> list[ClassifiedPoint]:
    """Classify every seed (``(m, 2)`` array of ``(theta, r)``); output follows seed order.

    Work is split into chunks run on a thread pool; the compiled kernel releases
    the GIL, so chunks run in parallel. Failed orbits are recorded, not raised.
    """
    seeds = np.asarray(seeds, float).reshape(-1, 2)
    if seeds.shape[0] == 0:
        raise ValueError("empty seed grid")
    threads = threads or default_threads()
    bounds = [(i, min(i + chunk, len(seeds))) for i in range(0, len(seeds), chunk)]

    def work(b):
        lo, hi = b
        return orbit_batch(spec, seeds[lo:hi, 0], seeds[lo:hi, 1], n)

    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, bounds))
    else:
        parts = [work(b) for b in bounds]

    out: list[ClassifiedPoint] = []
    for (lo, hi), (status, fail, dth, _, _) in zip(bounds, parts):
        gap, freq = wba_gap(np.nan_to_num(dth))
        for k in range(hi - lo):
            seed = PhasePoint(float(seeds[lo + k, 0]), float(seeds[lo + k, 1]))
            if status[k] != 0:
                out.append(ClassifiedPoint(seed, None, None, float("nan"),
                                           f"orbit failed at step {int(fail[k])} "
                                           f"(status {int(status[k])})"))
                continue
            chaotic = bool(gap[k] > threshold)
            out.append(ClassifiedPoint(seed, None if chaotic else float(freq[k]), chaotic,
                                       float(gap[k])))
    return out


def grid_seeds(n_theta: int, n_r: int, r_max: float = 0.98) -> np.ndarray:
    """Cell-centred ``n_theta x n_r`` grid over ``[0, 1) x (-r_max, r_max)``."""
    th = (np.arange(n_theta) + 0.5) / n_theta
    r = -r_max + (np.arange(n_r) + 0.5) * (2 * r_max / n_r)
    T, R = np.meshgrid(th, r, indexing="ij")
    return np.column_stack([T.ravel(), R.ravel()])


def random_seeds(m: int, seed: int = 0, r_max: float = 0.98) -> np.ndarray:
    """``m`` uniform seeds from a seeded generator."""
    rng = np.random.default_rng(seed)
    return np.column_stack([rng.random(m), rng.uniform(-r_max, r_max, m)])


@dataclass
class ChaoticRegion:
    """Binned phase-space map of where chaotic orbits from a scan go.

    Every orbit of a classified seed deposits its points in a ``bins x bins``
    grid over ``[0, 1) x [-1, 1]``; a cell is chaotic when most of its points
    come from chaotic orbits. Cells no orbit visited count as not chaotic.
    """

    chaotic_share: np.ndarray
    counts: np.ndarray

    @property
    def bins(self) -> int:
        return self.counts.shape[0]

    def _cells(self, points):
        pts = np.asarray(points, float).reshape(-1, 2)
        nb = self.bins
        it = np.clip((np.mod(pts[:, 0], 1.0) * nb).astype(int), 0, nb - 1)
        ir = np.clip(((pts[:, 1] + 1.0) * 0.5 * nb).astype(int), 0, nb - 1)
        return it, ir

    def contains(self, points) -> np.ndarray:
        it, ir = self._cells(points)
        return (self.counts[it, ir] > 0) & (self.chaotic_share[it, ir] >= 0.5)

    @classmethod
    def from_scan(cls, spec: TableSpec, scan: list[ClassifiedPoint], n: int = 1000,
                  bins: int = 100) -> "ChaoticRegion":
        counts = np.zeros((bins, bins))
        chaotic = np.zeros((bins, bins))
        region = cls(chaotic, counts)
        for c in scan:
            if not c.ok:
                continue
            try:
                o = orbit(spec, c.seed, n)
            except BilliardError:
                continue
            it, ir = region._cells(np.column_stack([o.theta, o.r]))
            np.add.at(counts, (it, ir), 1.0)
            if c.chaotic:
                np.add.at(chaotic, (it, ir), 1.0)
        share = np.divide(chaotic, counts, out=np.zeros_like(counts), where=counts > 0)
        return cls(share, counts)
