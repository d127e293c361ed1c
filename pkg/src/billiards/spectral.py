"""Parameterization of stable/unstable manifolds by spectral Newton iteration.

A chart is a truncated power series ``P(sigma) = sum_n p_n sigma^n`` with
``p_n`` in ``R^d`` (``d = 2K`` for a period-``K`` orbit of the billiard map).
The conjugacy ``F(P(sigma)) = P(rate sigma)`` (stable) or
``F(P(rate sigma)) = P(sigma)`` (unstable) for the multiple-shooting map ``F``
is solved in coefficient space. Compositions ``F o P`` are computed by
evaluating ``P`` at the ``N+1`` roots of unity, applying the complexified map at
each node and interpolating back with a DFT.

Coefficient vectors are stored component-major: entry ``i*(N+1) + n`` is
``p_n^i``; component ``i = 2j`` is ``theta`` and ``i = 2j+1`` is ``r`` of orbit
point ``j``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .boundary import TableSpec
from .complexmap import (MAX_DEPTH, SUBSTEPS, continue_paths, jacobian_df,
                         real_guess)
from .errors import BilliardError, NewtonDivergence
from .periodic import EigenData, ShootVector

__all__ = [
    "SpectralChart",
    "ShootingOracle",
    "pointwise",
    "dft_nodes",
    "dft_matrices",
    "eval_series",
    "series_from_values",
    "dft_compose",
    "cauchy_product",
    "cauchy_conv_mat",
    "rate_matrix",
    "psi_residual",
    "psi_jacobian",
    "initial_chart",
    "newton_parameterization",
    "conjugacy_error",
    "coeff_decay_report",
]

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# DFT machinery


def dft_nodes(M: int) -> np.ndarray:
    """``M`` equidistributed nodes ``exp(2 pi i k / M)`` on the unit circle."""
    return np.exp(2j * np.pi * np.arange(M) / M)


def dft_matrices(M: int):
    """Dense ``V`` (``V[k, n] = sigma_k^n``) and its inverse ``conj(V).T / M``."""
    s = dft_nodes(M)
    V = s[:, None] ** np.arange(M)[None, :]
    return V, V.conj().T / M


def eval_series(coeffs, sigma) -> np.ndarray:
    """``sum_n coeffs[..., n] sigma^n`` by Horner's rule; shape ``coeffs.shape[:-1] + sigma.shape``."""
    coeffs = np.asarray(coeffs)
    sigma = np.asarray(sigma)
    lead = coeffs.shape[:-1]
    c = coeffs.reshape(lead + (1,) * sigma.ndim + coeffs.shape[-1:])
    out = np.zeros(lead + sigma.shape, dtype=np.result_type(coeffs, sigma, float))
    for n in range(coeffs.shape[-1] - 1, -1, -1):
        out = out * sigma + c[..., n]
    return out


def _eval_rows(coeffs, t):
    """Row-wise Horner: ``sum_n coeffs[m, n] t[m]^n``."""
    out = np.zeros(coeffs.shape[0], dtype=np.result_type(coeffs, t, float))
    for n in range(coeffs.shape[1] - 1, -1, -1):
        out = out * t + coeffs[:, n]
    return out


def _values_at_nodes(coeffs, M, method):
    """Evaluate series with ``N+1 <= M`` coefficients at the ``M`` roots of unity."""
    coeffs = np.asarray(coeffs)
    n1 = coeffs.shape[-1]
    if method == "fft":
        pad = np.zeros(coeffs.shape[:-1] + (M,), dtype=complex)
        pad[..., :n1] = coeffs
        return M * np.fft.ifft(pad, axis=-1)
    V, _ = dft_matrices(M)
    return coeffs @ V[:, :n1].T


def series_from_values(values, n1: int, method: str = "fft"):
    """Taylor coefficients ``0..n1-1`` of the interpolant through node values."""
    values = np.asarray(values)
    M = values.shape[-1]
    if method == "fft":
        c = np.fft.fft(values, axis=-1) / M
    elif method == "dense":
        _, Vinv = dft_matrices(M)
        c = values @ Vinv.T
    else:
        raise ValueError(f"unknown DFT method {method!r}")
    return c[..., :n1]


def pointwise(fn: Callable) -> Callable:
    """Adapt a plain map ``values (d, M) -> values (d', M)`` to the oracle signature."""

    def oracle(coeffs, nodes, values):
        return fn(values)

    return oracle


@dataclass
class ComposeInfo:
    imag_residue: float = 0.0
    nodes: int = 0


def dft_compose(oracle: Callable, coeffs, *, method: str = "fft", oversample: int = 1,
                info: ComposeInfo | None = None) -> np.ndarray:
    """Coefficients of ``F o P`` by DFT interpolation.

    ``coeffs`` is ``(d, N+1)``. ``oracle(coeffs, nodes, values)`` returns ``F`` at
    the chart values ``values = P(nodes)``. With ``oversample = m`` the composition
    is sampled on ``m (N+1)`` nodes, which removes aliasing for polynomial maps of
    degree ``<= m``. Returns the real parts; the largest discarded imaginary part
    is stored in ``info``.
    """
    coeffs = np.asarray(coeffs, float)
    n1 = coeffs.shape[-1]
    M = int(oversample) * n1
    nodes = dft_nodes(M)
    vals = _values_at_nodes(coeffs, M, method)
    out = series_from_values(oracle(coeffs, nodes, vals), n1, method)
    if info is not None:
        info.imag_residue = float(np.max(np.abs(out.imag))) if out.size else 0.0
        info.nodes = M
    return out.real


def cauchy_product(a, b) -> np.ndarray:
    """Truncated Cauchy product ``c_n = sum_{k<=n} a_k b_{n-k}`` (double-sum oracle)."""
    a = np.asarray(a)
    b = np.asarray(b)
    n = min(a.size, b.size)
    c = np.zeros(n, dtype=np.result_type(a, b))
    for i in range(n):
        for k in range(i + 1):
            c[i] += a[k] * b[i - k]
    return c


def cauchy_conv_mat(a) -> np.ndarray:
    """Lower-triangular Toeplitz matrix ``C`` with ``C @ b = cauchy_product(a, b)``."""
    a = np.asarray(a)
    n = a.size
    i, j = np.indices((n, n))
    C = np.where(i >= j, a[np.clip(i - j, 0, n - 1)], 0)
    return C.astype(a.dtype)


def rate_matrix(rate: float, n1: int, d: int) -> np.ndarray:
    """Diagonal of ``L_rate``: ``rate^n`` repeated for each of ``d`` components."""
    return np.tile(rate ** np.arange(n1, dtype=float), d)


# ---------------------------------------------------------------------------
# The multiple-shooting oracle


class ShootingOracle:
    """``F(u) = (f(u_K), f(u_1), ...)`` evaluated on complex chart values.

    Each node value ``P_j(sigma_k)`` is reached by continuing the solved real
    bounce at ``P_j(0)`` along the ray ``t -> P_j(t sigma_k)``. The ``theta``
    output of ``f(P_j)`` is shifted by the integer that matches ``P_{j+1}(0)``.
    """

    def __init__(self, spec: TableSpec, substeps: int = SUBSTEPS, max_depth: int = MAX_DEPTH):
        self.spec = spec
        self.substeps = substeps
        self.max_depth = max_depth

    def solve(self, coeffs, nodes):
        """Solved bundles for every (component, node); flat arrays of length ``K M``."""
        coeffs = np.asarray(coeffs, float)
        d, n1 = coeffs.shape
        K = d // 2
        M = nodes.size
        th0 = coeffs[0::2, 0]
        r0 = coeffs[1::2, 0]
        target = np.roll(th0, -1)
        start = real_guess(self.spec, th0, r0, target_theta=target)
        rep = np.repeat(np.arange(K), M)
        start = start.take(rep)
        powers = nodes[None, :] ** np.arange(n1)[:, None]        # (n1, M)
        cth = (coeffs[0::2, None, :] * powers.T[None]).reshape(K * M, n1)
        cr = (coeffs[1::2, None, :] * powers.T[None]).reshape(K * M, n1)

        def path(t, idx):
            return _eval_rows(cth[idx], t), _eval_rows(cr[idx], t)

        solved, _, _ = continue_paths(self.spec, path, start, substeps=self.substeps,
                                      max_depth=self.max_depth)
        return solved

    def __call__(self, coeffs, nodes, values=None, jacobian: bool = False):
        coeffs = np.asarray(coeffs, float)
        d = coeffs.shape[0]
        K = d // 2
        M = nodes.size
        solved = self.solve(coeffs, nodes)
        th = solved.bundle.theta_hat.reshape(K, M)
        rh = solved.bundle.r_hat.reshape(K, M)
        out = np.empty((d, M), dtype=complex)
        # output component j+1 is f(P_j)
        out[0::2] = np.roll(th, 1, axis=0)
        out[1::2] = np.roll(rh, 1, axis=0)
        if not jacobian:
            return out
        J = jacobian_df(self.spec, solved.point, solved).reshape(K, M, 2, 2)
        return out, J


def _jacobian_values_to_B(J, n1, method):
    """Assemble ``B(p)`` from node values of the ``Df`` blocks (``J`` is ``(K, M, 2, 2)``)."""
    K = J.shape[0]
    d = 2 * K
    coef = series_from_values(np.moveaxis(J, 1, -1), n1, method)   # (K, 2, 2, n1)
    imag = float(np.max(np.abs(coef.imag)))
    coef = coef.real
    B = np.zeros((d * n1, d * n1))
    for j in range(K):
        i = (j + 1) % K
        for a in range(2):
            for b in range(2):
                row, col = 2 * i + a, 2 * j + b
                B[row * n1:(row + 1) * n1, col * n1:(col + 1) * n1] = cauchy_conv_mat(coef[j, a, b])
    return B, imag


# ---------------------------------------------------------------------------
# Charts


@dataclass
class SpectralChart:
    """Truncated chart of a stable or unstable manifold of a periodic orbit."""

    kind: str
    rate: float
    coeffs: np.ndarray
    scale: float
    orbit: ShootVector
    spec: TableSpec | None = None
    residual: float = np.nan
    iterations: int = 0
    imag_residue: float = 0.0
    scale_path: list = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in ("stable", "unstable"):
            raise ValueError("kind must be 'stable' or 'unstable'")
        self.coeffs = np.asarray(self.coeffs, float)

    @property
    def trunc(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def K(self) -> int:
        return self.coeffs.shape[0] // 2

    def flat(self) -> np.ndarray:
        return self.coeffs.ravel()

    def evaluate(self, sigma) -> np.ndarray:
        """``P(sigma)``: array of shape ``(2K,) + shape(sigma)``."""
        return eval_series(self.coeffs, sigma)

    def component(self, j: int, sigma):
        """``(theta, r)`` of ``P_j(sigma)``."""
        v = eval_series(self.coeffs[2 * j:2 * j + 2], sigma)
        return v[0], v[1]

    def rescaled(self, c: float) -> "SpectralChart":
        """Chart in the variable ``c sigma``: ``p_n -> c^n p_n``, scale ``-> c^2 scale``."""
        return SpectralChart(self.kind, self.rate, self.coeffs * c ** np.arange(self.trunc + 1),
                             self.scale * c * c, self.orbit, self.spec)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "rate": self.rate,
            "scale": self.scale,
            "N": self.trunc,
            "K": self.K,
            "orbit": self.orbit.points.tolist(),
            "coefficients": self.coeffs.tolist(),
            "residual": self.residual,
            "iterations": self.iterations,
            "imag_residue": self.imag_residue,
            "scale_path": list(self.scale_path),
            "table": None if self.spec is None else self.spec.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpectralChart":
        spec = TableSpec.from_dict(d["table"]) if d.get("table") else None
        return cls(d["kind"], float(d["rate"]), np.asarray(d["coefficients"], float),
                   float(d["scale"]), ShootVector(d["orbit"]), spec,
                   residual=float(d.get("residual", np.nan)),
                   iterations=int(d.get("iterations", 0)),
                   imag_residue=float(d.get("imag_residue", 0.0)),
                   scale_path=list(d.get("scale_path", [])))


def _split(x, d, n1):
    return float(x[0]), x[1:].reshape(d, n1)


def psi_residual(oracle, kind: str, rate: float, coeffs, scale: float, *,
                 method: str = "fft", oversample: int = 1,
                 info: ComposeInfo | None = None) -> np.ndarray:
    """``Psi`` of length ``d (N+1) + 1``: the scale row then the conjugacy rows.

    On the default ``N+1``-node grid, products of order above ``N`` alias onto
    low modes. :func:`psi_jacobian` differentiates the unaliased truncation,
    which ``oversample = 2`` reproduces exactly for perturbations of any order.
    """
    coeffs = np.asarray(coeffs, float)
    d, n1 = coeffs.shape
    L = rate ** np.arange(n1)
    row0 = np.sum(coeffs[:, 1] ** 2) - scale
    if kind == "stable":
        q = dft_compose(oracle, coeffs, method=method, oversample=oversample, info=info)
        body = q - coeffs * L
    elif kind == "unstable":
        q = dft_compose(oracle, coeffs * L, method=method, oversample=oversample, info=info)
        body = q - coeffs
    else:
        raise ValueError("kind must be 'stable' or 'unstable'")
    return np.concatenate([[row0], body.ravel()])


def _psi_and_jacobian(oracle: ShootingOracle, kind, rate, coeffs, scale, method):
    coeffs = np.asarray(coeffs, float)
    d, n1 = coeffs.shape
    n = np.arange(n1)
    L = rate ** n
    dL = n * rate ** np.maximum(n - 1, 0)
    arg = coeffs * L if kind == "unstable" else coeffs
    M = n1
    nodes = dft_nodes(M)
    vals = _values_at_nodes(arg, M, method)
    fv, J = oracle(arg, nodes, vals, jacobian=True)
    qc = series_from_values(fv, n1, method)
    imag = float(np.max(np.abs(qc.imag)))
    q = qc.real
    B, imag_b = _jacobian_values_to_B(J, n1, method)
    size = d * n1 + 1
    D = np.zeros((size, size))
    D[0, 2 + np.arange(d) * n1] = 2.0 * coeffs[:, 1]
    c = (coeffs * dL).ravel()
    Ld = np.tile(L, d)
    if kind == "stable":
        res = np.concatenate([[np.sum(coeffs[:, 1] ** 2) - scale], (q - coeffs * L).ravel()])
        D[1:, 0] = -c
        D[1:, 1:] = B - np.diag(Ld)
    else:
        res = np.concatenate([[np.sum(coeffs[:, 1] ** 2) - scale], (q - coeffs).ravel()])
        D[1:, 0] = B @ c
        D[1:, 1:] = B * Ld[None, :] - np.eye(d * n1)
    return res, D, max(imag, imag_b)


def psi_jacobian(oracle: ShootingOracle, kind: str, rate: float, coeffs, scale: float, *,
                 method: str = "fft") -> np.ndarray:
    """Bordered Newton matrix ``[[0, n(p)], [rate column, B - L or B L - I]]``.

    The rate column uses the exact derivative of ``L_rate p`` in ``rate``,
    i.e. the coefficients ``n rate^(n-1) p_n``.
    """
    return _psi_and_jacobian(oracle, kind, rate, coeffs, scale, method)[1]


def initial_chart(orbit: ShootVector, eig: EigenData, kind: str, scale: float, N: int,
                  spec: TableSpec | None = None) -> SpectralChart:
    """Linear seed ``P0(sigma) = p0 + sigma p1`` with ``|p1|^2 = scale``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    d = 2 * orbit.K
    coeffs = np.zeros((d, N + 1))
    coeffs[:, 0] = orbit.flat()
    vec = eig.vec_s if kind == "stable" else eig.vec_u
    coeffs[:, 1] = vec / np.linalg.norm(vec) * np.sqrt(scale)
    rate = eig.lam if kind == "stable" else eig.mu
    return SpectralChart(kind, rate, coeffs, scale, orbit, spec)


def _newton_at_scale(oracle, chart: SpectralChart, tol, max_iter, method):
    rate, coeffs = chart.rate, chart.coeffs.copy()
    d, n1 = coeffs.shape
    best = np.inf
    imag = 0.0
    for it in range(max_iter + 1):
        res, D, imag = _psi_and_jacobian(oracle, chart.kind, rate, coeffs, chart.scale, method)
        err = float(np.max(np.abs(res)))
        log.debug("scale %.4g iter %d residual %.3e", chart.scale, it, err)
        if not np.isfinite(err):
            raise NewtonDivergence("non-finite residual", index=it)
        if err < tol:
            out = SpectralChart(chart.kind, rate, coeffs, chart.scale, chart.orbit, chart.spec,
                                residual=err, iterations=it, imag_residue=imag)
            return out
        if it >= 4 and err > 1e3 * best:
            break
        best = min(best, err)
        if it == max_iter:
            break
        delta = np.linalg.solve(D, -res)
        rate += delta[0]
        coeffs = coeffs + delta[1:].reshape(d, n1)
        if not 0.0 < rate < 1.0:
            raise NewtonDivergence(f"rate left (0, 1): {rate}", index=it)
    raise NewtonDivergence(f"spectral Newton did not converge at scale {chart.scale:g} "
                           f"(residual {err:.3e})", last_iterate=coeffs, index=it)


def newton_parameterization(spec: TableSpec, orbit: ShootVector, eig: EigenData, kind: str,
                            scale: float, N: int, tol: float = 1e-11, max_iter: int = 30,
                            method: str = "fft", continuation_steps: int = 8,
                            oracle: ShootingOracle | None = None) -> SpectralChart:
    """Solve the truncated conjugacy for ``(rate, p)`` starting from the linear seed.

    If Newton fails at the requested scale, the chart is solved at a small scale
    and grown geometrically, rescaling ``p_n`` by ``c^n`` between stages. The
    scales visited are recorded in ``scale_path``.
    """
    if N < 4:
        raise ValueError("N must be >= 4")
    if scale <= 0:
        raise ValueError("scale must be positive")
    oracle = oracle or ShootingOracle(spec)
    seed = initial_chart(orbit, eig, kind, scale, N, spec)
    try:
        chart = _newton_at_scale(oracle, seed, tol, max_iter, method)
        chart.scale_path = [scale]
        return chart
    except (BilliardError, np.linalg.LinAlgError) as exc:
        log.info("direct solve at scale %g failed (%s); continuing in scale", scale, exc)
        first_error = exc

    scales = scale * np.geomspace(1.0 / 64.0, 1.0, continuation_steps + 1)
    chart = None
    path = []
    for s in scales:
        if chart is None:
            start = initial_chart(orbit, eig, kind, s, N, spec)
        else:
            start = chart.rescaled(np.sqrt(s / chart.scale))
        try:
            chart = _newton_at_scale(oracle, start, tol, max_iter, method)
        except (BilliardError, np.linalg.LinAlgError) as exc:
            if chart is None:
                continue
            raise NewtonDivergence(
                f"scale continuation stalled: best converged scale {chart.scale:g} "
                f"(target {scale:g}); {exc}", last_iterate=chart) from first_error
        path.append(float(s))
    if chart is None or not np.isclose(chart.scale, scale):
        raise NewtonDivergence(f"spectral Newton failed at scale {scale:g}") from first_error
    chart.scale_path = path
    return chart


def conjugacy_error(chart: SpectralChart, M: int = 128, oracle: ShootingOracle | None = None,
                    spec: TableSpec | None = None) -> float:
    """``max_m |F(P(z_m)) - P(rate z_m)|_inf`` over ``z_m = exp(2 pi i m/(M+1))``.

    For unstable charts the defect is ``F(P(rate z)) - P(z)``.
    """
    spec = spec or chart.spec
    oracle = oracle or ShootingOracle(spec)
    z = dft_nodes(M + 1)
    L = chart.rate ** np.arange(chart.trunc + 1)
    if chart.kind == "stable":
        lhs = oracle(chart.coeffs, z)
        rhs = eval_series(chart.coeffs, chart.rate * z)
    else:
        lhs = oracle(chart.coeffs * L, z)
        rhs = eval_series(chart.coeffs, z)
    return float(np.max(np.abs(lhs - rhs)))


def coeff_decay_report(chart_or_coeffs) -> list[tuple[int, float]]:
    """``(n, log10 max_i |p_n^i|)`` for every mode ``n``."""
    c = chart_or_coeffs.coeffs if isinstance(chart_or_coeffs, SpectralChart) else chart_or_coeffs
    m = np.max(np.abs(np.asarray(c)), axis=0)
    with np.errstate(divide="ignore"):
        lg = np.log10(m)
    return [(n, float(v)) for n, v in enumerate(lg)]
