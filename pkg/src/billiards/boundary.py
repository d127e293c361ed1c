"""Fourier boundary curves for perturbed elliptical billiard tables.

A table is the closed curve ``B(theta) = (x(theta), y(theta))``, ``theta`` in
``[0, 1)``, with

    x(theta) = sum_k  ax[k] cos(2 pi k theta) + bx[k] sin(2 pi k theta)
    y(theta) = sum_k  ay[k] cos(2 pi k theta) + by[k] sin(2 pi k theta)

for ``k = 1..n``. Every evaluator accepts real or complex ``theta`` (scalars or
arrays); the curve is entire, so complex evaluation is always defined.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "TableSpec",
    "EllipseSpec",
    "DegenerateTangentError",
    "eval_boundary",
    "eval_tangent",
    "signed_curvature",
    "min_signed_curvature",
    "associated_ellipse",
    "builtin_table",
    "convexity_family",
    "circle",
    "ellipse_table",
    "eccentricities",
    "read_table_file",
    "format_table_file",
    "BUILTIN_NAMES",
]

TWO_PI = 2.0 * math.pi


class DegenerateTangentError(ValueError):
    """Raised when ``|B'(theta)|`` vanishes (numerically) on the sample grid."""


def _coeffs(values, n: int) -> np.ndarray:
    out = np.zeros(n)
    vals = np.asarray(values, dtype=float).ravel()
    out[: vals.size] = vals
    return out


@dataclass(frozen=True, eq=False)
class TableSpec:
    """Fourier coefficients of a table boundary, mode ``k`` stored at index ``k-1``.

    ``cos_x`` / ``sin_x`` are the x-coordinate families (``ax.k`` / ``bx.k``),
    ``cos_y`` / ``sin_y`` the y-coordinate families (``ay.k`` / ``by.k``).
    Missing modes are explicit zeros.
    """

    cos_x: np.ndarray
    sin_x: np.ndarray = None
    cos_y: np.ndarray = None
    sin_y: np.ndarray = None
    name: str = "custom"
    _k: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        arrays = [self.cos_x, self.sin_x, self.cos_y, self.sin_y]
        n = max(np.asarray(a).size for a in arrays if a is not None)
        for attr, a in zip(("cos_x", "sin_x", "cos_y", "sin_y"), arrays):
            arr = _coeffs([] if a is None else a, n)
            arr.flags.writeable = False
            object.__setattr__(self, attr, arr)
        k = np.arange(1, n + 1, dtype=float)
        k.flags.writeable = False
        object.__setattr__(self, "_k", k)

    @property
    def max_order(self) -> int:
        return int(self.cos_x.size)

    @property
    def modes(self) -> np.ndarray:
        return self._k

    def scaled(self, factor: float, name: str | None = None) -> "TableSpec":
        """All coefficients multiplied by ``factor`` (same shape, larger table)."""
        return TableSpec(
            self.cos_x * factor,
            self.sin_x * factor,
            self.cos_y * factor,
            self.sin_y * factor,
            name=name or f"{self.name}x{factor:g}",
        )

    def packed(self) -> np.ndarray:
        """``(4, n)`` float array ``[cos_x, sin_x, cos_y, sin_y]`` for the kernels."""
        return np.ascontiguousarray(
            np.vstack([self.cos_x, self.sin_x, self.cos_y, self.sin_y])
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "cos_x": self.cos_x.tolist(),
            "sin_x": self.sin_x.tolist(),
            "cos_y": self.cos_y.tolist(),
            "sin_y": self.sin_y.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TableSpec":
        return cls(d["cos_x"], d.get("sin_x"), d.get("cos_y"), d.get("sin_y"),
                   name=d.get("name", "custom"))

    def __eq__(self, other):
        if not isinstance(other, TableSpec):
            return NotImplemented
        return self.max_order == other.max_order and all(
            np.array_equal(a, b)
            for a, b in zip(self.packed(), other.packed())
        )

    def __hash__(self):
        return hash(self.packed().tobytes())


@dataclass(frozen=True)
class EllipseSpec:
    """Ellipse ``E(theta) = (a1 cos 2 pi theta, b1 sin 2 pi theta)``."""

    a1: float
    b1: float

    def __post_init__(self):
        if not (self.a1 > 0 and self.b1 > 0):
            raise ValueError(f"semi-axes must be positive, got ({self.a1}, {self.b1})")

    def as_table(self) -> TableSpec:
        return TableSpec([self.a1], None, None, [self.b1], name="ellipse")


def _phases(spec: TableSpec, theta):
    theta = np.asarray(theta)
    arg = TWO_PI * np.multiply.outer(theta, spec.modes)
    return np.cos(arg), np.sin(arg)


def eval_boundary(spec: TableSpec, theta):
    """Return ``(x, y)`` of ``B(theta)``; real input gives real output."""
    c, s = _phases(spec, theta)
    x = c @ spec.cos_x + s @ spec.sin_x
    y = c @ spec.cos_y + s @ spec.sin_y
    return x, y


def eval_tangent(spec: TableSpec, theta, order: int = 1):
    """Term-by-term derivative of the boundary series: ``B'`` or ``B''``."""
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    c, s = _phases(spec, theta)
    w = TWO_PI * spec.modes
    wk = w ** order
    # d^m/dtheta^m of (cos, sin) cycles through (-sin, cos), (-cos, -sin), (sin, -cos)
    if order == 1:
        dc, ds = -s, c
    elif order == 2:
        dc, ds = -c, -s
    else:
        dc, ds = s, -c
    x = dc @ (wk * spec.cos_x) + ds @ (wk * spec.sin_x)
    y = dc @ (wk * spec.cos_y) + ds @ (wk * spec.sin_y)
    return x, y


def signed_curvature(spec: TableSpec, theta):
    x1, y1 = eval_tangent(spec, theta, 1)
    x2, y2 = eval_tangent(spec, theta, 2)
    return (x1 * y2 - y1 * x2) / (x1 * x1 + y1 * y1) ** 1.5


def min_signed_curvature(spec: TableSpec, samples: int = 4096) -> float:
    """Minimum signed curvature over a uniform grid of ``samples`` points.

    A positive value certifies convexity on the sampled grid only.
    """
    if samples < 256:
        raise ValueError("samples must be >= 256")
    theta = np.arange(samples) / samples
    x1, y1 = eval_tangent(spec, theta, 1)
    speed = np.hypot(x1, y1)
    if np.min(speed) < 1e-12:
        bad = theta[np.argmin(speed)]
        raise DegenerateTangentError(f"|B'(theta)| vanishes near theta={bad:.6f}")
    return float(np.min(signed_curvature(spec, theta)))


def associated_ellipse(spec: TableSpec) -> EllipseSpec:
    a1, b1 = float(spec.cos_x[0]), float(spec.sin_y[0])
    if a1 == 0.0 or b1 == 0.0:
        raise ValueError("associated ellipse needs nonzero first-mode coefficients")
    return EllipseSpec(a1, b1)


def eccentricities(ell: EllipseSpec) -> dict:
    """Both eccentricity figures: the standard one and ``sqrt(a^2-b^2)/b``.

    Published table rows quote the second quantity (0.4583, 1.7321).
    """
    a, b = max(ell.a1, ell.b1), min(ell.a1, ell.b1)
    return {
        "standard": math.sqrt(1.0 - b * b / (a * a)),
        "focal_over_minor": math.sqrt(a * a - b * b) / b,
    }


_BUILTIN = {
    "A": ((1.1, 0.03, 0.0), (1.0, 0.03, 0.0)),
    "B": ((1.1, 0.05, 0.00015), (1.0, 0.035, 0.0001)),
    "C": ((1.1, 0.08, 0.0002), (1.0, 0.095, 0.0001)),
    "D": ((2.0, 0.04, 0.0), (1.0, 0.035, 0.0)),
    "E": ((2.0, 0.05, 0.0), (1.0, 0.065, 0.0)),
}
BUILTIN_NAMES = tuple(_BUILTIN)


def builtin_table(name: str) -> TableSpec:
    """One of the five reference tables ``"A"`` .. ``"E"``."""
    key = str(name).strip().upper()
    if key not in _BUILTIN:
        raise KeyError(f"unknown table {name!r}; expected one of {', '.join(BUILTIN_NAMES)}")
    ax, by = _BUILTIN[key]
    return TableSpec(ax, None, None, by, name=key)


def convexity_family(eps: float) -> TableSpec:
    """One-parameter family ``ax = (1.1, 0.03 eps)``, ``by = (1, 0.025 eps)``."""
    return TableSpec((1.1, 0.03 * eps), None, None, (1.0, 0.025 * eps), name=f"eps={eps:g}")


def circle(radius: float = 1.0) -> TableSpec:
    return TableSpec([radius], None, None, [radius], name="circle")


def ellipse_table(a1: float, b1: float) -> TableSpec:
    return EllipseSpec(a1, b1).as_table()


_FAMILIES = {"ax": "cos_x", "bx": "sin_x", "ay": "cos_y", "by": "sin_y"}


def read_table_file(path) -> TableSpec:
    """Parse a ``key = value`` table file (keys ``ax.k``, ``bx.k``, ``ay.k``, ``by.k``).

    Blank lines and ``#`` comments are ignored; ``name = ...`` is optional.
    """
    path = Path(path)
    entries: dict[str, dict[int, float]] = {f: {} for f in _FAMILIES.values()}
    name = path.stem
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, value = (t.strip() for t in line.split("=", 1))
        else:
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = parts
        if key == "name":
            name = value
            continue
        fam, _, k = key.partition(".")
        if fam not in _FAMILIES or not k.isdigit() or int(k) < 1:
            raise ValueError(f"{path}:{lineno}: bad key {key!r}")
        entries[_FAMILIES[fam]][int(k)] = float(value)
    n = max([max(d) for d in entries.values() if d] or [1])
    arrays = {}
    for attr, d in entries.items():
        a = np.zeros(n)
        for k, v in d.items():
            a[k - 1] = v
        arrays[attr] = a
    return TableSpec(name=name, **arrays)


def format_table_file(spec: TableSpec) -> str:
    lines = [f"name = {spec.name}"]
    for fam, attr in _FAMILIES.items():
        for k, v in enumerate(getattr(spec, attr), 1):
            if v != 0.0:
                lines.append(f"{fam}.{k} = {float(v)!r}")
    return "\n".join(lines) + "\n"
