"""Billiard maps on perturbed elliptical tables, saddle orbits and their manifolds."""
from ._backend import BACKEND
from .birkhoff import (CHAOS_THRESHOLD, ChaoticRegion, ClassifiedPoint, classify_orbit,
                       grid_seeds, phase_portrait_scan, random_seeds, wba_gap,
                       weighted_birkhoff_average)
from .boundary import (EllipseSpec, TableSpec, associated_ellipse, builtin_table, circle,
                       convexity_family, ellipse_table, eval_boundary, eval_tangent,
                       min_signed_curvature, read_table_file, signed_curvature)
from .ellipse import PhasePoint, ellipse_step, reverse
from .errors import (BilliardError, ContinuationError, DegenerateError, DomainError,
                     NewtonDivergence, NotHyperbolicError)
from .globalize import ManifoldCurve, fundamental_domain_points, grow_manifolds
from .periodic import EigenData, ShootVector, multipliers_and_eigvecs, newton_periodic
from .realmap import billiard_step, billiard_step_inverse, orbit, orbit_batch
from .spectral import (SpectralChart, coeff_decay_report, conjugacy_error, dft_compose,
                       newton_parameterization)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
