"""Quasi-harmonic functions and drift-Laplacian eigenfunctions on R^m minus the origin.

Solutions of ``Delta u - (r/2) u_r + lambda u = 0`` are built mode by mode from
spherical harmonics and Kummer-function radial factors.
"""

from .errors import (
    AccuracyError,
    AdmissibilityError,
    ConvergenceError,
    DataError,
    DomainError,
    NotComparableError,
    NotResonantError,
    PathError,
    RegularityError,
    ResonanceError,
    SeedError,
    ZeroFieldError,
)
from .field import Field, ModeTerm, construct_from_trace, evaluate, evaluate_ratio
from .radial import EigenParams, mode_solution, resonant_mode_solution, second_solution, u0_harmonic
from .spherics import ModeIndex
from .special_fn import KummerParams, gamma, kummer_series

__version__ = "0.1.0"
