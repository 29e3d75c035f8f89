"""Steady Navier-Stokes flows exterior to an infinite cylinder.

Per-mode Green's-function solves of the linearized exterior problem
around a swirling sink background, assembled into the full nonlinear
solution by fixed-point iteration, with decay-rate and weak-residual
verification tooling.
"""

from .background import HamelParameters, boundary_data, pressure, velocity
from .errors import (
    AdmissibilityError,
    BoundaryError,
    ContractionError,
    IterationError,
    TailError,
)
from .grid import RadialGrid
from .horizontal import (
    HorizontalForcingMode,
    HorizontalSolutionMode,
    biot_savart,
    compute_vorticity_mode,
    solve_axisymmetric,
    solve_mode,
)
from .nonlinear import (
    ForcingSpec,
    PicardDiagnostics,
    VelocityField,
    apply_T,
    compute_lambda,
    field_diff_norm,
    picard_iterate,
    reconstruct_u,
    tensor_convolution,
    with_background,
    x_norm,
)
from .profiles import (
    EnvelopeTail,
    ModeProfile,
    PowerSum,
    PowerTail,
    WeightedNormReport,
    ZeroTail,
    integrate_weighted,
    l1_weighted_norm,
    weighted_sup_norm,
)
from .spectral import SpectralCoefficients, compute_coefficients
from .vertical import (
    VerticalForcingMode,
    VerticalSolutionMode,
    solve_vertical_axisymmetric,
    solve_vertical_mode,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
