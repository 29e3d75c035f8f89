"""Mode-dependent spectral constants of the non-axisymmetric solves.

For angular mode n != 0 the vorticity and vertical kernels are governed
by the complex exponent

    zeta_n = sqrt(n^2 + (gamma/2)^2 + i*alpha*n)     (principal branch)

whose real part xi_n strictly exceeds gamma/2; the margin xi_n - gamma/2
is exactly what buys the improved decay over the transport-free case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AdmissibilityError

_CONSISTENCY_TOL = 1e-12


@dataclass(frozen=True)
class SpectralCoefficients:
    n: int
    n_gamma: float        # sqrt(n^2 + (gamma/2)^2)
    zeta: complex         # principal sqrt(n_gamma^2 + i alpha n)
    xi: float             # Re(zeta)


def compute_coefficients(n: int, alpha: float, gamma: float) -> SpectralCoefficients:
    """Spectral constants for mode n; the two xi routes must agree to 1e-12."""
    if n == 0:
        raise ValueError("axisymmetric mode has no zeta")
    if not gamma > 2.0:
        raise AdmissibilityError(
            f"gamma={gamma} violates gamma > 2 (Hamel flux too weak)"
        )
    n_gamma_sq = n * n + (gamma / 2.0) ** 2
    n_gamma = np.sqrt(n_gamma_sq)
    zeta = np.sqrt(complex(n_gamma_sq, alpha * n))
    xi = zeta.real

    # closed radical form of Re(zeta), cross-checked against the root
    ratio = (alpha * n) / n_gamma_sq
    xi_radical = (n_gamma / np.sqrt(2.0)) * np.sqrt(np.sqrt(1.0 + ratio * ratio) + 1.0)
    if abs(xi - xi_radical) > _CONSISTENCY_TOL * max(1.0, abs(xi)):
        raise ArithmeticError(
            f"xi routes disagree for n={n}, alpha={alpha}, gamma={gamma}: "
            f"{xi} vs {xi_radical}"
        )
    return SpectralCoefficients(n=n, n_gamma=float(n_gamma), zeta=zeta, xi=float(xi))
