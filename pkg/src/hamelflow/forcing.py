"""Built-in forcing families.

Three families cover the test surface: exact power-law envelopes that sit
on the admissible decay boundary, a compactly supported polynomial bump
that exercises the fast-decay branches, and seeded randomized
coefficients for property tests.  Coefficients are given for n >= 0 and
mirrored by conjugation so the physical-space force is real.
"""

from __future__ import annotations

import numpy as np

from .background import HamelParameters
from .grid import RadialGrid
from .nonlinear import ForcingSpec, TENSOR_KEYS
from .profiles import ModeProfile, PowerSum, ZERO_TAIL

FAMILIES = ("power", "bump", "random")

G_COMPONENTS = ("r", "t", "3")


def _mirror(coefficients):
    out = {}
    for n, c in coefficients.items():
        n = int(n)
        if n < 0:
            raise ValueError("family coefficients are given for n >= 0 and mirrored")
        out[n] = complex(c)
        if n > 0:
            out[-n] = np.conj(complex(c))
    if 0 in out and abs(out[0].imag) > 0:
        raise ValueError("mode-0 coefficient must be real for a real force")
    return out


def power_envelope_forcing(grid: RadialGrid, params: HamelParameters, epsilon: float,
                           coefficients: dict, cutoff: int | None = None,
                           g_exponent: float | None = None,
                           f_exponent: float | None = None) -> ForcingSpec:
    """g components c_n eps r^{-(2 rho - 1)}, F components c_n eps r^{-2(rho-1)}.

    The exponent overrides exist for diagnostics; defaults saturate the
    admissible envelopes.
    """
    coeff = _mirror(coefficients)
    cutoff = max(abs(n) for n in coeff) if cutoff is None else cutoff
    ge = -(2.0 * params.rho - 1.0) if g_exponent is None else g_exponent
    fe = -2.0 * (params.rho - 1.0) if f_exponent is None else f_exponent
    spec = ForcingSpec(grid, cutoff)
    for n, c in coeff.items():
        if abs(n) > cutoff or c == 0:
            continue
        gp = PowerSum.of((c * epsilon, ge))
        fp = PowerSum.of((c * epsilon, fe))
        spec.g_modes[n] = tuple(ModeProfile.from_powersum(gp, grid, n, a)
                                for a in G_COMPONENTS)
        spec.F_modes[n] = {k: ModeProfile.from_powersum(fp, grid, n, k)
                           for k in TENSOR_KEYS}
    return spec


def bump_profile(grid: RadialGrid, support=(2.0, 4.0), snap: bool = True,
                 derivatives: bool = False):
    """Polynomial bump ((r-a)(b-r))^4 on [a, b], normalized to peak 1.

    With snap=True the support is moved to the nearest panel edges so the
    integrand is polynomial on every panel it touches.  With
    derivatives=True also returns the closed-form first and second
    derivatives (the bump has degree 8, one above the panel interpolant).
    """
    a, b = support
    if snap:
        a = float(grid.edges[np.argmin(np.abs(grid.edges - a))])
        b = float(grid.edges[np.argmin(np.abs(grid.edges - b))])
        if b <= a:
            raise ValueError("bump support collapsed after snapping to panel edges")
    if not (1.0 < a < b < grid.r_max):
        raise ValueError("bump support must sit strictly inside (1, r_max)")
    peak = ((b - a) / 2.0) ** 8

    def _uw(r):
        r = np.asarray(r, dtype=float)
        inside = (r >= a) & (r <= b)
        u = np.where(inside, (r - a) * (b - r), 0.0)
        w = a + b - 2.0 * r
        return u, w, inside

    def fn(r):
        u, _, _ = _uw(r)
        return u ** 4 / peak

    if not derivatives:
        return fn, (a, b)

    def dfn(r):
        u, w, inside = _uw(r)
        return np.where(inside, 4.0 * u ** 3 * w, 0.0) / peak

    def d2fn(r):
        u, w, inside = _uw(r)
        return np.where(inside, 12.0 * u ** 2 * w ** 2 - 8.0 * u ** 3, 0.0) / peak

    return fn, dfn, d2fn, (a, b)


def bump_forcing(grid: RadialGrid, params: HamelParameters, epsilon: float,
                 coefficients: dict, cutoff: int | None = None,
                 support=(2.0, 4.0)) -> ForcingSpec:
    coeff = _mirror(coefficients)
    cutoff = max(abs(n) for n in coeff) if cutoff is None else cutoff
    fn, _ = bump_profile(grid, support)
    base = fn(grid.r_nodes).astype(complex)
    spec = ForcingSpec(grid, cutoff)
    for n, c in coeff.items():
        if abs(n) > cutoff or c == 0:
            continue
        vals = c * epsilon * base
        spec.g_modes[n] = tuple(ModeProfile(vals.copy(), n, a, grid, ZERO_TAIL)
                                for a in G_COMPONENTS)
        spec.F_modes[n] = {k: ModeProfile(vals.copy(), n, k, grid, ZERO_TAIL)
                           for k in TENSOR_KEYS}
    return spec


def random_forcing(grid: RadialGrid, params: HamelParameters, epsilon: float,
                   seed: int, n_modes: int = 2, cutoff: int | None = None) -> ForcingSpec:
    """Seeded random complex coefficients on the power-envelope shapes."""
    rng = np.random.default_rng(seed)
    cutoff = n_modes if cutoff is None else cutoff
    ge = -(2.0 * params.rho - 1.0)
    fe = -2.0 * (params.rho - 1.0)
    spec = ForcingSpec(grid, cutoff)
    for n in range(0, min(n_modes, cutoff) + 1):
        c = rng.normal() + (1j * rng.normal() if n > 0 else 0.0)
        gp = PowerSum.of((c * epsilon, ge))
        fp = PowerSum.of((c * epsilon, fe + rng.uniform(-0.5, 0.0)))
        spec.g_modes[n] = tuple(ModeProfile.from_powersum(gp, grid, n, a)
                                for a in G_COMPONENTS)
        spec.F_modes[n] = {k: ModeProfile.from_powersum(fp, grid, n, k)
                           for k in TENSOR_KEYS}
        if n > 0:
            spec.g_modes[-n] = tuple(ModeProfile.from_powersum(gp.conjugate(), grid, -n, a)
                                     for a in G_COMPONENTS)
            spec.F_modes[-n] = {k: ModeProfile.from_powersum(fp.conjugate(), grid, -n, k)
                                for k in TENSOR_KEYS}
    return spec


def build_family(name: str, grid: RadialGrid, params: HamelParameters,
                 epsilon: float, coefficients: dict | None = None,
                 seed: int = 0, cutoff: int | None = None, **kwargs) -> ForcingSpec:
    coefficients = {0: 1.0, 1: 1.0} if coefficients is None else coefficients
    if name == "power":
        return power_envelope_forcing(grid, params, epsilon, coefficients,
                                      cutoff=cutoff, **kwargs)
    if name == "bump":
        return bump_forcing(grid, params, epsilon, coefficients,
                            cutoff=cutoff, **kwargs)
    if name == "random":
        return random_forcing(grid, params, epsilon, seed=seed,
                              cutoff=cutoff, **kwargs)
    raise ValueError(
        f"unknown forcing family {name!r}; available families: {', '.join(FAMILIES)}")
