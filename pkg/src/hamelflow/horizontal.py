"""Per-mode solver for the horizontal velocity components.

Axisymmetric part: the angular profile solves a second-order ODE whose
homogeneous solutions are r^{-1} and r^{1-gamma}; the representation
below is the unique finite-energy solution vanishing on the unit circle
(the r^{-1} branch is excluded by the energy class, which is how the
construction sidesteps the Stokes paradox).

Non-axisymmetric part: solve for the scalar vorticity mode

    omega_n = Phi_n + c_n r^{-zeta_n - gamma/2},

where Phi_n is a particular decaying solution of the transported
vorticity ODE and the constant c_n enforces the moment identity
int_1^inf s^{1-|n|} omega_n ds = 0; the velocity mode is then recovered
by the radial Biot-Savart integrals, and the moment identity is exactly
the statement that it vanishes on the unit circle.

All radial derivatives are Leibniz derivatives of the representation
formulas (power prefactor times integral), never finite differences.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .background import HamelParameters
from .errors import AdmissibilityError, BoundaryError
from .grid import RadialGrid
from .profiles import (
    EnvelopeTail,
    ModeProfile,
    PowerTail,
    ZERO_TAIL,
    ZeroTail,
    cum_right_full,
    full_moment,
)
from .spectral import compute_coefficients

log = logging.getLogger(__name__)

MOMENT_TOL = 1e-8
_DEGENERATE = 1e-10


@dataclass
class HorizontalForcingMode:
    """Forcing of one horizontal mode: pointwise pair or divergence tensor block.

    Exactly one of `pointwise` (f_r, f_t) and `divergence`
    (f_rr, f_rt, f_tr, f_tt) is populated; `rt` means the (e_r, e_theta)
    tensor slot.
    """

    mode: int
    pointwise: tuple | None = None
    divergence: tuple | None = None

    def __post_init__(self):
        if (self.pointwise is None) == (self.divergence is None):
            raise ValueError("exactly one of pointwise/divergence must be populated")

    @property
    def profiles(self):
        return self.pointwise if self.pointwise is not None else self.divergence

    def envelope_exponent(self) -> float:
        return max(p.tail.slowest_exponent() for p in self.profiles)


@dataclass
class HorizontalSolutionMode:
    mode: int
    v_r: ModeProfile
    v_t: ModeProfile
    dv_r: ModeProfile
    dv_t: ModeProfile
    omega: ModeProfile | None = None
    c_n: complex | None = None
    checks: dict = field(default_factory=dict)

    def add(self, other: "HorizontalSolutionMode") -> "HorizontalSolutionMode":
        merged_omega = None
        merged_c = None
        if self.omega is not None and other.omega is not None:
            merged_omega = self.omega + other.omega
            merged_c = self.c_n + other.c_n
        out = HorizontalSolutionMode(
            self.mode,
            self.v_r + other.v_r, self.v_t + other.v_t,
            self.dv_r + other.dv_r, self.dv_t + other.dv_t,
            merged_omega, merged_c,
        )
        out.checks = structural_checks(out)
        return out


def _require_envelope(forcing: HorizontalForcingMode, params: HamelParameters):
    bound = -(2 * params.rho - 1) if forcing.pointwise is not None else -2 * (params.rho - 1)
    got = forcing.envelope_exponent()
    if got > bound + 1e-9:
        kind = "pointwise" if forcing.pointwise is not None else "divergence"
        raise AdmissibilityError(
            f"{kind} forcing envelope exponent {got} must be <= {bound}"
        )


def _solution_tail(grid, exponent, values):
    return EnvelopeTail(exponent, complex(values[-1]), grid.r_max)


# -- exact tails of the kernel integrals for power-law data ----------------

def _left_kernel_tail(grid, c, values, tail):
    """Tail of s^{-c} int_1^s u^c h(u) du when h has an exact (or zero) tail."""
    inner = grid.node_moment(c, values)
    terms = [(inner, -c)]
    if isinstance(tail, PowerTail):
        for coef, expo in tail.terms:
            p = c + expo + 1.0
            if abs(p) < _DEGENERATE:
                return None
            terms.append((coef / p, expo + 1.0))
            terms.append((-coef * grid.r_max ** p / p, -c))
    elif not isinstance(tail, ZeroTail):
        return None
    return PowerTail.of(*terms)


def _right_kernel_tail(grid, c, tail):
    """Tail of s^{c} int_s^inf u^{-c} h(u) du for exact or zero h-tails."""
    if isinstance(tail, ZeroTail):
        return PowerTail.of()
    if isinstance(tail, PowerTail):
        terms = []
        for coef, expo in tail.terms:
            d = c - expo - 1.0
            if d.real <= 0.0:
                return None
            terms.append((coef / d, expo + 1.0))
        return PowerTail.of(*terms)
    return None


def _combine(coeffs_profiles):
    """Linear combination of profiles: returns (values, tail)."""
    base = coeffs_profiles[0][1]
    values = np.zeros(base.grid.n_nodes, dtype=complex)
    tail = ZERO_TAIL
    for coef, p in coeffs_profiles:
        if coef == 0:
            continue
        values = values + coef * p.values
        tail = tail + p.tail.scaled(coef)
    return values, tail


# -- axisymmetric part ------------------------------------------------------

def solve_axisymmetric(forcing: HorizontalForcingMode, params: HamelParameters,
                       grid: RadialGrid) -> HorizontalSolutionMode:
    """Angular profile of mode zero; the radial profile is identically zero."""
    if forcing.mode != 0:
        raise ValueError("solve_axisymmetric expects mode 0 forcing")
    g = params.gamma
    r = grid.r_nodes

    if forcing.pointwise is not None:
        _, f_t = forcing.pointwise
        a_mom = full_moment(grid, 2.0, f_t.values, f_t.tail)
        cl = grid.cum_left(g, f_t.values)
        cr = cum_right_full(grid, -2.0, f_t.values, f_t.tail)
        v = (-a_mom * r ** (1.0 - g) + r * cl + r * cr) / (g - 2.0)
        dv = ((g - 1.0) * a_mom * r ** (-g) - (g - 1.0) * cl - cr) / (g - 2.0)
        env = max(f_t.tail.slowest_exponent() + 2.0, 1.0 - g)
    else:
        _, f_rt, f_tr, _ = forcing.divergence
        m1 = full_moment(grid, 1.0, f_rt.values, f_rt.tail)
        m2 = full_moment(grid, 1.0, f_tr.values, f_tr.tail)
        cl1 = grid.cum_left(g - 1.0, f_rt.values)
        cl2 = grid.cum_left(g - 1.0, f_tr.values)
        cr1 = cum_right_full(grid, -1.0, f_rt.values, f_rt.tail)
        cr2 = cum_right_full(grid, -1.0, f_tr.values, f_tr.tail)
        v = ((m1 - m2) * r ** (1.0 - g)
             - (g - 1.0) * cl1 + cl2 - cr1 + cr2) / (g - 2.0)
        dv = ((1.0 - g) * (m1 - m2) * r ** (-g)
              + ((1.0 - g) * (-(g - 1.0) * cl1 + cl2) - (-cr1 + cr2)) / r
              ) / (g - 2.0) - f_rt.values
        env = max(f_rt.tail.slowest_exponent() + 1.0,
                  f_tr.tail.slowest_exponent() + 1.0, 1.0 - g)

    zero = ModeProfile.zeros(grid, 0, "r")
    sol = HorizontalSolutionMode(
        mode=0,
        v_r=zero,
        v_t=ModeProfile(v, 0, "t", grid, _solution_tail(grid, env, v)),
        dv_r=ModeProfile.zeros(grid, 0, "r"),
        dv_t=ModeProfile(dv, 0, "t", grid, _solution_tail(grid, env - 1.0, dv)),
    )
    sol.checks = structural_checks(sol)
    return sol


# -- non-axisymmetric part ---------------------------------------------------

def compute_vorticity_mode(n: int, forcing: HorizontalForcingMode,
                           params: HamelParameters, grid: RadialGrid):
    """Vorticity profile omega_n and its moment constant c_n for mode n != 0."""
    if n == 0:
        raise ValueError("axisymmetric mode has no zeta")
    sc = compute_coefficients(n, params.alpha, params.gamma)
    zeta, hg = sc.zeta, params.half_gamma
    beta = zeta + hg
    delta = zeta - hg
    r = grid.r_nodes

    if forcing.divergence is not None:
        f_rr, f_rt, f_tr, f_tt = forcing.divergence
        two_zeta = 2.0 * zeta
        g1_vals, g1_tail = _combine([
            (1j * n * (beta - 1.0) / two_zeta, f_rr),
            (beta * (beta - 1.0) / two_zeta, f_rt),
            (-(beta - n * n) / two_zeta, f_tr),
            (-1j * n * (beta - 1.0) / two_zeta, f_tt),
        ])
        g2_vals, g2_tail = _combine([
            (-1j * n * (delta + 1.0) / two_zeta, f_rr),
            (delta * (delta + 1.0) / two_zeta, f_rt),
            ((delta + n * n) / two_zeta, f_tr),
            (1j * n * (delta + 1.0) / two_zeta, f_tt),
        ])
        phi = (-f_rt.values
               + grid.cum_left(beta - 1.0, g1_vals) / r
               + cum_right_full(grid, delta + 1.0, g2_vals, g2_tail) / r)
        lt = _left_kernel_tail(grid, beta - 1.0, g1_vals, g1_tail)
        rt = _right_kernel_tail(grid, delta + 1.0, g2_tail)
        if lt is not None and rt is not None:
            phi_tail = (f_rt.tail.scaled(-1.0)
                        + lt.times_power(-1.0) + rt.times_power(-1.0))
        else:
            env = max(forcing.envelope_exponent(), -(sc.xi + hg))
            phi_tail = EnvelopeTail(env, complex(phi[-1]), grid.r_max)
        input_env = forcing.envelope_exponent()
    else:
        f_r, f_t = forcing.pointwise
        hl_vals, hl_tail = _combine([(1j * n, f_r), (beta, f_t)])
        hr_vals, hr_tail = _combine([(-1j * n, f_r), (delta, f_t)])
        phi = (-grid.cum_left(beta, hl_vals)
               + cum_right_full(grid, delta, hr_vals, hr_tail)) / (2.0 * zeta)
        lt = _left_kernel_tail(grid, beta, hl_vals, hl_tail)
        rt = _right_kernel_tail(grid, delta, hr_tail)
        if lt is not None and rt is not None:
            phi_tail = (lt.scaled(-1.0) + rt).scaled(1.0 / (2.0 * zeta))
        else:
            env = max(forcing.envelope_exponent() + 1.0, -(sc.xi + hg))
            phi_tail = EnvelopeTail(env, complex(phi[-1]), grid.r_max)
        input_env = forcing.envelope_exponent() + 1.0

    a_n = float(abs(n))
    c_n = -(zeta + a_n + hg - 2.0) * full_moment(grid, 1.0 - a_n, phi, phi_tail)
    omega_vals = phi + c_n * np.exp(-(zeta + hg) * np.log(r))
    omega_tail = phi_tail + PowerTail.of((c_n, -(zeta + hg)))
    omega = ModeProfile(omega_vals, n, "omega", grid, omega_tail)
    omega_env = max(input_env, -(sc.xi + hg))
    return omega, complex(c_n), omega_env


def biot_savart(n: int, omega: ModeProfile, moment_tol: float = MOMENT_TOL,
                envelope_hint: float | None = None):
    """Velocity mode recovered from its vorticity profile.

    Requires the |n|-th inverse moment of omega to cancel; otherwise the
    reconstructed field cannot satisfy the no-slip condition and the
    call fails.
    """
    if n == 0:
        raise ValueError("axisymmetric mode has no zeta")
    grid = omega.grid
    a_n = float(abs(n))
    moment = full_moment(grid, 1.0 - a_n, omega.values, omega.tail)
    scale = _abs_moment(grid, 1.0 - a_n, omega)
    if scale > 0 and abs(moment) > moment_tol * scale:
        raise BoundaryError(
            f"boundary condition violated: moment residual {abs(moment) / scale:.3e} "
            f"exceeds {moment_tol:.1e} for mode {n}"
        )

    cl = grid.cum_left(a_n + 1.0, omega.values)
    cr = cum_right_full(grid, a_n - 1.0, omega.values, omega.tail)
    r = grid.r_nodes
    pref = 1j * n / (2.0 * a_n)
    v_r = pref * (cl + cr)
    v_t = 0.5 * (cl - cr)
    dv_r = pref * (-(a_n + 1.0) * cl + (a_n - 1.0) * cr) / r
    dv_t = omega.values - 0.5 * ((a_n + 1.0) * cl + (a_n - 1.0) * cr) / r

    env_omega = omega.tail.slowest_exponent()
    if envelope_hint is not None:
        env_omega = max(env_omega, envelope_hint)
    env = max(env_omega + 1.0, -(a_n + 1.0))
    mk = lambda vals, tag, e: ModeProfile(vals, n, tag, grid,
                                          _solution_tail(grid, e, vals))
    return (mk(v_r, "r", env), mk(v_t, "t", env),
            mk(dv_r, "r", env - 1.0), mk(dv_t, "t", env - 1.0),
            abs(moment) / scale if scale > 0 else 0.0)


def _abs_moment(grid, a, profile):
    base = float(np.real(grid.node_moment(a, np.abs(profile.values))))
    tail = profile.tail
    extra = 0.0
    if isinstance(tail, PowerTail):
        for coef, expo in tail.terms:
            p = a + expo.real
            if p < -1.0:
                extra += abs(coef) * grid.r_max ** (p + 1) / (-p - 1)
    elif isinstance(tail, EnvelopeTail):
        p = a + tail.exponent
        if p < -1.0:
            extra += abs(tail.anchor) * grid.r_max ** (a + 1.0) / (-p - 1)
    return base + extra


def solve_nonaxisymmetric(forcing: HorizontalForcingMode, params: HamelParameters,
                          grid: RadialGrid) -> HorizontalSolutionMode:
    n = forcing.mode
    omega, c_n, omega_env = compute_vorticity_mode(n, forcing, params, grid)
    v_r, v_t, dv_r, dv_t, moment_rel = biot_savart(n, omega,
                                                   envelope_hint=omega_env)
    sol = HorizontalSolutionMode(n, v_r, v_t, dv_r, dv_t, omega, c_n)
    sol.checks = structural_checks(sol)
    sol.checks["moment_rel"] = moment_rel
    return sol


def solve_mode(forcing: HorizontalForcingMode, params: HamelParameters,
               grid: RadialGrid) -> HorizontalSolutionMode:
    """Dispatch on the angular mode of the forcing."""
    if forcing.mode == 0:
        return solve_axisymmetric(forcing, params, grid)
    return solve_nonaxisymmetric(forcing, params, grid)


def structural_checks(sol: HorizontalSolutionMode) -> dict:
    """Boundary and per-mode divergence identities, relative to solution scale."""
    grid = sol.v_r.grid
    n = sol.mode
    scale = max(sol.v_r.max_abs(), sol.v_t.max_abs())
    out = {"scale": scale}
    if scale == 0.0:
        out["boundary_rel"] = 0.0
        out["divergence_rel"] = 0.0
        return out
    out["boundary_rel"] = (abs(sol.v_r.values[0]) + abs(sol.v_t.values[0])) / scale
    div = sol.v_r.values + grid.r_nodes * sol.dv_r.values + 1j * n * sol.v_t.values
    div_scale = np.max(np.abs(sol.v_r.values)
                       + np.abs(grid.r_nodes * sol.dv_r.values)
                       + abs(n) * np.abs(sol.v_t.values))
    out["divergence_rel"] = float(np.max(np.abs(div)) / div_scale) if div_scale > 0 else 0.0
    return out


def zero_solution(n: int, grid: RadialGrid) -> HorizontalSolutionMode:
    z = lambda tag: ModeProfile.zeros(grid, n, tag)
    sol = HorizontalSolutionMode(n, z("r"), z("t"), z("r"), z("t"),
                                 None if n == 0 else z("omega"),
                                 None if n == 0 else 0.0 + 0.0j)
    sol.checks = structural_checks(sol)
    return sol
