"""Radial mode profiles, power-law tails, and weighted decay norms.

A profile stores complex values at the grid nodes together with a tail
model describing it beyond r_max.  Forcing data built from closed-form
power laws carries an exact tail; everything produced by a solve or a
product of solves carries an envelope tail anchored at the r_max value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import TailError
from .grid import RadialGrid

_MERGE_TOL = 1e-12


class ZeroTail:
    """Identically zero beyond r_max (compactly supported data)."""

    def eval(self, s):
        return np.zeros_like(np.asarray(s, dtype=complex))

    def scaled(self, k):
        return self

    def __add__(self, other):
        return other

    __radd__ = __add__

    def moment(self, a, r_max):
        return 0.0 + 0.0j

    def right_integral_scaled(self, c, log_r, r_max):
        return np.zeros_like(np.asarray(log_r, dtype=complex))

    def slowest_exponent(self):
        return -np.inf


@dataclass(frozen=True)
class PowerTail:
    """Exact power sum sum_t coef_t s^{expo_t} valid for s >= r_max."""

    terms: tuple  # of (coef complex, expo complex)

    @staticmethod
    def of(*terms):
        merged = {}
        for coef, expo in terms:
            key = complex(expo)
            hit = next((k for k in merged if abs(k - key) < _MERGE_TOL), None)
            if hit is None:
                merged[key] = complex(coef)
            else:
                merged[hit] += complex(coef)
        kept = tuple((c, e) for e, c in merged.items() if c != 0)
        return PowerTail(terms=kept)

    def eval(self, s):
        s = np.asarray(s, dtype=complex)
        out = np.zeros_like(s)
        for coef, expo in self.terms:
            out = out + coef * s ** expo
        return out

    def scaled(self, k):
        return PowerTail(tuple((coef * k, expo) for coef, expo in self.terms))

    def times_power(self, p):
        return PowerTail(tuple((coef, expo + p) for coef, expo in self.terms))

    def __add__(self, other):
        if isinstance(other, ZeroTail):
            return self
        if isinstance(other, PowerTail):
            return PowerTail.of(*(self.terms + other.terms))
        return other.__add__(self)

    __radd__ = __add__

    def moment(self, a, r_max):
        """int_{r_max}^inf s^a * tail(s) ds, exact."""
        total = 0.0 + 0.0j
        for coef, expo in self.terms:
            p = complex(a) + expo
            if p.real >= -1.0:
                raise TailError(
                    f"non-integrable tail: exponent {p} of s^a*tail has Re >= -1"
                )
            total += -coef * r_max ** (p + 1) / (p + 1)
        return total

    def right_integral_scaled(self, c, log_r, r_max):
        """r^c int_{r_max}^inf s^{-c} tail(s) ds at radii exp(log_r)."""
        c = complex(c)
        out = np.zeros_like(np.asarray(log_r, dtype=complex))
        lmax = np.log(r_max)
        for coef, expo in self.terms:
            d = c - expo - 1.0
            if d.real <= 0.0:
                raise TailError(
                    f"non-integrable tail: exponent {expo - c} beyond r_max has Re >= -1"
                )
            out = out + coef * r_max ** (expo + 1) / d * np.exp(c * (log_r - lmax))
        return out

    def slowest_exponent(self):
        if not self.terms:
            return -np.inf
        return max(e.real for _, e in self.terms)


@dataclass(frozen=True)
class EnvelopeTail:
    """Model tail anchor * (s/r_ref)^{exponent}, anchored at the value at r_ref."""

    exponent: float
    anchor: complex
    r_ref: float

    def _as_power(self):
        return PowerTail.of((self.anchor * self.r_ref ** (-self.exponent), self.exponent))

    def eval(self, s):
        return self.anchor * (np.asarray(s, dtype=complex) / self.r_ref) ** self.exponent

    def scaled(self, k):
        return EnvelopeTail(self.exponent, self.anchor * k, self.r_ref)

    def __add__(self, other):
        if isinstance(other, ZeroTail):
            return self
        if isinstance(other, EnvelopeTail):
            if other.r_ref != self.r_ref:
                raise ValueError("envelope tails anchored at different radii")
            return EnvelopeTail(max(self.exponent, other.exponent),
                                self.anchor + other.anchor, self.r_ref)
        if isinstance(other, PowerTail):
            return EnvelopeTail(
                max(self.exponent, other.slowest_exponent()),
                self.anchor + complex(other.eval(self.r_ref)),
                self.r_ref,
            )
        return NotImplemented

    __radd__ = __add__

    def moment(self, a, r_max):
        return self._as_power().moment(a, r_max)

    def right_integral_scaled(self, c, log_r, r_max):
        return self._as_power().right_integral_scaled(c, log_r, r_max)

    def slowest_exponent(self):
        return self.exponent


ZERO_TAIL = ZeroTail()


class PowerSum:
    """Finite sum of complex power laws sum_t coef_t r^{expo_t} on [1, inf)."""

    __slots__ = ("terms",)

    def __init__(self, terms):
        merged = {}
        for coef, expo in terms:
            key = complex(expo)
            hit = next((k for k in merged if abs(k - key) < _MERGE_TOL), None)
            if hit is None:
                merged[key] = complex(coef)
            else:
                merged[hit] += complex(coef)
        self.terms = tuple((c, e) for e, c in merged.items() if abs(c) > 0.0)

    @staticmethod
    def of(*terms):
        return PowerSum(terms)

    @staticmethod
    def zero():
        return PowerSum(())

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=complex)
        for coef, expo in self.terms:
            out = out + coef * np.exp(expo * np.log(r))
        return out

    def derivative(self):
        return PowerSum([(coef * expo, expo - 1) for coef, expo in self.terms])

    def times_power(self, p):
        return PowerSum([(coef, expo + p) for coef, expo in self.terms])

    def scaled(self, k):
        return PowerSum([(coef * k, expo) for coef, expo in self.terms])

    def __add__(self, other):
        return PowerSum(self.terms + other.terms)

    def __sub__(self, other):
        return self + other.scaled(-1.0)

    def conjugate(self):
        return PowerSum([(np.conj(c), np.conj(e)) for c, e in self.terms])

    def slowest_exponent(self):
        if not self.terms:
            return -np.inf
        return max(e.real for _, e in self.terms)

    def integral(self, a, b=np.inf):
        """int_a^b of the sum, exact; b may be inf."""
        total = 0.0 + 0.0j
        for coef, expo in self.terms:
            p = expo + 1.0
            if abs(p) < _MERGE_TOL:
                if np.isinf(b):
                    raise TailError("non-integrable tail: exponent -1 term")
                total += coef * np.log(b / a)
                continue
            if np.isinf(b):
                if p.real >= 0.0:
                    raise TailError(
                        f"non-integrable tail: exponent {expo} with Re >= -1"
                    )
                total += -coef * a ** p / p
            else:
                total += coef * (b ** p - a ** p) / p
        return total

    def tail(self):
        return PowerTail.of(*self.terms)


@dataclass
class ModeProfile:
    """Complex radial profile of one cylindrical component at one angular mode."""

    values: np.ndarray
    mode: int
    component_tag: str
    grid: RadialGrid
    tail: object = field(default_factory=lambda: ZERO_TAIL)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.n_nodes,):
            raise ValueError("profile values not aligned with grid nodes")

    @staticmethod
    def from_powersum(ps: PowerSum, grid: RadialGrid, mode: int = 0, tag: str = "r"):
        return ModeProfile(ps(grid.r_nodes), mode, tag, grid, ps.tail())

    @staticmethod
    def from_callable(fn, grid: RadialGrid, mode: int = 0, tag: str = "r", tail=ZERO_TAIL):
        return ModeProfile(np.asarray(fn(grid.r_nodes), dtype=complex), mode, tag, grid, tail)

    @staticmethod
    def zeros(grid: RadialGrid, mode: int = 0, tag: str = "r"):
        return ModeProfile(np.zeros(grid.n_nodes, dtype=complex), mode, tag, grid, ZERO_TAIL)

    def at(self, r):
        """Point evaluation: panel interpolation inside, tail model beyond r_max."""
        r_arr = np.asarray(r, dtype=float)
        scalar = r_arr.ndim == 0
        rq = np.atleast_1d(r_arr)
        out = np.empty(rq.shape, dtype=complex)
        inside = rq <= self.grid.r_max
        if np.any(inside):
            out[inside] = self.grid.interpolate(self.values, rq[inside])
        if np.any(~inside):
            out[~inside] = self.tail.eval(rq[~inside])
        return out[0] if scalar else out

    def scaled(self, k):
        return ModeProfile(self.values * k, self.mode, self.component_tag,
                           self.grid, self.tail.scaled(k))

    def __add__(self, other):
        if other.grid is not self.grid:
            raise ValueError("profiles live on different grids")
        return ModeProfile(self.values + other.values, self.mode, self.component_tag,
                           self.grid, self.tail + other.tail)

    def max_abs(self):
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class WeightedNormReport:
    sup_norm_weighted: float
    achieving_radius: float


def weighted_sup_norm(p: ModeProfile, s: float) -> WeightedNormReport:
    """max over grid nodes of r^s |p(r)| and the radius achieving it."""
    if p.values.size == 0:
        raise ValueError("no data")
    weighted = p.grid.r_nodes ** s * np.abs(p.values)
    j = int(np.argmax(weighted))
    return WeightedNormReport(float(weighted[j]), float(p.grid.r_nodes[j]))


def l1_weighted_norm(mode_family, s: float) -> float:
    """Sum over modes of the component-wise max weighted sup norm.

    `mode_family` maps mode index to an iterable of ModeProfiles (the
    component triple, or any profile collection).
    """
    total = 0.0
    for n, comps in mode_family.items():
        per_mode = 0.0
        for p in comps:
            per_mode = max(per_mode, weighted_sup_norm(p, s).sup_norm_weighted)
        total += per_mode
    return total


def integrate_weighted(p, exponent: float, r_lo: float = 1.0, r_hi: float = np.inf,
                       grid: RadialGrid | None = None, envelope: float | None = None) -> complex:
    """int_{r_lo}^{r_hi} s^exponent p(s) ds with an analytic power-law tail.

    `p` is a ModeProfile or a callable; callables integrating to infinity
    must declare an `envelope` exponent valid beyond r_max.
    """
    if isinstance(p, ModeProfile):
        grid = p.grid
        fn = lambda s: p.grid.interpolate(p.values, s)
        tail = p.tail
    else:
        if grid is None:
            raise ValueError("callable integrand needs a grid")
        fn = p
        if np.isinf(r_hi):
            if envelope is None:
                raise ValueError("callable integrand needs an envelope for an infinite tail")
            anchor = complex(np.asarray(fn(np.array([grid.r_max])))[0])
            tail = EnvelopeTail(envelope, anchor, grid.r_max)
        else:
            tail = ZERO_TAIL

    if np.isinf(r_hi):
        env = tail.slowest_exponent()
        if exponent + env >= -1.0 and not isinstance(tail, ZeroTail):
            raise TailError(
                f"non-integrable tail: exponent {exponent} + envelope {env} >= -1"
            )
        finite = grid.integrate_clipped(lambda s: np.asarray(fn(s)) * s ** exponent,
                                        r_lo, grid.r_max)
        return complex(finite + tail.moment(exponent, grid.r_max))

    return grid.integrate_clipped(lambda s: np.asarray(fn(s)) * s ** exponent, r_lo, r_hi)


# -- tail-aware kernel wrappers used by the per-mode solvers ---------------

def cum_right_full(grid: RadialGrid, c, values, tail) -> np.ndarray:
    """r^c int_r^inf s^{-c} h ds at every node, tail included."""
    out = grid.cum_right(c, values)
    return out + tail.right_integral_scaled(c, grid._tables["log_r"], grid.r_max)


def full_moment(grid: RadialGrid, a, values, tail) -> complex:
    """int_1^inf s^a h ds, tail included."""
    return complex(grid.node_moment(a, values) + tail.moment(a, grid.r_max))
