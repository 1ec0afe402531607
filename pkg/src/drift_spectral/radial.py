"""Radial solutions of  f'' + ((m-1)/r - r/2) f' = (lambda_l / r^2 - lambda) f.

Degree-l modes are normalized by their asymptotic amplitude: a regular mode
with amplitude A satisfies ``f(r) exp(-r^2/4) r^(m + 2 lambda) -> A``.  Every
evaluator takes ``scaled=True`` to return exactly that product, which stays
finite where ``f`` itself overflows.

Resonant degrees (``lambda - l/2`` a nonnegative integer) have polynomial
regular solutions.  The degree-0 second solutions come from reduction of
order with the Wronskian ``exp(r^2/4) r^(1-m)``:

* integer lambda: ``l(r)``, growing like ``exp(r^2/4) r^-(m + 2 lambda)``
  (for lambda = 0 this is ``u0_harmonic`` up to an additive constant);
* otherwise: ``p(r) ~ r^(2 lambda)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from . import special_fn as sf
from .errors import DomainError, NotResonantError, PathError, ResonanceError
from .spherics import ModeIndex, angular_eigenvalue

X_SWITCH = 40.0
ASYMPTOTIC_REL_TOL = 1e-15
QUAD_REL_TOL = 1e-13

TRICHOTOMY = ("non_integer_2lambda", "integer_lambda", "half_integer_lambda")


def as_fraction(value):
    """Exact rational from int, Fraction, "p/q" string, (num, den) or {num, den}."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, dict):
        return Fraction(int(value["num"]), int(value["den"]))
    if isinstance(value, (tuple, list)):
        return Fraction(int(value[0]), int(value[1]))
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**6)
    return Fraction(value)


@dataclass(frozen=True)
class EigenParams:
    """Dimension m and drift eigenvalue lambda (exact rational, >= 0)."""

    m: int
    lam: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "lam", as_fraction(self.lam))
        if self.m < 2:
            raise DomainError("m must be >= 2")
        if self.lam < 0:
            raise DomainError("lambda must be >= 0")

    @property
    def trichotomy(self):
        if self.lam.denominator == 1:
            return "integer_lambda"
        if (2 * self.lam).denominator == 1:
            return "half_integer_lambda"
        return "non_integer_2lambda"

    @property
    def growth_power(self):
        """m + 2 lambda: the reference profile is exp(r^2/4) r^-(m + 2 lambda)."""
        return self.m + 2.0 * float(self.lam)

    def is_resonant(self, degree):
        return sf.resonance_index(Fraction(degree, 2), self.lam) is not None

    def resonant_degrees(self):
        """Degrees l <= 2 lambda with 2 lambda - l even."""
        top = int(2 * self.lam) if (2 * self.lam).denominator == 1 else -1
        return [l for l in range(top + 1) if self.is_resonant(l)]


def kummer_params(degree, params):
    l = degree / 2.0
    lam = float(params.lam)
    return sf.KummerParams(l + params.m / 2.0 + lam, 2.0 * l + params.m / 2.0)


def series_coefficient(degree, params):
    """Factor c with f = c exp(x) r^(2l) M(a, b; -x) for unit amplitude."""
    p = kummer_params(degree, params)
    return 4.0 ** (-p.a) * sf.gamma_ratio(p.b - p.a, p.b)


def _check_r(r):
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r!r}")


def _log_profile(r, params):
    # log of exp(r^2/4) r^-(m + 2 lambda)
    return r * r / 4.0 - params.growth_power * math.log(r)


def _choose_regime(p, x, regime):
    if regime in ("series", "asymptotic"):
        return regime
    if regime != "auto":
        raise DomainError(f"unknown regime {regime!r}")
    if x <= X_SWITCH:
        return "series"
    _, err = sf.optimal_asymptotic_factor(p.a, p.b, x)
    return "asymptotic" if err <= ASYMPTOTIC_REL_TOL else "series"


def mode_solution(mode, params, amplitude, r, *, scaled=False, regime="auto"):
    """Regular degree-l solution with asymptotic amplitude `amplitude`.

    For ``r^2/4 <= X_SWITCH`` the value is ``c r^l M(b - a, b; r^2/4)`` (the
    Kummer-transformed series, all terms of one sign eventually); beyond it
    the optimally truncated algebraic expansion is used when it is accurate
    to ~1e-15, otherwise the series continues.

    Raises
    ------
    ResonanceError
        If the degree is resonant for `params` (use resonant_mode_solution).
    """
    _check_r(r)
    degree = mode.degree if isinstance(mode, ModeIndex) else int(mode)
    if params.is_resonant(degree):
        raise ResonanceError(
            f"degree {degree} is resonant for lambda = {params.lam}; use resonant_mode_solution"
        )
    if amplitude == 0:
        return 0.0
    p = kummer_params(degree, params)
    x = r * r / 4.0
    if _choose_regime(p, x, regime) == "asymptotic":
        s, _ = sf.optimal_asymptotic_factor(p.a, p.b, x)
        if scaled:
            return amplitude * s
        return amplitude * s * math.exp(_log_profile(r, params))
    c = amplitude * series_coefficient(degree, params)
    if scaled:
        return c * r ** (degree + params.growth_power) * sf.kummer_series(p, -x)
    return c * r**degree * sf.kummer_series(sf.KummerParams(p.b - p.a, p.b), x)


def mode_derivative(degree, params, amplitude, r):
    """d/dr of the unscaled regular solution (series form, moderate r)."""
    _check_r(r)
    p = kummer_params(degree, params)
    alpha = p.b - p.a
    x = r * r / 4.0
    c = amplitude * series_coefficient(degree, params)
    m0 = sf.kummer_series(sf.KummerParams(alpha, p.b), x)
    m1 = sf.kummer_series(sf.KummerParams(alpha + 1.0, p.b + 1.0), x)
    out = alpha / p.b * m1 * r**degree * (r / 2.0)
    if degree:
        out += degree * r ** (degree - 1) * m0
    return c * out


@lru_cache(maxsize=None)
def _resonant_poly(degree, m, lam):
    return sf.resonant_polynomial(Fraction(degree, 2), m, lam)


def resonant_polynomial_for(degree, params):
    if not params.is_resonant(degree):
        raise NotResonantError(f"degree {degree} is not resonant for lambda = {params.lam}")
    return _resonant_poly(degree, params.m, params.lam)


def resonant_mode_solution(mode, params, c, r, *, scaled=False):
    """c q_l(r) for a resonant degree; q_l has powers r^l, ..., r^(2 lambda)."""
    _check_r(r)
    degree = mode.degree if isinstance(mode, ModeIndex) else int(mode)
    q = resonant_polynomial_for(degree, params)
    v = c * q(r)
    if scaled:
        return v * math.exp(-_log_profile(r, params))
    return v


# ---------------------------------------------------------------- u0

def _quad(fun, a, b, points=None):
    val, _ = integrate.quad(fun, a, b, epsabs=0.0, epsrel=QUAD_REL_TOL, limit=400, points=points)
    return val


def u0_harmonic(m, r, *, scaled=False):
    """u0(r) = 1/2 int_1^r exp(s^2/4) s^(1-m) ds, the radial quasi-harmonic solution.

    The base point is 1 rather than 0 (the integral diverges at 0 for m >= 2);
    any base point only shifts u0 by a constant.  ``scaled=True`` returns
    ``u0 exp(-r^2/4) r^m``, which tends to 1.
    """
    _check_r(r)
    if r == 1.0:
        return 0.0
    lo, hi = min(1.0, r), max(1.0, r)
    # the integrand exp((s^2 - r^2)/4) is concentrated within ~40/r of s = r
    pts = [hi - 40.0 / hi] if hi - 40.0 / hi > lo else None
    integral = _quad(lambda s: math.exp((s * s - r * r) / 4.0) * s ** (1 - m), lo, hi, pts)
    if r < 1.0:
        integral = -integral
    val = 0.5 * integral * r**m
    if scaled:
        return val
    return val * math.exp(r * r / 4.0 - m * math.log(r))


# ---------------------------------------------------------------- second solution

def _abel(m, r):
    return math.exp(r * r / 4.0) * r ** (1 - m)


@lru_cache(maxsize=None)
def degree0_nodes(m, lam):
    """Positive zeros of the degree-0 regular solution, ascending."""
    params = EigenParams(m, lam)
    if params.is_resonant(0):
        return tuple(resonant_polynomial_for(0, params).nodes())
    p = kummer_params(0, params)
    f = lambda r: sf.kummer_series(sf.KummerParams(p.b - p.a, p.b), r * r / 4.0)
    grid = np.linspace(1e-3, 30.0, 6000)
    vals = [f(r) for r in grid]
    nodes = []
    for r0, r1, v0, v1 in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if v0 == 0.0:
            nodes.append(float(r0))
        elif v0 * v1 < 0:
            nodes.append(optimize.brentq(f, r0, r1, xtol=1e-15, rtol=1e-15))
    return tuple(nodes)


def reference_radius(params):
    """Base point of the reduction-of-order integral: past every node of (f0)_1."""
    nodes = degree0_nodes(params.m, params.lam)
    return max(3.0, (nodes[-1] + 1.0) if nodes else 0.0)


def _first_degree0(params, r):
    if params.is_resonant(0):
        q = resonant_polynomial_for(0, params)
        return q(r), q.derivative()(r)
    return mode_solution(0, params, 1.0, r), mode_derivative(0, params, 1.0, r)


def reduction_of_order(params, r0, r1):
    """int_{r0}^{r1} W / f1^2 with f1 the degree-0 regular solution.

    Raises
    ------
    PathError
        If a node of f1 lies in the closed interval; continue segment-wise
        (``second_solution`` does this through the ODE).
    """
    lo, hi = min(r0, r1), max(r0, r1)
    for z in degree0_nodes(params.m, params.lam):
        if lo <= z <= hi:
            raise PathError(
                f"node of the first solution at r = {z:.6g} inside [{lo:.6g}, {hi:.6g}]; "
                "continue segment-wise"
            )
    m = params.m
    val = _quad(lambda s: _abel(m, s) / _first_degree0(params, s)[0] ** 2, lo, hi)
    return val if r1 >= r0 else -val


def _leading_resonant(params):
    return float(resonant_polynomial_for(0, params).leading)


def _second_direct(params, r, scaled):
    # second solution by quadrature; scaled multiplies by exp(-r^2/4) r^(m + 2 lambda)
    m = params.m
    k = params.growth_power
    if params.trichotomy == "integer_lambda":
        q = resonant_polynomial_for(0, params)
        kappa = float(q.leading)
        r_ref = reference_radius(params)
        lo, hi = min(r, r_ref), max(r, r_ref)
        pts = [hi - 40.0 / hi] if hi - 40.0 / hi > lo else None
        integral = _quad(
            lambda s: math.exp((s * s - r * r) / 4.0) * s ** (1 - m) / q(s) ** 2, lo, hi, pts
        )
        if r < r_ref:
            integral = -integral
        val = 0.5 * kappa * q(r) * r**k * integral
        return val if scaled else val * math.exp(_log_profile(r, params))
    big_f = lambda s: mode_solution(0, params, 1.0, s, scaled=True)
    upper = math.sqrt(r * r + 160.0)
    expo = 1.0 + m + 4.0 * float(params.lam)
    integral = _quad(lambda s: math.exp((r * r - s * s) / 4.0) * s**expo / big_f(s) ** 2, r, upper)
    p_val = 0.5 * big_f(r) * r ** (-k) * integral
    return p_val * math.exp(-_log_profile(r, params)) if scaled else p_val


def _second_direct_ok(params, r):
    r_ref = reference_radius(params)
    nodes = degree0_nodes(params.m, params.lam)
    if params.trichotomy == "integer_lambda":
        lo, hi = min(r, r_ref), max(r, r_ref)
        return not any(lo <= z <= hi for z in nodes)
    return not any(z >= r for z in nodes)


def _ode_rhs(m, lam, eig):
    def rhs(r, y):
        f, df = y
        return [df, -((m - 1) / r - r / 2.0) * df + (eig / (r * r) - lam) * f]

    return rhs


@lru_cache(maxsize=None)
def _second_inner(m, lam):
    # dense ODE continuation of the second solution from r_ref down to 0.02
    params = EigenParams(m, lam)
    r_ref = reference_radius(params)
    if params.trichotomy == "integer_lambda":
        q = resonant_polynomial_for(0, params)
        y0 = [0.0, 0.5 * float(q.leading) * _abel(m, r_ref) / q(r_ref)]
    else:
        f1, df1 = _first_degree0(params, r_ref)
        p_val = _second_direct(params, r_ref, scaled=False)
        # p = f1 J / 2 with J = int_r^inf W / f1^2, so p' = (f1' J - W / f1) / 2
        j = 2.0 * p_val / f1
        y0 = [p_val, 0.5 * (df1 * j - _abel(m, r_ref) / f1)]
    sol = integrate.solve_ivp(
        _ode_rhs(m, float(lam), 0.0),
        (r_ref, 0.02),
        y0,
        method="DOP853",
        rtol=1e-13,
        atol=1e-14 * max(abs(y0[0]), abs(y0[1])),
        dense_output=True,
    )
    if not sol.success:
        raise ArithmeticError(f"second-solution continuation failed: {sol.message}")
    return sol.sol


def second_solution(params, r, *, scaled=False):
    """Degree-0 second solution by reduction of order.

    integer lambda: ``l(r) = (kappa/2) q(r) int_{r_ref}^r W / q^2`` with kappa
    the leading coefficient of q, so ``l exp(-r^2/4) r^(m + 2 lambda) -> 1``.
    otherwise: ``p(r) = (1/2) f1(r) int_r^inf W / f1^2`` with f1 the unit
    amplitude regular solution, so ``p(r) / r^(2 lambda) -> 1``.

    Where the quadrature path would cross a node of the first solution the
    value comes from integrating the radial ODE inward from ``r_ref``.
    """
    _check_r(r)
    if _second_direct_ok(params, r):
        return _second_direct(params, r, scaled)
    if r < 0.02:
        raise DomainError("second solution continuation is tabulated down to r = 0.02")
    val = float(_second_inner(params.m, params.lam)(r)[0])
    return val * math.exp(-_log_profile(r, params)) if scaled else val


KINDS = ("kummer_regular", "resonant_polynomial", "second_solution")


@dataclass(frozen=True)
class RadialMode:
    """A single radial solution with its normalization constant.

    `amplitude` is the asymptotic amplitude for ``kummer_regular``, the
    polynomial coefficient for ``resonant_polynomial`` and the coefficient of
    the normalized second solution for ``second_solution``.
    """

    mode: ModeIndex
    params: EigenParams
    kind: str
    amplitude: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown radial kind {self.kind!r}")
        resonant = self.params.is_resonant(self.mode.degree)
        if self.kind == "kummer_regular" and resonant:
            raise ResonanceError(f"degree {self.mode.degree} is resonant")
        if self.kind == "resonant_polynomial" and not resonant:
            raise NotResonantError(f"degree {self.mode.degree} is not resonant")
        if self.kind == "second_solution" and self.mode.degree != 0:
            raise DomainError("second solutions exist only at degree 0")

    def __call__(self, r, *, scaled=False):
        if self.kind == "kummer_regular":
            return mode_solution(self.mode, self.params, self.amplitude, r, scaled=scaled)
        if self.kind == "resonant_polynomial":
            return resonant_mode_solution(self.mode, self.params, self.amplitude, r, scaled=scaled)
        return self.amplitude * second_solution(self.params, r, scaled=scaled)


def radial_operator_residual(f, r, degree, params, h=2e-3):
    """Relative residual of the radial ODE at r by 5-point central differences.

    Returns ``|f'' + ((m-1)/r - r/2) f' - (lambda_l/r^2 - lambda) f|`` divided
    by the sum of the magnitudes of the three terms.
    """
    m = params.m
    lam = float(params.lam)
    eig = angular_eigenvalue(degree, m)
    v = [f(r + k * h) for k in (-2, -1, 0, 1, 2)]
    d1 = (v[0] - 8 * v[1] + 8 * v[3] - v[4]) / (12 * h)
    d2 = (-v[0] + 16 * v[1] - 30 * v[2] + 16 * v[3] - v[4]) / (12 * h * h)
    t1 = d2
    t2 = ((m - 1) / r - r / 2.0) * d1
    t3 = -(eig / (r * r) - lam) * v[2]
    scale = abs(t1) + abs(t2) + abs(t3)
    if scale == 0.0:
        return 0.0
    return abs(t1 + t2 + t3) / scale
