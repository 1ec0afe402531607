"""Scalar special functions: gamma, Pochhammer, Kummer's function M(a, b; x).

Kummer's function is summed from its power series, with negative arguments
routed through the Kummer transformation ``M(a, b; x) = exp(x) M(b - a, b; -x)``
so that every summed term is eventually positive.  For large negative
arguments the algebraic expansion

    M(a, b; -x) ~ x**(-a) Gamma(b) / Gamma(b - a) * sum_n (a)_n (1 + a - b)_n / n! x**(-n)

is available, and at resonant parameters (``b - a`` a nonpositive integer) the
regular radial solution collapses to a polynomial, built exactly with
``fractions.Fraction`` coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ConvergenceError, DomainError, NotResonantError, ResonanceError

# Lanczos approximation, g = 7, nine coefficients.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_GAMMA_MAX = 171.6243769563027
_LANCZOS_MAX = 12.0

SERIES_MAX_TERMS = 10_000
SERIES_REL_TOL = 1e-14

_RESCALE = 1e250
_LOG_RESCALE = math.log(_RESCALE)


def _is_nonpositive_integer(x):
    return x <= 0 and float(x).is_integer()


def _sinpi(x):
    """sin(pi x) with exact zeros at the integers."""
    # x - round(x) is exact in floating point, so no digits are lost near the zeros
    n = round(x)
    y = x - n
    if y == 0.0:
        return 0.0
    sign = -1.0 if n % 2 else 1.0
    return sign * math.sin(math.pi * y)


def _lanczos_gamma(x):
    # valid for x >= 0.5
    z = x - 1.0
    s = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        s += _LANCZOS_COEF[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    # split the power so t**(z + 0.5) cannot overflow before exp(-t) is applied
    half = t ** (0.5 * (z + 0.5))
    return math.sqrt(2.0 * math.pi) * s * ((half * math.exp(-t)) * half)


def gamma(x):
    """Gamma function for real arguments.

    Uses a g = 7 Lanczos approximation for ``x >= 0.5`` and the reflection
    formula below that.  Positive integers up to 170 are returned exactly.

    Raises
    ------
    DomainError
        If `x` is zero or a negative integer.
    OverflowError
        If the result exceeds the double range (``x > 171.62...``).
    """
    x = float(x)
    if math.isnan(x):
        return math.nan
    if _is_nonpositive_integer(x):
        raise DomainError(f"gamma has a pole at x = {x:g}")
    if x > _GAMMA_MAX:
        raise OverflowError(f"gamma({x:g}) overflows double precision")
    if x.is_integer() and x <= 171:
        return float(math.factorial(int(x) - 1))
    if x < 0.5:
        s = _sinpi(x)
        # reflection: Gamma(x) Gamma(1 - x) = pi / sin(pi x)
        return math.pi / (s * gamma(1.0 - x))
    if x > _LANCZOS_MAX:
        # the power in the Lanczos form loses ~x ulp; recur up from a small base
        k = math.ceil(x - _LANCZOS_MAX)
        base = x - k
        out = _lanczos_gamma(base)
        for j in range(k):
            out *= base + j
        return out
    return _lanczos_gamma(x)


def gamma_sign(x):
    """Sign of Gamma(x) at a non-pole real argument."""
    if x > 0:
        return 1.0
    if _is_nonpositive_integer(x):
        raise DomainError(f"gamma has a pole at x = {x:g}")
    return -1.0 if math.ceil(-x) % 2 == 1 else 1.0


def rgamma(x):
    """Reciprocal gamma; zero at the poles of gamma."""
    if _is_nonpositive_integer(x):
        return 0.0
    if x > _GAMMA_MAX:
        return 0.0
    return 1.0 / gamma(x)


def gamma_ratio(p, q):
    """Gamma(p) / Gamma(q) computed through log-gamma when either is large.

    Returns 0 when `q` is a pole of gamma (1 / Gamma(q) = 0).
    """
    if _is_nonpositive_integer(p):
        raise DomainError(f"gamma has a pole at x = {p:g}")
    if _is_nonpositive_integer(q):
        return 0.0
    if abs(p) < 150.0 and abs(q) < 150.0:
        return gamma(p) / gamma(q)
    sign = gamma_sign(p) * gamma_sign(q)
    return sign * math.exp(math.lgamma(p) - math.lgamma(q))


def pochhammer(a, n):
    """Rising factorial (a)_n = a (a + 1) ... (a + n - 1), with (a)_0 = 1."""
    if n < 0:
        raise DomainError("pochhammer requires n >= 0")
    out = 1.0
    for k in range(n):
        out *= a + k
    return out


@dataclass(frozen=True)
class KummerParams:
    """Parameters (a, b) of Kummer's function M(a, b; x)."""

    a: float
    b: float

    def __post_init__(self):
        if _is_nonpositive_integer(self.b):
            raise DomainError(f"Kummer parameter b = {self.b:g} is a pole of the series")


def _summable_tail(alpha, b, y, n):
    # ratio of successive terms after index n is below 1/2 from here on
    ratio = abs(alpha + n) * abs(y) / ((b + n) * (n + 1))
    return n > abs(alpha) and b + n > 0 and ratio < 0.5


def _scaled_series(alpha, b, y, log_prefactor, rel_tol, max_terms):
    """exp(log_prefactor) * sum_n (alpha)_n / ((b)_n n!) y**n, with rescaling."""
    term = 1.0
    total = 1.0
    log_scale = 0.0
    for n in range(max_terms):
        if alpha + n == 0:
            # polynomial case: every later term vanishes
            return total * math.exp(log_prefactor + log_scale)
        term *= (alpha + n) * y / ((b + n) * (n + 1))
        total += term
        if abs(total) > _RESCALE or abs(term) > _RESCALE:
            term /= _RESCALE
            total /= _RESCALE
            log_scale += _LOG_RESCALE
        if abs(term) <= rel_tol * abs(total) and _summable_tail(alpha, b, y, n + 1):
            return total * math.exp(log_prefactor + log_scale)
    raise ConvergenceError(
        f"Kummer series did not converge in {max_terms} terms",
        partial_sum=total * math.exp(log_prefactor + log_scale),
        bound=abs(term) * math.exp(log_prefactor + log_scale),
    )


def kummer_series(p, x, rel_tol=SERIES_REL_TOL, max_terms=SERIES_MAX_TERMS):
    """Kummer's function M(a, b; x) from its convergent power series.

    For ``x < 0`` the sum is taken for ``exp(x) M(b - a, b; -x)``; the
    prefactor is folded into a running log-scale so neither factor overflows
    on its own (arguments down to about -9000 stay within the term cap).

    Parameters
    ----------
    p : KummerParams
    x : float
    rel_tol : float
        Stop once the current term is below ``rel_tol`` times the partial sum
        and every later term is guaranteed to shrink geometrically.

    Raises
    ------
    ConvergenceError
        If `max_terms` terms were not enough.
    """
    if rel_tol <= 0:
        raise DomainError("rel_tol must be positive")
    x = float(x)
    if x == 0.0:
        return 1.0
    if x < 0.0:
        return _scaled_series(p.b - p.a, p.b, -x, x, rel_tol, max_terms)
    return _scaled_series(p.a, p.b, x, 0.0, rel_tol, max_terms)


@dataclass(frozen=True)
class AsymptoticExpansion:
    """Truncated large-argument expansion of M(a, b; -x).

    ``terms[n - 1]`` is ``(a)_n (1 + a - b)_n / n!``; the expansion value is
    ``x**(-a) * leading_amplitude * (1 + sum_n terms[n - 1] * x**(-n))``.
    """

    leading_amplitude: float
    terms: tuple
    truncation_order: int

    def series_factor(self, x):
        s = 1.0
        xp = 1.0
        for c in self.terms:
            xp /= x
            s += c * xp
        return s


def asymptotic_coefficient(a, b, n):
    return pochhammer(a, n) * pochhammer(1.0 + a - b, n) / math.factorial(n)


def asymptotic_expansion(p, order):
    """Coefficients of the order-`order` expansion of M(a, b; -x)."""
    if order < 0:
        raise DomainError("expansion order must be >= 0")
    if _is_nonpositive_integer(p.b - p.a):
        raise ResonanceError(
            f"b - a = {p.b - p.a:g} is a nonpositive integer; Gamma(b - a) has a pole "
            "(use resonant_polynomial)"
        )
    terms = []
    c = 1.0
    for n in range(1, order + 1):
        c *= (p.a + n - 1) * (1.0 + p.a - p.b + n - 1) / n
        terms.append(c)
    return AsymptoticExpansion(gamma_ratio(p.b, p.b - p.a), tuple(terms), order)


def kummer_asymptotic(p, x, order):
    """Truncated expansion of M(a, b; -x) for x > 0.

    Returns
    -------
    value : float
        ``x**(-a) Gamma(b)/Gamma(b - a) (1 + sum_{n=1}^{order} c_n x**(-n))``.
    first_omitted_term : float
        Magnitude of the order + 1 term including the prefactor; a heuristic
        scale for the truncation error.
    """
    if x <= 0:
        raise DomainError("kummer_asymptotic requires x > 0")
    exp_ = asymptotic_expansion(p, order)
    pref = x ** (-p.a) * exp_.leading_amplitude
    value = pref * exp_.series_factor(x)
    nxt = asymptotic_coefficient(p.a, p.b, order + 1) * x ** (-(order + 1))
    return value, abs(pref * nxt)


def optimal_asymptotic_factor(a, b, x, rel_tol=1e-17, max_terms=200):
    """Sum ``1 + sum_n (a)_n (1 + a - b)_n / n! x**(-n)`` to its smallest term.

    Returns ``(factor, error_estimate)`` where the estimate is the magnitude of
    the first omitted term relative to the factor.  Terminating series (when
    ``1 + a - b`` is a nonpositive integer) are summed exactly.
    """
    total = 1.0
    term = 1.0
    for n in range(max_terms):
        nxt = term * (a + n) * (1.0 + a - b + n) / ((n + 1) * x)
        if nxt == 0.0:
            return total, 0.0
        if abs(nxt) >= abs(term):
            return total, abs(term / total)
        term = nxt
        total += term
        if abs(term) <= rel_tol * abs(total):
            return total, abs(term / total)
    return total, abs(term / total)


@dataclass(frozen=True)
class ResonantPolynomial:
    """Polynomial radial solution q(r) at a resonant degree.

    ``coefficients[p]`` is the exact coefficient of ``r**p``; only powers
    ``2 l, 2 l + 2, ..., 2 lambda`` are nonzero.
    """

    coefficients: tuple
    degree: int

    @property
    def leading(self):
        return self.coefficients[self.degree]

    @property
    def lowest_power(self):
        return next(p for p, c in enumerate(self.coefficients) if c != 0)

    def __call__(self, r):
        out = 0.0
        for c in reversed(self.coefficients):
            out = out * r + float(c)
        return out

    def derivative(self):
        coeffs = tuple(p * c for p, c in enumerate(self.coefficients))[1:]
        if not coeffs:
            coeffs = (Fraction(0),)
        return ResonantPolynomial(coeffs, max(self.degree - 1, 0))

    def nodes(self):
        """Positive real zeros of q, ascending."""
        import numpy as np

        # q(r) = r**(2l) * P(r**2); the zeros are those of P in s = r**2
        low = self.lowest_power
        cs = [float(c) for c in self.coefficients[low::2]]
        if len(cs) < 2:
            return []
        roots = np.roots(cs[::-1])
        out = sorted(
            math.sqrt(z.real) for z in roots if abs(z.imag) < 1e-10 * max(1.0, abs(z)) and z.real > 0
        )
        return out


def resonance_index(l, lam):
    """Return i = lambda - l if it is a nonnegative integer, else None."""
    i = Fraction(lam) - Fraction(l)
    if i >= 0 and i.denominator == 1:
        return int(i)
    return None


def resonant_polynomial(l, m, lam):
    """Polynomial solution of the degree-2l radial eigen-equation.

    When ``i = lambda - l`` is a nonnegative integer, the regular solution
    ``exp(r^2/4) r^(2l) M(a, b; -r^2/4)`` with ``a = l + m/2 + lambda``,
    ``b = 2l + m/2`` equals ``r^(2l) M(-i, b; r^2/4)``, a polynomial of
    degree 2 lambda.  Coefficients are exact fractions.

    Raises
    ------
    NotResonantError
        If ``lambda - l`` is not a nonnegative integer.
    """
    l = Fraction(l)
    lam = Fraction(lam)
    i = resonance_index(l, lam)
    if i is None:
        raise NotResonantError(f"lambda - l = {lam - l} is not a nonnegative integer")
    b = 2 * l + Fraction(m, 2)
    low = int(2 * l)
    deg = int(2 * lam)
    coeffs = [Fraction(0)] * (deg + 1)
    c = Fraction(1)
    coeffs[low] = c
    for j in range(1, i + 1):
        c = c * (-i + j - 1) / ((b + j - 1) * j * 4)
        coeffs[low + 2 * j] = c
    return ResonantPolynomial(tuple(coeffs), deg)
