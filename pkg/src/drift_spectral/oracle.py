"""Independent checks: direct ODE integration, residual probes, remainder rates,
Wronskians and the frequency function.

None of these reuse the Kummer-form evaluation they are used to check: the
ODE is seeded from its own Frobenius series and integrated with an adaptive
Dormand-Prince 8(5,3) scheme, and residuals use finite differences.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import radial
from . import special_fn as sf
from .errors import AccuracyError, DomainError, ResonanceError, SeedError, ZeroFieldError
from .field import loglog_slope, radial_value, _radial_constant
from .spherics import angular_eigenvalue, evaluate_angular, sphere_area, zonal


# ---------------------------------------------------------------- ODE oracle

def _seed_series(degree, params, r, rel_tol=1e-17, max_terms=200):
    # g(r) = 1 + c_1 r^2 + ... with f = r^l g the regular solution
    m = params.m
    lam = float(params.lam)
    c = 1.0
    val = 1.0
    der = 0.0
    for j in range(1, max_terms):
        c *= ((degree + 2 * j - 2) / 2.0 - lam) / (2.0 * j * (2 * degree + 2 * j + m - 2))
        term = c * r ** (2 * j)
        val += term
        der += 2 * j * c * r ** (2 * j - 1)
        if c == 0.0 or (j > 2 and abs(term) <= rel_tol * abs(val)):
            return val, der
    raise SeedError(f"seed series did not converge at r = {r}; use a smaller r_start")


def frobenius_seed(degree, params, r):
    """Value and derivative at r of the regular solution r^l (1 + c_1 r^2 + ...).

    The coefficients follow from substituting the power series in the radial
    ODE: ``c_j = c_{j-1} ((l + 2j - 2)/2 - lambda) / (2j (2l + 2j + m - 2))``.
    """
    g, dg = _seed_series(degree, params, r)
    return r**degree * g, degree * r ** (degree - 1) * g + r**degree * dg if degree else dg


def radial_rhs(degree, params):
    """Right-hand side of the radial ODE as a first-order system in (f, f')."""
    m = params.m
    lam = float(params.lam)
    eig = angular_eigenvalue(degree, m)

    def rhs(r, y):
        return [y[1], -((m - 1) / r - r / 2.0) * y[1] + (eig / (r * r) - lam) * y[0]]

    return rhs


def _factored_rhs(degree, params):
    # f = r^l g turns the radial ODE into g'' + ((2l + m - 1)/r - r/2) g' + (lambda - l/2) g = 0
    k = 2 * degree + params.m - 1
    shift = float(params.lam) - degree / 2.0

    def rhs(r, y):
        return [y[1], -(k / r - r / 2.0) * y[1] - shift * y[0]]

    return rhs


@dataclass(frozen=True)
class OdeSolution:
    """Regular solution normalized to leading term r^degree."""

    degree: int
    params: radial.EigenParams
    radii: list
    values: list
    derivative_values: list
    estimated_error: float

    def to_csv(self):
        return write_csv(
            ["radius", "value", "derivative"],
            zip(self.radii, self.values, self.derivative_values),
        )


_MIN_RTOL = 2.5e-14  # scipy clamps rtol below 100 eps


def _solve(degree, params, r_start, r_end, rtol, radii):
    # integrate the factored form so the power r^l does not swamp tolerances
    y0 = list(_seed_series(degree, params, r_start))
    sol = integrate.solve_ivp(
        _factored_rhs(degree, params),
        (r_start, r_end),
        y0,
        method="DOP853",
        rtol=rtol,
        atol=rtol * 1e-3,
        t_eval=radii,
    )
    if not sol.success:
        raise SeedError(f"integration failed ({sol.message}); try a larger r_start")
    g, dg = sol.y
    r = np.asarray(radii)
    f = r**degree * g
    df = r**degree * dg + (degree * r ** (degree - 1) * g if degree else 0.0)
    return np.vstack([f, df])


def _running_sup(v):
    return np.maximum.accumulate(np.abs(v))


def integrate_radial_ode(degree, params, r_start, r_end, tol=1e-10, radii=None):
    """Integrate the radial ODE from the regular seed at r_start.

    Parameters
    ----------
    tol : float
        Target relative accuracy.  The run uses ``tol/100`` and is compared
        to a run at ``tol/10^4`` (floored at the integrator's minimum); the
        difference, relative to the running
        maximum of |f|, is ``estimated_error``.
    radii : sequence, optional
        Output radii in ``[r_start, r_end]``; defaults to 200 points.

    Raises
    ------
    SeedError
        If the integrator fails to step away from r_start.
    AccuracyError
        If the estimated error exceeds `tol`, or `tol` is so small that the
        reference run cannot be tighter than the main run.
    """
    if not 0 < r_start < r_end:
        raise DomainError("need 0 < r_start < r_end")
    if radii is None:
        radii = np.linspace(r_start, r_end, 200)
    radii = np.asarray(sorted(float(r) for r in radii))
    if radii[0] < r_start or radii[-1] > r_end:
        raise DomainError("output radii must lie in [r_start, r_end]")
    rtol, rtol_ref = max(tol / 100.0, _MIN_RTOL), max(tol / 1e4, _MIN_RTOL)
    if rtol_ref >= rtol:
        raise AccuracyError(f"tolerance {tol:.3g} is below what the error estimate can certify")
    y = _solve(degree, params, r_start, r_end, rtol, radii)
    y_ref = _solve(degree, params, r_start, r_end, rtol_ref, radii)
    err = float(np.max(np.abs(y[0] - y_ref[0]) / np.maximum(_running_sup(y_ref[0]), 1e-300)))
    if err > tol:
        raise AccuracyError(f"estimated error {err:.3g} exceeds tolerance {tol:.3g}")
    return OdeSolution(degree, params, radii.tolist(), y[0].tolist(), y[1].tolist(), err)


def closed_form_agreement(degree, params, r_start=0.05, r_min=0.5, r_max=10.0, n=40, tol=1e-10):
    """Max deviation between the Kummer-form mode and the ODE oracle.

    The closed form at unit amplitude is divided by its exact leading
    coefficient ``c`` (``f = c r^l (1 + ...)``), so no fitted scalar is
    involved.  Deviations are relative to the running maximum of |f|.
    """
    radii = np.linspace(r_min, r_max, n)
    ode = integrate_radial_ode(degree, params, r_start, r_max, tol, radii)
    c = radial.series_coefficient(degree, params)
    closed = np.array([radial.mode_solution(degree, params, 1.0, r) / c for r in radii])
    ref = np.array(ode.values)
    return float(np.max(np.abs(closed - ref) / _running_sup(ref)))


# ---------------------------------------------------------------- residuals

def _fd(fun, r, h):
    v = [fun(r + k * h) for k in (-2, -1, 0, 1, 2)]
    d1 = (v[0] - 8 * v[1] + 8 * v[3] - v[4]) / (12 * h)
    d2 = (-v[0] + 16 * v[1] - 30 * v[2] + 16 * v[3] - v[4]) / (12 * h * h)
    return v[2], d1, d2


def _mode_residual(fun, r, degree, params, h):
    f, d1, d2 = _fd(fun, r, h)
    eig = angular_eigenvalue(degree, params.m)
    res = d2 + ((params.m - 1) / r - r / 2.0) * d1 - eig / (r * r) * f + float(params.lam) * f
    return f, res


def pde_residual(field, points, h=1e-3):
    """max |Delta u - (r/2) u_r + lambda u| / (1 + |u|) over (r, theta) points.

    Radial derivatives are 5-point central differences with step
    ``h * min(1, r)``; the angular Laplacian acts through each degree's
    eigenvalue.
    """
    p = field.params
    worst = 0.0
    for r, theta in points:
        radial._check_r(r)
        step = h * min(1.0, r)
        u = 0.0
        res = 0.0
        for t in field.modes:
            phi = float(evaluate_angular(zonal(t.degree, p.m), theta))
            f, rr = _mode_residual(lambda s: radial_value(field, t, s), r, t.degree, p, step)
            u += f * phi
            res += rr * phi
        f, rr = _mode_residual(lambda s: _radial_constant(field, s, False), r, 0, p, step)
        u += f
        res += rr
        worst = max(worst, abs(res) / (1.0 + abs(u)))
    return worst


# ---------------------------------------------------------------- asymptotic remainder

@dataclass(frozen=True)
class RemainderReport:
    a: float
    b: float
    order: int
    x: list
    remainders: list
    slope: float
    terminating: bool = False


def remainder_probe(p, order, x_grid):
    """Normalized remainder of the order-N expansion of M(a, b; -x).

    ``|M(a, b; -x) - truncated expansion| * x^a Gamma(b - a)/Gamma(b)`` at each
    x, with the least-squares log-log slope (about -(N + 1) when the
    expansion does not terminate).  When ``1 + a - b`` is a nonpositive
    integer at most N the expansion is exact up to an exp(-x) term, so the
    remainders sit at rounding level and ``terminating`` is set.
    """
    if sf._is_nonpositive_integer(p.b - p.a):
        raise ResonanceError(f"b - a = {p.b - p.a:g} is a nonpositive integer")
    xs = [float(x) for x in x_grid]
    if any(x <= 0 for x in xs):
        raise DomainError("x_grid must be positive")
    norm = sf.gamma_ratio(p.b - p.a, p.b)
    rem = []
    for x in xs:
        exact = sf.kummer_series(p, -x)
        approx, _ = sf.kummer_asymptotic(p, x, order)
        rem.append(abs(exact - approx) * x**p.a * norm)
    c = 1.0 + p.a - p.b
    terminating = sf._is_nonpositive_integer(c) and -c <= order
    return RemainderReport(p.a, p.b, order, xs, rem, loglog_slope(xs, rem), bool(terminating))


# ---------------------------------------------------------------- Wronskian

def wronskian_constants(f, g, m, radii, h=1e-4):
    """W(f, g)(r) / (exp(r^2/4) r^(1-m)) at each radius; constant for solution pairs."""
    out = []
    for r in radii:
        step = h * min(1.0, r)
        fv, fd, _ = _fd(f, r, step)
        gv, gd, _ = _fd(g, r, step)
        out.append((fv * gd - fd * gv) / (math.exp(r * r / 4.0) * r ** (1 - m)))
    return out


def relative_spread(values):
    v = np.asarray(values, dtype=float)
    mid = float(np.median(v))
    if mid == 0.0:
        return math.inf
    return float(np.max(np.abs(v - mid)) / abs(mid))


# ---------------------------------------------------------------- frequency

@dataclass(frozen=True)
class FrequencyReport:
    """I(r) = sum_l f_l(r)^2 and U(r) = (r/2) d log I / dr."""

    radii: list
    I_values: list
    U_values: list
    log_I_values: list

    def to_csv(self):
        return write_csv(["radius", "I", "U"], zip(self.radii, self.I_values, self.U_values))


def _degree_values(field, r, scaled):
    vol = math.sqrt(sphere_area(field.m - 1))
    vals = [radial_value(field, t, r, scaled=scaled) for t in field.modes]
    extra = _radial_constant(field, r, scaled) * vol
    degrees = [t.degree for t in field.modes]
    if 0 in degrees:
        vals[degrees.index(0)] += extra
    else:
        vals.append(extra)
    return vals


def _log_i(field, r):
    # plain values while they fit in double precision, scaled ones beyond
    # (scaled values of polynomial modes underflow at large r)
    try:
        s = math.fsum(v * v for v in _degree_values(field, r, False))
        if math.isfinite(s) and s > 0.0:
            return math.log(s)
    except OverflowError:
        pass
    p = field.params
    s = math.fsum(v * v for v in _degree_values(field, r, True))
    if s == 0.0:
        raise ZeroFieldError(f"field vanishes identically at r = {r}")
    return math.log(s) + 2.0 * (r * r / 4.0 - p.growth_power * math.log(r))


def frequency(field, radii, step=1e-4):
    """Frequency function U(r) by central difference of log I in log r."""
    rs, ivals, uvals, logs = [], [], [], []
    for r in radii:
        radial._check_r(r)
        li = _log_i(field, r)
        up = _log_i(field, r * math.exp(step))
        dn = _log_i(field, r * math.exp(-step))
        rs.append(float(r))
        logs.append(li)
        ivals.append(math.exp(li) if li < 709.0 else math.inf)
        uvals.append((up - dn) / (4.0 * step))
    return FrequencyReport(rs, ivals, uvals, logs)


# ---------------------------------------------------------------- CSV

def write_csv(header, rows, stream=None):
    """CSV text with a header row; floats in shortest round-trip form."""
    buf = stream if stream is not None else io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue() if stream is None else None


__all__ = [
    "FrequencyReport",
    "OdeSolution",
    "RemainderReport",
    "closed_form_agreement",
    "frequency",
    "frobenius_seed",
    "integrate_radial_ode",
    "pde_residual",
    "relative_spread",
    "remainder_probe",
    "wronskian_constants",
    "write_csv",
]
