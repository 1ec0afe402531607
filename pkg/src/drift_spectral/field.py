"""Finite mode expansions u(r, theta) = sum_l f_l(r) phi_l(theta) and their traces.

A Field stores one entry per degree.  Non-resonant degrees carry the
asymptotic amplitude of a regular Kummer mode, resonant degrees the
coefficient of the polynomial solution.  At lambda = 0 the degree-0 entry is
an amplitude A for the radial growing solution ``A u0(r) phi_0`` and the
additive constant lives in ``constant_offset``.  For lambda > 0 an optional
``radial_extra`` adds a multiple of the normalized degree-0 second solution.

Ratios ``u / u0`` are computed from scaled radial values, so they stay finite
at radii where u itself overflows.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import radial
from .errors import (
    AdmissibilityError,
    DataError,
    DomainError,
    NotComparableError,
    RegularityError,
)
from .radial import EigenParams
from .spherics import (
    evaluate_angular,
    fourier_coefficients,
    sobolev_admissible,
    sphere_area,
    theta_grid,
    trace_function,
    zonal,
)


@dataclass(frozen=True)
class ModeTerm:
    """One degree of a Field: amplitude (regular mode) or resonant coefficient."""

    degree: int
    value: float
    resonant: bool = False


@dataclass(frozen=True)
class Field:
    params: EigenParams
    modes: tuple = ()
    radial_extra: float | None = None
    constant_offset: float = 0.0

    def __post_init__(self):
        modes = tuple(sorted(self.modes, key=lambda t: t.degree))
        object.__setattr__(self, "modes", modes)
        degrees = [t.degree for t in modes]
        if len(set(degrees)) != len(degrees):
            raise DomainError("at most one entry per degree")
        lam0 = self.params.lam == 0
        for t in modes:
            if t.degree < 0:
                raise DomainError("degrees must be nonnegative")
            if lam0 and t.degree == 0:
                if t.resonant:
                    raise DomainError("at lambda = 0 the degree-0 constant is constant_offset")
                continue
            if t.resonant != self.params.is_resonant(t.degree):
                want = "resonant_coeff" if not t.resonant else "amplitude"
                raise DomainError(f"degree {t.degree} must carry {want} for lambda = {self.params.lam}")
        if self.constant_offset != 0.0 and not lam0:
            raise DomainError("constant_offset is only a solution for lambda = 0")
        if self.radial_extra is not None and lam0:
            raise DomainError("at lambda = 0 use the degree-0 amplitude instead of radial_extra")

    @property
    def m(self):
        return self.params.m

    def amplitudes(self):
        """Map degree -> amplitude of the growing (non-resonant) entries."""
        return {t.degree: t.value for t in self.modes if not t.resonant}

    def resonant_coefficients(self):
        return {t.degree: t.value for t in self.modes if t.resonant}

    def __add__(self, other):
        if not isinstance(other, Field):
            return NotImplemented
        if other.params != self.params:
            raise NotComparableError("fields have different parameters")
        merged = {}
        for t in self.modes + other.modes:
            if t.degree in merged:
                merged[t.degree] = ModeTerm(t.degree, merged[t.degree].value + t.value, t.resonant)
            else:
                merged[t.degree] = t
        extras = [e for e in (self.radial_extra, other.radial_extra) if e is not None]
        return Field(
            self.params,
            tuple(merged.values()),
            sum(extras) if extras else None,
            self.constant_offset + other.constant_offset,
        )


def radial_value(field, term, r, *, scaled=False):
    """Radial factor of one entry at r (scaled by exp(-r^2/4) r^(m + 2 lambda))."""
    p = field.params
    if p.lam == 0 and term.degree == 0:
        return term.value * radial.u0_harmonic(p.m, r, scaled=scaled)
    if term.resonant:
        return radial.resonant_mode_solution(term.degree, p, term.value, r, scaled=scaled)
    return radial.mode_solution(term.degree, p, term.value, r, scaled=scaled)


def _radial_constant(field, r, scaled):
    # purely radial pieces: constant offset and second solution
    p = field.params
    out = 0.0
    if field.constant_offset != 0.0:
        out += field.constant_offset * (math.exp(-r * r / 4.0) * r**p.m if scaled else 1.0)
    if field.radial_extra:
        out += field.radial_extra * radial.second_solution(p, r, scaled=scaled)
    return out


def _assemble(field, r, theta, scaled):
    th = np.asarray(theta, dtype=float)
    rows = [radial_value(field, t, r, scaled=scaled) * evaluate_angular(zonal(t.degree, field.m), th)
            for t in field.modes]
    rows.append(np.full_like(th, _radial_constant(field, r, scaled)))
    # fixed degree order, numpy pairwise reduction along the stacked axis
    return np.sum(np.stack(rows), axis=0)[()]


def evaluate(field, r, theta):
    """u(r, theta).  theta may be an array."""
    radial._check_r(r)
    return _assemble(field, r, theta, scaled=False)


def reference_scaled(params, r):
    """u0 times exp(-r^2/4) r^(m + 2 lambda); identically 1 for lambda > 0."""
    if params.lam == 0:
        return radial.u0_harmonic(params.m, r, scaled=True)
    return 1.0


def reference_solution(params, r):
    """u0(r): the quasi-harmonic radial solution (lambda = 0) or exp(r^2/4) r^-(m + 2 lambda)."""
    if params.lam == 0:
        return radial.u0_harmonic(params.m, r)
    return math.exp(r * r / 4.0 - params.growth_power * math.log(r))


def evaluate_ratio(field, r, theta):
    """u(r, theta) / u0(r), evaluated in scaled form (no overflow)."""
    radial._check_r(r)
    return _assemble(field, r, theta, scaled=True) / reference_scaled(field.params, r)


def degree_coefficients(field, r):
    """<u(r, .), phi_l> for every stored degree (constant and radial pieces in degree 0)."""
    vol = math.sqrt(sphere_area(field.m - 1))
    out = {t.degree: radial_value(field, t, r) for t in field.modes}
    extra = _radial_constant(field, r, scaled=False)
    if extra != 0.0 or not out:
        out[0] = out.get(0, 0.0) + extra * vol
    return dict(sorted(out.items()))


# ---------------------------------------------------------------- construction

def construction_order(m):
    """Sobolev order demanded of trace data: floor(m/2) + 2."""
    return m // 2 + 2


def construct_from_trace(g, params, *, max_degree=None, zero_tol=1e-12):
    """Field whose ratio u(r, .)/u0(r) tends to g.

    Parameters
    ----------
    g : mapping degree -> coefficient, or callable of the polar angle
        Callables are projected onto degrees ``0..max_degree``.
    params : EigenParams
    zero_tol : float
        Coefficients below ``zero_tol * max(1, max|g_l|)`` count as zero.

    Raises
    ------
    AdmissibilityError
        If g has mass on a resonant degree (except degree 0 at lambda = 0).
    RegularityError
        If the coefficients fail the Sobolev decay test.
    """
    if callable(g):
        if max_degree is None:
            raise DomainError("max_degree is required for callable trace data")
        coeffs = fourier_coefficients(g, params.m, max_degree)
    else:
        coeffs = {int(k): float(v) for k, v in dict(g).items()}
    if any(k < 0 for k in coeffs):
        raise DomainError("degrees must be nonnegative")
    scale = max([1.0] + [abs(v) for v in coeffs.values()])
    coeffs = {k: v for k, v in sorted(coeffs.items()) if abs(v) > zero_tol * scale}
    bad = [
        k for k in coeffs
        if params.is_resonant(k) and not (k == 0 and params.lam == 0)
    ]
    if bad:
        names = ", ".join(str(k) for k in bad)
        raise AdmissibilityError(
            f"trace has mass on resonant degree(s) {names} for lambda = {params.lam}", bad
        )
    if not sobolev_admissible(coeffs, params.m, construction_order(params.m)):
        raise RegularityError(
            f"trace coefficients decay too slowly for order {construction_order(params.m)}"
        )
    return Field(params, tuple(ModeTerm(k, v) for k, v in coeffs.items()))


@dataclass(frozen=True)
class TraceReport:
    radii: list
    sup_errors: list
    fitted_slope: float

    def to_csv(self):
        lines = ["r,sup_error"]
        lines += [f"{r!r},{e!r}" for r, e in zip(self.radii, self.sup_errors)]
        return "\n".join(lines) + "\n"


def loglog_slope(xs, ys):
    """Least-squares slope of log y against log x over the positive entries."""
    pts = [(math.log(x), math.log(y)) for x, y in zip(xs, ys) if y > 0 and x > 0]
    if len(pts) < 2:
        return float("nan")
    a = np.array(pts)
    return float(np.polyfit(a[:, 0], a[:, 1], 1)[0])


def trace_convergence(field, g, radii, n_theta=256):
    """sup over a uniform angle grid of |u/u0 - g| at each radius."""
    radii = sorted(float(r) for r in radii)
    if len(set(radii)) != len(radii):
        raise DomainError("radii must be distinct")
    gfun = g if callable(g) else trace_function(g, field.m)
    th = theta_grid(field.m, n_theta)
    target = np.asarray(gfun(th), dtype=float)
    errs = [float(np.max(np.abs(evaluate_ratio(field, r, th) - target))) for r in radii]
    return TraceReport(radii, errs, loglog_slope(radii, errs))


# ---------------------------------------------------------------- uniqueness

@dataclass(frozen=True)
class GapClass:
    """Structural class of f1 - f2.

    kind is one of "constant", "pure radial p(r)", "polynomial q(r,theta) + l(r)",
    "polynomial q(r,theta) + p(r)".  `value` is the constant (lambda = 0) or
    the second-solution coefficient; `polynomial` maps degree -> coefficient
    difference of the resonant entries.
    """

    kind: str
    value: float = 0.0
    polynomial: dict = dc_field(default_factory=dict)

    def __str__(self):
        if self.kind == "constant":
            return f"constant {self.value:g}"
        return self.kind


def uniqueness_gap(f1, f2, rel_tol=1e-12):
    """Classify the difference of two fields with the same growing amplitudes.

    Raises
    ------
    NotComparableError
        If parameters differ or any growing amplitude differs.
    """
    if f1.params != f2.params:
        raise NotComparableError("fields have different parameters")
    a1, a2 = f1.amplitudes(), f2.amplitudes()
    for k in sorted(set(a1) | set(a2)):
        v1, v2 = a1.get(k, 0.0), a2.get(k, 0.0)
        if not math.isclose(v1, v2, rel_tol=rel_tol, abs_tol=0.0):
            raise NotComparableError(f"amplitudes differ at degree {k}: {v1!r} vs {v2!r}")
    p = f1.params
    if p.lam == 0:
        return GapClass("constant", f1.constant_offset - f2.constant_offset)
    c1, c2 = f1.resonant_coefficients(), f2.resonant_coefficients()
    poly = {k: c1.get(k, 0.0) - c2.get(k, 0.0) for k in sorted(set(c1) | set(c2))}
    poly = {k: v for k, v in poly.items() if v != 0.0}
    extra = (f1.radial_extra or 0.0) - (f2.radial_extra or 0.0)
    if not poly and extra == 0.0:
        return GapClass("constant", 0.0)
    if p.trichotomy == "non_integer_2lambda":
        return GapClass("pure radial p(r)", extra)
    if p.trichotomy == "integer_lambda":
        return GapClass("polynomial q(r,theta) + l(r)", extra, poly)
    return GapClass("polynomial q(r,theta) + p(r)", extra, poly)


# ---------------------------------------------------------------- Liouville

@dataclass(frozen=True)
class LiouvilleReport:
    """Verdict plus per-degree envelopes |c_l(r_i)| exp(-r_i^2/4) r_i^(m + 2 lambda)."""

    verdict: str
    radii: list
    envelopes: dict
    slopes: dict
    violating_degree: int | None = None

    def to_json(self):
        return json.dumps(
            {
                "verdict": self.verdict,
                "violating_degree": self.violating_degree,
                "radii": self.radii,
                "envelopes": {str(k): v for k, v in self.envelopes.items()},
                "slopes": {str(k): v for k, v in self.slopes.items()},
            },
            indent=2,
            sort_keys=True,
        )


def rigid_verdict(params):
    """What a solution under the growth bound must be."""
    if params.lam == 0:
        return "constant"
    if (2 * params.lam).denominator == 1:
        return f"polynomial of degree {int(2 * params.lam)}"
    return "p(r) radial"


def _validate_samples(radii, coefficients):
    radii = [float(r) for r in radii]
    if len(radii) < 3:
        raise DataError("need at least 3 sample radii")
    if any(not (r > 0 and math.isfinite(r)) for r in radii):
        raise DataError("radii must be positive and finite")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise DataError("radii must be strictly increasing")
    if radii[-1] < 2.0 * radii[0]:
        raise DataError("radii must span a factor of at least 2")
    out = {}
    for k, seq in coefficients.items():
        seq = [float(v) for v in seq]
        if len(seq) != len(radii):
            raise DataError(f"degree {k}: {len(seq)} values for {len(radii)} radii")
        if any(not math.isfinite(v) for v in seq):
            raise DataError(f"degree {k}: non-finite coefficient")
        out[int(k)] = seq
    return radii, dict(sorted(out.items()))


def liouville_classify(radii, coefficients, params, epsilon):
    """Apply the mode-wise growth test to sampled coefficients.

    Under ``||u(r_i)|| <= C exp(r_i^2/4) r_i^-(m + 2 lambda + eps)`` every
    growing amplitude obeys ``|C_l| <= C r_i^-eps``, so the envelope
    ``|c_l(r)| exp(-r^2/4) r^(m + 2 lambda)`` must decay at least like
    ``r^-eps``.  A degree whose envelope log-log slope exceeds ``-eps/2``
    witnesses a nonzero growing mode.

    Parameters
    ----------
    radii : increasing sequence, at least 3 values spanning a factor >= 2
    coefficients : mapping degree -> sequence of <u(r_i, .), phi_l>
    """
    if not epsilon > 0:
        raise DataError("epsilon must be positive")
    radii, coeffs = _validate_samples(radii, coefficients)
    k = params.growth_power
    envelopes, slopes = {}, {}
    violating = None
    for deg, seq in coeffs.items():
        logs = [
            math.log(abs(c)) - r * r / 4.0 + k * math.log(r) if c != 0.0 else -math.inf
            for r, c in zip(radii, seq)
        ]
        envelopes[deg] = [math.exp(v) if v > -745.0 else 0.0 for v in logs]
        finite = [(math.log(r), v) for r, v in zip(radii, logs) if math.isfinite(v)]
        if len(finite) < 2:
            slopes[deg] = -math.inf
            continue
        a = np.array(finite)
        slope = float(np.polyfit(a[:, 0], a[:, 1], 1)[0])
        slopes[deg] = slope
        if slope > -epsilon / 2.0 and violating is None:
            violating = deg
    verdict = rigid_verdict(params) if violating is None else f"bound violated: degree {violating}"
    return LiouvilleReport(verdict, radii, envelopes, slopes, violating)


def liouville_classify_function(u, radii, params, epsilon, max_degree=16, noise_floor=1e-10):
    """Liouville test on a callable u(r, theta) by projecting onto zonal harmonics.

    Projected coefficients below ``noise_floor`` times the largest one at the
    same radius are set to zero before the envelope test.
    """
    coeffs = {l: [] for l in range(max_degree + 1)}
    th = theta_grid(params.m, 64)
    for r in radii:
        scale = max(1.0, float(np.max(np.abs(u(r, th)))))
        c = fourier_coefficients(lambda t: u(r, t), params.m, max_degree, tol=1e-8 * scale)
        # quadrature round-off relative to the dominant degree carries no signal
        floor = noise_floor * max(abs(v) for v in c.values())
        for l in coeffs:
            coeffs[l].append(c[l] if abs(c[l]) > floor else 0.0)
    return liouville_classify(radii, coeffs, params, epsilon)


def sample_field(field, radii):
    """Coefficient samples {degree: [<u(r_i), phi_l>]} for Liouville input."""
    per_r = [degree_coefficients(field, r) for r in radii]
    degrees = sorted(set().union(*per_r))
    return {l: [c.get(l, 0.0) for c in per_r] for l in degrees}


# ---------------------------------------------------------------- JSON

def field_to_dict(field):
    lam = field.params.lam
    modes = []
    for t in field.modes:
        modes.append({"degree": t.degree, ("resonant_coeff" if t.resonant else "amplitude"): t.value})
    extra = None
    if field.radial_extra is not None:
        extra = {"kind": "second_solution", "coefficient": field.radial_extra}
    return {
        "m": field.m,
        "lambda": {"num": lam.numerator, "den": lam.denominator},
        "modes": modes,
        "radial_extra": extra,
        "constant_offset": field.constant_offset,
    }


def field_from_dict(doc):
    try:
        params = EigenParams(int(doc["m"]), radial.as_fraction(doc["lambda"]))
        modes = []
        for e in doc.get("modes", []):
            if "resonant_coeff" in e:
                modes.append(ModeTerm(int(e["degree"]), float(e["resonant_coeff"]), True))
            else:
                modes.append(ModeTerm(int(e["degree"]), float(e["amplitude"])))
        extra = doc.get("radial_extra")
        if extra is not None:
            extra = float(extra["coefficient"])
        return Field(params, tuple(modes), extra, float(doc.get("constant_offset", 0.0)))
    except DomainError:
        raise
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise DataError(f"malformed field document: {exc}") from exc


def dumps_field(field):
    """JSON text; floats use the shortest repr that round-trips exactly."""
    return json.dumps(field_to_dict(field), indent=2, sort_keys=True) + "\n"


def loads_field(text):
    return field_from_dict(json.loads(text))


def resonant_field(params, degree, c=1.0):
    """Single polynomial eigenmode c q_l(r) phi_l."""
    return Field(params, (ModeTerm(degree, c, True),))


def single_mode(params, degree, amplitude=1.0):
    return Field(params, (ModeTerm(degree, amplitude),))


__all__ = [
    "Field",
    "GapClass",
    "LiouvilleReport",
    "ModeTerm",
    "TraceReport",
    "construct_from_trace",
    "evaluate",
    "evaluate_ratio",
    "liouville_classify",
    "trace_convergence",
    "uniqueness_gap",
]
