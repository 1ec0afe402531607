import json
import math
from fractions import Fraction

import numpy as np
import pytest
from numpy.testing import assert_allclose

from drift_spectral import field as fld
from drift_spectral import oracle, radial
from drift_spectral.errors import (
    AdmissibilityError,
    DataError,
    DomainError,
    NotComparableError,
    RegularityError,
)
from drift_spectral.field import Field, ModeTerm
from drift_spectral.radial import EigenParams
from drift_spectral.spherics import evaluate_angular, sphere_area, zonal


def random_points(n, seed, r_lo=0.5, r_hi=10.0):
    rng = np.random.default_rng(seed)
    return list(zip(rng.uniform(r_lo, r_hi, n), rng.uniform(0.0, math.pi, n)))


class TestEvaluate:
    def test_constant_offset(self):
        f = Field(EigenParams(3, 0), constant_offset=5.0)
        assert_allclose(fld.evaluate(f, 2.0, np.linspace(0, math.pi, 5)), 5.0, rtol=0)

    def test_coordinate_mode(self):
        p = EigenParams(3, Fraction(1, 2))
        f = fld.resonant_field(p, 1)
        want = 2.0 * float(evaluate_angular(zonal(1, 3), 0.0))
        assert_allclose(fld.evaluate(f, 2.0, 0.0), want, rtol=1e-15)

    def test_single_mode_matches_radial(self):
        p = EigenParams(4, Fraction(1, 4))
        f = fld.single_mode(p, 2, 0.7)
        th = 0.4
        want = radial.mode_solution(2, p, 0.7, 3.0) * float(evaluate_angular(zonal(2, 4), th))
        assert_allclose(fld.evaluate(f, 3.0, th), want, rtol=1e-14)

    def test_ratio_finite_where_value_overflows(self):
        p = EigenParams(3, 0)
        f = fld.single_mode(p, 2)
        q = fld.evaluate_ratio(f, 60.0, 0.0)
        assert math.isfinite(q)
        assert_allclose(q, float(evaluate_angular(zonal(2, 3), 0.0)), rtol=1e-2)

    def test_bad_radius(self):
        with pytest.raises(DomainError):
            fld.evaluate(Field(EigenParams(3, 0)), -1.0, 0.0)


class TestFieldValidation:
    def test_duplicate_degree(self):
        with pytest.raises(DomainError):
            Field(EigenParams(3, 0), (ModeTerm(1, 1.0), ModeTerm(1, 2.0)))

    def test_resonant_flag_must_match(self):
        with pytest.raises(DomainError):
            Field(EigenParams(4, 1), (ModeTerm(0, 1.0),))
        with pytest.raises(DomainError):
            Field(EigenParams(4, 1), (ModeTerm(1, 1.0, True),))

    def test_constant_offset_only_at_zero_lambda(self):
        with pytest.raises(DomainError):
            Field(EigenParams(3, Fraction(1, 4)), constant_offset=1.0)

    def test_radial_extra_not_at_zero_lambda(self):
        with pytest.raises(DomainError):
            Field(EigenParams(3, 0), radial_extra=1.0)


class TestLinearity:
    @pytest.mark.parametrize(
        "d1,d2",
        [({1: 0.5, 3: -1.0}, {2: 2.0, 5: 0.25}), ({1: 0.5, 3: -1.0}, {3: 0.75, 4: 1.5})],
    )
    def test_sum(self, d1, d2):
        p = EigenParams(3, Fraction(1, 4))
        f1 = Field(p, tuple(ModeTerm(k, v) for k, v in d1.items()), radial_extra=0.5)
        f2 = Field(p, tuple(ModeTerm(k, v) for k, v in d2.items()))
        th = np.linspace(0.0, math.pi, 33)
        for r in (0.7, 3.0, 9.0):
            lhs = fld.evaluate(f1 + f2, r, th)
            rhs = fld.evaluate(f1, r, th) + fld.evaluate(f2, r, th)
            assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(rhs)))

    def test_different_params(self):
        with pytest.raises(NotComparableError):
            Field(EigenParams(3, 0)) + Field(EigenParams(4, 0))


class TestConstruct:
    def test_single_harmonic(self):
        f = fld.construct_from_trace({5: 1.0}, EigenParams(3, 0))
        assert f.amplitudes() == {5: 1.0}

    def test_constant_trace(self):
        p = EigenParams(3, 0)
        c0 = math.sqrt(sphere_area(2))
        f = fld.construct_from_trace({0: c0}, p)
        assert f.amplitudes() == {0: c0}
        # the ratio tends to the constant 1 = c0 * phi_0
        assert_allclose(fld.evaluate_ratio(f, 30.0, 1.0), 1.0, rtol=1e-12)

    def test_callable_trace(self):
        p = EigenParams(3, Fraction(1, 4))
        g = lambda th: 2.0 * evaluate_angular(zonal(3, 3), th)
        f = fld.construct_from_trace(g, p, max_degree=6)
        assert list(f.amplitudes()) == [3]
        assert_allclose(f.amplitudes()[3], 2.0, rtol=1e-12)

    def test_callable_needs_max_degree(self):
        with pytest.raises(DomainError):
            fld.construct_from_trace(lambda th: th, EigenParams(3, 0))

    def test_integer_lambda_rejects_degree_zero(self):
        with pytest.raises(AdmissibilityError) as info:
            fld.construct_from_trace({0: 1.0, 1: 0.5}, EigenParams(3, 1))
        assert tuple(info.value.degrees) == (0,)
        assert "0" in str(info.value)

    def test_half_integer_rejects_resonant_degree(self):
        with pytest.raises(AdmissibilityError) as info:
            fld.construct_from_trace({1: 1.0, 2: 1.0}, EigenParams(3, Fraction(3, 2)))
        assert tuple(info.value.degrees) == (1,)

    def test_rough_trace_rejected(self):
        with pytest.raises(RegularityError):
            fld.construct_from_trace({l: 1.0 for l in range(30)}, EigenParams(3, 0))

    def test_empty_trace(self):
        f = fld.construct_from_trace({}, EigenParams(3, 0))
        rep = fld.trace_convergence(f, {}, [10.0, 12.0])
        assert rep.sup_errors == [0.0, 0.0]


class TestTraceConvergence:
    def test_phi5_rate(self):
        p = EigenParams(3, 0)
        f = fld.construct_from_trace({5: 1.0}, p)
        radii = np.linspace(10.0, 24.0, 8)
        rep = fld.trace_convergence(f, {5: 1.0}, radii)
        assert np.all(np.diff(rep.sup_errors) < 0)
        assert abs(rep.fitted_slope + 2.0) <= 0.4

    @pytest.mark.parametrize("m", [2, 3, 4, 6])
    @pytest.mark.parametrize("lam", [Fraction(0), Fraction(1, 4), Fraction(1), Fraction(3, 2)])
    def test_errors_decrease_for_admissible_traces(self, m, lam):
        p = EigenParams(m, lam)
        smooth = {l: (1.0 + l) ** -(m + 4) for l in range(9)}
        g = {l: v for l, v in smooth.items() if not p.is_resonant(l) or (l == 0 and lam == 0)}
        f = fld.construct_from_trace(g, p)
        rep = fld.trace_convergence(f, g, np.linspace(10.0, 24.0, 8))
        assert np.all(np.diff(rep.sup_errors) < 0)

    def test_csv(self):
        rep = fld.TraceReport([10.0, 12.0], [0.5, 0.25], -1.0)
        assert rep.to_csv() == "r,sup_error\n10.0,0.5\n12.0,0.25\n"

    def test_duplicate_radii(self):
        f = fld.single_mode(EigenParams(3, 0), 1)
        with pytest.raises(DomainError):
            fld.trace_convergence(f, {1: 1.0}, [10.0, 10.0])


class TestPdeResidual:
    @pytest.mark.parametrize(
        "m,lam",
        [(3, Fraction(0)), (4, Fraction(1, 4)), (2, Fraction(1, 2)), (4, Fraction(1)), (6, Fraction(3, 2))],
    )
    def test_assembled_fields(self, m, lam):
        p = EigenParams(m, lam)
        terms = []
        for l in range(6):
            if p.is_resonant(l) and not (l == 0 and lam == 0):
                terms.append(ModeTerm(l, 0.3 * (l + 1), True))
            else:
                terms.append(ModeTerm(l, (-1) ** l / (1.0 + l)))
        extra = 0.8 if lam != 0 else None
        f = Field(p, tuple(terms), radial_extra=extra, constant_offset=2.0 if lam == 0 else 0.0)
        assert oracle.pde_residual(f, random_points(200, 7 + m)) <= 1e-6


class TestUniquenessGap:
    def test_identical(self):
        f = fld.single_mode(EigenParams(3, 0), 2)
        assert str(fld.uniqueness_gap(f, f)) == "constant 0"

    def test_constant_difference(self):
        p = EigenParams(3, 0)
        f1 = Field(p, (ModeTerm(2, 1.0),), constant_offset=3.0)
        f2 = Field(p, (ModeTerm(2, 1.0),), constant_offset=7.0)
        gap = fld.uniqueness_gap(f1, f2)
        assert gap.kind == "constant" and gap.value == -4.0

    def test_pure_radial(self):
        p = EigenParams(3, Fraction(1, 4))
        f1 = Field(p, (ModeTerm(2, 1.0),), radial_extra=1.0)
        f2 = Field(p, (ModeTerm(2, 1.0),))
        gap = fld.uniqueness_gap(f1, f2)
        assert gap.kind == "pure radial p(r)" and gap.value == 1.0

    def test_half_integer_polynomial(self):
        p = EigenParams(3, Fraction(3, 2))
        f1 = Field(p, (ModeTerm(1, 2.0, True), ModeTerm(2, 1.0)))
        f2 = Field(p, (ModeTerm(2, 1.0),))
        gap = fld.uniqueness_gap(f1, f2)
        assert gap.kind == "polynomial q(r,theta) + p(r)" and gap.polynomial == {1: 2.0}

    def test_amplitude_mismatch(self):
        p = EigenParams(3, 0)
        with pytest.raises(NotComparableError):
            fld.uniqueness_gap(fld.single_mode(p, 2, 1.0), fld.single_mode(p, 2, 1.5))


RADII = [8.0, 12.0, 16.0, 20.0]


class TestLiouville:
    def test_constant(self):
        p = EigenParams(3, 0)
        s = fld.sample_field(Field(p, constant_offset=5.0), RADII)
        assert fld.liouville_classify(RADII, s, p, 1.0).verdict == "constant"

    def test_polynomial(self):
        p = EigenParams(4, 1)
        s = fld.sample_field(fld.resonant_field(p, 0), RADII)
        assert fld.liouville_classify(RADII, s, p, 1.0).verdict == "polynomial of degree 2"

    def test_planted_growing_mode(self):
        p = EigenParams(3, 0)
        f = Field(p, (ModeTerm(3, 1e-6),), constant_offset=5.0)
        rep = fld.liouville_classify(RADII, fld.sample_field(f, RADII), p, 1.0)
        assert rep.verdict == "bound violated: degree 3"
        assert rep.violating_degree == 3
        # envelope ~ amplitude (1 + a(1+a-b)/x) with a = 3, b = 9/2, x = r^2/4
        x = np.array(RADII) ** 2 / 4
        assert_allclose(rep.envelopes[3], 1e-6 * (1 - 1.5 / x), rtol=2e-2)

    def test_function_variant(self):
        p = EigenParams(3, 0)
        f = Field(p, (ModeTerm(3, 1e-6),), constant_offset=5.0)
        rep = fld.liouville_classify_function(lambda r, th: fld.evaluate(f, r, th), RADII, p, 1.0)
        assert rep.verdict == "bound violated: degree 3"
        g = Field(p, constant_offset=5.0)
        rep = fld.liouville_classify_function(lambda r, th: fld.evaluate(g, r, th), RADII, p, 1.0)
        assert rep.verdict == "constant"

    @pytest.mark.parametrize(
        "f",
        [
            Field(EigenParams(3, 0), constant_offset=-2.0),
            Field(EigenParams(4, 1), (ModeTerm(0, 1.0, True), ModeTerm(2, -3.0, True))),
            Field(EigenParams(3, Fraction(1, 4)), radial_extra=4.0),
            Field(EigenParams(6, Fraction(3, 2)), (ModeTerm(1, 1.0, True), ModeTerm(3, 0.5, True)), 2.0),
            Field(EigenParams(2, 2), (ModeTerm(0, 1.0, True), ModeTerm(4, 1.0, True))),
        ],
    )
    def test_soundness(self, f):
        s = fld.sample_field(f, RADII)
        for eps in (0.25, 1.0, 3.0):
            rep = fld.liouville_classify(RADII, s, f.params, eps)
            assert not rep.verdict.startswith("bound violated")
            assert rep.verdict == fld.rigid_verdict(f.params)

    def test_verdict_strings(self):
        assert fld.rigid_verdict(EigenParams(3, Fraction(3, 2))) == "polynomial of degree 3"
        assert fld.rigid_verdict(EigenParams(3, Fraction(1, 3))) == "p(r) radial"

    @pytest.mark.parametrize(
        "radii,coeffs",
        [
            ([8.0, 12.0], {0: [1.0, 1.0]}),
            ([8.0, 12.0, 10.0], {0: [1.0, 1.0, 1.0]}),
            ([8.0, 9.0, 10.0], {0: [1.0, 1.0, 1.0]}),
            ([8.0, 12.0, 16.0], {0: [1.0, 1.0]}),
            ([8.0, 12.0, 16.0], {0: [1.0, float("nan"), 1.0]}),
        ],
    )
    def test_bad_samples(self, radii, coeffs):
        with pytest.raises(DataError):
            fld.liouville_classify(radii, coeffs, EigenParams(3, 0), 1.0)

    def test_nonpositive_epsilon(self):
        with pytest.raises(DataError):
            fld.liouville_classify(RADII, {0: [1.0] * 4}, EigenParams(3, 0), 0.0)

    def test_json(self):
        p = EigenParams(3, 0)
        rep = fld.liouville_classify(RADII, fld.sample_field(Field(p, constant_offset=5.0), RADII), p, 1.0)
        doc = json.loads(rep.to_json())
        assert doc["verdict"] == "constant" and doc["radii"] == RADII


class TestSerialization:
    def test_round_trip_bit_exact(self):
        p = EigenParams(6, Fraction(3, 2))
        f = Field(p, (ModeTerm(1, 1 / 3, True), ModeTerm(2, -math.pi), ModeTerm(3, 2.5e-17, True)), math.e)
        g = fld.loads_field(fld.dumps_field(f))
        assert g == f
        assert fld.dumps_field(g) == fld.dumps_field(f)

    def test_document_shape(self):
        f = Field(EigenParams(4, 1), (ModeTerm(0, 1.0, True), ModeTerm(1, 0.5)))
        doc = json.loads(fld.dumps_field(f))
        assert doc["lambda"] == {"num": 1, "den": 1}
        assert doc["modes"] == [{"degree": 0, "resonant_coeff": 1.0}, {"degree": 1, "amplitude": 0.5}]
        assert doc["radial_extra"] is None

    def test_malformed(self):
        with pytest.raises(DataError):
            fld.loads_field('{"m": 3}')
        with pytest.raises(DataError):
            fld.loads_field('{"m": 3, "lambda": {"num": 0, "den": 1}, "modes": [{"degree": 1}]}')
