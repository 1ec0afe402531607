import io
import math
from fractions import Fraction

import numpy as np
import pytest
from numpy.testing import assert_allclose

from drift_spectral import field as fld
from drift_spectral import oracle, radial
from drift_spectral import special_fn as sf
from drift_spectral.errors import AccuracyError, DomainError, ResonanceError, ZeroFieldError
from drift_spectral.field import Field, ModeTerm
from drift_spectral.radial import EigenParams

XS = np.geomspace(50.0, 400.0, 12)


class TestOde:
    @pytest.mark.parametrize("m", [2, 3, 5])
    def test_coordinate_mode_is_linear(self, m):
        sol = oracle.integrate_radial_ode(1, EigenParams(m, Fraction(1, 2)), 0.05, 10.0, radii=[0.5, 3.0, 10.0])
        assert_allclose(sol.values, [0.5, 3.0, 10.0], rtol=1e-10)
        assert_allclose(sol.derivative_values, 1.0, rtol=1e-10)

    def test_reproduces_polynomial(self):
        sol = oracle.integrate_radial_ode(0, EigenParams(4, 1), 0.1, 5.0, radii=[5.0])
        assert abs(sol.values[0] - (1.0 - 25.0 / 8.0)) <= 1e-9

    def test_one_point_matching(self):
        # l=2, m=3, lambda=0: Kummer form and ODE agree after one scalar fixed at r=1
        p = EigenParams(3, 0)
        radii = np.linspace(0.5, 10.0, 40)
        sol = oracle.integrate_radial_ode(2, p, 0.05, 10.0, radii=np.append(radii, 1.0))
        vals = dict(zip(sol.radii, sol.values))
        scale = vals[1.0] / radial.mode_solution(2, p, 1.0, 1.0)
        ref = np.array([vals[r] for r in radii])
        closed = scale * np.array([radial.mode_solution(2, p, 1.0, r) for r in radii])
        assert np.max(np.abs(closed - ref) / np.maximum.accumulate(np.abs(ref))) <= 1e-8

    def test_seed_recurrence(self):
        # seed value matches the Kummer-form mode divided by its leading coefficient
        p = EigenParams(4, Fraction(1, 4))
        f, _ = oracle.frobenius_seed(3, p, 0.3)
        want = radial.mode_solution(3, p, 1.0, 0.3) / radial.series_coefficient(3, p)
        assert_allclose(f, want, rtol=1e-13)

    def test_closed_form_agreement_sample(self):
        for l, p in [(0, EigenParams(2, Fraction(1, 4))), (5, EigenParams(6, 1)), (8, EigenParams(3, Fraction(3, 2)))]:
            assert oracle.closed_form_agreement(l, p) <= 1e-7

    def test_bad_interval(self):
        with pytest.raises(DomainError):
            oracle.integrate_radial_ode(0, EigenParams(3, 0), 1.0, 0.5)
        with pytest.raises(DomainError):
            oracle.integrate_radial_ode(0, EigenParams(3, 0), 0.1, 1.0, radii=[2.0])

    def test_unreachable_tolerance(self):
        with pytest.raises(AccuracyError):
            oracle.integrate_radial_ode(2, EigenParams(3, 0), 0.05, 10.0, tol=1e-16)

    def test_csv(self):
        sol = oracle.integrate_radial_ode(1, EigenParams(3, Fraction(1, 2)), 0.05, 2.0, radii=[1.0, 2.0])
        lines = sol.to_csv().splitlines()
        assert lines[0] == "radius,value,derivative"
        assert len(lines) == 3


class TestPdeResidual:
    def test_constant(self):
        f = Field(EigenParams(3, 0), constant_offset=4.0)
        assert oracle.pde_residual(f, [(1.0, 0.3), (7.0, 2.0)]) == 0.0

    def test_polynomial_eigenfunction(self):
        rng = np.random.default_rng(1)
        pts = list(zip(rng.uniform(0.5, 10.0, 200), rng.uniform(0.0, math.pi, 200)))
        assert oracle.pde_residual(fld.resonant_field(EigenParams(4, 1), 0), pts) <= 1e-8

    def test_wrong_eigenvalue_detected(self):
        # q for lambda=1 tested against lambda=2: residual of order one
        q = radial.resonant_polynomial_for(0, EigenParams(4, 1))
        f = Field(EigenParams(4, 2), (ModeTerm(2, 0.0, True),))
        res = oracle._mode_residual(lambda s: float(q(s)), 3.0, 0, f.params, 1e-3)[1]
        assert abs(res) > 0.1


class TestRemainder:
    @pytest.mark.parametrize("a,b,n", [(2.5, 4.0, 2), (5.5, 9.0, 0), (2.5, 4.0, 0), (2.0, 2.5, 3)])
    def test_slope(self, a, b, n):
        rep = oracle.remainder_probe(sf.KummerParams(a, b), n, XS)
        assert not rep.terminating
        assert abs(rep.slope + (n + 1)) <= 0.1 * (n + 1)

    def test_terminating_expansion(self):
        # (1 - e^-x)/x: the order-1 expansion is exact up to e^-x, below rounding
        rep = oracle.remainder_probe(sf.KummerParams(1.0, 2.0), 1, XS)
        assert rep.terminating
        assert max(rep.remainders) <= 1e-14

    def test_resonance(self):
        with pytest.raises(ResonanceError):
            oracle.remainder_probe(sf.KummerParams(3.0, 2.0), 1, XS)

    def test_positive_grid(self):
        with pytest.raises(DomainError):
            oracle.remainder_probe(sf.KummerParams(2.5, 4.0), 1, [0.0, 50.0])


class TestWronskian:
    def test_polynomial_pair(self):
        p = EigenParams(4, 1)
        q = radial.resonant_polynomial_for(0, p)
        w = oracle.wronskian_constants(q, lambda s: radial.second_solution(p, s), 4, np.linspace(0.5, 6.0, 23))
        assert oracle.relative_spread(w) <= 1e-8

    def test_regular_and_second(self):
        p = EigenParams(3, Fraction(1, 4))
        w = oracle.wronskian_constants(
            lambda s: radial.mode_solution(0, p, 1.0, s),
            lambda s: radial.second_solution(p, s),
            3,
            np.linspace(0.5, 8.0, 16),
        )
        assert oracle.relative_spread(w) <= 1e-8

    def test_constant_and_u0(self):
        w = oracle.wronskian_constants(lambda s: 1.0, lambda s: radial.u0_harmonic(3, s), 3, [0.5, 2.0, 6.0])
        # (1, u0): W = u0' = exp(r^2/4) r^(1-m) / 2
        assert_allclose(w, 0.5, rtol=1e-9)

    def test_spread_of_zero_median(self):
        assert oracle.relative_spread([0.0, 0.0]) == math.inf


class TestFrequency:
    def test_coordinate_mode(self):
        rep = oracle.frequency(fld.resonant_field(EigenParams(3, Fraction(1, 2)), 1), [0.5, 2.0, 12.0, 40.0])
        assert_allclose(rep.U_values, 1.0, atol=1e-3)

    def test_constant(self):
        rep = oracle.frequency(Field(EigenParams(3, 0), constant_offset=3.0), [1.0, 5.0, 10.0])
        assert_allclose(rep.U_values, 0.0, atol=1e-10)

    def test_polynomial_closed_form(self):
        # q = 1 - r^2/8: U = r q'/q = 2 r^2 / (r^2 - 8) -> 2
        rs = np.array([10.0, 20.0, 40.0, 200.0])
        rep = oracle.frequency(fld.resonant_field(EigenParams(4, 1), 0), rs)
        assert_allclose(rep.U_values, 2 * rs**2 / (rs**2 - 8), rtol=1e-7)
        assert abs(rep.U_values[-1] - 2.0) <= 1e-3

    def test_growing_mode_lower_bound(self):
        rs = np.linspace(8.0, 12.0, 5)
        rep = oracle.frequency(fld.single_mode(EigenParams(3, 0), 2), rs)
        assert np.all(np.array(rep.U_values) >= rs**2 / 2 - 3 - 1)

    def test_beyond_overflow(self):
        # the growing mode itself overflows at r = 60; U stays finite
        rep = oracle.frequency(fld.single_mode(EigenParams(3, 0), 2), [60.0, 80.0])
        assert_allclose(rep.U_values, np.array([60.0, 80.0]) ** 2 / 2 - 3, rtol=1e-6)

    def test_zero_field(self):
        with pytest.raises(ZeroFieldError):
            oracle.frequency(Field(EigenParams(3, 0)), [2.0])

    def test_csv(self):
        rep = oracle.FrequencyReport([1.0], [2.0], [0.5], [math.log(2.0)])
        assert rep.to_csv() == "radius,I,U\n1.0,2.0,0.5\n"


def test_write_csv_stream():
    buf = io.StringIO()
    assert oracle.write_csv(["a", "b"], [(0.1, 3)], buf) is None
    assert buf.getvalue() == "a,b\n0.1,3\n"
