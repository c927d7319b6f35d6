import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wishart_pfaffian.errors import DomainError
from wishart_pfaffian.special import (
    log_gamma,
    log_multivariate_gamma,
    reg_lower_gamma,
    reg_upper_gamma,
)

mpmath.mp.dps = 40


class TestLogGamma:
    def test_one(self):
        assert log_gamma(1.0) == 0.0

    def test_half(self):
        assert log_gamma(0.5) == pytest.approx(0.5723649429247001, rel=1e-15)

    def test_against_extended_precision(self):
        expected = float(mpmath.loggamma(mpmath.mpf("171.5")))
        assert log_gamma(171.5) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("a", [0.5, 0.75, 3.3, 17.5, 250.25, 999.0])
    def test_relative_error_range(self, a):
        expected = float(mpmath.loggamma(mpmath.mpf(a)))
        assert abs(log_gamma(a) - expected) <= 1e-13 * max(abs(expected), 1.0)

    @pytest.mark.parametrize("a", [0.0, -1.0, -0.5])
    def test_domain(self, a):
        with pytest.raises(DomainError):
            log_gamma(a)


class TestIncompleteGamma:
    def test_exponential_case(self):
        assert reg_lower_gamma(1.0, 1.0) == pytest.approx(1 - math.exp(-1), rel=1e-15)

    def test_erf_case(self):
        expected = float(mpmath.erf(1))
        assert reg_lower_gamma(0.5, 1.0) == pytest.approx(expected, rel=1e-14)

    def test_zero_point(self):
        assert reg_lower_gamma(3.0, 0.0) == 0.0
        assert reg_upper_gamma(2.5, 0.0) == 1.0

    def test_upper_exponential(self):
        assert reg_upper_gamma(1.0, 2.0) == pytest.approx(math.exp(-2), rel=1e-15)

    def test_upper_continued_fraction_region(self):
        expected = float(mpmath.gammainc(7.5, 10, mpmath.inf, regularized=True))
        assert reg_upper_gamma(7.5, 10.0) == pytest.approx(expected, rel=1e-12)

    def test_infinity(self):
        assert reg_lower_gamma(4.0, np.inf) == 1.0

    @pytest.mark.parametrize(
        "v,x",
        [(0.5, 0.01), (1.5, 2.0), (3.0, 3.5), (20.5, 15.0), (20.5, 30.0), (100.0, 99.0),
         (375.5, 370.0), (375.5, 420.0), (48.0, 0.3)],
    )
    def test_against_mpmath(self, v, x):
        p = float(mpmath.gammainc(v, 0, x, regularized=True))
        q = float(mpmath.gammainc(v, x, mpmath.inf, regularized=True))
        assert reg_lower_gamma(v, x) == pytest.approx(p, rel=1e-12, abs=1e-300)
        assert reg_upper_gamma(v, x) == pytest.approx(q, rel=1e-11, abs=1e-15)

    def test_vectorized_matches_scalar(self):
        x = np.array([0.0, 0.5, 2.0, 7.0, 40.0])
        vec = reg_lower_gamma(3.5, x)
        assert vec.shape == x.shape
        np.testing.assert_array_equal(vec, [reg_lower_gamma(3.5, xi) for xi in x])

    @pytest.mark.parametrize("v,x", [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.1)])
    def test_domain(self, v, x):
        with pytest.raises(DomainError):
            reg_lower_gamma(v, x)
        with pytest.raises(DomainError):
            reg_upper_gamma(v, x)

    @settings(max_examples=300, deadline=None)
    @given(st.floats(1e-3, 50.0), st.floats(0.0, 100.0))
    def test_complementarity(self, v, x):
        assert abs(reg_lower_gamma(v, x) + reg_upper_gamma(v, x) - 1.0) < 1e-12

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0.1, 40.0), st.floats(0.01, 60.0))
    def test_recurrence(self, v, x):
        lhs = reg_lower_gamma(v + 1.0, x)
        rhs = reg_lower_gamma(v, x) - math.exp(v * math.log(x) - x - math.lgamma(v + 1.0))
        assert lhs == pytest.approx(rhs, rel=1e-11, abs=1e-15)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.1, 60.0), st.lists(st.floats(0.0, 150.0), min_size=2, max_size=30))
    def test_monotone(self, v, xs):
        xs = np.sort(np.array(xs))
        p = reg_lower_gamma(v, xs)
        assert np.all(np.diff(p) >= 0.0)


class TestMultivariateGamma:
    def test_p1_is_log_gamma(self):
        for a in (0.7, 2.0, 13.25):
            assert log_multivariate_gamma(1, a) == log_gamma(a)

    def test_p1_a2(self):
        assert log_multivariate_gamma(1, 2.0) == 0.0

    def test_p2_a1(self):
        assert log_multivariate_gamma(2, 1.0) == pytest.approx(math.log(math.pi), rel=1e-15)

    def test_p5_a10(self):
        expected = 5 * 4 / 4 * mpmath.log(mpmath.pi) + sum(
            mpmath.loggamma(mpmath.mpf(10) - mpmath.mpf(i) / 2) for i in range(5)
        )
        assert log_multivariate_gamma(5, 10.0) == pytest.approx(float(expected), rel=1e-14)

    @pytest.mark.parametrize("p,a", [(2, 0.5), (3, 1.0), (0, 2.0)])
    def test_domain(self, p, a):
        with pytest.raises(DomainError):
            log_multivariate_gamma(p, a)
