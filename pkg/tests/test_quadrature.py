import math

import numpy as np
import pytest

from wishart_pfaffian.errors import IntegrationError
from wishart_pfaffian.quadrature import QuadSpec, integrate_finite, integrate_semi_infinite
from wishart_pfaffian.special import reg_lower_gamma, reg_upper_gamma


class TestFinite:
    def test_linear(self):
        val, err = integrate_finite(lambda x: x, 0.0, 1.0)
        assert val == pytest.approx(0.5, rel=1e-15)
        assert err >= 0.0

    def test_endpoint_singularity(self):
        val, _ = integrate_finite(lambda x: x ** -0.5, 0.0, 1.0)
        assert val == pytest.approx(2.0, rel=1e-10)

    def test_gamma_reconstruction(self):
        val, _ = integrate_finite(lambda x: x ** 1.5 * np.exp(-x), 0.0, 5.0)
        expected = math.gamma(2.5) * reg_lower_gamma(2.5, 5.0)
        assert val == pytest.approx(expected, rel=1e-10)

    def test_empty_interval(self):
        assert integrate_finite(np.sin, 2.0, 2.0) == (0.0, 0.0)

    def test_reversed_interval(self):
        with pytest.raises(ValueError):
            integrate_finite(np.sin, 1.0, 0.0)

    def test_vector_integrand(self):
        def f(x):
            return np.stack([np.ones_like(x), x, x * x], axis=1)

        val, err = integrate_finite(f, 0.0, 3.0)
        np.testing.assert_allclose(val, [3.0, 4.5, 9.0], rtol=1e-14)
        assert err.shape == (3,)

    def test_breakpoints_find_narrow_peak(self):
        def f(x):
            return np.exp(-0.5 * ((x - 700.0) / 0.1) ** 2)

        val, _ = integrate_finite(f, 0.0, 1000.0, points=np.linspace(690.0, 710.0, 11))
        assert val == pytest.approx(0.1 * math.sqrt(2.0 * math.pi), rel=1e-10)

    def test_non_convergence(self):
        spec = QuadSpec(rel_tol=1e-15, abs_tol=1e-300, max_subdivisions=3)
        with pytest.raises(IntegrationError) as info:
            integrate_finite(lambda x: np.abs(x - 0.3) ** 0.1, 0.0, 1.0, spec)
        assert math.isfinite(info.value.value)

    def test_non_finite_integrand(self):
        with pytest.raises(IntegrationError):
            integrate_finite(lambda x: np.full_like(x, np.nan), 0.0, 1.0)


class TestSemiInfinite:
    def test_exponential(self):
        assert integrate_semi_infinite(lambda x: np.exp(-x), 0.0)[0] == pytest.approx(1.0, rel=1e-10)

    def test_shifted(self):
        val, _ = integrate_semi_infinite(lambda x: np.exp(-x), 2.0)
        assert val == pytest.approx(math.exp(-2.0), rel=1e-10)

    def test_upper_gamma_reconstruction(self):
        val, _ = integrate_semi_infinite(lambda x: x ** 2 * np.exp(-x / 2.0), 1.0)
        expected = 2.0 ** 3 * math.gamma(3.0) * reg_upper_gamma(3.0, 0.5)
        assert val == pytest.approx(expected, rel=1e-10)

    def test_far_peak_with_points(self):
        a = 300.0

        def f(x):
            return np.exp((a - 1.0) * np.log(x) - x - math.lgamma(a))

        val, _ = integrate_semi_infinite(f, 1.0, points=np.linspace(200.0, 400.0, 21))
        assert val == pytest.approx(1.0, rel=1e-10)


class TestProperties:
    @pytest.mark.parametrize("c", [0.3, 1.1, 2.9])
    def test_additivity(self, c):
        def f(x):
            return np.cos(3 * x) * np.exp(-x)

        whole, e0 = integrate_finite(f, 0.0, 4.0)
        left, e1 = integrate_finite(f, 0.0, c)
        right, e2 = integrate_finite(f, c, 4.0)
        assert abs(left + right - whole) <= 10 * (e0 + e1 + e2) + 1e-14

    @pytest.mark.parametrize("alpha", [-3.0, 1e-6, 12.5])
    def test_linearity(self, alpha):
        def f(x):
            return np.sqrt(x) * np.exp(-x)

        base, _ = integrate_finite(f, 0.0, 7.0)
        scaled, _ = integrate_finite(lambda x: alpha * f(x), 0.0, 7.0)
        assert scaled == pytest.approx(alpha * base, rel=1e-12)

    @pytest.mark.parametrize(
        "f,a,b,exact",
        [
            (np.exp, 0.0, 1.0, math.e - 1.0),
            (lambda x: 1.0 / (1.0 + x * x), 0.0, 10.0, math.atan(10.0)),
            (lambda x: np.sqrt(x), 0.0, 2.0, 2.0 / 3.0 * 2.0 ** 1.5),
            (lambda x: x ** -0.5, 0.0, 1.0, 2.0),
            (np.sin, 0.0, math.pi, 2.0),
            (lambda x: np.log(x), 1e-300, 1.0, -1.0),
        ],
    )
    def test_error_estimate_is_conservative(self, f, a, b, exact):
        spec = QuadSpec(rel_tol=1e-6, abs_tol=1e-14)
        val, err = integrate_finite(f, a, b, spec)
        assert abs(val - exact) <= err + 1e-15

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            QuadSpec(rel_tol=0.0)
        with pytest.raises(ValueError):
            QuadSpec(max_subdivisions=0)
