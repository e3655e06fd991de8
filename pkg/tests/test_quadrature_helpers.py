import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wstring import NumericalError
from wstring import _quad as q
from wstring import _series as ser


def test_half_line_known_integral():
    res = q.integrate_half_line(lambda r: math.exp(-r))
    assert res.value == pytest.approx(1.0, rel=1e-12)
    assert res.abs_error_estimate >= 0


def test_quadrature_result_arithmetic():
    a = q.QuadratureResult(1.0, 1e-10, 10)
    b = a + a.scaled(2.0)
    assert float(b) == 3.0 and b.evaluations == 20


def test_divergent_integral_raises():
    with pytest.raises(NumericalError):
        q.integrate_interval(lambda x: 1 / x, 0.0, 1.0)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 20))
def test_gauss_legendre_exact_for_polynomials(order):
    x, w = q.gauss_legendre(order)
    deg = 2 * order - 1
    assert np.sum(w * x**deg) == pytest.approx(1 / (deg + 1), rel=1e-12)


def test_cumulative_panels():
    edges = np.linspace(0, 2, 11)
    cum = q.cumulative_panels(np.cos, edges, 8)
    assert np.allclose(cum, np.sin(edges), atol=1e-13)


def _x(order):
    c = np.zeros(order + 1)
    c[1] = 1.0
    return c


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(-0.4, 0.4))
def test_series_power_matches_closed_form(alpha, x):
    coeffs = ser.power(ser.const(1.0, 30) + _x(30), alpha)
    assert ser.evaluate(coeffs, x) == pytest.approx((1 + x) ** alpha, rel=1e-9)
    assert np.allclose(coeffs, ser.binomial(alpha, 30), rtol=1e-10, atol=1e-14)


def test_series_div_mul_inverse():
    a = ser.const(2.0, 12) + _x(12)
    b = ser.const(1.0, 12) - 0.5 * _x(12)
    assert np.allclose(ser.mul(ser.div(a, b), b), a, atol=1e-14)


def test_series_integral():
    assert np.allclose(ser.integral(np.array([1.0, 2.0, 3.0]), 5.0), [5.0, 1.0, 1.0])


def test_series_errors():
    with pytest.raises(ZeroDivisionError):
        ser.div(_x(3), _x(3))
    with pytest.raises(ValueError):
        ser.power(-ser.const(1.0, 3), 0.5)
