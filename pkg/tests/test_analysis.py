import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from wstring import AdmissibilityError, Params, PhysicalPreset, RangeError
from wstring import analysis as an
from wstring.radial import radial_grid, solve_w1_formula

SETS = [
    Params.unit(),
    Params(1, 1, 2, 1),
    Params.unit(strings=(0.3,)),
    Params(1, 2, 0.5, 3, strings=(0.3,)),
    Params.unit(strings=(0.5, -0.5)),
    Params(1, 2, 1, 3, strings=(0.5, -0.5)),
    PhysicalPreset(1.0, 0.5, 0.01).params(strings=(0.2, -0.1j, 0.3j)),
    Params(2, 1, 1, 0.5, c0=1.5, strings=(0.2, -0.1j, 0.3j)),
]


def test_published_C1_all_unit():
    assert an.const_C1(Params.unit()) == pytest.approx(1 / 12, rel=1e-15)


def test_published_C2_nonproportional_example():
    c = an.const_C2(Params(1, 1, 2, 1))
    assert c.C2 == pytest.approx(7 / 12, rel=1e-14)
    assert c.beta_term == pytest.approx(-0.5, rel=1e-14)


def test_beta_term_vanishes_when_proportional():
    p = PhysicalPreset(1.3, 0.7, 0.02).params()
    assert an.const_C2(p).beta_term == 0.0


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([0.25, 0.5, 1, 2, 5]), st.sampled_from([0.25, 0.5, 1, 2, 5]))
def test_beta_two_paths(x, y):
    assert an.beta_integral(x, y).value == pytest.approx(an.beta_fn(x, y), rel=1e-10)


@pytest.mark.parametrize("x,y", [(0.5, 0.5), (1, 1), (2, 3)])
def test_beta_known_values(x, y):
    assert an.beta_fn(x, y) == pytest.approx(math.gamma(x) * math.gamma(y) / math.gamma(x + y), rel=1e-14)


def test_beta_rejects_nonpositive():
    with pytest.raises(AdmissibilityError):
        an.beta_fn(0.0, 1.0)
    with pytest.raises(AdmissibilityError):
        an.beta_integral(1.0, -1.0)


@pytest.mark.parametrize("p", SETS)
def test_rho2_mass_two_paths(p):
    assert an.rho2_mass(p).value == pytest.approx(an.rho2_mass_closed_form(p), rel=1e-8)


@pytest.mark.parametrize("N", range(6))
def test_rho1_mass(N):
    p = Params.unit(strings=tuple(0.1 * k for k in range(1, N + 1)), lambda2=1.7, lambda4=1.7)
    assert an.rho1_mass(p).value == pytest.approx(8 * math.pi * (N + 1), rel=1e-8)


@pytest.mark.parametrize("p", SETS)
def test_integral_I_quadrature_vs_corrected_closed_form(p):
    # independent oracle: plain trapezoid-free quad on [0, inf) via scipy directly
    m, k = p.degree, p.kappa
    direct = integrate.quad(lambda r: (1 - r**m) / (1 + r**m) ** (1 + k) * r, 0, np.inf, epsabs=1e-13, epsrel=1e-12)[0]
    exact = an.integral_I_closed_form(p)
    assert p.lambda1 * p.c0 * direct == pytest.approx(exact, rel=1e-8, abs=1e-12)
    assert an.integral_I(p).value == pytest.approx(exact, rel=1e-8, abs=1e-12)


def test_ode_constants_relation():
    p = Params(1, 2, 1, 3, strings=(0.5, -0.5))
    c = an.ode_decay_constants(p)
    assert c.C2 == pytest.approx(c.C1 * p.lambda4 / p.lambda2 - c.beta_term, rel=1e-15)


def test_divergent_rho2_mass_rejected():
    # proportional, kappa = 0.4 <= 1/(N+1) = 1
    p = Params(1, 5, 0.2, 1)
    with pytest.raises(AdmissibilityError):
        an.rho2_mass_closed_form(p)
    with pytest.raises(AdmissibilityError):
        an.integral_I(p)


def test_pairing_reduced_N0_unit_value():
    assert an.pairing_reduced(Params.unit()).value == pytest.approx(-math.pi / 24, rel=1e-8)


@pytest.mark.parametrize("p", SETS[:6])
def test_pairing_direct_matches_corrected_closed_form(p):
    w1 = solve_w1_formula(p, radial_grid())
    res = an.pairing_direct(p, w1)
    exact = an.pairing_integral_closed_form(p)
    assert abs(res.value - exact) <= max(1e-8, 10 * res.abs_error_estimate)


def test_pairing_direct_short_grid_raises():
    p = Params(1, 1, 2, 1)
    w1 = solve_w1_formula(p, radial_grid(r_max=5.0))
    with pytest.raises(RangeError):
        an.pairing_direct(p, w1)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 6))
def test_L_identity(N):
    assert an.check_L_identity(np.geomspace(1e-3, 1e3, 301), N) < 1e-8


def test_L_identity_rejects_origin():
    with pytest.raises(ValueError):
        an.check_L_identity([0.0, 1.0], 0)
