import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wstring import Params, RangeError
from wstring import profiles as pr


def naive_rho(z, p):
    """Direct transcription in plain complex arithmetic (no log space)."""
    zs = np.array(p.strings, dtype=complex)
    f = (p.N + 1) * np.prod([z - s for s in zs]) if p.N else complex(p.N + 1)
    F = np.polyval(np.polyint((p.N + 1) * np.atleast_1d(np.poly(zs))), z)
    den = 1 + abs(p.epsilon ** (p.N + 1) * F + p.a) ** 2
    rI = 8 * p.epsilon ** (2 * p.N + 2) * abs(f) ** 2 / (p.lambda2 * den**2)
    rII = p.c0 * p.epsilon**4 / den**p.kappa
    return rI, rII


CASES = [
    Params.unit(),
    Params.unit(strings=(0.5, -0.5), epsilon=0.3),
    Params(1, 2, 0.5, 3, c0=2.0, strings=(0.3 + 0.1j, -0.2j, 0.7), epsilon=0.7, a=0.1 - 0.2j),
]


@pytest.mark.parametrize("p", CASES)
def test_profiles_match_naive_formula(p):
    for z in [0.1 + 0.2j, -1.3 + 0.4j, 2.5 - 1j, 0.05j]:
        rI, rII = naive_rho(z, p)
        assert pr.rho_I(z, p) == pytest.approx(rI, rel=1e-12)
        assert pr.rho_II(z, p) == pytest.approx(rII, rel=1e-12)


def test_no_overflow_far_out():
    p = Params.unit(strings=(0.5, -0.5, 0.1j))
    z = np.array([1e6, 1e8j, -1e10])
    assert np.all(np.isfinite(pr.log_rho_I(z, p)))
    assert np.all(np.isfinite(pr.log_rho_II(z, p)))


def test_rho_I_vanishes_at_strings():
    p = Params.unit(strings=(0.5, -0.5))
    assert pr.rho_I(0.5 + 0j, p) == 0.0
    assert np.isfinite(pr.log_rho_I_regular(0.5 + 0j, p))


def test_regular_part_plus_string_factor():
    p = CASES[2]
    z = np.array([0.3, 1.1 - 0.4j, -2j])
    assert np.allclose(pr.rho_I(z, p), pr.string_factor(z, p) * np.exp(pr.log_rho_I_regular(z, p)), rtol=1e-13)


def test_rho1_value_at_one():
    for l2 in (1.0, 2.5):
        p = Params.unit(lambda2=l2, lambda4=l2)
        assert pr.rho1(1.0, p) == pytest.approx(2.0 / l2, rel=1e-15)


def test_rho2_at_origin_and_decay():
    p = Params.unit(c0=3.0)
    assert pr.rho2(0.0, p) == 3.0
    assert pr.rho2(1e3, p) == pytest.approx(3.0 * (1 + 1e6) ** -2, rel=1e-12)


def test_g_scaled_tends_to_limits():
    base = Params.unit(strings=(0.5, -0.5))
    z = np.array([0.8 + 0.3j, -1.2j])
    dev_I, dev_II = [], []
    for eps in (0.2, 0.1, 0.05):
        gI, gII = pr.g_scaled(z, base.with_(epsilon=eps))
        dev_I.append(np.max(np.abs(gI - pr.rho1(np.abs(z), base))))
        dev_II.append(np.max(np.abs(gII - pr.rho2(np.abs(z), base))))
    for d in (dev_I, dev_II):
        assert d[0] > d[1] > d[2]
        assert d[2] < 0.1 * d[0]


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 5.0), st.floats(0, 2 * math.pi), st.integers(0, 4))
def test_planar_and_polar_kernels_agree(r, th, N):
    z = r * complex(math.cos(th), math.sin(th))
    for w in pr.KERNEL_NAMES:
        assert pr.phi_planar(z, w, N) == pytest.approx(pr.phi_kernel(r, th, w, N), abs=1e-13)


def test_kernel_name_validation():
    with pytest.raises(ValueError):
        pr.phi_kernel(1.0, 0.0, "both", 0)


def test_phi_plus_value_N0():
    assert pr.phi_kernel(1.0, 0.0, "plus", 0) == 0.5


@pytest.mark.parametrize("p", CASES)
def test_liouville_residual_small_and_second_order(p):
    for which in ("I", "II"):
        for z in (1.7 + 0.9j, -2.2 + 0.1j):
            r1 = abs(pr.liouville_residual(z, p, 1e-3, which))
            r2 = abs(pr.liouville_residual(z, p, 5e-4, which))
            assert r1 < 1e-4
            assert 3.2 < r1 / r2 < 4.8


def test_liouville_residual_refuses_near_string():
    p = Params.unit(strings=(0.5,))
    with pytest.raises(RangeError):
        pr.liouville_residual(0.505 + 0j, p, 1e-3)


def test_liouville_residual_bad_args():
    with pytest.raises(ValueError):
        pr.liouville_residual(1.0, Params.unit(), -1e-3)
    with pytest.raises(ValueError):
        pr.liouville_residual(1.0, Params.unit(), 1e-3, which="III")


def test_F_is_antiderivative_of_f():
    p = CASES[2]
    z, dz = 0.4 + 0.3j, 1e-6
    dF = (pr.eval_F(z + dz, p) - pr.eval_F(z - dz, p)) / (2 * dz)
    assert dF == pytest.approx(pr.eval_f(z, p), rel=1e-8)
    assert pr.eval_F(0.0, p) == 0
