import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hadapencil import specfun
from oracles import bessel_zero_ref, jv, jvp, spherical_j1_ref, spherical_j1_zero_ref


def test_first_zero_of_j0():
    assert specfun.bessel_zero(0, 1).value == pytest.approx(2.404825557695773, abs=1e-12)


def test_j1_prime_at_first_zero():
    z = specfun.bessel_zero(1, 1).value
    assert z == pytest.approx(3.8317059702075125, abs=1e-12)
    assert specfun.bessel_j_prime(1, z) == pytest.approx(-0.402759395702553, abs=1e-12)


def test_spherical_j1_first_zero():
    z = specfun.spherical_bessel_j1_zero()
    assert z == pytest.approx(4.493409457909064, abs=1e-12)
    assert z == pytest.approx(spherical_j1_zero_ref(), abs=1e-12)


@pytest.mark.parametrize("k", [0, 1, 2, 5, 10, 20])
def test_zero_table_against_scipy(k):
    for m in (1, 2, 7, 20):
        z = specfun.bessel_zero(k, m)
        if z.value > specfun.X_MAX:
            continue
        assert z.value == pytest.approx(bessel_zero_ref(k, m), abs=1e-11)


def test_zero_table_bounds():
    with pytest.raises(specfun.BesselDomainError):
        specfun.bessel_zero(21, 1)
    with pytest.raises(specfun.BesselDomainError):
        specfun.bessel_zero(1, 0)


def test_out_of_range_argument():
    with pytest.raises(specfun.BesselDomainError):
        specfun.bessel_j(1, 101.0)
    with pytest.raises(specfun.BesselDomainError):
        specfun.bessel_j(1, -0.5)


def test_values_across_the_series_cutoff():
    x = np.linspace(0.0, 100.0, 2001)
    for k in (0, 1, 3, 8, 15, 20):
        assert np.max(np.abs(specfun.bessel_j(k, x) - jv(k, x))) < 1e-12


@settings(max_examples=60, deadline=None)
@given(k=st.integers(1, 19), x=st.floats(0.1, 99.0))
def test_three_term_recurrence(k, x):
    lhs = specfun.bessel_j(k - 1, x) + specfun.bessel_j(k + 1, x)
    rhs = 2 * k / x * specfun.bessel_j(k, x)
    assert abs(lhs - rhs) < 1e-11 * max(1.0, 2 * k / x)


@settings(max_examples=60, deadline=None)
@given(k=st.integers(0, 18), x=st.floats(0.5, 99.0))
def test_derivatives_satisfy_bessel_ode(k, x):
    y = specfun.bessel_j(k, x)
    yp = specfun.bessel_j_prime(k, x)
    ypp = specfun.bessel_j_second(k, x)
    assert abs(x * x * ypp + x * yp + (x * x - k * k) * y) < 1e-9 * max(1.0, x * x)
    assert yp == pytest.approx(jvp(k, x), abs=1e-11)


def test_spherical_j1_family():
    x = np.linspace(0.0, 40.0, 801)
    assert np.max(np.abs(specfun.spherical_bessel_j1(x) - spherical_j1_ref(x))) < 1e-13
    assert np.max(np.abs(specfun.spherical_bessel_j1_prime(x) - spherical_j1_ref(x, True))) < 1e-12
    # second derivative against a central difference of the first
    xs = np.linspace(0.3, 30.0, 60)
    h = 1e-5
    fd = (spherical_j1_ref(xs + h, True) - spherical_j1_ref(xs - h, True)) / (2 * h)
    assert np.max(np.abs(specfun.spherical_bessel_j1_second(xs) - fd)) < 1e-8
    assert specfun.spherical_bessel_j1_prime(0.0) == pytest.approx(1.0 / 3.0)


def test_j_of_zero():
    assert specfun.bessel_j(0, 0.0) == 1.0
    assert specfun.bessel_j(3, 0.0) == 0.0
    assert math.isclose(float(specfun.bessel_zero(2, 3)), bessel_zero_ref(2, 3), abs_tol=1e-11)


def test_derivative_recurrence_on_grid():
    x = np.linspace(0.0, 50.0, 1000)
    for k in range(1, 21):
        ref = 0.5 * (specfun.bessel_j(k - 1, x) - specfun.bessel_j(k + 1, x))
        assert np.max(np.abs(specfun.bessel_j_prime(k, x) - ref)) <= 1e-12


def test_forward_recurrence_identity():
    x = np.linspace(0.5, 50.0, 1000)
    for k in range(1, 20):
        rhs = 2 * k / x * specfun.bessel_j(k, x) - specfun.bessel_j(k - 1, x)
        assert np.max(np.abs(specfun.bessel_j(k + 1, x) - rhs)) <= 1e-10


@pytest.mark.parametrize("k", [0, 1, 4, 12])
def test_zeros_are_bracketed_by_sign_changes(k):
    for m in range(1, 8):
        z = specfun.bessel_zero(k, m).value
        a, b = specfun.bessel_j(k, z - 1e-9), specfun.bessel_j(k, z + 1e-9)
        assert a * b < 0
