import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from cloaksim import specfun as sf

mpmath.mp.dps = 40


def mp_jn(n, x):
    return float(mpmath.sqrt(mpmath.pi / (2 * mpmath.mpf(x))) * mpmath.besselj(n + 0.5, x))


def mp_yn(n, x):
    return float(mpmath.sqrt(mpmath.pi / (2 * mpmath.mpf(x))) * mpmath.bessely(n + 0.5, x))


def bisect(f, a, b, tol=1e-15):
    fa = f(a)
    while b - a > tol * max(1.0, abs(a)):
        mid = 0.5 * (a + b)
        fm = f(mid)
        if (fm < 0) == (fa < 0):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)


@pytest.mark.parametrize("n", [0, 1, 2, 5, 10, 20, 40, 64])
def test_jn_matches_mpmath(n):
    x = np.geomspace(1e-3, 100.0, 61)
    ref = np.array([mp_jn(n, v) for v in x])
    got = sf.sph_bessel_j(n, x)
    # relative where the value is representable, absolute floor for underflowing tails
    assert_allclose(got, ref, rtol=1e-12, atol=1e-300)


@pytest.mark.parametrize("n", [0, 1, 3, 10, 20])
def test_yn_matches_mpmath(n):
    x = np.geomspace(0.1, 50.0, 41)
    ref = np.array([mp_yn(n, v) for v in x])
    assert_allclose(sf.sph_bessel_y(n, x), ref, rtol=1e-12)


def test_values_at_origin():
    assert sf.sph_bessel_j(0, 0.0) == 1.0
    assert sf.sph_bessel_j(3, 0.0) == 0.0
    assert sf.sph_bessel_dj(1, 0.0) == pytest.approx(1.0 / 3.0)
    assert sf.sph_bessel_dj(2, 0.0) == 0.0
    assert sf.sph_bessel_y(1, 0.0) == -np.inf


def test_small_argument_uses_leading_term():
    x = 1e-8
    # j_n(x) ~ x^n / (2n+1)!!
    assert_allclose(sf.sph_bessel_j(3, x), x**3 / 105.0, rtol=1e-14)


def test_closed_forms():
    x = np.linspace(0.2, 30.0, 50)
    assert_allclose(sf.sph_bessel_j(0, x), np.sin(x) / x, rtol=1e-14)
    assert_allclose(sf.sph_bessel_j(1, x), (np.sin(x) - x * np.cos(x)) / x**2, rtol=1e-12, atol=1e-15)
    assert_allclose(sf.sph_bessel_y(0, x), -np.cos(x) / x, rtol=1e-14)


def test_hankel1_order_one_closed_form():
    x = np.geomspace(0.1, 50.0, 50)
    # i d/dx (e^{ix}/x)
    closed = 1j * (1j * np.exp(1j * x) / x - np.exp(1j * x) / x**2)
    assert_allclose(sf.sph_hankel1(1, x), closed, rtol=1e-12)


@pytest.mark.parametrize("n", range(0, 21))
def test_wronskian(n):
    x = np.geomspace(0.1, 50.0, 50)
    w = x**2 * (sf.sph_bessel_j(n, x) * sf.sph_bessel_dy(n, x) - sf.sph_bessel_dj(n, x) * sf.sph_bessel_y(n, x))
    assert np.max(np.abs(w - 1.0)) <= 1e-10


@settings(max_examples=200, deadline=None)
@given(n=st.integers(1, 50), x=st.floats(0.05, 80.0))
def test_three_term_recurrence(n, x):
    jm, j, jp = (float(sf.sph_bessel_j(k, x)) for k in (n - 1, n, n + 1))
    scale = max(abs(jm), abs(jp), abs(j) * (2 * n + 1) / x)
    assert abs(jm + jp - (2 * n + 1) / x * j) <= 1e-12 * scale


@settings(max_examples=100, deadline=None)
@given(n=st.integers(0, 30), x=st.floats(0.1, 60.0))
def test_derivative_matches_finite_difference(n, x):
    h = 1e-5 * max(1.0, x)
    fd = (sf.sph_bessel_j(n, x + h) - sf.sph_bessel_j(n, x - h)) / (2 * h)
    scale = max(abs(float(sf.sph_bessel_j(n, x))), abs(fd), 1e-30)
    assert abs(float(sf.sph_bessel_dj(n, x)) - fd) <= 1e-7 * scale + 1e-14


@settings(max_examples=100, deadline=None)
@given(n=st.integers(0, 30), x=st.floats(0.1, 60.0))
def test_riccati_consistency(n, x):
    assert_allclose(sf.riccati_j(n, x), x * sf.sph_bessel_j(n, x), rtol=1e-15)
    assert_allclose(sf.riccati_h_d(n, x), sf.sph_hankel1(n, x) + x * sf.sph_hankel1_d(n, x), rtol=1e-14)


def test_all_orders_table_agrees_with_single_order():
    x = np.linspace(0.3, 40.0, 17)
    table = sf.sph_jn_all(30, x)
    for n in (0, 7, 30):
        assert_allclose(table[n], sf.sph_bessel_j(n, x), rtol=1e-13, atol=1e-16)


def test_shape_is_preserved():
    x = np.linspace(0.5, 3.0, 12).reshape(3, 4)
    assert sf.sph_bessel_j(2, x).shape == (3, 4)
    assert sf.sph_hankel1(2, x).shape == (3, 4)


@pytest.mark.parametrize(
    "call",
    [
        lambda: sf.sph_bessel_j(-1, 1.0),
        lambda: sf.sph_bessel_j(1.5, 1.0),
        lambda: sf.sph_bessel_j(65, 1.0),
        lambda: sf.sph_bessel_j(1, -0.5),
        lambda: sf.sph_bessel_j(1, np.nan),
        lambda: sf.sph_hankel1(1, 0.0),
        lambda: sf.sph_bessel_dy(1, 0.0),
    ],
)
def test_invalid_arguments(call):
    with pytest.raises(ValueError):
        call()


def j1_closed(x):
    return (math.sin(x) - x * math.cos(x)) / x**2


def test_first_zeros_of_j1_against_bisection():
    zeros = sf.bessel_j_zeros(1, 2, 10.0)
    oracle = [bisect(j1_closed, 4.0, 5.0), bisect(j1_closed, 7.0, 8.0)]
    assert_allclose([z.x for z in zeros], oracle, atol=1e-10)
    # frozen from the bisection oracle
    assert_allclose([z.x for z in zeros], [4.493409457909064, 7.725251836937707], atol=1e-12)
    assert [z.k for z in zeros] == [1, 2]


def test_order_zero_zeros_are_multiples_of_pi():
    zeros = sf.bessel_j_zeros(0, 5, 20.0)
    assert_allclose([z.x for z in zeros], np.pi * np.arange(1, 6), rtol=1e-15)


@pytest.mark.parametrize("n", [2, 7, 20])
def test_zeros_against_mpmath_bisection(n):
    zeros = sf.bessel_j_zeros(n, 3, 60.0)
    for z in zeros:
        lo, hi = z.x - 1e-3, z.x + 1e-3
        ref = bisect(lambda t: mp_jn(n, t), lo, hi)
        assert abs(z.x - ref) <= 1e-10


def test_zeros_interlace():
    a = [z.x for z in sf.bessel_j_zeros(3, 6, 40.0)]
    b = [z.x for z in sf.bessel_j_zeros(4, 6, 40.0)]
    assert all(x < y for x, y in zip(a, b))
    assert all(y < x for y, x in zip(b, a[1:]))


def test_zero_table_truncates_at_x_max():
    assert sf.bessel_j_zeros(1, 5, 4.0) == []
    assert len(sf.bessel_j_zeros(1, 5, 8.0)) == 2
    assert len(sf.bessel_j_zeros(1, 1, 100.0)) == 1


def test_zeros_high_order_resolved():
    zeros = sf.bessel_j_zeros(64, 2, 90.0)
    for z in zeros:
        assert abs(float(sf.sph_bessel_j(64, z.x))) <= sf.ROOT_TOL


def test_unresolvable_tolerance_raises():
    z = sf.bessel_j_zeros(1, 1, 5.0)[0]
    if float(sf.sph_bessel_j(1, z.x)) == 0.0:
        pytest.skip("zero landed exactly on a float root")
    with pytest.raises(ArithmeticError):
        sf.bessel_j_zeros(1, 1, 5.0, tol=1e-300)
