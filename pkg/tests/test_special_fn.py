import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from fcbounds import DomainError, ToleranceError
from fcbounds.special_fn import (bernoulli_numbers, bernoulli_poly, elliptic_k, gamma_fn,
                                 hurwitz_zeta, hurwitz_zeta_integral, riemann_zeta)

mp.mp.dps = 40


# ---------------------------------------------------------------- gamma

@pytest.mark.parametrize("s", [0.1, 0.5, 1.0, 1.5, 2.5, 7.0, 10.3, 23.0, 24.5, 37.7, 50.0])
def test_gamma_matches_mpmath(s):
    assert gamma_fn(s) == pytest.approx(float(mp.gamma(s)), rel=1e-13)


@pytest.mark.parametrize("s", [60.5, 100.2, 171.0])
def test_gamma_large_arguments(s):
    assert gamma_fn(s) == pytest.approx(float(mp.gamma(s)), rel=2e-13)


def test_gamma_integers_exact():
    for k in range(1, 24):
        assert gamma_fn(float(k)) == math.factorial(k - 1)


@pytest.mark.parametrize("s", [0.0, -1.0, -0.5, 172.0])
def test_gamma_domain(s):
    with pytest.raises(DomainError):
        gamma_fn(s)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 150.0))
def test_gamma_recurrence(s):
    assert gamma_fn(s + 1) == pytest.approx(s * gamma_fn(s), rel=1e-13)


# ---------------------------------------------------------------- elliptic K

def test_elliptic_k_at_zero():
    assert elliptic_k(0.0) == pytest.approx(math.pi / 2, abs=1e-15)


@pytest.mark.parametrize("q", [0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999999])
def test_elliptic_k_matches_scipy(q):
    # scipy takes 1 - m = 1 - q^2, formed without cancellation
    assert elliptic_k(q) == pytest.approx(special.ellipkm1((1 - q) * (1 + q)), rel=1e-14)


@pytest.mark.parametrize("q", [0.2, math.exp(-1.0), 0.95])
def test_elliptic_k_matches_integral(q):
    val, _ = integrate.quad(lambda th: 1 / math.sqrt(1 - (q * math.sin(th)) ** 2), 0, math.pi / 2,
                            epsabs=1e-14, epsrel=1e-14)
    assert elliptic_k(q) == pytest.approx(val, abs=1e-12)


def test_elliptic_k_increasing():
    qs = np.linspace(0, 0.999, 100)
    vals = [elliptic_k(q) for q in qs]
    assert all(b > a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("q", [-0.1, 1.0, 1.5])
def test_elliptic_k_domain(q):
    with pytest.raises(DomainError):
        elliptic_k(q)


def test_elliptic_k_unreachable_tolerance():
    with pytest.raises(ToleranceError) as info:
        elliptic_k(0.5, tol=1e-30)
    assert info.value.estimate == pytest.approx(special.ellipk(0.25), rel=1e-14)


# ---------------------------------------------------------------- Bernoulli

def test_bernoulli_numbers_known():
    b = bernoulli_numbers(13)
    assert [float(x) for x in b[:5]] == [1.0, -0.5, 1 / 6, 0.0, -1 / 30]
    assert b[12] == mp.bernoulli(12)


def test_bernoulli_poly_matches_mpmath():
    for j in range(8):
        for x in (-0.5, 0.0, 0.3, 1.0):
            assert bernoulli_poly(j, x) == pytest.approx(float(mp.bernpoly(j, x)), abs=1e-13)


# ---------------------------------------------------------------- zeta

def test_zeta_known_values():
    assert riemann_zeta(2.0) == pytest.approx(math.pi ** 2 / 6, abs=1e-12)
    assert riemann_zeta(4.0) == pytest.approx(math.pi ** 4 / 90, abs=1e-12)
    assert riemann_zeta(0.0) == -0.5
    assert riemann_zeta(-2.0) == 0.0
    assert riemann_zeta(-1.0) == pytest.approx(-1 / 12, abs=1e-14)


@pytest.mark.parametrize("x", [0.5, 1.5, 3.3, -0.5, -3.5])
def test_riemann_zeta_matches_mpmath(x):
    assert riemann_zeta(x) == pytest.approx(float(mp.zeta(x)), rel=1e-13)


def test_hurwitz_brute_force():
    # zeta(4, 3) = zeta(4) - 1 - 2^-4; check against a partial sum with an integral bracket
    m = 10 ** 6
    k = np.arange(3, m + 1, dtype=float)
    partial = math.fsum((k ** -4).tolist())
    lo, hi = partial + (m + 1) ** -3 / 3, partial + m ** -3 / 3
    val = hurwitz_zeta(4.0, 3.0)
    assert lo - 1e-15 <= val <= hi + 1e-15
    assert val == pytest.approx(math.pi ** 4 / 90 - 1 - 2 ** -4, abs=1e-14)


@pytest.mark.parametrize("s,l", [(1.5, 1.0), (2.0, 0.25), (3.0, 2.0), (12.0, 7.0), (40.0, 16.0),
                                 (1.01, 3.0), (2.4, 100.0)])
def test_hurwitz_matches_mpmath(s, l):
    assert hurwitz_zeta(s, l) == pytest.approx(float(mp.zeta(s, l)), rel=1e-13, abs=1e-14)


@settings(max_examples=80, deadline=None)
@given(st.floats(1.2, 40.0), st.floats(0.1, 30.0))
def test_hurwitz_telescoping(s, l):
    assert hurwitz_zeta(s, l) - hurwitz_zeta(s, l + 1) == pytest.approx(l ** -s, abs=2e-12,
                                                                         rel=1e-13)


def test_hurwitz_routes_agree_on_grid():
    for s in np.linspace(1.5, 40.0, 16):
        for l in range(1, 17):
            assert abs(hurwitz_zeta(s, l) - hurwitz_zeta_integral(s, l)) <= 2e-12


@pytest.mark.parametrize("s,l", [(1.0, 1.0), (0.5, 1.0), (2.0, 0.0), (2.0, -1.0)])
def test_hurwitz_domain(s, l):
    with pytest.raises(DomainError):
        hurwitz_zeta(s, l)
    with pytest.raises(DomainError):
        hurwitz_zeta_integral(s, l)


def test_zeta_pole():
    with pytest.raises(DomainError):
        riemann_zeta(1.0)
