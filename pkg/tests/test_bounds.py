import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sp_integrate
from scipy.optimize import minimize_scalar

from fcbounds import DomainError
from fcbounds.bounds import (ErrorReport, conjugate, cos_norm, dual_norm, eps_direct, eps_exact,
                             eps_l2_closed_form, eps_l2_integral_form, extremal_oracle,
                             lower_bound_witness, single_harmonic_achieved, tail_sum_power)
from fcbounds.kernels import (ClassSpec, ExplicitPsi, PowerLaw, Spectrum, Stationary, TailKernel,
                              class_member_spectrum, fourier_partial_sum)


def spec(r, p, metric="uniform", beta=0.0):
    return ClassSpec(PowerLaw(r), Stationary(beta), p, metric)


@pytest.mark.parametrize("p,expected", [(1, math.inf), (2, 2.0), (4, 4 / 3), (math.inf, 1.0)])
def test_conjugate(p, expected):
    assert conjugate(p) == expected


@pytest.mark.parametrize("q", [1.0, 1.5, 2.0, 3.0, 4 / 3, 7.0])
def test_cos_norm_against_quad(q):
    val, _ = sp_integrate.quad(lambda t: abs(math.cos(t)) ** q, -math.pi, math.pi,
                               points=[-math.pi / 2, math.pi / 2], epsabs=1e-14, epsrel=1e-14)
    assert cos_norm(q) == pytest.approx(val ** (1 / q), rel=1e-13)


def test_tail_sum_power_known():
    assert tail_sum_power(2.0, 1) == pytest.approx(math.pi ** 2 / 6 - 1, abs=1e-14)
    assert tail_sum_power(4.0, 2) == pytest.approx(math.pi ** 4 / 90 - 1 - 2 ** -4, abs=1e-14)


def test_l2_closed_form_known():
    assert eps_l2_closed_form(1.0, 1) == pytest.approx(math.sqrt(math.pi / 6), abs=1e-14)
    assert eps_l2_closed_form(2.0, 1) == pytest.approx(math.sqrt(math.pi ** 3 / 90), abs=1e-14)


@pytest.mark.parametrize("r", [1.0, 1.5, 4.0, 20.0])
@pytest.mark.parametrize("n", [1, 3, 8])
def test_l2_routes_agree(r, n):
    closed = eps_l2_closed_form(r, n)
    # r = 1 has a logarithmic kernel singularity; 1e-10 still leaves headroom under 1e-9
    assert eps_exact(spec(r, 2), n).value == pytest.approx(closed, rel=1e-11, abs=1e-10)
    assert eps_exact(spec(r, 1, 2.0), n).value == pytest.approx(closed, rel=1e-11, abs=1e-10)
    assert eps_l2_integral_form(r, n) == pytest.approx(closed, rel=1e-11)


@pytest.mark.parametrize("r,n,q", [(3.0, 1, 1.0), (5.0, 2, 4.0), (9.0, 4, 1.5)])
def test_lp_metric_against_plain_norm(r, n, q):
    s = spec(r, 1, q)
    assert eps_exact(s, n).value == pytest.approx(eps_direct(s, n).value, rel=1e-10)


@pytest.mark.parametrize("r,n", [(2.5, 3), (6.0, 1)])
def test_sup_metric_equals_uniform(r, n):
    assert eps_exact(spec(r, 1, math.inf), n).value == eps_exact(spec(r, 1), n).value


@pytest.mark.parametrize("r,n,p", [(3.0, 1, math.inf), (6.0, 2, 4.0), (4.0, 3, 1.0)])
def test_dual_norm_against_plain_norm(r, n, p):
    s = spec(r, p, beta=0.3)
    assert dual_norm(s, n).value == pytest.approx(eps_direct(s, n).value, rel=1e-10)


def _quotient_by_scipy(kernel, q):
    # min over c of ||g - c||_q, with g sampled once and scipy doing both steps
    if math.isinf(q):
        t = np.linspace(-math.pi, math.pi, 200001)
        g = kernel.scaled(t)
        return 0.5 * (g.max() - g.min())

    def norm(c):
        val, _ = sp_integrate.quad(lambda t: abs(kernel.scaled(np.array([t]))[0] - c) ** q,
                                   -math.pi, math.pi, limit=500, epsabs=1e-13, epsrel=1e-12)
        return val ** (1 / q)
    g = kernel.scaled(np.linspace(-math.pi, math.pi, 4001))
    return minimize_scalar(norm, bounds=(g.min(), g.max()), method="bounded",
                           options={"xatol": 1e-10}).fun


@pytest.mark.parametrize("r,n,p,beta", [(3.0, 1, math.inf, 0.0), (4.0, 2, math.inf, 0.5),
                                        (3.0, 1, 4.0, 0.0), (5.0, 2, 1.5, 1.0),
                                        (3.0, 2, 1.0, 0.0)])
def test_uniform_metric_quotient_norm(r, n, p, beta):
    s = spec(r, p, beta=beta)
    kernel = TailKernel(s.psi, s.phases, n)
    expected = kernel.lead_coefficient * _quotient_by_scipy(kernel, conjugate(p)) / math.pi
    assert eps_exact(s, n).value == pytest.approx(expected, rel=1e-7)


def test_quotient_never_exceeds_plain_norm():
    for p in (1.0, 1.5, 4.0, math.inf):
        s = spec(3.0, p, beta=0.7)
        assert eps_exact(s, 2).value <= dual_norm(s, 2).value * (1 + 1e-14)


def _member_error(r, beta, n, coeffs):
    # uniform error of f - S_{n-1} f for a trigonometric phi scaled to unit L2 norm
    a, b = np.asarray(coeffs[0::2]), np.asarray(coeffs[1::2])
    norm = math.sqrt(math.pi * float(np.sum(a ** 2 + b ** 2)))
    phi = Spectrum(0.0, a / norm, b / norm)
    f = class_member_spectrum(PowerLaw(r), Stationary(beta), phi)
    t = np.linspace(-math.pi, math.pi, 2049)
    full = fourier_partial_sum(f, a.size + 1, t)
    return float(np.max(np.abs(full - fourier_partial_sum(f, n, t))))


@settings(max_examples=40, deadline=None)
@given(st.floats(1.2, 12.0), st.floats(-2.0, 2.0), st.integers(1, 5),
       st.lists(st.floats(-1.0, 1.0), min_size=16, max_size=16)
       .filter(lambda c: sum(x * x for x in c) > 1e-3))
def test_random_members_stay_below_supremum(r, beta, n, coeffs):
    assert _member_error(r, beta, n, coeffs) <= eps_exact(spec(r, 2, beta=beta), n).value * (1 + 1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(1.2, 30.0), st.sampled_from([1.0, 2.0, 3.0, math.inf]), st.integers(1, 6))
def test_single_harmonic_is_admissible_lower_bound(r, p, n):
    s = spec(r, p)
    assert single_harmonic_achieved(s, n) <= eps_exact(s, n).value * (1 + 1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(1.2, 30.0), st.integers(1, 6))
def test_l2_witness_is_lower_bound(r, n):
    s = spec(r, 2)
    assert lower_bound_witness(s, n) <= eps_exact(s, n).value


@pytest.mark.parametrize("r,n,p", [(4.0, 1, 2), (20.0, 3, 2), (8.0, 1, math.inf), (12.0, 2, math.inf),
                                   (6.0, 2, 4.0), (6.0, 2, 1.0)])
def test_oracle_is_attained_lower_bound(r, n, p):
    rep = extremal_oracle(spec(r, p), n)
    exact = eps_exact(spec(r, p), n).value
    assert rep.value <= exact * (1 + 1e-9)
    assert rep.value >= exact * (1 - 1e-3)
    assert rep.gap == pytest.approx(exact - rep.value)


def test_high_smoothness_limit():
    # r >> n: the n-th harmonic dominates and eps_n ~ psi(n) ||cos||_q / pi
    for p in (1.0, 2.0, math.inf):
        s = spec(200.0, p)
        rep = eps_exact(s, 3)
        assert rep.scaled_value == pytest.approx(cos_norm(conjugate(p)) / math.pi, rel=1e-12)


def test_explicit_psi_matches_power_law():
    values = tuple(k ** -3.0 for k in range(1, 6))
    ex = ClassSpec(ExplicitPsi(values, ("power", 3.0)), Stationary(0.2), math.inf)
    pw = spec(3.0, math.inf, beta=0.2)
    assert eps_exact(ex, 2).value == pytest.approx(eps_exact(pw, 2).value, rel=1e-10)


def test_report_row_round_trips():
    rep = eps_exact(spec(4.0, math.inf), 2)
    assert isinstance(rep, ErrorReport)
    row = rep.csv_row()
    assert float(row[6]) == rep.value
    assert row[4] == "uniform" and row[5] == "1"
    d = rep.to_dict()
    assert d["class_spec"]["p"] == "inf"


@pytest.mark.parametrize("bad", [
    lambda: eps_exact(spec(3.0, 2.0, 2.0), 2),          # L_p metric needs p = 1
    lambda: eps_exact(spec(0.8, math.inf), 1),          # not summable, q != 2
    lambda: eps_l2_closed_form(0.5, 1),
    lambda: eps_l2_closed_form(2.0, 0),
    lambda: tail_sum_power(1.0, 2),
    lambda: conjugate(0.5),
])
def test_domain_errors(bad):
    with pytest.raises(DomainError):
        bad()
