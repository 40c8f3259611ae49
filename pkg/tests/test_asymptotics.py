import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from fcbounds import DomainError
from fcbounds.asymptotics import (AsymptoticEstimate, SWEEP_HEADER, convergence_regime_check,
                                  diagnose, kolmogorov_table, leading_high_smoothness,
                                  leading_kolmogorov, leading_stechkin_elliptic,
                                  remainder_sweep, tail_bound_check)
from fcbounds.bounds import tail_sum_power
from fcbounds.special_fn import elliptic_k


def test_kolmogorov_values():
    assert leading_kolmogorov(2, 1).leading == pytest.approx(4 / math.pi ** 2 * math.log(2) / 2)
    est = leading_kolmogorov(3, 2)
    assert est.leading == pytest.approx(4 / math.pi ** 2 * math.log(3) / 9)
    assert est.remainder_scale == pytest.approx(1 / 9)


def test_kolmogorov_needs_n_at_least_two():
    with pytest.raises(DomainError):
        leading_kolmogorov(1, 2.0)


def test_elliptic_values():
    est = leading_stechkin_elliptic(2, 2.0)
    assert est.leading == pytest.approx(0.25 * 8 / math.pi ** 2 * elliptic_k(math.exp(-1)))
    assert est.remainder_scale == pytest.approx(0.25 / 2)


def test_elliptic_limit_and_monotonicity():
    # r/n -> inf: K -> pi/2 so n^r * leading -> 4/pi
    est = leading_stechkin_elliptic(1, 60.0)
    assert est.leading * 1.0 == pytest.approx(4 / math.pi, rel=1e-12)
    scaled = [leading_stechkin_elliptic(4, r).leading * 4 ** r for r in (1, 2, 4, 8, 16, 32)]
    assert all(a > b for a, b in zip(scaled, scaled[1:]))


@pytest.mark.parametrize("p,setting,expected", [
    (math.inf, "uniform", 4 / math.pi),
    (2.0, "uniform", 1 / math.sqrt(math.pi)),
    (1.0, "uniform", 1 / math.pi),
    (1.0, "lp", 4 / math.pi),
    (math.inf, "lp", 1 / math.pi),
])
def test_high_smoothness_leading(p, setting, expected):
    n, r = 3, 9.0
    est = leading_high_smoothness(n, r, p, setting)
    assert est.leading * n ** r == pytest.approx(expected, rel=1e-14)
    assert est.remainder_scale == pytest.approx(n ** -r * (1 + 1 / n) ** -r)
    assert est.in_hypothesis


def test_out_of_hypothesis_flag():
    assert not leading_high_smoothness(4, 4.5, 2.0).in_hypothesis
    assert leading_high_smoothness(4, 5.0, 2.0).in_hypothesis


def test_estimate_invariants():
    with pytest.raises(DomainError):
        AsymptoticEstimate("kolmogorov", -1.0, 1.0, 2, 1.0)
    with pytest.raises(DomainError):
        AsymptoticEstimate("nonsense", 1.0, 1.0, 2, 1.0)


def test_tail_check_example():
    tc = tail_bound_check(1, 2.0)
    assert tc.lhs == pytest.approx(math.pi ** 2 / 6 - 1, abs=1e-14)
    assert tc.rhs == pytest.approx(0.75)
    assert tc.holds and all(tc.links)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 30), st.floats(0.0, 60.0))
def test_tail_chain_holds_in_regime(n, extra):
    r = n + 1 + extra
    tc = tail_bound_check(n, r)
    assert tc.holds and all(tc.links)
    assert all(a <= b for a, b in zip(tc.chain, tc.chain[1:]))


def test_tail_chain_link_fails_below_regime():
    # the (2r-1)/(r-1) <= 2 + 1/n link needs r >= n + 1
    tc = tail_bound_check(4, 2.0)
    assert not tc.links[2]


def test_tail_lhs_brute_force():
    n, r = 2, 3.0
    partial = math.fsum(k ** -r for k in range(n + 1, 200001))
    rest = 200000 ** (1 - r) / (r - 1)
    assert partial <= tail_sum_power(r, n) <= partial + rest


def test_regime_examples():
    c = convergence_regime_check(1, 2.0)
    assert c.lhs == pytest.approx(0.25) and c.bound == pytest.approx(math.exp(-1)) and c.holds
    assert convergence_regime_check(3, 12.0).holds


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10 ** 6), st.floats(1e-3, 1e3))
def test_regime_inequality_everywhere(n, r):
    assert convergence_regime_check(n, r).holds


def test_regime_ratio_tends_to_one():
    ratios = [convergence_regime_check(n, 2.0 * n).lhs / convergence_regime_check(n, 2.0 * n).bound
              for n in (1, 10, 100, 1000)]
    assert all(a < b for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] == pytest.approx(1.0, abs=2e-3)


def test_p2_remainder_bracket():
    res = remainder_sweep("uniform", range(1, 9), lambda n: [n + 1, 2 * (n + 1), 5 * (n + 1)], 2.0)
    assert res.max_abs_O1 <= 3
    assert [(d.n, d.r) for d in res.diagnostics] == sorted((d.n, d.r) for d in res.diagnostics)


def test_sweep_rejects_low_r_and_empty():
    with pytest.raises(DomainError):
        remainder_sweep("uniform", [3], lambda n: [2.0], 2.0)
    with pytest.raises(DomainError):
        remainder_sweep("uniform", [], lambda n: [5.0], 2.0)


def test_sweep_threads_match_serial():
    rule = lambda n: [n + 1, 3 * (n + 1)]  # noqa: E731
    a = remainder_sweep("uniform", range(1, 5), rule, math.inf, workers=1)
    b = remainder_sweep("uniform", range(1, 5), rule, math.inf, workers=4)
    assert [d.csv_row() for d in a.diagnostics] == [d.csv_row() for d in b.diagnostics]


def test_diagnostic_row_shape():
    d = diagnose("uniform", 2, 6.0, math.inf)
    row = d.csv_row()
    assert len(row) == len(SWEEP_HEADER)
    assert d.implied_O1 == pytest.approx((d.exact - d.leading) / d.remainder_scale, rel=1e-6)


def test_elliptic_bridge_bounded():
    worst = max(abs(diagnose("stechkin", n, r).implied_O1)
                for n in (2, 4) for r in (1.25, 3.0, 8.0, 8.0 * n))
    assert worst < 10


def test_exact_rationals_in_chain():
    # the algebraic links are decided in exact arithmetic
    r = Fraction(5)
    assert (2 * r - 1) / (r - 1) == Fraction(9, 4)
    assert tail_bound_check(4, 5.0).links[2] == (Fraction(9, 4) <= 2 + Fraction(1, 4))


def test_kolmogorov_table_shape():
    rows = kolmogorov_table(ns=(2, 4), rs=(2.0,))
    assert [row["n"] for row in rows] == [2, 4]
    assert all(row["exact"] > 0 for row in rows)
