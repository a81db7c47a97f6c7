import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from bergdiag.special import (GAMMA_3_2, CoefficientTable, asymptotic_ratio, coefficient_table,
                              gamma_half_integer, log_weight_w, weight_w, weights_upto)

mpmath.mp.dps = 40


def mp_w(n):
    return mpmath.gamma(1 + n) * mpmath.gamma(mpmath.mpf(3) / 2) / mpmath.gamma(n + mpmath.mpf(3) / 2)


def mp_c(n):
    return mpmath.mpf(2) ** n / mpmath.factorial(2 * n + 1)


@pytest.mark.parametrize("n", [0, 1, 2, 5, 23, 24, 25, 100, 1000, 10**5, 10**7])
def test_weight_matches_mpmath(n):
    assert weight_w(n) == pytest.approx(float(mp_w(n)), rel=1e-13)


def test_small_weights_exact():
    assert weight_w(0) == 1.0
    assert weight_w(1) == pytest.approx(2 / 3, rel=1e-15)
    assert weight_w(2) == pytest.approx(8 / 15, rel=1e-15)


def test_negative_index_rejected():
    with pytest.raises(ValueError):
        weight_w(-1)


def test_recurrence_over_table():
    t = coefficient_table(10**5)
    n = np.arange(10**5)
    ratio = np.exp(t.log_w[1 : 10**5 + 1] - t.log_w[:10**5])
    np.testing.assert_allclose(ratio, (n + 1) / (n + 1.5), rtol=1e-13, atol=0)


@pytest.mark.parametrize("n", [0, 10, 100, 1000])
def test_table_against_log_gamma(n):
    t = coefficient_table(1000)
    assert t.log_w[n] == pytest.approx(float(log_weight_w(n)), abs=1e-13)
    assert math.exp(t.log_c[n]) == pytest.approx(float(mp_c(n)), rel=1e-12)


def test_table_deep_entry_against_mpmath():
    t = coefficient_table(10**5)
    assert math.exp(t.log_w[10**5]) == pytest.approx(float(mp_w(10**5)), rel=1e-13)


def test_regrouping_identity():
    t = coefficient_table(1000)
    worst = 0.0
    for n in range(1001):
        lhs = mpmath.exp(mpmath.mpf(t.log_c[n])) * 2**n * mpmath.factorial(n) ** 2
        worst = max(worst, abs(float(lhs / mpmath.exp(mpmath.mpf(t.log_w[n]))) - 1.0))
    assert worst < 1e-12


def test_table_is_read_only_and_cached():
    t = coefficient_table(100)
    assert t is coefficient_table(90)
    with pytest.raises(ValueError):
        t.log_w[0] = 1.0
    with pytest.raises(ValueError):
        CoefficientTable(-1)


def test_weights_upto_length():
    w = weights_upto(10)
    assert w.shape == (11,)
    assert w[0] == 1.0


@pytest.mark.parametrize("n", [0, 1, 7, 50, 171])
def test_gamma_half_integer(n):
    assert gamma_half_integer(n) == pytest.approx(float(mpmath.gamma(n + mpmath.mpf(1) / 2)), rel=1e-14)


def test_asymptotic_ratio_limits():
    assert asymptotic_ratio(10**4) == pytest.approx(GAMMA_3_2, rel=1e-2)
    assert asymptotic_ratio(10**6) == pytest.approx(GAMMA_3_2, rel=1e-4)
    # Stirling oracle: w_n sqrt(n+1) = sqrt(pi)/2 * (1 + 1/(8n) + ...)
    n = 10**4
    assert asymptotic_ratio(n) / GAMMA_3_2 - 1 == pytest.approx(1 / (8 * n), rel=1e-2)


def test_asymptotic_ratio_monotone_and_bounded():
    n = np.arange(1, 5000)
    r = np.exp(coefficient_table(5000).log_w[1:5000]) * np.sqrt(n + 1.0)
    assert np.all(np.diff(r) < 0)
    assert np.all((r >= GAMMA_3_2) & (r <= 1.0))
    assert asymptotic_ratio(0) == 1.0


@given(st.integers(min_value=0, max_value=10**6))
def test_ratio_in_band(n):
    assert GAMMA_3_2 <= asymptotic_ratio(n) <= 1.0


@given(st.integers(min_value=0, max_value=10**6))
def test_scalar_and_table_agree(n):
    assert math.exp(coefficient_table(n).log_w[n]) == pytest.approx(weight_w(n), rel=1e-13)
