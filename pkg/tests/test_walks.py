from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from theta_gasket.walks import (
    coefficient,
    coefficients,
    generating_check,
    generating_function,
    generating_series,
    lazy_resummation,
    verify_delta,
    walk_return_prob,
)


def brute_return_prob(n, k):
    """Count +-1 paths of length k from n to 0 by dynamic programming."""
    counts = {n: 1}
    for _ in range(k):
        nxt = {}
        for x, c in counts.items():
            for y in (x - 1, x + 1):
                nxt[y] = nxt.get(y, 0) + c
        counts = nxt
    return Fraction(counts.get(0, 0), 2 ** k)


class TestCoefficients:
    def test_first_gasket(self):
        assert coefficient(1, 1) == 1
        assert coefficient(1, 3) == -3

    def test_zero_index(self):
        assert coefficient(0, 0) == 1
        assert coefficient(0, 2) == -1
        assert coefficient(0, 4) == 1

    def test_second_gasket(self):
        assert coefficient(2, 2) == 2
        assert coefficient(2, 4) == -8

    def test_leading_coefficient(self):
        for m in range(1, 9):
            assert coefficient(m, m) == 2 ** (m - 1)

    @pytest.mark.parametrize("m", range(0, 7))
    def test_symmetry_and_support(self, m):
        t = coefficients(m, 25)
        for n, a in t.items():
            assert a == t[-n]
            if abs(n) < m or (n - m) % 2:
                assert a == 0

    @pytest.mark.parametrize("m", range(1, 6))
    def test_growth_bound(self, m):
        t = coefficients(m, 60)
        c = t.growth_constant()
        assert all(abs(a) <= c * (1 + abs(n) ** m) + 1e-9 for n, a in t.items())
        assert c < 2 ** m

    def test_wide_integers(self):
        assert isinstance(coefficient(30, 200), int)
        assert abs(coefficient(30, 200)) > 2 ** 64

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            coefficients(3, 2)
        with pytest.raises(ValueError):
            coefficient(-1, 0)

    def test_first_gasket_signs_match_alternating_weights(self):
        # odd-index table, times its step-1 return, gives the (-1)^(n/2) pattern on 2Z
        for n in range(0, 12, 2):
            lhs = sum(coefficient(1, j) * walk_return_prob(j - n, 1) for j in (n - 1, n + 1))
            # weighted walks from n-1 and n+1 meet at n; signs alternate like a[0, n]
            assert lhs == coefficient(0, n)


class TestReturnProb:
    def test_examples(self):
        assert walk_return_prob(0, 0) == 1
        assert walk_return_prob(1, 3) == Fraction(3, 8)
        assert walk_return_prob(4, 2) == 0

    @settings(max_examples=60, deadline=None)
    @given(st.integers(-12, 12), st.integers(0, 14))
    def test_against_path_count(self, n, k):
        assert walk_return_prob(n, k) == brute_return_prob(n, k)


class TestDelta:
    def test_first_gasket_hand_values(self):
        rep = verify_delta(1, 3, 3)
        assert rep.values[1] == 1
        assert rep.values[3] == 0

    def test_zero_index_even_and_odd(self):
        rep = verify_delta(0, 12, 12)
        assert rep.passed
        assert all(rep.values[k] == 0 for k in range(1, 13, 2))

    @pytest.mark.parametrize("m", range(0, 6))
    def test_exact_up_to_30(self, m):
        rep = verify_delta(m, 30, 30)
        assert rep.passed, rep.failures
        assert rep.values[m] == 1

    def test_failure_is_reported(self):
        # a perturbed rule would fail; here just check the report catches a nonzero
        rep = verify_delta(2, 4, 4)
        assert rep.failures == []
        assert isinstance(rep.values[4], Fraction)


class TestLazy:
    def test_m_zero(self):
        assert lazy_resummation(0.3, 0, 0) == 1.0

    def test_simple_walk(self):
        for k in range(0, 12):
            assert lazy_resummation(1.0, k, k) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("p", [0.3, 1 - 1 / math.sqrt(2), 1.0])
    @pytest.mark.parametrize("m", range(0, 11))
    def test_total_mass(self, p, m):
        assert lazy_resummation(p, m, m) == pytest.approx(1.0, abs=1e-12)

    def test_truncated_window(self):
        # dropping |n| = m loses exactly 2 (p/2)^m
        p, m = 0.5, 4
        assert lazy_resummation(p, m, m - 1) == pytest.approx(1 - 2 * (p / 2) ** m, abs=1e-15)


class TestGenerating:
    def test_n0_second_coefficient(self):
        assert generating_series(0, 4)[2] == Fraction(1, 2)

    def test_n1_first_coefficient(self):
        assert generating_series(1, 3)[1] == Fraction(1, 2)

    @pytest.mark.parametrize("n", [0, 1, 2, 3, 5])
    def test_check_passes(self, n):
        rep = generating_check(n, np.linspace(-0.7, 0.7, 29))
        assert rep.passed, (rep.coefficient_mismatches, rep.max_value_error)
        assert rep.max_value_error <= 1e-10

    def test_closed_form_at_point(self):
        z = 0.4
        s = math.sqrt(1 - z * z)
        assert generating_function(2, z) == pytest.approx(((1 - s) / z) ** 2 / s, rel=1e-14)
