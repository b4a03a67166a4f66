from itertools import product
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwtree.btree import (
    A,
    SQRT3,
    W_AWAY_BACK,
    W_AWAY_ON,
    W_TOWARD_ON,
    W_TOWARD_TURN,
    first_passage_projected,
    loop_amplitude_bruteforce,
    simulate_projected,
)
from qwtree.errors import BranchError, ParameterError, SingularSeriesError
from qwtree.series import (
    G_hat,
    H_hat,
    H_hat_displayed,
    PowerSeries,
    amplitude_sequence,
    g_combinatorial,
    g_hat,
    h1_hat,
    narayana,
    series_inv,
    series_mul,
    series_sqrt,
)


def catalan(m):
    return comb(2 * m, m) // (m + 1)


def dyck_paths(m):
    """All +-1 step sequences of length 2m that never go below zero and end at zero."""
    for steps in product((1, -1), repeat=2 * m):
        h = 0
        for s in steps:
            h += s
            if h < 0:
                break
        else:
            if h == 0:
                yield steps


def peaks(steps):
    return sum(1 for x, y in zip(steps, steps[1:]) if x == 1 and y == -1)


class TestArithmetic:
    def test_mul_small(self):
        s = series_mul(PowerSeries([1, 1, 0]), PowerSeries([1, -1, 0]))
        assert np.allclose(s.coeffs, [1, 0, -1])

    def test_mul_by_zero(self):
        s = PowerSeries([1, 2, 3]) * PowerSeries.zero(2)
        assert np.all(s.coeffs == 0)

    def test_min_order(self):
        assert (PowerSeries([1, 2, 3, 4]) * PowerSeries([1, 1])).order == 1

    def test_sqrt_one(self):
        assert np.allclose(series_sqrt(PowerSeries.one(5)).coeffs, [1, 0, 0, 0, 0, 0])

    def test_sqrt_binomial(self):
        # sqrt(1 - 4x) = 1 - 2 sum_k Catalan(k-1) x^k, here with x = w/2
        s = series_sqrt(PowerSeries([1, -2] + [0] * 9)).coeffs
        ref = [1] + [-2 * catalan(k - 1) / 2 ** k for k in range(1, 11)]
        assert np.allclose(s, ref, atol=1e-15)

    def test_sqrt_branch(self):
        with pytest.raises(BranchError):
            series_sqrt(PowerSeries([4, 1]))

    def test_geometric(self):
        assert np.allclose(series_inv(PowerSeries([1, -1, 0, 0, 0])).coeffs, 1)

    def test_inv_singular(self):
        with pytest.raises(SingularSeriesError):
            series_inv(PowerSeries([0, 1]))

    def test_shift_down_checks(self):
        with pytest.raises(ParameterError):
            PowerSeries([1, 1]).shift_down(1)

    def test_negative_power(self):
        with pytest.raises(ParameterError):
            PowerSeries([1, 1]) ** -1

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_sqrt_squares_back(self, seed):
        rng = np.random.default_rng(seed)
        c = (rng.normal(size=65) + 1j * rng.normal(size=65)) / np.arange(1, 66) ** 2
        c[0] = 1
        a = PowerSeries(c)
        s = series_sqrt(a)
        assert np.max(np.abs((s * s).coeffs - c)) < 1e-13

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_inv_roundtrip(self, seed):
        rng = np.random.default_rng(seed)
        c = (rng.normal(size=65) + 1j * rng.normal(size=65)) / np.arange(1, 66) ** 2
        c[0] = 1 + rng.random()
        r = PowerSeries(c) * series_inv(PowerSeries(c))
        assert np.max(np.abs(r.coeffs - np.eye(1, 65)[0])) < 1e-13


class TestGHat:
    def test_low_coefficients(self):
        g = g_hat(20).coeffs
        assert g[0] == 0 and g[1] == 0
        assert g[2] == pytest.approx(1 / SQRT3, abs=1e-15)
        assert np.all(g[1::2] == 0)

    def test_three_way_equality(self):
        g = g_hat(16).coeffs
        for t in range(2, 17, 2):
            b = loop_amplitude_bruteforce(t)
            c = g_combinatorial(t)
            assert abs(g[t] - b) < 1e-12
            assert abs(g[t] - c) < 1e-12

    def test_multiloop_series(self):
        assert np.max(np.abs(G_hat(40).coeffs - simulate_projected(0, 40))) < 1e-13
        assert G_hat(10).coeffs[0] == 1

    def test_flipped_variant_relation(self):
        # the flipped bracket equals (2/sqrt3) z^2 minus the loop series
        gw = g_hat(40).coeffs
        gp = g_hat(40, form="flipped").coeffs
        ref = -gw
        ref[2] += 2 / SQRT3
        assert np.max(np.abs(gp - ref)) < 1e-14
        assert abs(gp[4] - loop_amplitude_bruteforce(4)) > 0.1

    def test_order_guard(self):
        with pytest.raises(ParameterError):
            g_hat(1)
        with pytest.raises(ParameterError):
            g_hat(8, form="other")


class TestH1:
    def test_first_coefficient(self):
        assert h1_hat(9).coeffs[1] == pytest.approx(A / SQRT3, abs=1e-15)

    def test_even_coefficients_vanish(self):
        h = h1_hat(31).coeffs
        assert np.max(np.abs(h[0::2])) < 1e-15
        assert np.max(np.abs(h - first_passage_projected(1, 31))) < 1e-13

    def test_power_is_first_passage(self):
        h3 = (h1_hat(21) ** 3).coeffs
        assert np.max(np.abs(h3 - first_passage_projected(3, 21))) < 1e-13


class TestHHat:
    def test_n_zero_is_G(self):
        assert np.allclose(H_hat(0, 30).coeffs, G_hat(30).coeffs, atol=0)

    @pytest.mark.parametrize("n", [1, 4, 9])
    def test_direct_path_coefficient(self, n):
        assert H_hat(n, n + 4).coeffs[n] == pytest.approx((A / SQRT3) ** n, rel=1e-13)

    @pytest.mark.parametrize("n", [1, 3, 10])
    def test_displayed_form_identical(self, n):
        a = H_hat(n, 120).coeffs
        b = H_hat_displayed(n, 120).coeffs
        assert np.max(np.abs(a - b)) < 1e-13

    def test_truncation_guard(self):
        with pytest.raises(ParameterError):
            H_hat(5, 4)

    @pytest.mark.parametrize("n", [1, 2, 5, 10, 50])
    def test_matches_projected(self, n):
        s = amplitude_sequence(n, 500)
        p = simulate_projected(n, 500)
        assert np.max(np.abs(s - p)) < 1e-10
        assert np.all(s[:n] == 0)
        assert np.max(np.abs(s[n + 1 :: 2])) == 0

    def test_extended_precision_agrees(self):
        d = amplitude_sequence(10, 60)
        m = amplitude_sequence(10, 60, dps=30)
        assert np.max(np.abs(d - m)) < 1e-14


class TestNarayana:
    def test_first_column(self):
        assert all(narayana(m, 1) == 1 for m in range(1, 12))

    def test_small_value(self):
        assert narayana(3, 2) == 3

    @pytest.mark.parametrize("m", range(1, 9))
    def test_against_enumeration(self, m):
        counts = {}
        for path in dyck_paths(m):
            k = peaks(path)
            counts[k] = counts.get(k, 0) + 1
        assert counts == {k: narayana(m, k) for k in range(1, m + 1)}

    def test_row_sums(self):
        for m in range(1, 11):
            assert sum(narayana(m, k) for k in range(1, m + 1)) == catalan(m)

    @pytest.mark.parametrize("m,k", [(0, 1), (3, 0), (3, 4)])
    def test_range(self, m, k):
        with pytest.raises(ParameterError):
            narayana(m, k)

    def test_exact_ints(self):
        assert isinstance(narayana(40, 20), int)


class TestCombinatorial:
    def test_against_series_and_paths(self):
        assert g_combinatorial(4) == pytest.approx(g_hat(4).coeffs[4], abs=1e-15)
        assert g_combinatorial(6) == pytest.approx(loop_amplitude_bruteforce(6), abs=1e-15)

    @pytest.mark.parametrize("t", [4, 6, 8, 10, 12])
    def test_weight_depends_only_on_peaks(self, t):
        m = (t - 2) // 2
        scale = (2 * A * A) ** (t // 2 - 1) / SQRT3 ** (t - 1)
        for path in dyck_paths(m):
            # root -> level 1 (weight 1), the excursion above level 1, back to root
            moves = (1,) + path + (-1,)
            w = 1.0 + 0j
            for prev, cur in zip(moves, moves[1:]):
                if prev == 1:
                    w *= W_AWAY_ON if cur == 1 else W_AWAY_BACK
                else:
                    w *= W_TOWARD_TURN if cur == 1 else W_TOWARD_ON
            k = peaks(path) if m else 0
            # k peaks of the excursion: k left turns (away -> toward) and k - 1
            # right turns (toward -> away); the remaining moves go straight
            assert w == pytest.approx(scale * (-0.5) ** (k - 1), abs=1e-14)

    def test_odd_and_short(self):
        assert g_combinatorial(5) == 0
        assert g_combinatorial(2) == pytest.approx(1 / SQRT3)
