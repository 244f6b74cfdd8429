import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from indeplab import oracles
from indeplab.divergence import (
    DivergenceInfiniteError,
    chi_square_closed_bound,
    chi_square_exact,
    gamma_eigs,
    hoeffding_tail_bound,
    mgf_validity,
    minimax_power_upper,
    select_b,
)
from indeplab.structured_cov import amplitude

# 40-digit evaluation of 0.3 / (sqrt(log 4) * 1.3)
SELECT_B_K1 = 0.19599733852800439447419296171605145


def test_chi_square_zero_signal():
    assert chi_square_exact(10, 3, 4, 0.0) == 0.0


def test_chi_square_p1q1_hand_expansion():
    # chi2 = (1/2)[(1-a^2)^-n + (1+a^2)^-n] - 1
    for n in (1, 2, 7):
        for b in (0.2, 0.5):
            a = amplitude(n, 1, 1, b)
            hand = 0.5 * ((1 - a * a) ** -n + (1 + a * a) ** -n) - 1.0
            assert chi_square_exact(n, 1, 1, b) == pytest.approx(hand, rel=1e-13)


def test_chi_square_p1q1_n1_closed():
    a = amplitude(1, 1, 1, 0.3)
    assert chi_square_exact(1, 1, 1, 0.3) == pytest.approx(a**4 / (1 - a**4), rel=1e-13)
    # frozen high-precision value
    assert chi_square_exact(1, 1, 1, 0.3) == pytest.approx(0.002029108945614870111976752924672, rel=1e-13)


def test_chi_square_matches_enumeration():
    got = chi_square_exact(4, 2, 2, 0.5)
    want = oracles.enumerate_chi_square(4, 2, 2, 0.5)
    assert got == pytest.approx(want, rel=1e-12)


def test_chi_square_nondecreasing_in_b():
    values = [chi_square_exact(20, 4, 3, b) for b in np.linspace(0.0, 0.8, 17)]
    assert all(b2 >= b1 for b1, b2 in zip(values, values[1:]))


def test_chi_square_nonnegative_and_zero_iff_b_zero():
    assert chi_square_exact(5, 2, 3, 0.0) == 0.0
    assert chi_square_exact(5, 2, 3, 0.05) > 0.0


def test_chi_square_divergent_configuration():
    # n=1, huge b: 1 - a^2 pq <= 0 at the extreme support point
    with pytest.raises(DivergenceInfiniteError):
        chi_square_exact(1, 4, 4, 4.0)


def test_chi_square_large_dimensions_no_overflow():
    b = select_b(1.0, 0.05, 0.35)
    val = chi_square_exact(10**6, 10**3, 10**3, b)
    assert np.isfinite(val) and val >= 0.0


class TestGammaEigs:
    def test_matches_numeric_small_amplitude(self):
        # a -> 0 limit with aligned sign vectors: eigenvalues +-2 sqrt(pq), 0, 0
        quad = gamma_eigs(1e-8, 3, 3, 3, 3)
        got = np.sort(np.array(quad.gammas))
        ones = np.ones(3)
        want = oracles.gamma_numeric(ones, ones, ones, ones, 1e-8)
        assert got == pytest.approx(want, abs=1e-8)
        assert got == pytest.approx([-6.0, 0.0, 0.0, 6.0], abs=1e-6)

    def test_p1q1_explicit(self):
        u = v = g = h = np.array([1.0])
        got = np.sort(np.array(gamma_eigs(0.3, 1, 1, 1, 1).gammas))
        want = oracles.gamma_numeric(u, v, g, h, 0.3)
        assert np.allclose(got, want, atol=1e-8)

    def test_product_identity_random(self):
        rng = np.random.default_rng(2024)
        for _ in range(300):
            p = int(rng.integers(1, 9))
            q = int(rng.integers(1, 9))
            ug = int(rng.integers(0, p + 1)) * 2 - p
            vh = int(rng.integers(0, q + 1)) * 2 - q
            a = float(rng.uniform(0.01, 0.9 / math.sqrt(p * q)))
            quad = gamma_eigs(a, p, q, ug, vh)
            prod = float(np.prod([1.0 - quad.t * g for g in quad.gammas]))
            target = ((1.0 - a * a * ug * vh) / (1.0 - a * a * p * q)) ** 2
            assert prod == pytest.approx(target, rel=1e-10)

    def test_rejects_bad_parity(self):
        with pytest.raises(ValueError):
            gamma_eigs(0.1, 3, 3, 2, 3)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            gamma_eigs(0.1, 2, 2, 4, 0)


class TestMgfValidity:
    def test_zero_amplitude(self):
        assert mgf_validity(0.0, 5, 5)

    def test_proposition_guarantee(self):
        # b below the MGF cap keeps every t*gamma below 1
        for (n, p, q) in [(40, 20, 20), (100, 30, 70), (10, 5, 5)]:
            kappa = (p + q) / n
            b = 0.99 * 0.5 / math.sqrt(kappa)
            assert mgf_validity(amplitude(n, p, q, b), p, q)

    def test_non_pd_fails(self):
        assert not mgf_validity(0.5, 4, 4)


class TestClosedBoundAndSelectB:
    def test_vanishing_signal(self):
        assert chi_square_closed_bound(1e-9) == pytest.approx(0.0, abs=1e-15)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            chi_square_closed_bound(0.85)
        with pytest.raises(ValueError):
            chi_square_closed_bound(0.0)

    def test_divergence_budget_at_select_b(self):
        b = select_b(1.0, 0.05, 0.35)
        assert chi_square_closed_bound(b) <= 4 * 0.3**2

    def test_b_0196_case(self):
        assert chi_square_closed_bound(0.196) <= 0.36

    def test_select_b_frozen_value(self):
        assert select_b(1.0, 0.05, 0.35) == pytest.approx(SELECT_B_K1, rel=1e-14)

    def test_large_kappa_cap_dominates(self):
        assert select_b(1e6, 0.05, 0.35) == pytest.approx(0.5e-3, rel=1e-5)

    @settings(max_examples=100, deadline=None)
    @given(
        st.floats(0.01, 100.0),
        st.floats(0.001, 0.97),
        st.floats(0.001, 0.98),
    )
    def test_select_b_below_log4_cap(self, kappa, alpha, gap):
        beta = min(alpha + gap, 0.999)
        if not alpha < beta < 1:
            return
        assert 0 < select_b(kappa, alpha, beta) < 1.0 / math.sqrt(math.log(4.0))


class TestPowerUpper:
    def test_zero_signal_is_alpha(self):
        rep = minimax_power_upper(50, 5, 5, 0.0, 0.07)
        assert rep.power_upper == pytest.approx(0.07)
        assert rep.chi2_exact == 0.0

    def test_theorem_budget(self):
        b = select_b(1.0, 0.05, 0.35)
        for (n, p, q) in [(100, 20, 20), (400, 100, 100), (64, 32, 32)]:
            rep = minimax_power_upper(n, p, q, b, 0.05)
            assert rep.power_upper <= 0.35
            assert rep.pd_ok and rep.mgf_ok and rep.b_caps_ok

    def test_consistent_with_enumeration(self):
        rep = minimax_power_upper(4, 2, 2, 0.5, 0.05)
        chi2 = oracles.enumerate_chi_square(4, 2, 2, 0.5)
        assert rep.chi2_exact == pytest.approx(chi2, rel=1e-12)
        assert rep.power_upper == pytest.approx(0.05 + 0.5 * math.sqrt(chi2), rel=1e-12)


class TestHoeffdingTail:
    def test_mu_near_one_trivial(self):
        assert hoeffding_tail_bound(3, 3, 0.2, 1.0 + 1e-12) == pytest.approx(4.0, rel=1e-6)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            hoeffding_tail_bound(3, 3, 0.2, 0.9)

    def test_decays_as_b_shrinks(self):
        vals = [hoeffding_tail_bound(4, 4, b, math.e) for b in (0.4, 0.3, 0.2, 0.1)]
        assert all(v2 < v1 for v1, v2 in zip(vals, vals[1:]))
        assert vals[-1] == pytest.approx(4.0 * math.exp(-1.0 / (0.01 * math.log(4.0))), rel=1e-12)

    def test_dominates_exact_tail(self):
        for (p, q) in [(3, 4), (6, 6), (5, 2)]:
            for b in (0.2, 0.35, 0.6):
                for mu in (1.2, 2.0, 5.0, 20.0):
                    threshold = (math.log(mu) / math.log(2.0)) * math.sqrt(p * q) / (b * b)
                    exact = oracles.enumerate_uv_tail(p, q, threshold)
                    assert exact <= hoeffding_tail_bound(p, q, b, mu) + 1e-15
