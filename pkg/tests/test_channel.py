"""Fading, estimation error, and gain-tail machinery tests.

The exact CDF is checked three independent ways: central-case closed form,
scipy's generic non-central chi-square, and plain Monte Carlo.  The Chernoff
route is then validated against the exact CDF (domination, threshold
ordering), which is what makes its pessimism guarantee trustworthy.
"""

import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar
from scipy.stats import ncx2

from urllc_alloc import (
    CsitModel,
    NoSolutionError,
    SubChannelState,
    chernoff_bound,
    chernoff_gain,
    chernoff_t,
    corrupt_csit,
    exact_gain_cdf,
    exact_gain_threshold,
    marcum_q1,
    sample_rayleigh,
)

# frozen 50-digit reference values
CDF_1_1E3_1 = 0.4955394108617904
CHER_GAIN_EXAMPLE = 0.7921864927319904  # est=1, sigma=1e-3, outage=0.5e-5
EXACT_THR_EXAMPLE = 0.8126882072685588


def mc_gain_cdf(est_gain2, sigma_e2, threshold, n, rng):
    """Monte Carlo estimate of P(|h_est - e|^2 <= threshold) and its SE."""
    # rotation invariance: put the estimate on the real axis
    scale = math.sqrt(sigma_e2 / 2.0)
    hits = 0
    chunk = 2_000_000
    left = n
    while left > 0:
        take = min(chunk, left)
        e = scale * (rng.standard_normal(take) + 1j * rng.standard_normal(take))
        a = np.abs(math.sqrt(est_gain2) - e) ** 2
        hits += int((a <= threshold).sum())
        left -= take
    p = hits / n
    se = math.sqrt(max(p * (1.0 - p), 1.0 / n) / n)
    return p, se


class TestSampling:
    def test_unit_mean_gain(self):
        rng = np.random.default_rng(11)
        total, n = 0.0, 0
        for _ in range(10):
            states = sample_rayleigh(100_000, rng)
            total += sum(s.a_true for s in states)
            n += len(states)
        assert total / n == pytest.approx(1.0, abs=0.01)

    def test_exponential_cdf_point(self):
        rng = np.random.default_rng(12)
        below, n = 0, 0
        for _ in range(10):
            states = sample_rayleigh(100_000, rng)
            below += sum(1 for s in states if s.a_true < 0.1)
            n += len(states)
        assert below / n == pytest.approx(1.0 - math.exp(-0.1), abs=0.002)

    def test_same_seed_same_sequence(self):
        a = sample_rayleigh(64, np.random.default_rng(99))
        b = sample_rayleigh(64, np.random.default_rng(99))
        assert a == b

    def test_estimate_starts_equal(self):
        states = sample_rayleigh(8, np.random.default_rng(1))
        assert all(s.h_est == s.h_true for s in states)
        assert all(s.a_est == s.a_true for s in states)

    def test_count_validation(self):
        with pytest.raises(ValueError):
            sample_rayleigh(0, np.random.default_rng(1))


class TestCorruptCsit:
    def test_perfect_is_exact(self):
        rng = np.random.default_rng(5)
        state = sample_rayleigh(1, rng)[0]
        out = corrupt_csit(state, CsitModel(0.0), rng)
        assert out.h_est == state.h_true

    def test_error_variance(self):
        rng = np.random.default_rng(6)
        model = CsitModel(1e-3)
        total, n = 0.0, 0
        for _ in range(5):
            states = sample_rayleigh(200_000, rng)
            errs = [corrupt_csit(s, model, rng).h_est - s.h_true for s in states]
            total += sum(abs(e) ** 2 for e in errs)
            n += len(errs)
        assert total / n == pytest.approx(1e-3, rel=0.02)

    def test_estimated_gain_mean_identity(self):
        # fixed truth: E|h_est|^2 = |h_true|^2 + sigma_e2
        rng = np.random.default_rng(7)
        h = complex(1.2, -0.4)
        state = SubChannelState.from_true(h)
        model = CsitModel(5e-3)
        draws = [corrupt_csit(state, model, rng).a_est for _ in range(200_000)]
        expect = abs(h) ** 2 + 5e-3
        assert np.mean(draws) == pytest.approx(expect, rel=0.005)

    def test_model_validation(self):
        with pytest.raises(ValueError):
            CsitModel(-1e-6)
        assert CsitModel(0.0).perfect
        assert not CsitModel(1e-9).perfect


class TestExactGainCdf:
    def test_zero_threshold(self):
        assert exact_gain_cdf(1.0, 1e-3, 0.0) == 0.0

    def test_central_case_exponential(self):
        for a in [1e-5, 1e-3, 0.1, 1.0]:
            s2 = 1e-2
            expect = 1.0 - math.exp(-a / s2)
            assert exact_gain_cdf(0.0, s2, a) == pytest.approx(expect, rel=1e-10)

    def test_frozen_value_and_mc(self):
        assert exact_gain_cdf(1.0, 1e-3, 1.0) == pytest.approx(CDF_1_1E3_1, rel=1e-10)
        p, se = mc_gain_cdf(1.0, 1e-3, 1.0, 10_000_000, np.random.default_rng(13))
        assert abs(CDF_1_1E3_1 - p) <= max(3 * se, 0.01)

    def test_monotone_in_threshold(self):
        grid = np.linspace(1e-4, 2.0, 200)
        vals = [exact_gain_cdf(1.0, 1e-3, float(a)) for a in grid]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_against_scipy_when_it_resolves(self, rng):
        # scipy's chndtr underflows deep in the lower tail; compare where
        # it returns something meaningful
        for _ in range(200):
            est = 10.0 ** rng.uniform(-2, 1)
            s2 = 10.0 ** rng.uniform(-5, -2)
            a = rng.uniform(0.05, 1.3) * (est + s2)
            mine = exact_gain_cdf(est, s2, a)
            ref = float(ncx2.cdf(2 * a / s2, 2, 2 * est / s2))
            if ref > 1e-280:
                assert mine == pytest.approx(ref, rel=1e-7)

    def test_oracle_consistency_monte_carlo(self):
        # 50 random parameter triples, 1e7 draws each, threshold drawn from
        # the distribution itself so it lands in the bulk
        rng = np.random.default_rng(14)
        for _ in range(50):
            est = 10.0 ** rng.uniform(-2, 1)
            s2 = 10.0 ** rng.uniform(-5, -2)
            e = math.sqrt(s2 / 2.0) * complex(rng.standard_normal(), rng.standard_normal())
            a = abs(math.sqrt(est) - e) ** 2
            p_hat, se = mc_gain_cdf(est, s2, a, 10_000_000, rng)
            assert abs(exact_gain_cdf(est, s2, a) - p_hat) <= 3.0 * se + 1e-12

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            exact_gain_cdf(1.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            exact_gain_cdf(1.0, -1e-3, 1.0)


class TestMarcumQ1:
    def test_complements_cdf(self, rng):
        for _ in range(50):
            est = 10.0 ** rng.uniform(-2, 1)
            s2 = 10.0 ** rng.uniform(-5, -2)
            a = rng.uniform(0.05, 1.5) * (est + s2)
            q1 = marcum_q1(math.sqrt(2 * est / s2), math.sqrt(2 * a / s2))
            assert q1 + exact_gain_cdf(est, s2, a) == pytest.approx(1.0, abs=1e-12)

    def test_edge_values(self):
        assert marcum_q1(3.0, 0.0) == 1.0
        # central case: Q1(0, b) = exp(-b^2/2)
        assert marcum_q1(0.0, 2.0) == pytest.approx(math.exp(-2.0), rel=1e-12)


class TestChernoffT:
    def test_central_collapse(self):
        # est_gain 0: discriminant collapses, t = 1/a - 1/s2
        for a, s2 in [(0.5, 1e-3), (2.0, 1e-2), (1e-4, 1e-3)]:
            assert chernoff_t(a, 0.0, s2) == pytest.approx(1.0 / a - 1.0 / s2, rel=1e-12)

    def test_equal_point_formula(self):
        a = est = 0.7
        s2 = 1e-3
        expect = (s2 + math.sqrt(s2**2 + 4 * a * est)) / (2 * s2 * a) - 1 / s2
        assert chernoff_t(a, est, s2) == pytest.approx(expect, rel=1e-14)

    def test_textbook_multiplier_negative_in_lower_tail(self):
        # the standard Chernoff multiplier for a lower tail is -t; deep below
        # the estimate it must be negative, i.e. t itself positive
        t = chernoff_t(0.01, 1.0, 1e-3)
        assert -t < 0.0
        # t crosses zero exactly at the conditional mean est + sigma
        assert chernoff_t(1.0 + 1e-3, 1.0, 1e-3) == pytest.approx(0.0, abs=1e-9)

    def test_t_optimizes_the_bound(self, rng):
        # minimizing the exponent over the multiplier lands on chernoff_t
        for _ in range(20):
            est = 10.0 ** rng.uniform(-1, 1)
            s2 = 10.0 ** rng.uniform(-4, -2)
            a = rng.uniform(0.05, 0.95) * (est + s2)

            def neg_exponent(t):
                return a * t - est * t / (1.0 + s2 * t) - math.log1p(s2 * t)

            res = minimize_scalar(
                neg_exponent, bounds=(1e-12, 0.99 / s2 * 1e6), method="bounded"
            )
            t_star = chernoff_t(a, est, s2)
            assert neg_exponent(t_star) <= res.fun + 1e-9

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            chernoff_t(0.0, 1.0, 1e-3)
        with pytest.raises(ValueError):
            chernoff_t(-1.0, 1.0, 1e-3)


class TestChernoffGain:
    def test_monotone_in_outage(self):
        a1 = chernoff_gain(1.0, 1e-3, 1e-7)
        a2 = chernoff_gain(1.0, 1e-3, 1e-5)
        a3 = chernoff_gain(1.0, 1e-3, 1e-3)
        assert a1 < a2 < a3

    def test_frozen_example(self):
        assert chernoff_gain(1.0, 1e-3, 0.5e-5) == pytest.approx(
            CHER_GAIN_EXAMPLE, rel=1e-10
        )

    def test_pessimism_at_example(self):
        a_cher = chernoff_gain(1.0, 1e-3, 0.5e-5)
        assert exact_gain_cdf(1.0, 1e-3, a_cher) <= 0.5e-5

    def test_below_exact_threshold(self):
        a_cher = chernoff_gain(1.0, 1e-3, 0.5e-5)
        a_exact = exact_gain_threshold(1.0, 1e-3, 0.5e-5)
        assert a_exact == pytest.approx(EXACT_THR_EXAMPLE, rel=1e-9)
        assert a_cher < a_exact

    def test_bound_dominates_exact_cdf(self, rng):
        # the whole pessimism story rests on this domination
        for _ in range(200):
            est = 10.0 ** rng.uniform(-2, 1)
            s2 = 10.0 ** rng.uniform(-5, -2)
            a = rng.uniform(1e-6, 1.0) * (est + s2)
            bound = chernoff_bound(a, est, s2)
            exact = exact_gain_cdf(est, s2, a)
            assert bound >= exact * (1.0 - 1e-9)

    def test_interval_and_root_quality(self, rng):
        for _ in range(100):
            est = 10.0 ** rng.uniform(-2, 1)
            s2 = 10.0 ** rng.uniform(-5, -2)
            pout = 10.0 ** rng.uniform(-8, -2)
            a = chernoff_gain(est, s2, pout)
            assert 0.0 < a < est + s2
            assert chernoff_bound(a, est, s2) == pytest.approx(pout, rel=1e-9)

    def test_no_solution(self):
        with pytest.raises(NoSolutionError):
            chernoff_gain(1e-6, 1e-2, 1e-30)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            chernoff_gain(1.0, 0.0, 1e-5)
        with pytest.raises(ValueError):
            chernoff_gain(1.0, 1e-3, 0.0)
        with pytest.raises(ValueError):
            chernoff_gain(1.0, 1e-3, 1.0)
