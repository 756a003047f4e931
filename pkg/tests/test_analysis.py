"""Analytic probability and SE bounds, welfare ratios, outcome taxonomy."""

import math

import numpy as np
import pytest
import scipy.integrate

from specgame import (
    BOUND_KINDS,
    ConfigError,
    CorrelationSpec,
    DISTINCT_BEST,
    ExponentialEfficiency,
    OTHER,
    RationalSigmoidEfficiency,
    ROLE_SWAP,
    SHARED_BOTH,
    beta_term,
    bound_curve,
    classify_outcome_pattern,
    nash_solve,
    p_gain_condition_iid,
    p_no_orth_identical,
    p_no_orth_iid,
    role_advantage_conditions,
    sample_channel,
    se_bound,
    stackelberg_solve,
    swap_roles,
    welfare_ratio_bounds,
)
from specgame.equilibria import STACKELBERG_EXACT
from support import ScaledExponentialEfficiency, make_instance, random_instance

GS = ExponentialEfficiency(M=100).gamma_star


class TestBetaTerm:
    def test_base_case(self):
        assert beta_term(6.4, 1) == 1.0
        assert beta_term(0.3, 1) == 1.0

    def test_telescoping_product(self):
        g = 6.4
        for K in (2, 3, 6):
            expected = 1.0
            for j in range(2, K + 1):
                expected *= (j - 1) / (j + g)
            assert beta_term(g, K) == pytest.approx(expected, rel=1e-14)

    def test_matches_log_gamma_form(self):
        # (1+g) * Gamma(1+g) Gamma(K) / Gamma(1+g+K)
        for g in (0.5, 1.0, 6.4, GS):
            t = 1.0 + g
            for K in (1, 2, 5, 32, 512):
                oracle = t * math.exp(
                    math.lgamma(t) + math.lgamma(K) - math.lgamma(t + K)
                )
                assert beta_term(g, K) == pytest.approx(oracle, rel=1e-12)

    def test_matches_order_statistic_integral(self):
        # K*T is the chance one of K iid exponentials tops the rest by 1+g
        g = 6.4
        t = 1.0 + g
        for K in (2, 7):
            val, err = scipy.integrate.quad(
                lambda x: math.exp(-x) * (1.0 - math.exp(-x / t)) ** (K - 1),
                0.0,
                np.inf,
            )
            assert K * beta_term(g, K) == pytest.approx(K * val, rel=1e-9)

    def test_monotone_decline_in_k(self):
        vals = [beta_term(GS, K) for K in range(1, 40)]
        assert all(a > b > 0.0 for a, b in zip(vals, vals[1:]))

    def test_validation(self):
        with pytest.raises(ConfigError):
            beta_term(6.4, 0)
        with pytest.raises(ConfigError):
            beta_term(-1.0, 4)


class TestOrthogonalizationProbabilities:
    def test_single_carrier_is_certain_collision(self):
        assert p_no_orth_iid(6.4, 1) == 1.0
        assert p_no_orth_identical(6.4, 1) == 1.0

    def test_iid_reference_values(self):
        assert p_no_orth_iid(6.4, 2) == pytest.approx(0.07369614512471655, rel=1e-12)
        assert p_no_orth_iid(6.4, 4) == pytest.approx(0.005533277730184489, rel=1e-12)

    def test_iid_curve_formula(self):
        for K in (2, 3, 8, 64):
            T = beta_term(6.4, K)
            assert p_no_orth_iid(6.4, K) == pytest.approx(
                T * ((K - 1) / K + T), rel=1e-14
            )

    def test_exact_sharing_probability_formula(self):
        for K in (2, 3, 8, 64):
            T = beta_term(6.4, K)
            assert p_gain_condition_iid(6.4, K) == pytest.approx(K * T * T, rel=1e-14)

    def test_reference_curve_strictly_above_exact(self):
        # the closed curve is an upper bound with a real gap for K >= 2
        for K in range(2, 65):
            assert p_gain_condition_iid(GS, K) < p_no_orth_iid(GS, K)

    def test_exact_matches_monte_carlo(self):
        t = 1.0 + GS
        spec = CorrelationSpec()
        hits = 0
        n = 20000
        for trial in range(n):
            g = sample_channel(2, spec, seed=202, trial_index=trial).gains
            top = g.argmax(axis=1)
            lo = g.min(axis=1)
            hi = g.max(axis=1)
            if top[0] == top[1] and hi[0] >= t * lo[0] and hi[1] >= t * lo[1]:
                hits += 1
        p_hat = hits / n
        p = p_gain_condition_iid(GS, 2)
        assert abs(p_hat - p) < 4.0 * math.sqrt(p * (1.0 - p) / n)

    def test_identical_users_curve(self):
        assert p_no_orth_identical(GS, 2) == pytest.approx(2.0 / (2.0 + GS), rel=1e-12)
        for K in (2, 3, 16):
            expected = min(1.0, K * beta_term(GS, K))
            assert p_no_orth_identical(GS, K) == pytest.approx(expected, rel=1e-14)
            assert p_no_orth_identical(GS, K) <= 1.0

    def test_identical_above_iid(self):
        # forcing both users onto the same fading removes the argmax filter
        for K in (2, 4, 16):
            assert p_no_orth_identical(GS, K) > p_no_orth_iid(GS, K)


class TestSEBound:
    def test_approaches_interference_free_limit(self):
        limit = math.log2(1.0 + GS)
        vals = [se_bound(GS, K) for K in (2, 4, 16, 64, 512)]
        assert all(a < b for a, b in zip(vals, vals[1:]))
        assert all(v < limit for v in vals)
        assert vals[-1] == pytest.approx(limit, abs=1e-9)

    def test_formula(self):
        for K in (2, 8):
            assert se_bound(6.4, K) == pytest.approx(
                math.log2(7.4) * (1.0 - p_no_orth_iid(6.4, K)), rel=1e-14
            )
            assert se_bound(6.4, K, identical_users=True) == pytest.approx(
                math.log2(7.4) * (1.0 - p_no_orth_identical(6.4, K)), rel=1e-14
            )

    def test_identical_variant_is_lower(self):
        for K in (2, 8, 32):
            assert se_bound(GS, K, identical_users=True) < se_bound(GS, K)


class TestBoundCurve:
    def test_matches_pointwise_functions(self):
        ks = (1, 2, 4, 8)
        curve = bound_curve(6.4, ks, "ProbNoOrthIID")
        assert curve.kind == "ProbNoOrthIID"
        assert curve.K_values == ks
        for k, v in zip(ks, curve.values):
            assert v == p_no_orth_iid(6.4, k)
        se = bound_curve(6.4, ks, "SEBoundIdentical")
        for k, v in zip(ks, se.values):
            assert v == se_bound(6.4, k, identical_users=True)

    def test_all_kinds_enumerated(self):
        assert BOUND_KINDS == (
            "ProbNoOrthIID",
            "ProbNoOrthIdentical",
            "SEBoundIID",
            "SEBoundIdentical",
        )
        for kind in BOUND_KINDS:
            bound_curve(6.4, (1, 2), kind)

    def test_validation(self):
        with pytest.raises(ConfigError):
            bound_curve(6.4, (1, 2), "NoSuchBound")
        with pytest.raises(ConfigError):
            bound_curve(6.4, (), "ProbNoOrthIID")


class TestWelfareRatioBounds:
    def test_orthogonal_instances_are_tight(self):
        inst = make_instance([[3.0, 1.0], [1.0, 2.0]])
        assert welfare_ratio_bounds(inst) == (1.0, 1.0)

    def test_shared_best_ratios(self):
        inst = make_instance([[8.0, 1.0], [8.0, 2.0]])
        vs_nash, vs_opt = welfare_ratio_bounds(inst)
        assert vs_nash == pytest.approx(1.6, rel=1e-12)
        assert vs_opt == pytest.approx(16.0 / 3.0, rel=1e-12)

    def test_rate_weighting(self):
        inst = make_instance([[8.0, 1.0], [8.0, 2.0]], rates=(3.0, 1.0))
        vs_nash, vs_opt = welfare_ratio_bounds(inst)
        assert vs_nash == pytest.approx(32.0 / 26.0, rel=1e-12)
        assert vs_opt == pytest.approx(32.0 / 5.0, rel=1e-12)

    def test_ratios_at_least_one(self):
        rng = np.random.default_rng(55)
        for _ in range(50):
            inst = random_instance(rng, 3)
            vs_nash, vs_opt = welfare_ratio_bounds(inst)
            assert vs_opt >= vs_nash >= 1.0


class TestOutcomeClassification:
    def classify(self, gains, efficiency=None):
        inst = make_instance(gains, efficiency=efficiency)
        return classify_outcome_pattern(inst, nash_solve(inst), stackelberg_solve(inst))

    def test_distinct_best(self):
        assert self.classify([[3.0, 1.0], [1.0, 2.0]]) == DISTINCT_BEST

    def test_shared_both(self):
        pattern = self.classify(
            [[10.0, 1.0], [10.0, 1.0]], efficiency=ScaledExponentialEfficiency()
        )
        assert pattern == SHARED_BOTH

    def test_role_swap(self):
        assert self.classify([[3.0, 1.0], [4.0, 1.0]]) == ROLE_SWAP

    def test_other(self):
        assert self.classify([[10.0, 1.0], [3.0, 1.0]]) == OTHER

    def test_foreign_outcome_rejected(self):
        a = make_instance([[3.0, 1.0], [1.0, 2.0]])
        b = make_instance([[3.0, 1.0], [1.0, 2.0]])
        with pytest.raises(ConfigError):
            classify_outcome_pattern(a, nash_solve(b), stackelberg_solve(a))


class TestRoleAdvantageConditions:
    def test_returns_frozenset_within_range(self):
        conds = role_advantage_conditions(make_instance([[8.0, 1.0], [8.0, 1.0]]))
        assert isinstance(conds, frozenset)
        assert conds <= {1, 2, 3, 4, 5, 6}

    def test_fixture_memberships(self):
        assert 1 in role_advantage_conditions(make_instance([[3.0, 1.0], [1.0, 2.0]]))
        assert 3 in role_advantage_conditions(make_instance([[8.0, 1.0], [8.0, 1.0]]))
        m2 = ExponentialEfficiency(M=2)
        follower_wins = make_instance([[100.0, 1.0], [100.0, 1.0]], efficiency=m2)
        assert role_advantage_conditions(follower_wins) == frozenset()

    def test_no_shared_root_restricts_conditions(self):
        # conditions that rely on the shared-carrier SINR need it to exist
        inst = make_instance(
            [[100.0, 1.0], [100.0, 1.0]], efficiency=RationalSigmoidEfficiency()
        )
        assert role_advantage_conditions(inst) <= {1, 2}

    def test_conditions_guarantee_leading_advantage(self):
        rng = np.random.default_rng(88)
        guaranteed = 0
        for _ in range(300):
            K = int(rng.integers(2, 4))
            inst = random_instance(rng, K)
            conds = role_advantage_conditions(inst)
            if not conds:
                continue
            lead, follow = swap_roles(inst)
            if lead.kind != STACKELBERG_EXACT or follow.kind != STACKELBERG_EXACT:
                continue
            guaranteed += 1
            assert lead.users[0].utility >= follow.users[0].utility * (1.0 - 1e-9)
        assert guaranteed > 50
