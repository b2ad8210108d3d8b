"""Verdicts, margins, activity maps, and the two-type certificate."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from rgw import (ContractViolationError, DECISION_TOL, OffspringLaw,
                 ProbVector, RngStream, VerdictKind, activity_from_law,
                 activity_constraint_residual, classify_memoryless,
                 classify_reinforced, law_from_activity, linf_distance,
                 min_memory_for_persistence, pair, log_degree_weights,
                 reinforced_rate, relative_entropy,
                 search_two_type_decomposition, simulate_reinforced_urn,
                 two_type_weak_persistence)
from rgw.measures import align, mix

FLAGSHIP = OffspringLaw((1, 2), (0.5, 0.5))
Q = 1.0 / 3.0


def entropy_against_blend(rho: ProbVector, nu: OffspringLaw,
                          q: float) -> float:
    blend = mix(q, rho, nu.as_prob_vector())
    return relative_entropy(*align(rho, blend))


class TestMemorylessVerdicts:
    def test_mass_at_zero_is_evanescent(self):
        nu = OffspringLaw((0, 2), (0.25, 0.75))
        rho = ProbVector((0, 2), (0.1, 0.9))
        verdict = classify_memoryless(rho, nu)
        assert verdict.kind is VerdictKind.EVANESCENT

    def test_size_biased_target_is_persistent(self):
        rho = ProbVector((1, 2), (1 / 3, 2 / 3))
        verdict = classify_memoryless(rho, FLAGSHIP)
        assert verdict.kind is VerdictKind.STRONGLY_PERSISTENT
        assert verdict.margin_persistence == pytest.approx(
            2 / 3 * math.log(2.0) - 0.05663301226513255, abs=1e-12)

    def test_pure_chain_target_is_evanescent(self):
        rho = ProbVector((1, 2), (1.0, 0.0))
        verdict = classify_memoryless(rho, FLAGSHIP)
        assert verdict.kind is VerdictKind.EVANESCENT
        assert verdict.margin_evanescence == pytest.approx(math.log(2.0),
                                                           abs=1e-12)


class TestReinforcedVerdicts:
    def test_concentration_target_is_persistent(self):
        rho = ProbVector((1, 2), (0.2, 0.8))
        verdict = classify_reinforced(rho, FLAGSHIP, Q)
        assert verdict.kind is VerdictKind.STRONGLY_PERSISTENT
        assert verdict.margin_evanescence == pytest.approx(
            -math.log(8.0 / 5.0), abs=1e-9)
        assert verdict.margin_persistence == pytest.approx(
            0.46300152259852057, abs=1e-9)
        assert not verdict.subcritical

    def test_pure_chain_target_is_evanescent(self):
        rho = ProbVector((1, 2), (1.0, 0.0))
        verdict = classify_reinforced(rho, FLAGSHIP, Q)
        assert verdict.kind is VerdictKind.EVANESCENT
        assert verdict.margin_evanescence == pytest.approx(math.log(1.5),
                                                           abs=1e-9)

    def test_subcritical_blend_blocks_strong_persistence(self):
        nu = OffspringLaw((0, 2), (0.6, 0.4))
        rho = ProbVector((1,), (1.0,))
        verdict = classify_reinforced(rho, nu, 0.5)
        # blended mean 0.5 * 1 + 0.5 * 0.8 = 0.9 < 1
        assert verdict.subcritical
        assert verdict.kind is VerdictKind.NOT_STRONGLY_PERSISTENT

    def test_mass_at_zero_beats_the_subcritical_branch(self):
        nu = OffspringLaw((0, 1), (0.9, 0.1))
        rho = ProbVector((0, 1), (0.5, 0.5))
        verdict = classify_reinforced(rho, nu, 0.5)
        assert verdict.kind is VerdictKind.EVANESCENT

    def test_persistence_margin_grows_with_memory(self):
        rho = ProbVector((1, 2), (0.3, 0.7))
        margins = [classify_reinforced(rho, FLAGSHIP, q).margin_persistence
                   for q in (0.1, 0.3, 0.5, 0.7)]
        assert all(b > a for a, b in zip(margins, margins[1:]))

    def test_subcritical_targets_never_show_positive_margin(self):
        gen = RngStream(30).generator("classify-tests")
        checked = 0
        while checked < 25:
            m_rho = float(gen.uniform(0.3, 1.6))
            nu = OffspringLaw((0, 2), (0.6, 0.4))
            q = float(gen.uniform(0.1, 0.9))
            p2 = m_rho / 2.0
            rho = ProbVector((1, 2), (1.0 - p2, p2))
            verdict = classify_reinforced(rho, nu, q)
            if verdict.subcritical:
                checked += 1
                assert verdict.margin_persistence <= 1e-10

    def test_rate_never_exceeds_the_entropy_bound(self):
        gen = RngStream(31).generator("classify-tests")
        for _ in range(50):
            size = int(gen.integers(2, 5))
            support = tuple(sorted(gen.choice(np.arange(1, 7), size=size,
                                              replace=False).tolist()))
            w = np.maximum(gen.dirichlet(np.ones(size)), 1e-3)
            nu = OffspringLaw(support, w / w.sum())
            w2 = np.maximum(gen.dirichlet(np.ones(size)), 1e-3)
            rho = ProbVector(support, w2 / w2.sum())
            q = float(gen.uniform(0.05, 0.9))
            assert reinforced_rate(rho, nu, q).value <= (
                entropy_against_blend(rho, nu, q) + 1e-8)

    def test_persistent_verdicts_are_seen_in_simulation(self):
        rho = ProbVector((1, 2), (0.2, 0.8))
        assert classify_reinforced(rho, FLAGSHIP,
                                   Q).kind is VerdictKind.STRONGLY_PERSISTENT
        hits = 0
        for i in range(10000):
            draws, _ = simulate_reinforced_urn(FLAGSHIP, Q, 50,
                                               RngStream(32, i))
            freq2 = float(np.mean(draws == 2))
            if max(abs(freq2 - 0.8), abs(1.0 - freq2 - 0.2)) <= 0.1:
                hits += 1
        assert hits >= 1


class TestMinMemory:
    def test_base_law_needs_no_memory(self):
        assert min_memory_for_persistence(FLAGSHIP.as_prob_vector(),
                                          FLAGSHIP) == 0.0

    def test_rich_target_needs_no_memory(self):
        assert min_memory_for_persistence(ProbVector((2,), (1.0,)),
                                          FLAGSHIP) == 0.0

    def test_seventy_percent_ratio_gives_thirty_percent_memory(self):
        # tune the base law so the log-degree gain is 0.7 of the entropy
        rho = ProbVector((1, 2), (0.5, 0.5))
        gain = pair(rho, log_degree_weights((1, 2)))

        def ratio_defect(t: float) -> float:
            nu_t = ProbVector((1, 2), (t, 1.0 - t))
            return gain / relative_entropy(rho, nu_t) - 0.7

        t = brentq(ratio_defect, 1e-4, 0.45, xtol=1e-14)
        nu = OffspringLaw((1, 2), (t, 1.0 - t))
        threshold = min_memory_for_persistence(rho, nu)
        assert threshold == pytest.approx(0.3, abs=1e-9)
        verdict = classify_reinforced(rho, nu, 0.35)
        assert verdict.kind is not VerdictKind.EVANESCENT

    def test_off_support_target_returns_none(self):
        rho = ProbVector((1, 3), (0.5, 0.5))
        assert min_memory_for_persistence(rho, FLAGSHIP) is None

    def test_gainless_target_is_rejected(self):
        rho = ProbVector((1,), (1.0,))
        with pytest.raises(ContractViolationError):
            min_memory_for_persistence(rho, OffspringLaw((1, 2), (0.9, 0.1)))


class TestActivityMaps:
    def test_base_law_maps_to_identity(self):
        a = activity_from_law(FLAGSHIP.as_prob_vector(), FLAGSHIP, Q)
        assert np.allclose(a, 1.0, atol=1e-12)

    def test_concentration_target_activities(self):
        a = activity_from_law(ProbVector((1, 2), (0.2, 0.8)), FLAGSHIP, Q)
        assert np.allclose(a, (0.5, 4.0 / 3.0), atol=1e-12)
        assert abs(activity_constraint_residual(a, FLAGSHIP, Q)) < 1e-12

    def test_round_trip_and_criterion_identity(self):
        for p in (0.2, 0.35, 0.5, 0.65, 0.8):
            rho = ProbVector((1, 2), (p, 1.0 - p))
            a = activity_from_law(rho, FLAGSHIP, Q)
            back, criterion = law_from_activity(a, FLAGSHIP, Q)
            assert linf_distance(back, rho) < 1e-12
            expected = (entropy_against_blend(rho, FLAGSHIP, Q)
                        - pair(rho, log_degree_weights((1, 2))))
            assert criterion == pytest.approx(expected, abs=1e-12)

    def test_concentration_target_criterion_value(self):
        a = activity_from_law(ProbVector((1, 2), (0.2, 0.8)), FLAGSHIP, Q)
        _, criterion = law_from_activity(a, FLAGSHIP, Q)
        assert criterion == pytest.approx(-0.4630015225985207, abs=1e-12)
        assert criterion < 0.0


class TestTwoType:
    def test_known_decomposition_margins(self):
        mu = ProbVector((2, 3), (1 / 3, 2 / 3))
        mu_prime = ProbVector((1,), (1.0,))
        rho = ProbVector((1, 2, 3), (0.5, 1 / 6, 1 / 3))
        cert = two_type_weak_persistence(rho, FLAGSHIP,
                                         OffspringLaw((1,), (1.0,)), 0.5, mu,
                                         mu_prime)
        assert cert.certified
        assert not cert.strong
        assert cert.margin_growth == pytest.approx(0.4054651081081644,
                                                   abs=1e-12)
        assert cert.margin_average == pytest.approx(0.2027325540540822,
                                                    abs=1e-12)

    def test_full_weight_recovers_the_strong_branch(self):
        mu = ProbVector((2, 3), (1 / 3, 2 / 3))
        cert = two_type_weak_persistence(ProbVector((2, 3), (1 / 3, 2 / 3)),
                                         FLAGSHIP, OffspringLaw((1,), (1.0,)),
                                         1.0, mu, None)
        assert cert.strong
        assert cert.certified

    def test_degenerate_base_law_has_no_margin(self):
        delta1 = OffspringLaw((1,), (1.0,))
        mu = ProbVector((2,), (1.0,))
        cert = two_type_weak_persistence(ProbVector((2,), (1.0,)), delta1,
                                         delta1, 1.0, mu, None)
        assert not cert.certified

    def test_search_recovers_the_known_certificate(self):
        rho = ProbVector((1, 2, 3), (0.5, 1 / 6, 1 / 3))
        cert, s, mu, mu_prime = search_two_type_decomposition(
            rho, FLAGSHIP, OffspringLaw((1,), (1.0,)), mesh=20)
        assert cert.certified
        assert s == pytest.approx(0.5, abs=1e-12)
        assert linf_distance(mu, ProbVector((2, 3), (1 / 3, 2 / 3))) < 1e-9
        assert tuple(mu_prime.support) == (1,)
