"""Principal-branch product-log solver and survival certificates."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from rgw import (ContractViolationError, NumericError, OffspringLaw,
                 RngStream, lambert_w0, proportional_baseline,
                 solve_survival_minimizer, stationarity_ratios,
                 survival_functional)

FLAGSHIP = OffspringLaw((1, 2), (0.5, 0.5))
Q = 1.0 / 3.0
BRANCH_POINT = -math.exp(-1.0)


class TestLambertW:
    def test_anchor_values(self):
        assert lambert_w0(0.0) == 0.0
        assert lambert_w0(BRANCH_POINT) == -1.0
        assert lambert_w0(1.0) == pytest.approx(0.5671432904097837,
                                                abs=1e-15)
        assert lambert_w0(1e6) == pytest.approx(11.383358086140053,
                                                abs=1e-12)

    def test_residual_policy_across_the_domain(self):
        xs = np.concatenate([np.linspace(BRANCH_POINT + 1e-12, -1e-12, 400),
                             np.geomspace(1e-12, 1e6, 600)])
        for x in xs:
            y = lambert_w0(float(x))
            assert abs(y * math.exp(y) - x) / max(1.0, abs(x)) < 1e-14

    def test_below_the_branch_point_is_rejected(self):
        with pytest.raises(ContractViolationError):
            lambert_w0(BRANCH_POINT - 1e-9)
        with pytest.raises(ContractViolationError):
            lambert_w0(float("nan"))

    def test_matches_reference_implementation(self):
        from scipy.special import lambertw

        for x in np.geomspace(1e-8, 1e5, 50):
            assert lambert_w0(float(x)) == pytest.approx(
                float(lambertw(float(x)).real), rel=1e-12)

    @given(st.floats(BRANCH_POINT + 1e-10, 1e5))
    @settings(max_examples=100, deadline=None)
    def test_inverse_property(self, x):
        y = lambert_w0(x)
        assert abs(y * math.exp(y) - x) / max(1.0, abs(x)) < 1e-13


class TestFunctional:
    def test_identity_activity_flagship(self):
        got = survival_functional(np.ones(2), FLAGSHIP, Q)
        assert got == pytest.approx(-0.34657359027997264, abs=1e-15)

    def test_activity_box_is_enforced(self):
        with pytest.raises(ContractViolationError):
            survival_functional([1.0, 3.5], FLAGSHIP, Q)
        with pytest.raises(ContractViolationError):
            survival_functional([-0.1, 1.0], FLAGSHIP, Q)

    def test_stationarity_ratios_constant_at_the_reported_minimizer(self):
        report = solve_survival_minimizer(FLAGSHIP, Q)
        _, ratios = stationarity_ratios(report.activities, FLAGSHIP, Q)
        assert np.max(ratios) - np.min(ratios) < 1e-6


class TestSolver:
    def test_flagship_certificate(self):
        report = solve_survival_minimizer(FLAGSHIP, Q)
        assert report.lagrange_constant == pytest.approx(
            0.14234199636624545, abs=1e-10)
        assert report.minimum_value == pytest.approx(-0.46301429866858113,
                                                     abs=1e-10)
        assert report.baseline_value == pytest.approx(-0.45574639440832626,
                                                      abs=1e-10)
        assert report.minimum_value <= report.baseline_value + 1e-9
        assert abs(report.constraint_residual) < 1e-10
        assert report.survives_certified
        assert report.trivial_survival

    def test_doubling_law_closed_forms(self):
        nu = OffspringLaw((2,), (1.0,))
        for q in (0.25, 0.5, 0.75):
            report = solve_survival_minimizer(nu, q)
            assert report.lagrange_constant == pytest.approx(
                q * math.exp(-q) / 2.0, abs=1e-12)
            assert np.allclose(report.activities, 1.0, atol=1e-12)
            assert report.minimum_value == pytest.approx(-math.log(2.0),
                                                         abs=1e-12)
            c, value = proportional_baseline(nu, q)
            assert c == pytest.approx(0.5, abs=1e-12)
            assert value == pytest.approx(-math.log(2.0), abs=1e-12)

    def test_pure_chain_is_not_certified(self):
        report = solve_survival_minimizer(OffspringLaw((1,), (1.0,)), 0.4)
        assert report.minimum_value == pytest.approx(0.0, abs=1e-9)
        assert not report.survives_certified

    def test_heavy_extinction_mass_is_not_certified(self):
        report = solve_survival_minimizer(OffspringLaw((0, 1), (0.5, 0.5)),
                                          0.5)
        assert report.minimum_value > 0.0
        assert not report.survives_certified
        assert not report.trivial_survival

    def test_single_productive_atom_matches_the_baseline(self):
        report = solve_survival_minimizer(OffspringLaw((0, 2), (0.5, 0.5)),
                                          0.6)
        assert report.minimum_value == pytest.approx(report.baseline_value,
                                                     abs=1e-10)
        assert report.minimum_value == pytest.approx(-0.47000362924573597,
                                                     abs=1e-10)

    def test_identity_activity_caps_the_minimum(self):
        gen = RngStream(40).generator("survival-tests")
        for _ in range(10):
            nu, q = _random_instance(gen)
            report = solve_survival_minimizer(nu, q)
            cap = survival_functional(np.ones(len(nu.support)), nu, q)
            assert report.minimum_value <= cap + 1e-9


def _random_instance(gen: np.random.Generator) -> tuple[OffspringLaw, float]:
    size = int(gen.integers(2, 5))
    support = tuple(sorted(gen.choice(np.arange(0, 7), size=size,
                                      replace=False).tolist()))
    if all(k == 0 for k in support):
        support = (0, 2)
    w = np.maximum(gen.dirichlet(np.ones(len(support))), 1e-3)
    return OffspringLaw(support, w / w.sum()), float(gen.uniform(0.1, 0.8))


def _constrained_search_minimum(nu: OffspringLaw, q: float,
                                gen: np.random.Generator) -> float:
    """Independent check: eliminate one activity through the admissibility
    identity and minimize the functional over the rest with a quasi-Newton
    box search."""
    pos = [i for i, k in enumerate(nu.support) if k != 0]
    target = 1.0 / (1.0 - q)
    last = pos[-1]
    free = pos[:-1]
    hi = 1.0 / q - 1e-9

    def assemble(v: np.ndarray) -> np.ndarray | None:
        a = np.zeros(len(nu.support))
        for j, fi in enumerate(free):
            a[fi] = v[j]
        rest = target - sum(nu.weights[i] / (1.0 - q * a[i])
                            for i in range(len(nu.support)) if i != last)
        if rest <= nu.weights[last]:
            return None
        a[last] = (1.0 - nu.weights[last] / rest) / q
        if not 0.0 <= a[last] < 1.0 / q:
            return None
        return a

    def objective(v: np.ndarray) -> float:
        a = assemble(np.clip(v, 0.0, hi))
        if a is None:
            return 10.0
        return survival_functional(a, nu, q)

    best = math.inf
    if not free:
        a = assemble(np.zeros(0))
        return survival_functional(a, nu, q) if a is not None else math.inf
    for _ in range(8):
        v0 = gen.uniform(0.2, min(hi, 2.0), size=len(free))
        res = minimize(objective, v0, method="L-BFGS-B",
                       bounds=[(0.0, hi)] * len(free))
        best = min(best, float(res.fun))
    return best


class TestIndependentSearch:
    def test_solver_matches_box_search(self):
        gen = RngStream(41).generator("survival-oracle")
        cases = [(FLAGSHIP, Q), (OffspringLaw((0, 2), (0.5, 0.5)), 0.6)]
        while len(cases) < 6:
            cases.append(_random_instance(gen))
        for nu, q in cases:
            report = solve_survival_minimizer(nu, q)
            reference = _constrained_search_minimum(nu, q, gen)
            assert report.minimum_value <= reference + 1e-9
            assert report.minimum_value >= reference - 1e-6

    @given(st.integers(0, 10_000))
    @settings(max_examples=20, deadline=None)
    def test_solver_invariants_hold_on_random_instances(self, seed):
        gen = np.random.default_rng(seed)
        nu, q = _random_instance(gen)
        report = solve_survival_minimizer(nu, q)
        assert abs(report.constraint_residual) < 1e-10
        assert report.minimum_value <= report.baseline_value + 1e-9
        assert report.trivial_survival == (nu.prob(0) == 0.0)
