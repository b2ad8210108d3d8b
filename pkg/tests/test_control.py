"""Discretized-control upper bounds on the rate function."""

from __future__ import annotations

import math

import numpy as np
import pytest

from rgw import (ContractViolationError, ControlPath, OffspringLaw,
                 ProbVector, RngStream, constant_control_value,
                 control_objective, rate_by_control, reinforced_rate,
                 relative_entropy, two_phase_probe)
from rgw.measures import align, mix

FLAGSHIP = OffspringLaw((1, 2), (0.5, 0.5))
Q = 1.0 / 3.0
TARGET = ProbVector((1, 2), (0.2, 0.8))

# hand-computed objective of the two-step path (all mass on 2, then on 1)
TWO_STEP_VALUE = 0.6081976621622466


class TestObjective:
    def test_two_step_hand_value(self):
        path = ControlPath((1, 2), [[0.0, 1.0], [1.0, 0.0]])
        assert control_objective(path, FLAGSHIP, Q) == pytest.approx(
            TWO_STEP_VALUE, abs=1e-12)

    def test_constant_path_equals_entropy_bound(self):
        for p in (0.2, 0.35, 0.6):
            rho = ProbVector((1, 2), (p, 1.0 - p))
            path = ControlPath((1, 2), np.tile(rho.weights, (8, 1)))
            blend = mix(Q, rho, FLAGSHIP.as_prob_vector())
            expected = relative_entropy(*align(rho, blend))
            assert control_objective(path, FLAGSHIP, Q) == pytest.approx(
                expected, abs=1e-12)
            assert constant_control_value(rho, FLAGSHIP, Q) == pytest.approx(
                expected, abs=1e-12)

    def test_rejects_malformed_paths(self):
        with pytest.raises(ContractViolationError):
            ControlPath((1, 2), [[0.5, 0.5, 0.0]])
        with pytest.raises(ContractViolationError):
            ControlPath((1, 2), np.zeros((0, 2)))
        with pytest.raises(ContractViolationError):
            ControlPath((1, 2), [[0.5, float("nan")]])


class TestOptimization:
    def test_sandwiched_between_dual_value_and_constant_bound(self):
        value, path = rate_by_control(TARGET, FLAGSHIP, Q, steps=16,
                                      restarts=3, rng=RngStream(7))
        dual = reinforced_rate(TARGET, FLAGSHIP, Q).value
        const = constant_control_value(TARGET, FLAGSHIP, Q)
        assert dual - 1e-9 <= value <= const + 1e-9
        assert path.rows.shape == (16, 2)

    def test_refinement_does_not_hurt(self):
        coarse, _ = rate_by_control(TARGET, FLAGSHIP, Q, steps=16,
                                    restarts=3, rng=RngStream(7))
        fine, _ = rate_by_control(TARGET, FLAGSHIP, Q, steps=32,
                                  restarts=3, rng=RngStream(7))
        assert fine <= coarse + 1e-6

    def test_optimal_path_is_genuinely_time_dependent(self):
        _, path = rate_by_control(TARGET, FLAGSHIP, Q, steps=16, restarts=3,
                                  rng=RngStream(7))
        drift = np.max(np.abs(path.rows - TARGET.weights))
        assert drift > 0.01


class TestTwoPhaseProbe:
    def test_zero_perturbation_recovers_the_constant_value(self):
        const = constant_control_value(TARGET, FLAGSHIP, Q)
        assert two_phase_probe(TARGET, FLAGSHIP, Q, 0.0) == pytest.approx(
            const, abs=1e-6)

    def test_some_perturbation_strictly_improves(self):
        const = constant_control_value(TARGET, FLAGSHIP, Q)
        best = min(two_phase_probe(TARGET, FLAGSHIP, Q, eps)
                   for eps in (0.05, 0.1, 0.2))
        assert best < const - 1e-3
