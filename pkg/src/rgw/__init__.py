"""Reinforced Galton-Watson processes: rate functions, simulation, persistence.

A reinforced Galton-Watson tree grows from a reproduction law ``nu`` and a
memory parameter ``q``: each individual repeats the offspring number of a
uniformly chosen ancestor on its lineage with probability q and otherwise
draws fresh from nu. The package computes the large-deviation machinery of
lineage empirical measures (cumulant generating functions, rate functions,
concentration targets), simulates the trees and their urn and spine
representations, classifies offspring laws as evanescent or persistent, and
certifies survival of persistent traits, cross-validating every analytic
quantity against independent Monte Carlo and enumeration oracles.
"""

from .errors import (
    ContractViolationError,
    DegenerateLawError,
    InfeasibleError,
    NumericError,
    StatisticalFailureError,
    SupportMismatchError,
)
from .measures import (
    EmpiricalMeasure,
    LogWeights,
    OffspringLaw,
    ProbVector,
    align,
    linf_distance,
    load_offspring_law,
    log_degree_weights,
    mean,
    mix,
    offspring_law_from_json,
    offspring_law_to_json,
    pair,
    relative_entropy,
    size_biased,
)
from .rate import (
    DEFAULT_QUADRATURE,
    QuadratureSpec,
    RateDual,
    concentration_target,
    growth_exponent,
    log_mgf,
    min_rate_over_halfspace,
    reinforced_log_mgf,
    reinforced_log_mgf_grad,
    reinforced_log_mgf_polynomial,
    reinforced_rate,
    sanov_rate,
)
from .rng import RngStream
from .control import (
    ControlPath,
    constant_control_value,
    control_objective,
    rate_by_control,
    two_phase_probe,
)
from .simulate import (
    GenerationReport,
    LineageState,
    ReplacementSpectrum,
    SpineUrnState,
    TreeCampaign,
    TwoTypeGeneration,
    enumerate_expected_counts,
    gibbs_conditional_estimate,
    many_to_one_estimate,
    replacement_matrix,
    simulate_reinforced_tree,
    simulate_reinforced_urn,
    simulate_spine_urn,
    simulate_tree_campaign,
    simulate_two_type,
)
from .classify import (
    DECISION_TOL,
    TwoTypeCertificate,
    Verdict,
    VerdictKind,
    activity_constraint_residual,
    activity_from_law,
    classify_memoryless,
    classify_reinforced,
    law_from_activity,
    min_memory_for_persistence,
    search_two_type_decomposition,
    two_type_weak_persistence,
    validate_activities,
)
from .survival import (
    SurvivalReport,
    lambert_w0,
    proportional_baseline,
    solve_survival_minimizer,
    stationarity_ratios,
    survival_functional,
)
from .verify import verify_suite

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
