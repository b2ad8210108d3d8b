"""Survival certificate from the constrained activity minimization.

Every admissible activity vector yields a candidate infinite line of descent;
the certificate functional weighs its stationary frequency against the
degrees it consumes, and a strictly negative minimum certifies survival with
positive probability. The minimizer has a closed form through the principal
Lambert W branch, indexed by a single Lagrange constant, so the whole
optimization reduces to a one-dimensional root find on the admissibility
constraint. A proportional activity profile gives a cheaper but weaker
baseline certificate, kept for comparison.

The criterion is one-sided: certification implies survival, failure to
certify implies nothing. Laws with no atom at zero survive trivially, which
the report flags separately instead of folding into the certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, NumericError
from .measures import OffspringLaw

_BRANCH_POINT = -math.exp(-1.0)
_BISECTION_ITERS = 200
# certification demands strict negativity; the margin keeps roundoff at a
# true zero (degenerate single-atom laws) from minting a certificate
_CERT_TOL = 1e-12


def lambert_w0(x: float) -> float:
    """Principal branch of w e^w = x on [-1/e, inf).

    Halley iteration from a piecewise initial guess: a branch-point series
    in sqrt(2(ex+1)) on the left, log(x) - log(log(x)) for large x, and the
    argument itself near zero. Three to five iterations reach machine
    precision everywhere in between.
    """
    if math.isnan(x):
        raise ContractViolationError("lambert_w0 is undefined at NaN")
    if x < _BRANCH_POINT:
        slack = 4.0 * math.ulp(-_BRANCH_POINT)
        if x < _BRANCH_POINT - slack:
            raise ContractViolationError(
                f"lambert_w0 argument {x!r} below the branch point -1/e")
        x = _BRANCH_POINT
    if x == 0.0:
        return 0.0

    ex1 = math.e * x + 1.0
    if ex1 <= 0.0:
        return -1.0
    if x < -0.25:
        p = math.sqrt(2.0 * ex1)
        w = -1.0 + p * (1.0 - p * (1.0 / 3.0 - p * (11.0 / 72.0)))
        if p < 1e-4:
            return w
    elif x < 1.5:
        w = x / (1.0 + x) if x > 0.0 else x * (1.0 - x)
    else:
        lx = math.log(x)
        llx = math.log(lx)
        w = lx - llx + llx / lx

    for _ in range(50):
        ew = math.exp(w)
        f = w * ew - x
        if f == 0.0:
            return w
        wp1 = w + 1.0
        if abs(wp1) < 1e-12:
            return w
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        step = f / denom
        w -= step
        if abs(step) <= 2.0 * math.ulp(1.0 + abs(w)):
            break
    return w


def _box_check(a, nu: OffspringLaw, q: float) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape != (len(nu.support),):
        raise ContractViolationError(
            f"activity vector must have length {len(nu.support)}")
    if np.isnan(a).any() or (a < 0.0).any() or (a >= 1.0 / q).any():
        raise ContractViolationError("activities must lie in [0, 1/q)")
    return a


def survival_functional(a, nu: OffspringLaw, q: float) -> float:
    """Certificate functional: stationary frequency weighted log activity-
    to-degree ratio, summed over the support.

    Infinite when the activity charges atom 0 while 0 sits in the support;
    an activity of 0 contributes nothing (its stationary frequency
    vanishes). No admissibility is assumed, only the box constraints.
    """
    if math.isnan(q) or not (0.0 < q < 1.0):
        raise ContractViolationError(f"memory parameter {q!r} outside (0, 1)")
    a = _box_check(a, nu, q)
    total = 0.0
    for idx, k in enumerate(nu.support):
        ak = float(a[idx])
        if k == 0:
            if ak > 0.0:
                return math.inf
            continue
        w = float(nu.weights[idx])
        if ak == 0.0 or w == 0.0:
            continue
        total += w * (1.0 - q) * ak / (1.0 - q * ak) * math.log(ak / k)
    return total


def stationarity_ratios(a, nu: OffspringLaw, q: float):
    """Per-coordinate ratio of functional gradient to constraint gradient.

    The base-law weight cancels, leaving
    ((1-q)/q) (log(a(k)/k) + 1 - q a(k)) for each positive-degree atom. At
    the constrained minimizer these are equal across coordinates. Returns
    the atoms and their ratios; every listed activity must be positive.
    """
    if math.isnan(q) or not (0.0 < q < 1.0):
        raise ContractViolationError(f"memory parameter {q!r} outside (0, 1)")
    a = _box_check(a, nu, q)
    atoms = []
    ratios = []
    for idx, k in enumerate(nu.support):
        if k == 0:
            continue
        ak = float(a[idx])
        if ak <= 0.0:
            raise ContractViolationError(
                f"stationarity ratio undefined at zero activity (atom {k})")
        atoms.append(k)
        ratios.append((1.0 - q) / q * (math.log(ak / k) + 1.0 - q * ak))
    return tuple(atoms), np.asarray(ratios)


@dataclass(frozen=True)
class SurvivalReport:
    """Solved certificate with its baseline comparison.

    ``survives_certified`` records a strictly negative minimum; laws with no
    mass at zero survive regardless, reported in ``trivial_survival`` rather
    than folded into the certificate.
    """

    lagrange_constant: float
    activities: np.ndarray
    minimum_value: float
    baseline_coefficient: float
    baseline_value: float
    survives_certified: bool
    trivial_survival: bool
    constraint_residual: float


def _constraint_sum(nu: OffspringLaw, q: float, activities: np.ndarray) -> float:
    return float(np.sum(nu.weights / (1.0 - q * activities)))


def _activities_from_constant(nu: OffspringLaw, q: float, c: float) -> np.ndarray:
    a = np.zeros(len(nu.support))
    for idx, k in enumerate(nu.support):
        if k != 0:
            a[idx] = -lambert_w0(-c * k) / q
    return a


def _positive_degrees(nu: OffspringLaw):
    degs = [k for k in nu.support if k != 0 and nu.prob(k) > 0.0]
    if not degs:
        raise ContractViolationError(
            "the law puts no mass on positive degrees")
    return degs


def solve_survival_minimizer(nu: OffspringLaw, q: float) -> SurvivalReport:
    """Minimize the certificate functional over admissible activities.

    The minimizing family is a(k) = -W0(-Ck)/q; the admissibility sum is
    continuous and strictly increasing in C, from 1 at C=0 to infinity at
    the branch-point ceiling 1/(e max S), so plain bisection finds the
    unique admissible C. The upper end expands geometrically toward the
    ceiling first if the target is not yet bracketed.
    """
    if math.isnan(q) or not (0.0 < q < 1.0):
        raise ContractViolationError(f"memory parameter {q!r} outside (0, 1)")
    degs = _positive_degrees(nu)
    top = max(degs)
    target = 1.0 / (1.0 - q)
    ceiling = 1.0 / (math.e * top)

    lo = 1e-14 * ceiling
    hi = (1.0 - 1e-14) * ceiling
    for _ in range(60):
        if _constraint_sum(nu, q, _activities_from_constant(nu, q, hi)) > target:
            break
        gap = ceiling - hi
        hi = ceiling - gap / 1e4
        if gap <= 0.0:
            raise NumericError("constraint target never bracketed",
                               diagnostics={"target": target, "hi": hi})
    if _constraint_sum(nu, q, _activities_from_constant(nu, q, lo)) > target:
        raise NumericError("constraint exceeds target at the lower bracket",
                           diagnostics={"target": target, "lo": lo})

    for _ in range(_BISECTION_ITERS):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if _constraint_sum(nu, q, _activities_from_constant(nu, q, mid)) > target:
            hi = mid
        else:
            lo = mid
    c_star = 0.5 * (lo + hi)
    activities = _activities_from_constant(nu, q, c_star)
    # near the product-log branch point the constraint sum can move by more
    # than the tolerance per representable step of the constant, so finish by
    # recomputing the heaviest productive activity from the identity itself
    weights = nu.weights
    anchor = max((i for i, k in enumerate(nu.support) if k != 0),
                 key=lambda i: weights[i])
    rest = target - sum(weights[i] / (1.0 - q * activities[i])
                        for i in range(len(weights)) if i != anchor)
    if rest > weights[anchor]:
        polished = (1.0 - weights[anchor] / rest) / q
        if 0.0 <= polished < 1.0 / q:
            activities = activities.copy()
            activities[anchor] = polished
            activities.setflags(write=False)
    residual = abs(_constraint_sum(nu, q, activities) - target)
    if residual > 1e-10:
        raise NumericError("minimizer misses the admissibility constraint",
                           diagnostics={"residual": residual, "C": c_star})

    minimum = survival_functional(activities, nu, q)
    base_c, base_value = proportional_baseline(nu, q)
    if minimum > base_value + 1e-9:
        raise NumericError(
            "constrained minimum exceeds the proportional baseline",
            diagnostics={"minimum": minimum, "baseline": base_value})
    return SurvivalReport(
        lagrange_constant=c_star,
        activities=activities,
        minimum_value=minimum,
        baseline_coefficient=base_c,
        baseline_value=base_value,
        survives_certified=minimum < -_CERT_TOL,
        trivial_survival=nu.prob(0) == 0.0,
        constraint_residual=residual,
    )


def proportional_baseline(nu: OffspringLaw, q: float) -> tuple[float, float]:
    """Admissible activity proportional to the degree, and its certificate
    value.

    Solves the admissibility sum for a(k) = c k by bisection on
    c in (0, 1/(q max S)); the value is never below the constrained
    minimum.
    """
    if math.isnan(q) or not (0.0 < q < 1.0):
        raise ContractViolationError(f"memory parameter {q!r} outside (0, 1)")
    degs = _positive_degrees(nu)
    top = max(degs)
    target = 1.0 / (1.0 - q)
    ceiling = 1.0 / (q * top)

    def prop_activities(c: float) -> np.ndarray:
        a = np.zeros(len(nu.support))
        for idx, k in enumerate(nu.support):
            if k != 0:
                a[idx] = c * k
        return a

    lo = 1e-14 * ceiling
    hi = (1.0 - 1e-14) * ceiling
    if _constraint_sum(nu, q, prop_activities(lo)) > target:
        raise NumericError("baseline constraint exceeds target at the lower "
                           "bracket", diagnostics={"target": target})
    if _constraint_sum(nu, q, prop_activities(hi)) < target:
        raise NumericError("baseline constraint never reaches the target",
                           diagnostics={"target": target})
    for _ in range(_BISECTION_ITERS):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if _constraint_sum(nu, q, prop_activities(mid)) > target:
            hi = mid
        else:
            lo = mid
    c_star = 0.5 * (lo + hi)
    value = survival_functional(prop_activities(c_star), nu, q)
    return c_star, value
