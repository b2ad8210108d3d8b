"""Scaled cumulant generating functions and rate functions.

For a reproduction law ``nu`` on a finite support and a memory parameter
``q`` in (0,1), the central object is the limiting cumulant generating
function of lineage empirical measures,

    reinforced_log_mgf(lam) = log q - log I(lam),
    I(lam) = integral_0^inf prod_k (1 - t e^{lam(k)})_+^{nu(k)(1-q)/q} dt.

The integrand vanishes for t >= exp(-max lam), carries an algebraic zero of
exponent c* (the summed exponents of the maximal entries) at that endpoint,
and is smooth inside. Quadrature follows that structure: adaptive
Gauss-Kronrod panels over the first 90% of the interval and a Gauss-Jacobi
panel with weight (1-s)^{c*} over the last 10%. When every exponent is a
non-negative integer the integrand is a polynomial and the integral is also
available in closed form; that fast path doubles as an independent oracle.

The Fenchel-Legendre transform is solved by a damped Newton iteration on the
tilt vector (one coordinate anchored at 0 for the additive gauge), with a
finite-difference Hessian and a gradient-ascent fallback.

Conventions: entries lam(k) = -inf contribute factor 1 to the integrand and
get gradient component 0; the all -inf tilt yields -inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import roots_jacobi

from .errors import ContractViolationError, NumericError, SupportMismatchError
from .measures import (
    LogWeights,
    OffspringLaw,
    ProbVector,
    log_degree_weights,
    mean,
    pair,
    relative_entropy,
    size_biased,
)

_JACOBI_ORDERS = (12, 20, 32, 52, 84, 136)
_PANEL_SPLIT = 0.9


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and panel policy for the log-mgf integrals.

    ``rel_tol`` is a relative target in (0, 1e-4]; ``singular_endpoint``
    enables the Gauss-Jacobi endpoint panel (disabling it falls back to one
    adaptive pass over the whole interval, which is slower near the endpoint
    zero and only intended for diagnostics).
    """

    rel_tol: float = 1e-10
    max_subdivisions: int = 200
    singular_endpoint: bool = True

    def __post_init__(self):
        if math.isnan(self.rel_tol) or not (0.0 < self.rel_tol <= 1e-4):
            raise ContractViolationError("rel_tol must lie in (0, 1e-4]")
        if self.max_subdivisions < 10:
            raise ContractViolationError("max_subdivisions must be at least 10")


DEFAULT_QUADRATURE = QuadratureSpec()


@dataclass(frozen=True)
class RateDual:
    """Value of the rate function together with the maximizing tilt.

    ``tilt`` is normalized so its largest entry is 0 and is -inf exactly off
    the argument's support; ``residual`` is the sup-norm gap between the
    gradient at ``tilt`` and the requested measure.
    """

    value: float
    tilt: LogWeights
    residual: float
    iterations: int


@lru_cache(maxsize=256)
def _jacobi_rule(order: int, gamma: float):
    nodes, weights = roots_jacobi(order, 0.0, gamma)
    return nodes, weights


def _check_pair(lam: LogWeights, nu: OffspringLaw):
    if lam.support != nu.support:
        raise SupportMismatchError(f"supports differ: {lam.support} vs {nu.support}")


def _check_q_open(q: float):
    if math.isnan(q) or not (0.0 < q < 1.0):
        raise ContractViolationError(f"memory parameter {q!r} outside (0, 1)")


def _endpoint_integral(g, gamma: float, quad: QuadratureSpec) -> float:
    """integral_0^1 (1-s)^gamma g(s) ds with g smooth on [0, 1]."""
    if not quad.singular_endpoint:
        val, err, *rest = integrate.quad(
            lambda s: (1.0 - s) ** gamma * g(s) if s < 1.0 else 0.0,
            0.0, 1.0, epsabs=0.0, epsrel=quad.rel_tol,
            limit=quad.max_subdivisions, full_output=1)
        if err > 1e3 * quad.rel_tol * max(abs(val), 1e-300):
            raise NumericError("quadrature did not converge",
                               {"value": val, "abserr": err})
        return val

    smooth, err, *rest = integrate.quad(
        lambda s: (1.0 - s) ** gamma * g(s),
        0.0, _PANEL_SPLIT, epsabs=0.0, epsrel=quad.rel_tol,
        limit=quad.max_subdivisions, full_output=1)
    if err > 1e3 * quad.rel_tol * max(abs(smooth), 1e-300):
        raise NumericError("adaptive panel did not converge",
                           {"value": smooth, "abserr": err})

    # last 10%: s = 1 - (1 - split) v pulls the weight onto v^gamma at v = 0
    width = 1.0 - _PANEL_SPLIT
    scale = width ** (gamma + 1.0)
    if scale == 0.0:
        return smooth
    panel_prev = None
    panel = 0.0
    for order in _JACOBI_ORDERS:
        nodes, weights = _jacobi_rule(order, gamma)
        v = 0.5 * (nodes + 1.0)
        s = 1.0 - width * v
        vals = np.array([g(si) for si in s])
        panel = scale * 0.5 ** (gamma + 1.0) * float(np.dot(weights, vals))
        if panel_prev is not None:
            tol = quad.rel_tol * max(abs(smooth + panel), 1e-300)
            if abs(panel - panel_prev) <= tol:
                return smooth + panel
        panel_prev = panel

    # a boundary layer thinner than the top Jacobi order resolves (nearly
    # tied tilt coordinates); hand the whole weight to adaptive QUADPACK
    val, err, *rest = integrate.quad(
        g, 0.0, 1.0, weight="alg", wvar=(0.0, gamma),
        epsabs=0.0, epsrel=quad.rel_tol, limit=quad.max_subdivisions,
        full_output=1)
    if err > 1e3 * quad.rel_tol * max(abs(val), 1e-300):
        raise NumericError("endpoint panel did not converge",
                           {"smooth": smooth, "panel": panel, "gamma": gamma,
                            "adaptive": val, "abserr": err})
    return val


class _Integrand:
    """Shared geometry for the mgf integrals at a fixed tilt."""

    def __init__(self, lam: LogWeights, nu: OffspringLaw, q: float):
        vals = lam.values
        finite = np.isfinite(vals)
        self.finite = finite
        self.lam_bar = float(np.max(vals[finite]))
        self.exponents = nu.weights * (1.0 - q) / q
        top = finite & (vals == self.lam_bar)
        self.top = top
        self.c_star = float(self.exponents[top].sum())
        lower = finite & ~top
        self.lower_idx = np.nonzero(lower)[0]
        self.lower_e = [math.exp(v - self.lam_bar) for v in vals[lower]]
        self.lower_c = [float(c) for c in self.exponents[lower]]

    def smooth_factor(self, s: float) -> float:
        """G(s) = prod over non-maximal entries of (1 - e_k s)^{c_k}."""
        acc = 0.0
        for e, c in zip(self.lower_e, self.lower_c):
            acc += c * math.log1p(-e * s)
        return math.exp(acc)


def _mgf_parts(lam: LogWeights, nu: OffspringLaw, q: float,
               quad: QuadratureSpec, want_grad: bool):
    """Log of the rescaled integral and, optionally, raw gradient parts."""
    geom = _Integrand(lam, nu, q)
    denom = _endpoint_integral(geom.smooth_factor, geom.c_star, quad)
    if not (denom > 0.0) or not math.isfinite(denom):
        raise NumericError("mgf integral collapsed", {"denominator": denom})
    log_integral = -geom.lam_bar + math.log(denom)
    if not want_grad:
        return log_integral, None

    grad = np.zeros(len(lam.support))
    for pos, e, c in zip(geom.lower_idx, geom.lower_e, geom.lower_c):
        def ratio(s: float, e=e) -> float:
            u = e * s
            return u / (1.0 - u) * geom.smooth_factor(s)
        grad[pos] = c * _endpoint_integral(ratio, geom.c_star, quad) / denom
    if geom.top.any():
        def top_ratio(s: float) -> float:
            return s * geom.smooth_factor(s)
        shared = _endpoint_integral(top_ratio, geom.c_star - 1.0, quad) / denom
        grad[geom.top] = geom.exponents[geom.top] * shared
    return log_integral, grad


def log_mgf(lam: LogWeights, nu: OffspringLaw) -> float:
    """Cumulant generating function log sum nu(k) exp(lam(k)) of one draw."""
    _check_pair(lam, nu)
    if lam.all_neg_inf:
        return -math.inf
    finite = lam.finite_mask()
    lam_bar = float(np.max(lam.values[finite]))
    acc = float(np.sum(nu.weights[finite] * np.exp(lam.values[finite] - lam_bar)))
    return lam_bar + math.log(acc)


def sanov_rate(rho: ProbVector, nu: OffspringLaw) -> float:
    """Rate function of iid empirical measures: relative entropy to nu."""
    if rho.support != nu.support:
        raise SupportMismatchError(f"supports differ: {rho.support} vs {nu.support}")
    return relative_entropy(rho, nu.as_prob_vector())


def reinforced_log_mgf(lam: LogWeights, nu: OffspringLaw, q: float,
                       quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Limiting cumulant generating function under memory q, by quadrature."""
    _check_pair(lam, nu)
    _check_q_open(q)
    if lam.all_neg_inf:
        return -math.inf
    log_integral, _ = _mgf_parts(lam, nu, q, quad, want_grad=False)
    return math.log(q) - log_integral


def reinforced_log_mgf_polynomial(lam: LogWeights, nu: OffspringLaw, q: float) -> float:
    """Closed-form value when every exponent nu(k)(1-q)/q is an integer.

    The integrand is then a polynomial, integrated coefficient by
    coefficient. Independent of the quadrature path; degrees much beyond a
    few hundred lose accuracy to coefficient cancellation.
    """
    _check_pair(lam, nu)
    _check_q_open(q)
    if lam.all_neg_inf:
        return -math.inf
    exponents = nu.weights * (1.0 - q) / q
    rounded = np.round(exponents)
    if np.max(np.abs(exponents - rounded)) > 1e-9 * max(1.0, float(np.max(exponents))):
        raise ContractViolationError("exponents are not integers; no polynomial form")
    finite = lam.finite_mask()
    lam_bar = float(np.max(lam.values[finite]))
    coeffs = np.array([1.0])
    for k_val, m in zip(lam.values[finite], rounded[finite].astype(int)):
        e = math.exp(k_val - lam_bar)
        for _ in range(m):
            coeffs = np.convolve(coeffs, [1.0, -e])
    powers = np.arange(len(coeffs))
    integral = float(np.sum(coeffs / (powers + 1.0)))
    if not integral > 0.0:
        raise NumericError("polynomial integral lost to cancellation",
                           {"degree": len(coeffs) - 1, "integral": integral})
    return math.log(q) + lam_bar - math.log(integral)


def reinforced_log_mgf_grad(lam: LogWeights, nu: OffspringLaw, q: float,
                            quad: QuadratureSpec = DEFAULT_QUADRATURE) -> ProbVector:
    """Gradient of the reinforced log-mgf: a probability vector.

    Components are ratios of endpoint-weighted integrals; they vanish exactly
    where lam is -inf and sum to 1 (checked against quadrature drift before
    renormalizing).
    """
    _check_pair(lam, nu)
    _check_q_open(q)
    if lam.all_neg_inf:
        raise ContractViolationError("gradient undefined at the all -inf sentinel")
    _, grad = _mgf_parts(lam, nu, q, quad, want_grad=True)
    drift = abs(float(grad.sum()) - 1.0)
    gate = max(1e-9, 1e2 * quad.rel_tol)
    if drift > gate:
        raise NumericError("gradient components sum to 1 beyond tolerance",
                           {"drift": drift, "gradient": grad.tolist()})
    return ProbVector(lam.support, grad / grad.sum())


def _grad_components(lam: LogWeights, nu: OffspringLaw, q: float,
                     quad: QuadratureSpec = DEFAULT_QUADRATURE) -> np.ndarray:
    """Raw gradient components before renormalization (for invariant tests)."""
    _check_pair(lam, nu)
    _check_q_open(q)
    _, grad = _mgf_parts(lam, nu, q, quad, want_grad=True)
    return grad


# ---------------------------------------------------------------------------
# Fenchel-Legendre transform
# ---------------------------------------------------------------------------

def _tilt_from_work(support, work_idx, lam_work) -> LogWeights:
    full = np.full(len(support), -np.inf)
    full[work_idx] = lam_work
    return LogWeights(support, full)


# ---------------------------------------------------------------------------
# boundary-layer solver
#
# For memory close to 1 the exponents nu(k)(1-q)/q shrink and the maximizing
# tilt coordinates tie within exp(-O(q/(1-q))), far below float resolution,
# so no iteration in tilt space can separate them. These routines work in
# m_k = log(1 - exp(tilt_k)) instead, where the optimum is O(1), and push the
# integrals through x = -log(t), where each factor delta + (1-delta)e^{-x}
# crosses over smoothly at x = log((1-delta)/delta) with unit width whatever
# the size of delta.
# ---------------------------------------------------------------------------

_BOUNDARY_ORDER = 40
_BOUNDARY_TAIL = 45.0
_BOUNDARY_CLIP = -1e-12


@lru_cache(maxsize=8)
def _legendre_rule(order: int):
    return np.polynomial.legendre.leggauss(order)


def _graded_edges(a: float, b: float, width0: float) -> list:
    """Panel edges on [a, b], fine near both ends, geometrically coarser
    toward the middle; the integrands are exponential sums whose scales sit
    at the interval ends."""
    length = b - a
    if length <= 2.0 * width0:
        n_even = max(1, math.ceil(length / width0))
        return [a + length * i / n_even for i in range(1, n_even + 1)]
    left, right = [], []
    lo, hi = a, b
    w = width0
    while hi - lo > 2.0 * w:
        left.append(lo + w)
        right.append(hi - w)
        lo += w
        hi -= w
        w *= 1.35
    mid = 0.5 * (lo + hi)
    return left + [mid] + right[::-1] + [b]


def _boundary_nodes(m: np.ndarray, c_total: float):
    """Quadrature nodes, weights, and per-coordinate logs for a given m."""
    delta = np.exp(m)
    lg1m = np.log1p(-delta)
    knots = np.clip(lg1m - m, 0.0, None)
    x_end = float(np.max(knots)) + _BOUNDARY_TAIL
    width0 = min(6.0, 18.0 / (2.0 + c_total))
    anchors = sorted({0.0, x_end} | {float(k) for k in knots if 0.0 < k < x_end})
    pts = [0.0]
    for a, b in zip(anchors, anchors[1:]):
        pts.extend(_graded_edges(a, b, width0))
    pts = np.asarray(pts)
    nodes, wts = _legendre_rule(_BOUNDARY_ORDER)
    half = 0.5 * np.diff(pts)
    mid = pts[:-1] + half
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * wts[None, :]).ravel()
    return x, w, lg1m, x_end


def _boundary_eval(m: np.ndarray, c: np.ndarray, want_jac: bool):
    """Integral, gradient, and optionally the Jacobian dg/dm at coordinate m.

    All integrands are assembled in log space from
    log f_k = logaddexp(m_k, log(1-delta_k) - x), so coordinates whose
    delta underflows float64 are still exact.
    """
    x, w, lg1m, x_end = _boundary_nodes(m, float(c.sum()))
    n = len(m)
    lgf = np.logaddexp(m[:, None], lg1m[:, None] - x[None, :])
    big_l = -x + c @ lgf
    lg_om = np.log(-np.expm1(-x))
    cm = float(np.dot(c, m))

    ival = float(w @ np.exp(big_l)) + math.exp(cm - x_end)
    lgr = lg1m[:, None] + lg_om[None, :] - lgf
    grad_i = np.empty(n)
    for k in range(n):
        tail = math.exp(lg1m[k] - m[k] + cm - x_end)
        grad_i[k] = c[k] * (float(w @ np.exp(big_l + lgr[k])) + tail)
    g = grad_i / ival
    if not want_jac:
        return ival, g, None

    lgh = m[:, None] + lg_om[None, :] - lgf
    div = np.empty(n)
    for j in range(n):
        div[j] = c[j] * (float(w @ np.exp(big_l + lgh[j])) + math.exp(cm - x_end))
    cross = np.empty((n, n))
    for k in range(n):
        tail_r = math.exp(lg1m[k] - m[k] + cm - x_end)
        for j in range(n):
            cross[k, j] = c[k] * c[j] * (
                float(w @ np.exp(big_l + lgr[k] + lgh[j])) + tail_r)
        own = float(w @ np.exp(big_l + m[k] + lg_om - 2.0 * lgf[k]))
        cross[k, k] -= c[k] * (own + math.exp(-m[k] + cm - x_end))
    jac = (cross - np.outer(g, div)) / ival
    return ival, g, jac


def _boundary_rate(rho_work: np.ndarray, c_work: np.ndarray, q: float,
                   support, work_idx, *, tol: float,
                   max_iter: int = 120) -> RateDual:
    """Fenchel transform solved in boundary-layer coordinates.

    Levenberg-Marquardt on the gradient-match residual; the additive gauge
    of the tilt is a null direction of the Jacobian, which the damping
    absorbs. The returned value uses the virtual-reference form
    sum rho log(1-delta) - log q + log integral, exact for any reference at
    or above the tilt maximum.
    """
    m = np.log(np.maximum(1.0 - rho_work, 1e-300)) / c_work
    m = np.clip(m, -1e9, _BOUNDARY_CLIP)
    ival, g, jac = _boundary_eval(m, c_work, True)
    resid_vec = g - rho_work
    best = float(np.max(np.abs(resid_vec)))
    tau = 1e-3
    iterations = 0
    while best > tol and iterations < max_iter:
        iterations += 1
        jtj = jac.T @ jac
        rhs = -jac.T @ resid_vec
        damp = np.diag(jtj).copy()
        damp[damp <= 0.0] = max(float(damp.max()), 1e-300)
        accepted = False
        for _ in range(15):
            try:
                step = np.linalg.solve(jtj + tau * np.diag(damp), rhs)
            except np.linalg.LinAlgError:
                tau *= 10.0
                continue
            m_new = np.clip(m + step, -1e9, _BOUNDARY_CLIP)
            ival2, g2, jac2 = _boundary_eval(m_new, c_work, True)
            r2 = g2 - rho_work
            if float(np.max(np.abs(r2))) < best:
                m, ival, g, jac, resid_vec = m_new, ival2, g2, jac2, r2
                best = float(np.max(np.abs(r2)))
                tau = max(tau / 3.0, 1e-12)
                accepted = True
                break
            tau *= 10.0
        if not accepted:
            break
    drift = abs(float(g.sum()) - 1.0)
    if best > tol or drift > 1e-6:
        raise NumericError("boundary-layer dual solver did not converge",
                           {"residual": best, "gradient_drift": drift,
                            "iterations": iterations})
    lam_work = np.log1p(-np.exp(m))
    value = float(np.dot(rho_work, lam_work)) - math.log(q) + math.log(ival)
    if value < -1e-9 or value > -math.log(q) + 1e-9:
        raise NumericError("rate value outside its certified range",
                           {"value": value, "upper": -math.log(q)})
    tilt = _tilt_from_work(support, work_idx, lam_work - np.max(lam_work))
    return RateDual(value=max(value, 0.0), tilt=tilt,
                    residual=best, iterations=iterations)


def reinforced_rate(rho: ProbVector, nu: OffspringLaw, q: float,
                    quad: QuadratureSpec = DEFAULT_QUADRATURE, *,
                    tol: float = 1e-9, max_iter: int = 200,
                    tilt0: LogWeights | None = None) -> RateDual:
    """Rate function of lineage empirical measures, with its dual tilt.

    Solves grad log-mgf(tilt) = rho on the support of rho by damped Newton
    with a finite-difference Hessian, anchoring one coordinate at 0 to fix
    the additive gauge, and falling back to backtracked gradient steps when
    the Newton direction is unusable. Coordinates where rho vanishes get
    tilt -inf.
    """
    if rho.support != nu.support:
        raise SupportMismatchError(f"supports differ: {rho.support} vs {nu.support}")
    _check_q_open(q)
    support = rho.support
    rho_full = rho.weights
    work_idx = np.nonzero(rho_full > 0.0)[0]
    rho_work = rho_full[work_idx]
    anchor = int(np.argmax(rho_work))
    free = [i for i in range(len(work_idx)) if i != anchor]

    if tilt0 is not None and tilt0.support == support:
        lam_work = np.array(tilt0.values[work_idx], dtype=float)
        if not np.isfinite(lam_work).all():
            lam_work = np.log(rho_work / nu.weights[work_idx])
    else:
        # the memoryless transform maximizer, a good warm start for all q
        lam_work = np.log(rho_work / nu.weights[work_idx])
    lam_work -= lam_work[anchor]

    def grad_at(lw) -> np.ndarray:
        tilt = _tilt_from_work(support, work_idx, lw)
        _, g = _mgf_parts(tilt, nu, q, quad, want_grad=True)
        return g[work_idx]

    def value_at(lw) -> float:
        tilt = _tilt_from_work(support, work_idx, lw)
        log_integral, _ = _mgf_parts(tilt, nu, q, quad, want_grad=False)
        mgf = math.log(q) - log_integral
        return float(np.dot(rho_work, lw)) - mgf

    def newton_pass() -> tuple[np.ndarray, float, int]:
        lam = lam_work
        g = grad_at(lam)
        resid = float(np.max(np.abs(g - rho_work)))
        iterations = 0
        fd_step = 1e-5
        while resid > tol and iterations < max_iter:
            iterations += 1
            step = None
            if free:
                hess = np.empty((len(free), len(free)))
                for col, j in enumerate(free):
                    bumped = lam.copy()
                    bumped[j] += fd_step
                    gj = grad_at(bumped)
                    hess[:, col] = (gj[free] - g[free]) / fd_step
                try:
                    delta = np.linalg.solve(hess, -(g[free] - rho_work[free]))
                    if np.isfinite(delta).all():
                        norm = float(np.max(np.abs(delta)))
                        if norm > 10.0:
                            delta *= 10.0 / norm
                        step = delta
                except np.linalg.LinAlgError:
                    step = None
            else:
                break  # single-atom support: the gradient identity is exact

            improved = False
            if step is not None:
                alpha = 1.0
                for _ in range(25):
                    cand = lam.copy()
                    for pos, j in enumerate(free):
                        cand[j] += alpha * step[pos]
                    try:
                        g_c = grad_at(cand)
                    except NumericError:
                        alpha *= 0.5  # trial point broke the quadrature
                        continue
                    r_c = float(np.max(np.abs(g_c - rho_work)))
                    if r_c < resid * (1.0 - 1e-4 * alpha):
                        lam, g, resid = cand, g_c, r_c
                        improved = True
                        break
                    alpha *= 0.5
            if not improved:
                # gradient ascent on the concave dual objective
                base_val = value_at(lam)
                direction = rho_work - g
                alpha = 1.0
                for _ in range(40):
                    cand = lam + alpha * direction
                    cand -= cand[anchor]
                    try:
                        val = value_at(cand)
                        if val > base_val + 1e-14:
                            g_c = grad_at(cand)
                        else:
                            alpha *= 0.5
                            continue
                    except NumericError:
                        alpha *= 0.5
                        continue
                    lam, g = cand, g_c
                    resid = float(np.max(np.abs(g_c - rho_work)))
                    improved = True
                    break
                if not improved:
                    raise NumericError(
                        "dual solver stalled",
                        {"residual": resid, "iterations": iterations,
                         "tilt": lam.tolist()})

        if resid > tol:
            raise NumericError(
                "dual solver did not reach tolerance",
                {"residual": resid, "iterations": iterations,
                 "tilt": lam.tolist()})
        return lam, resid, iterations

    # the tilt-space pass cannot separate the near-tied optimum at large
    # memory, where the boundary-layer pass is exact; each covers for the
    # other in its weak regime
    c_work = nu.weights[work_idx] * (1.0 - q) / q
    boundary_first = q >= 0.6
    if boundary_first:
        try:
            return _boundary_rate(rho_work, c_work, q, support, work_idx,
                                  tol=tol)
        except NumericError:
            pass
    try:
        lam_work, resid, iterations = newton_pass()
    except NumericError as primary_err:
        if boundary_first:
            raise
        try:
            return _boundary_rate(rho_work, c_work, q, support, work_idx,
                                  tol=tol)
        except NumericError:
            raise primary_err from None

    lam_work = lam_work - np.max(lam_work)
    tilt = _tilt_from_work(support, work_idx, lam_work)
    log_integral, _ = _mgf_parts(tilt, nu, q, quad, want_grad=False)
    mgf = math.log(q) - log_integral
    value = pair(rho, tilt) - mgf
    if value < -1e-9 or value > -math.log(q) + 1e-9:
        raise NumericError("rate value outside its certified range",
                           {"value": value, "upper": -math.log(q)})
    return RateDual(value=max(value, 0.0), tilt=tilt,
                    residual=resid, iterations=iterations)


# ---------------------------------------------------------------------------
# derived quantities
# ---------------------------------------------------------------------------

def concentration_target(nu: OffspringLaw, q: float,
                         quad: QuadratureSpec = DEFAULT_QUADRATURE) -> ProbVector:
    """Limit law of the empirical lineage measure on the surviving tree.

    Memoryless case: the size-biased law. With memory: the gradient of the
    reinforced log-mgf at the log-degree tilt.
    """
    if math.isnan(q) or not (0.0 <= q < 1.0):
        raise ContractViolationError(f"memory parameter {q!r} outside [0, 1)")
    if q == 0.0:
        return size_biased(nu)
    return reinforced_log_mgf_grad(log_degree_weights(nu.support), nu, q, quad)


def growth_exponent(nu: OffspringLaw, q: float,
                    quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Exponential growth rate of expected generation sizes."""
    if math.isnan(q) or not (0.0 <= q < 1.0):
        raise ContractViolationError(f"memory parameter {q!r} outside [0, 1)")
    if q == 0.0:
        m = mean(nu)
        return -math.inf if m == 0.0 else math.log(m)
    return reinforced_log_mgf(log_degree_weights(nu.support), nu, q, quad)


# ---------------------------------------------------------------------------
# constrained minimization over a halfspace
# ---------------------------------------------------------------------------

def _project_simplex(x: np.ndarray) -> np.ndarray:
    u = np.sort(x)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, len(x) + 1)
    cond = u - css / idx > 0
    rho_i = idx[cond][-1]
    theta = css[cond][-1] / rho_i
    return np.maximum(x - theta, 0.0)


def _project_feasible(x: np.ndarray, w: np.ndarray, c: float,
                      iters: int = 200) -> np.ndarray:
    """Dykstra projection onto {simplex} intersect {<x,w> >= c}."""
    p = np.zeros_like(x)
    qcorr = np.zeros_like(x)
    y = x.copy()
    for _ in range(iters):
        z = _project_simplex(y + p)
        p = y + p - z
        gap = c - float(np.dot(z + qcorr, w))
        if gap > 0.0:
            y = z + qcorr + gap * w / float(np.dot(w, w))
        else:
            y = z + qcorr
        qcorr = z + qcorr - y
        if abs(gap) < 1e-14 and float(np.abs(z - y).max()) < 1e-14:
            break
    out = np.maximum(y, 0.0)
    return out / out.sum()


def min_rate_over_halfspace(nu: OffspringLaw, q: float, w, c: float,
                            quad: QuadratureSpec = DEFAULT_QUADRATURE, *,
                            max_iter: int = 300, tol: float = 1e-8):
    """Minimize the rate function over {rho : <rho, w> >= c}.

    Returns ``(minimizer, rate_value)``. The unconstrained minimum sits at
    nu itself, so the answer is nu when nu is feasible and otherwise found by
    projected gradient descent on the simplex-halfspace intersection, using
    the dual tilt as the gradient of the rate function.
    """
    _check_q_open(q)
    w = np.asarray(w, dtype=float)
    if w.shape != (len(nu.support),) or not np.isfinite(w).all():
        raise ContractViolationError("halfspace functional must be finite over the support")
    if float(np.max(w)) < c:
        from .errors import InfeasibleError
        raise InfeasibleError("halfspace does not meet the simplex")
    nu_vec = nu.as_prob_vector()
    if float(np.dot(nu_vec.weights, w)) >= c:
        return nu_vec, 0.0

    floor = 1e-10
    x = _project_feasible(nu_vec.weights.copy(), w, c)
    x = np.maximum(x, floor)
    x /= x.sum()
    dual = reinforced_rate(ProbVector(nu.support, x), nu, q, quad)
    value = dual.value
    step = 1.0
    for _ in range(max_iter):
        grad = dual.tilt.values.copy()
        grad[~np.isfinite(grad)] = np.min(grad[np.isfinite(grad)]) - 10.0
        grad -= grad.mean()
        moved = False
        while step > 1e-12:
            cand = _project_feasible(x - step * grad, w, c)
            cand = np.maximum(cand, floor)
            cand /= cand.sum()
            if float(np.abs(cand - x).max()) < 1e-14:
                break
            cand_dual = reinforced_rate(ProbVector(nu.support, cand), nu, q, quad,
                                        tilt0=dual.tilt)
            if cand_dual.value < value - 1e-14:
                x, dual, value = cand, cand_dual, cand_dual.value
                moved = True
                step *= 1.5
                break
            step *= 0.5
        if not moved:
            break
        if float(np.abs(grad).max()) * step < tol * 1e-2:
            break
    return ProbVector(nu.support, x), value
