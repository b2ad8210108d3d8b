"""Probability measures on finite sets of offspring counts.

Everything downstream works with four small immutable types:

* ``OffspringLaw``    reproduction law with strictly positive weights,
* ``ProbVector``      point on the simplex over a support (zeros allowed),
* ``EmpiricalMeasure`` integer histogram with its total,
* ``LogWeights``      exponential tilt vector with entries in [-inf, inf).

Extended-real conventions used throughout the package: ``log 0 = -inf``,
``exp(-inf) = 0`` and ``0 * log 0 = 0``. A pairing against log-degree weights
is ``-inf`` exactly when the measure puts mass at the atom 0. NaN is never a
sentinel; it is rejected at construction time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ContractViolationError,
    DegenerateLawError,
    SupportMismatchError,
)

_SUM_TOL = 1e-12


def _as_support(support) -> tuple[int, ...]:
    sup = tuple(int(k) for k in support)
    if len(sup) == 0:
        raise ContractViolationError("support must be non-empty")
    if any(k < 0 for k in sup):
        raise ContractViolationError("support atoms must be non-negative integers")
    if any(a >= b for a, b in zip(sup, sup[1:])):
        raise ContractViolationError("support atoms must be strictly increasing")
    return sup


def _as_weights(weights, n: int) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise ContractViolationError(f"expected {n} weights, got shape {w.shape}")
    if np.isnan(w).any():
        raise ContractViolationError("NaN weight")
    return w


def _freeze(obj, **fields):
    for name, value in fields.items():
        if isinstance(value, np.ndarray):
            value.setflags(write=False)
        object.__setattr__(obj, name, value)


@dataclass(frozen=True, eq=False)
class OffspringLaw:
    """Reproduction law on a finite subset of the non-negative integers.

    Atoms with zero weight are dropped at construction, so the stored weights
    are strictly positive and sum to one (drift up to 1e-12 is renormalized).
    """

    support: tuple[int, ...]
    weights: np.ndarray

    def __init__(self, support, weights):
        sup = _as_support(support)
        w = _as_weights(weights, len(sup))
        if (w < 0).any():
            raise ContractViolationError("offspring weights must be non-negative")
        keep = w > 0.0
        if not keep.any():
            raise ContractViolationError("offspring law has no positive weight")
        sup = tuple(k for k, m in zip(sup, keep) if m)
        w = w[keep]
        total = w.sum()
        if abs(total - 1.0) > _SUM_TOL:
            raise ContractViolationError(f"offspring weights sum to {total!r}, not 1")
        _freeze(self, support=sup, weights=w / total)

    def __repr__(self):
        body = ", ".join(f"{k}: {p:.6g}" for k, p in zip(self.support, self.weights))
        return f"OffspringLaw({{{body}}})"

    def prob(self, k: int) -> float:
        try:
            return float(self.weights[self.support.index(k)])
        except ValueError:
            return 0.0

    def mean(self) -> float:
        return float(np.dot(self.support, self.weights))

    def as_prob_vector(self) -> "ProbVector":
        return ProbVector(self.support, self.weights)

    @property
    def singleton_support(self) -> bool:
        """True when the law is a single atom (degenerate but accepted)."""
        return len(self.support) == 1

    def as_dict(self) -> dict[int, float]:
        return {k: float(p) for k, p in zip(self.support, self.weights)}


@dataclass(frozen=True, eq=False)
class ProbVector:
    """Probability vector over a fixed support; zero entries are allowed."""

    support: tuple[int, ...]
    weights: np.ndarray

    def __init__(self, support, weights):
        sup = _as_support(support)
        w = _as_weights(weights, len(sup))
        if (w < 0).any():
            if (w < -_SUM_TOL).any():
                raise ContractViolationError("probability weights must be non-negative")
            w = np.maximum(w, 0.0)
        total = w.sum()
        if abs(total - 1.0) > _SUM_TOL:
            raise ContractViolationError(f"probability weights sum to {total!r}, not 1")
        _freeze(self, support=sup, weights=w / total)

    def __repr__(self):
        body = ", ".join(f"{k}: {p:.6g}" for k, p in zip(self.support, self.weights))
        return f"ProbVector({{{body}}})"

    def prob(self, k: int) -> float:
        try:
            return float(self.weights[self.support.index(k)])
        except ValueError:
            return 0.0

    def mean(self) -> float:
        return float(np.dot(self.support, self.weights))

    def restricted_support(self) -> tuple[int, ...]:
        """Atoms carrying strictly positive mass."""
        return tuple(k for k, p in zip(self.support, self.weights) if p > 0.0)

    def as_dict(self) -> dict[int, float]:
        return {k: float(p) for k, p in zip(self.support, self.weights)}


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Integer histogram over a support, together with its total."""

    support: tuple[int, ...]
    counts: np.ndarray

    def __init__(self, support, counts):
        sup = _as_support(support)
        c = np.asarray(counts)
        if c.shape != (len(sup),):
            raise ContractViolationError(f"expected {len(sup)} counts, got shape {c.shape}")
        if not np.issubdtype(c.dtype, np.integer):
            cf = np.asarray(counts, dtype=float)
            if np.isnan(cf).any() or (cf != np.round(cf)).any():
                raise ContractViolationError("counts must be integers")
            c = cf.astype(np.int64)
        if (c < 0).any():
            raise ContractViolationError("counts must be non-negative")
        _freeze(self, support=sup, counts=c.astype(np.int64))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def normalize(self) -> ProbVector:
        total = self.total
        if total == 0:
            raise ContractViolationError("cannot normalize an empty histogram")
        return ProbVector(self.support, self.counts / total)

    def __repr__(self):
        body = ", ".join(f"{k}: {c}" for k, c in zip(self.support, self.counts))
        return f"EmpiricalMeasure({{{body}}}, total={self.total})"


@dataclass(frozen=True, eq=False)
class LogWeights:
    """Tilt vector with entries in [-inf, inf).

    The all ``-inf`` vector is accepted as an explicit sentinel; otherwise at
    least one entry is finite. ``+inf`` and NaN are rejected.
    """

    support: tuple[int, ...]
    values: np.ndarray

    def __init__(self, support, values):
        sup = _as_support(support)
        v = np.asarray(values, dtype=float)
        if v.shape != (len(sup),):
            raise ContractViolationError(f"expected {len(sup)} values, got shape {v.shape}")
        if np.isnan(v).any():
            raise ContractViolationError("NaN tilt value")
        if (v == np.inf).any():
            raise ContractViolationError("+inf tilt value")
        _freeze(self, support=sup, values=v)

    @property
    def all_neg_inf(self) -> bool:
        return bool((self.values == -np.inf).all())

    def finite_mask(self) -> np.ndarray:
        return np.isfinite(self.values)

    def shifted(self, c: float) -> "LogWeights":
        return LogWeights(self.support, self.values + c)

    def __repr__(self):
        body = ", ".join(f"{k}: {x:.6g}" for k, x in zip(self.support, self.values))
        return f"LogWeights({{{body}}})"


# ---------------------------------------------------------------------------
# constructors and alignment helpers
# ---------------------------------------------------------------------------

def log_degree_weights(support) -> LogWeights:
    """The vector k -> ln k on the given support, with ln 0 = -inf."""
    sup = _as_support(support)
    vals = np.array([-np.inf if k == 0 else math.log(k) for k in sup])
    return LogWeights(sup, vals)


def align(*measures) -> tuple[ProbVector, ...]:
    """Promote laws and probability vectors to a common union support."""
    if not measures:
        raise ContractViolationError("align needs at least one measure")
    union: set[int] = set()
    for m in measures:
        union.update(m.support)
    sup = tuple(sorted(union))
    out = []
    for m in measures:
        w = np.zeros(len(sup))
        for k, p in zip(m.support, m.weights):
            w[sup.index(k)] = p
        out.append(ProbVector(sup, w))
    return tuple(out)


def _check_same_support(a, b):
    if a.support != b.support:
        raise SupportMismatchError(f"supports differ: {a.support} vs {b.support}")


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def relative_entropy(rho: ProbVector, sigma: ProbVector) -> float:
    """Relative entropy sum rho(k) log(rho(k)/sigma(k)), in [0, inf].

    Finite iff rho is absolutely continuous with respect to sigma; the value
    is +inf when rho charges an atom where sigma vanishes.
    """
    _check_same_support(rho, sigma)
    r, s = rho.weights, sigma.weights
    mask = r > 0.0
    if (s[mask] == 0.0).any():
        return math.inf
    return float(np.sum(r[mask] * np.log(r[mask] / s[mask])))


def pair(rho: ProbVector, lam: LogWeights) -> float:
    """Pairing sum rho(k) lam(k) with the convention 0 * (-inf) = 0."""
    _check_same_support(rho, lam)
    mask = rho.weights > 0.0
    vals = lam.values[mask]
    if (vals == -np.inf).any():
        return -math.inf
    return float(np.dot(rho.weights[mask], vals))


def size_biased(nu: OffspringLaw) -> ProbVector:
    """Size-biased law k -> k nu(k) / mean(nu); undefined when mean is 0."""
    m = nu.mean()
    if m == 0.0:
        raise DegenerateLawError("size bias undefined: law has zero mean")
    return ProbVector(nu.support, np.asarray(nu.support, dtype=float) * nu.weights / m)


def mean(measure) -> float:
    """Mean offspring number of a law or probability vector."""
    return float(np.dot(measure.support, measure.weights))


def mix(t: float, rho: ProbVector, sigma: ProbVector) -> ProbVector:
    """Convex combination t*rho + (1-t)*sigma; t must lie in [0, 1]."""
    if math.isnan(t) or not (0.0 <= t <= 1.0):
        raise ContractViolationError(f"mixing weight {t!r} outside [0, 1]")
    _check_same_support(rho, sigma)
    return ProbVector(rho.support, t * rho.weights + (1.0 - t) * sigma.weights)


def linf_distance(rho: ProbVector, sigma: ProbVector) -> float:
    """Sup-norm distance between two probability vectors on one support."""
    _check_same_support(rho, sigma)
    return float(np.max(np.abs(rho.weights - sigma.weights)))


# ---------------------------------------------------------------------------
# JSON reproduction-law format (shared with the command line tools)
# ---------------------------------------------------------------------------

def offspring_law_from_json(obj) -> OffspringLaw:
    """Build a law from ``{"support": [...], "probs": [...]}``.

    Unknown fields are rejected so that config typos fail loudly.
    """
    if not isinstance(obj, dict):
        raise ContractViolationError("reproduction law JSON must be an object")
    extra = set(obj) - {"support", "probs"}
    if extra:
        raise ContractViolationError(f"unknown reproduction-law fields: {sorted(extra)}")
    if "support" not in obj or "probs" not in obj:
        raise ContractViolationError('reproduction law needs "support" and "probs"')
    support, probs = obj["support"], obj["probs"]
    if not isinstance(support, list) or not isinstance(probs, list):
        raise ContractViolationError('"support" and "probs" must be lists')
    if len(support) != len(probs):
        raise ContractViolationError('"support" and "probs" have different lengths')
    return OffspringLaw(support, probs)


def load_offspring_law(path) -> OffspringLaw:
    with open(path, "r", encoding="utf8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ContractViolationError(f"invalid JSON in {path}: {exc}") from exc
    return offspring_law_from_json(obj)


def offspring_law_to_json(nu: OffspringLaw) -> dict:
    return {"support": list(nu.support), "probs": [float(p) for p in nu.weights]}
