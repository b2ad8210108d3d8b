"""Monte Carlo engines and exact enumeration for reinforced branching trees.

Trees are never stored explicitly. A generation is a flat matrix with one row
per living individual holding the histogram of out-degrees along its ancestral
line, which is the only state the reinforcement mechanism needs: a memory draw
samples from that histogram, a fresh draw samples from the base law, and each
child inherits the parent's histogram plus the parent's own draw.

The same ancestral mechanism viewed along a single lineage is a Polya type
urn, simulated here both one run at a time and as vectorized batches. Batches
power the many-to-one estimator (lineage draws weighted by the product of
their values estimate expected vertex counts), rejection-based conditioning,
and the marginal checks. Exact small-depth expectations come from a dynamic
program over draw histograms, giving an independent oracle with no randomness.

A separate two-color urn with an auxiliary ball type tracks the spine
construction used in persistence proofs, and a two-type branching benchmark
provides the weak-persistence comparison model.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .classify import validate_activities
from .errors import ContractViolationError, NumericError, StatisticalFailureError
from .measures import EmpiricalMeasure, OffspringLaw, ProbVector
from .rng import RngStream

DEFAULT_POP_CAP = 10_000_000

# replicas are processed in fixed-size chunks; the value is part of the
# deterministic draw schedule and must never depend on thread count
_CHUNK = 1024


@dataclass(frozen=True)
class LineageState:
    """Ancestral out-degree histogram of one individual."""

    counts: EmpiricalMeasure
    generation: int

    def __post_init__(self):
        if self.generation < 0:
            raise ContractViolationError("generation must be non-negative")
        if self.counts.total != self.generation:
            raise ContractViolationError(
                f"ancestral counts total {self.counts.total} != generation {self.generation}")
        for k, c in zip(self.counts.support, self.counts.counts):
            if k == 0 and c > 0:
                raise ContractViolationError("an ancestor with no children is impossible")


@dataclass(frozen=True)
class GenerationReport:
    """Population and ancestral-histogram census of one generation."""

    generation: int
    population: int
    support: tuple[int, ...]
    histogram: dict[tuple[int, ...], int]
    survived: bool
    truncated: bool

    def __post_init__(self):
        mass = sum(self.histogram.values())
        if mass != self.population:
            raise ContractViolationError(
                f"histogram mass {mass} != population {self.population}")
        zero_col = self.support.index(0) if 0 in self.support else None
        for key in self.histogram:
            if len(key) != len(self.support):
                raise ContractViolationError("histogram key width mismatch")
            if sum(key) != self.generation:
                raise ContractViolationError("histogram key mass != generation")
            if zero_col is not None and key[zero_col] > 0:
                raise ContractViolationError("ancestral histogram has mass on atom 0")


@dataclass(frozen=True)
class TwoTypeGeneration:
    """Per-type and merged census of one two-type generation."""

    generation: int
    type1: GenerationReport
    type2: GenerationReport
    merged: GenerationReport


@dataclass(frozen=True)
class TreeCampaign:
    """Population trajectories of a replica campaign.

    ``populations[r, g]`` is the size of generation g in replica r. Entries in
    columns past a replica's truncation generation are 0 and carry no meaning;
    ``truncated_at[r]`` is that generation, or -1 if the cap was never hit.
    """

    support: tuple[int, ...]
    populations: np.ndarray
    truncated_at: np.ndarray
    histograms: tuple[dict[tuple[int, tuple[int, ...]], int], ...] | None


@dataclass(frozen=True)
class SpineUrnState:
    """Ball counts and activities of the spine urn; the last color is the
    auxiliary one."""

    support: tuple[int, ...]
    counts: np.ndarray
    activities: np.ndarray
    steps: int

    def __post_init__(self):
        if (self.counts < 0).any():
            raise ContractViolationError("ball counts must be non-negative")
        total = int(self.counts.sum())
        if total != 2 + 2 * self.steps:
            raise ContractViolationError(
                f"ball total {total} != 2 + 2*{self.steps}")


def _check_q(q: float, *, allow_zero: bool):
    lo_ok = q >= 0.0 if allow_zero else q > 0.0
    if math.isnan(q) or not lo_ok or q >= 1.0:
        dom = "[0, 1)" if allow_zero else "(0, 1)"
        raise ContractViolationError(f"memory parameter {q!r} outside {dom}")


def _fresh_indices(cum_nu: np.ndarray, u: np.ndarray) -> np.ndarray:
    j = np.searchsorted(cum_nu, u, side="right")
    return np.minimum(j, len(cum_nu) - 1).astype(np.int64)


def _memory_indices(rows: np.ndarray, total: float, u: np.ndarray) -> np.ndarray:
    cs = np.cumsum(rows, axis=1)
    return (cs <= (u * total)[:, None]).sum(axis=1)


def _tree_step(hist: np.ndarray, rid: np.ndarray, gen: int, q: float,
               cum_nu: np.ndarray, support_arr: np.ndarray,
               g_rng: np.random.Generator):
    """Expand one generation: every row draws, then spawns that many copies."""
    n = hist.shape[0]
    u_mode = g_rng.random(n)
    u_val = g_rng.random(n)
    j = _fresh_indices(cum_nu, u_val)
    if q > 0.0 and gen > 0:
        mem = u_mode < q
        if mem.any():
            j[mem] = _memory_indices(hist[mem], float(gen), u_val[mem])
    child = hist.copy()
    child[np.arange(n), j] += 1
    reps = support_arr[j]
    new_hist = np.repeat(child, reps, axis=0)
    new_rid = np.repeat(rid, reps)
    if __debug__ and new_hist.shape[0]:
        assert int(new_hist.sum(axis=1).max()) == gen + 1
        assert int(new_hist.sum(axis=1).min()) == gen + 1
    return new_hist, new_rid


def _histogram_of(rows: np.ndarray) -> dict[tuple[int, ...], int]:
    if rows.shape[0] == 0:
        return {}
    uniq, cnt = np.unique(rows, axis=0, return_counts=True)
    return {tuple(int(x) for x in u): int(c) for u, c in zip(uniq, cnt)}


def simulate_reinforced_tree(nu: OffspringLaw, q: float, n_max: int,
                             rng: RngStream, *,
                             pop_cap: int = DEFAULT_POP_CAP) -> list[GenerationReport]:
    """One reinforced tree, reported generation by generation.

    The root draws from nu. Every later individual draws from its ancestral
    out-degree histogram with probability q and from nu otherwise, then
    produces that many children, each inheriting the updated histogram. The
    run stops at extinction, at ``n_max``, or when a generation reaches
    ``pop_cap`` (flagged as truncated, not an error).
    """
    _check_q(q, allow_zero=True)
    if n_max < 1:
        raise ContractViolationError("n_max must be at least 1")
    if pop_cap < 1:
        raise ContractViolationError("pop_cap must be at least 1")
    support = nu.support
    k = len(support)
    cum_nu = np.cumsum(nu.weights)
    support_arr = np.asarray(support, dtype=np.int64)

    hist = np.zeros((1, k), dtype=np.int32)
    rid = np.zeros(1, dtype=np.int64)
    reports = [GenerationReport(0, 1, support, {(0,) * k: 1}, True, 1 >= pop_cap)]
    if reports[0].truncated:
        return reports
    for g in range(n_max):
        g_rng = rng.generator("tree", g)
        hist, rid = _tree_step(hist, rid, g, q, cum_nu, support_arr, g_rng)
        pop = hist.shape[0]
        truncated = pop >= pop_cap
        reports.append(GenerationReport(g + 1, pop, support, _histogram_of(hist),
                                        pop > 0, truncated))
        if pop == 0 or truncated:
            break
    return reports


def simulate_tree_campaign(nu: OffspringLaw, q: float, n_max: int,
                           replicas: int, rng: RngStream, *,
                           pop_cap: int = DEFAULT_POP_CAP,
                           keep_histograms: bool = False) -> TreeCampaign:
    """Replica campaign of reinforced trees, chunk-batched for throughput.

    With q = 0 and no histogram request the per-individual state is not
    needed, so generations advance by one multinomial draw per replica.
    """
    _check_q(q, allow_zero=True)
    if n_max < 1 or replicas < 1 or pop_cap < 1:
        raise ContractViolationError("n_max, replicas and pop_cap must be >= 1")
    support = nu.support
    k = len(support)
    support_arr = np.asarray(support, dtype=np.int64)

    if q == 0.0 and not keep_histograms:
        pops = np.zeros((replicas, n_max + 1), dtype=np.int64)
        pops[:, 0] = 1
        trunc_at = np.full(replicas, -1, dtype=np.int64)
        active = np.ones(replicas, dtype=bool)
        if pop_cap <= 1:
            trunc_at[:] = 0
            active[:] = False
        for g in range(n_max):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            g_rng = rng.generator("tree-iid", g)
            draws = g_rng.multinomial(pops[idx, g], nu.weights)
            z = draws @ support_arr
            pops[idx, g + 1] = z
            over = z >= pop_cap
            trunc_at[idx[over]] = g + 1
            active[idx] = (z > 0) & ~over
        return TreeCampaign(support, pops, trunc_at, None)

    cum_nu = np.cumsum(nu.weights)
    pop_parts, trunc_parts = [], []
    hist_acc: list[dict] | None = [dict() for _ in range(n_max + 1)] if keep_histograms else None
    for chunk_idx, start in enumerate(range(0, replicas, _CHUNK)):
        rc = min(_CHUNK, replicas - start)
        stream = rng.child(chunk_idx)
        hist = np.zeros((rc, k), dtype=np.int32)
        rid = np.arange(rc, dtype=np.int64)
        pops = np.zeros((rc, n_max + 1), dtype=np.int64)
        pops[:, 0] = 1
        trunc_at = np.full(rc, -1, dtype=np.int64)
        if hist_acc is not None:
            for r in range(rc):
                hist_acc[0][(start + r, (0,) * k)] = 1
        if pop_cap <= 1:
            trunc_at[:] = 0
            hist = hist[:0]
            rid = rid[:0]
        for g in range(n_max):
            if hist.shape[0] == 0:
                break
            g_rng = stream.generator("tree", g)
            hist, rid = _tree_step(hist, rid, g, q, cum_nu, support_arr, g_rng)
            z = np.bincount(rid, minlength=rc)
            live = trunc_at < 0
            pops[live, g + 1] = z[live]
            if hist_acc is not None and hist.shape[0]:
                tagged = np.column_stack([rid, hist])
                uniq, cnt = np.unique(tagged, axis=0, return_counts=True)
                layer = hist_acc[g + 1]
                for u, c in zip(uniq, cnt):
                    key = (start + int(u[0]), tuple(int(x) for x in u[1:]))
                    layer[key] = int(c)
            over = live & (z >= pop_cap)
            if over.any():
                trunc_at[over] = g + 1
                keep = ~over[rid]
                hist, rid = hist[keep], rid[keep]
        pop_parts.append(pops)
        trunc_parts.append(trunc_at)
    populations = np.vstack(pop_parts)
    truncated_at = np.concatenate(trunc_parts)
    populations.setflags(write=False)
    truncated_at.setflags(write=False)
    hist_out = tuple(hist_acc) if hist_acc is not None else None
    return TreeCampaign(support, populations, truncated_at, hist_out)


def simulate_reinforced_urn(nu: OffspringLaw, q: float, n: int,
                            rng: RngStream) -> tuple[np.ndarray, EmpiricalMeasure]:
    """One reinforced draw sequence of length n, with its final census.

    The first draw follows nu; each later draw repeats a uniformly chosen
    earlier one with probability q, else follows nu. Every draw has marginal
    law nu.
    """
    _check_q(q, allow_zero=False)
    if n < 1:
        raise ContractViolationError("n must be at least 1")
    support = nu.support
    k = len(support)
    g_rng = rng.generator("urn")
    u_mode = g_rng.random(n)
    u_val = g_rng.random(n)
    cum_nu = nu.weights.cumsum().tolist()
    counts = [0] * k
    seq = np.empty(n, dtype=np.int64)
    for i in range(n):
        if i > 0 and u_mode[i] < q:
            target = u_val[i] * i
            acc = 0
            j = k - 1
            for idx in range(k):
                acc += counts[idx]
                if target < acc:
                    j = idx
                    break
        else:
            u = u_val[i]
            j = k - 1
            for idx in range(k):
                if u < cum_nu[idx]:
                    j = idx
                    break
        counts[j] += 1
        seq[i] = support[j]
    return seq, EmpiricalMeasure(support, counts)


def _urn_batch(nu: OffspringLaw, q: float, n: int, replicas: int,
               g_rng: np.random.Generator, *, want_weights: bool):
    """Vectorized reinforced sequences: counts per replica, and optionally the
    running product of drawn values (0 once a 0 is drawn)."""
    k = len(nu.support)
    cum_nu = np.cumsum(nu.weights)
    support_arr = np.asarray(nu.support, dtype=np.float64)
    counts = np.zeros((replicas, k), dtype=np.int64)
    weights = np.ones(replicas) if want_weights else None
    rows = np.arange(replicas)
    for i in range(n):
        u_mode = g_rng.random(replicas)
        u_val = g_rng.random(replicas)
        j = _fresh_indices(cum_nu, u_val)
        if q > 0.0 and i > 0:
            mem = u_mode < q
            if mem.any():
                j[mem] = _memory_indices(counts[mem], float(i), u_val[mem])
        if weights is not None:
            weights *= support_arr[j]
        counts[rows, j] += 1
    return counts, weights


def many_to_one_estimate(nu: OffspringLaw, q: float, n: int, replicas: int,
                         target, rng: RngStream) -> tuple[float, float]:
    """Unbiased estimate of the expected number of generation-n individuals
    whose ancestral frequency vector satisfies ``target``.

    Each replica runs one reinforced sequence; its weight is the product of
    the drawn values (0 if any draw is 0) times the indicator that the
    empirical frequency vector lies in the target set. ``target`` is a
    predicate on ProbVectors, or None for the whole simplex. Returns the
    sample mean and its standard error.
    """
    _check_q(q, allow_zero=True)
    if n < 1:
        raise ContractViolationError("n must be at least 1")
    if replicas < 2:
        raise ContractViolationError("need at least 2 replicas for a standard error")
    counts, weights = _urn_batch(nu, q, n, replicas,
                                 rng.generator("many-to-one"), want_weights=True)
    if target is not None:
        alive = np.flatnonzero(weights > 0.0)
        if alive.size:
            uniq, inv = np.unique(counts[alive], axis=0, return_inverse=True)
            keep = np.fromiter(
                (bool(target(ProbVector(nu.support, u / n))) for u in uniq),
                dtype=bool, count=len(uniq))
            drop = alive[~keep[inv]]
            weights[drop] = 0.0
    estimate = float(weights.mean())
    stderr = float(weights.std(ddof=1) / math.sqrt(replicas))
    return estimate, stderr


def enumerate_expected_counts(nu: OffspringLaw, q: float, n: int) -> dict[tuple[int, ...], float]:
    """Exact expected census of generation n, resolved by draw histogram.

    Dynamic program over prefix histograms using the sequential draw rule
    P(next = k | counts) = q * count_k / i + (1 - q) nu(k), with nu alone at
    the first step. Continuations after a 0 carry zero weight, so only the
    all-positive histograms accumulate mass; every histogram of total n over
    the support appears as a key, the impossible ones with value 0.
    """
    _check_q(q, allow_zero=True)
    if n < 1:
        raise ContractViolationError("n must be at least 1")
    if len(nu.support) ** n > 10_000_000:
        raise ContractViolationError(
            f"{len(nu.support)}^{n} degree sequences exceed the enumeration guard")
    support = nu.support
    k = len(support)
    nu_w = nu.weights

    states: dict[tuple[int, ...], float] = {(0,) * k: 1.0}
    for i in range(n):
        nxt: dict[tuple[int, ...], float] = {}
        for c, p in states.items():
            for idx in range(k):
                if support[idx] == 0:
                    continue
                step = nu_w[idx] if i == 0 else q * c[idx] / i + (1.0 - q) * nu_w[idx]
                if step == 0.0:
                    continue
                c2 = c[:idx] + (c[idx] + 1,) + c[idx + 1:]
                nxt[c2] = nxt.get(c2, 0.0) + p * step
        states = nxt

    def compositions(total, parts):
        if parts == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in compositions(total - first, parts - 1):
                yield (first,) + rest

    result: dict[tuple[int, ...], float] = {}
    for c in compositions(n, k):
        weight = 1.0
        for idx in range(k):
            weight *= float(support[idx]) ** c[idx]
        result[c] = states.get(c, 0.0) * weight
    return result


def simulate_spine_urn(nu: OffspringLaw, q: float, a, n: int,
                       rng: RngStream) -> tuple[ProbVector, SpineUrnState]:
    """Two-activity urn encoding the spine dynamics for activity vector a.

    Balls carry a support color or the auxiliary color (stored last). A draw
    picks a ball proportionally to count times activity, where a color-k ball
    has activity q a(k) and the auxiliary ball (1-q) sum a(j) nu(j). A color
    draw adds one ball of the same color plus one auxiliary; an auxiliary draw
    adds one auxiliary plus one color sampled proportionally to a(k) nu(k).
    Returns the empirical frequencies of the n color additions and the final
    state.
    """
    _check_q(q, allow_zero=False)
    if n < 1:
        raise ContractViolationError("n must be at least 1")
    a = validate_activities(a, nu, q, tol=1e-9)
    support = nu.support
    k = len(support)
    act = np.empty(k + 1)
    act[:k] = q * a
    act[k] = (1.0 - q) * float(np.dot(a, nu.weights))
    star_pick = np.asarray(a * nu.weights, dtype=float)
    if star_pick.sum() <= 0.0:
        raise ContractViolationError("all activities vanish, the urn cannot move")
    cum_star = (star_pick / star_pick.sum()).cumsum().tolist()
    cum_nu = nu.weights.cumsum().tolist()

    g_init = rng.generator("spine-init")
    u0 = float(g_init.random())
    first = k - 1
    for idx in range(k):
        if u0 < cum_nu[idx]:
            first = idx
            break
    counts = [0] * (k + 1)
    counts[first] = 1
    counts[k] = 1

    g_rng = rng.generator("spine")
    u_pick = g_rng.random(n)
    u_color = g_rng.random(n)
    act_l = act.tolist()
    weights = [counts[c] * act_l[c] for c in range(k + 1)]
    total_w = sum(weights)
    tally = [0] * k
    for i in range(n):
        t = u_pick[i] * total_w
        acc = 0.0
        picked = k
        for c in range(k + 1):
            acc += weights[c]
            if t < acc:
                picked = c
                break
        if picked < k:
            added = picked
        else:
            u = u_color[i]
            added = k - 1
            for idx in range(k):
                if u < cum_star[idx]:
                    added = idx
                    break
        counts[added] += 1
        counts[k] += 1
        weights[added] += act_l[added]
        weights[k] += act_l[k]
        total_w += act_l[added] + act_l[k]
        tally[added] += 1
    freqs = ProbVector(support, np.asarray(tally, dtype=float) / n)
    state = SpineUrnState(support, np.asarray(counts, dtype=np.int64),
                          act.copy(), n)
    return freqs, state


@dataclass(frozen=True)
class ReplacementSpectrum:
    """Activity-weighted replacement matrix of the spine urn with its leading
    left spectral pair; the auxiliary color is the last row and column."""

    support: tuple[int, ...]
    matrix: np.ndarray
    eigenvalue: float
    left_vector: np.ndarray
    support_distribution: ProbVector
    iterations: int


def replacement_matrix(nu: OffspringLaw, q: float, a, *,
                       tol: float = 1e-13,
                       max_iter: int = 200_000) -> ReplacementSpectrum:
    """Replacement matrix of the spine urn and its leading left eigenvector.

    Entry (i, j) is the activity of color i times the expected number of j
    balls added on an i draw. Under the admissibility constraint the leading
    eigenvalue is 1 and the left eigenvector, normalized on the support
    colors, is the stationary color frequency. Computed by power iteration.
    """
    _check_q(q, allow_zero=False)
    a = validate_activities(a, nu, q, tol=1e-8)
    pos = [idx for idx, kk in enumerate(nu.support) if kk != 0]
    sup = tuple(nu.support[idx] for idx in pos)
    m = len(pos) + 1
    mat = np.zeros((m, m))
    for r, idx in enumerate(pos):
        mat[r, r] = q * a[idx]
        mat[r, -1] = q * a[idx]
    for ccol, idx in enumerate(pos):
        mat[-1, ccol] = (1.0 - q) * a[idx] * nu.weights[idx]
    mat[-1, -1] = (1.0 - q) * float(np.dot(a, nu.weights))

    v = np.full(m, 1.0 / m)
    lam = 0.0
    for it in range(1, max_iter + 1):
        w = v @ mat
        lam = float(w.sum())
        if lam <= 0.0:
            raise NumericError("power iteration collapsed",
                               diagnostics={"iteration": it})
        w /= lam
        if float(np.max(np.abs(w - v))) < tol:
            v = w
            break
        v = w
    else:
        raise NumericError("power iteration did not converge",
                           diagnostics={"iterations": max_iter,
                                        "last_delta": float(np.max(np.abs(w - v)))})
    on_sup = v[:-1]
    dist = ProbVector(sup, on_sup / on_sup.sum())
    mat.setflags(write=False)
    vv = v.copy()
    vv.setflags(write=False)
    return ReplacementSpectrum(sup, mat, lam, vv, dist, it)


def simulate_two_type(nu: OffspringLaw, nu_prime: OffspringLaw, n_max: int,
                      rng: RngStream, *,
                      pop_cap: int = DEFAULT_POP_CAP) -> list[TwoTypeGeneration]:
    """Two-type benchmark tree, reported per type and merged.

    Type-1 individuals beget a nu-distributed number of type-1 children plus
    exactly one type-2 child, so their recorded out-degree is the draw plus
    one; type-2 individuals beget a nu_prime-distributed number of type-2
    children. Ancestral histograms live on the union of the shifted type-1
    degrees and the type-2 degrees.
    """
    if n_max < 1 or pop_cap < 1:
        raise ContractViolationError("n_max and pop_cap must be >= 1")
    if not (nu.mean() > 1.0 > nu_prime.mean()):
        warnings.warn("two-type regime expects mean(nu) > 1 > mean(nu_prime)",
                      RuntimeWarning, stacklevel=2)
    merged_support = tuple(sorted({kk + 1 for kk in nu.support} | set(nu_prime.support)))
    m = len(merged_support)
    col_of = {kk: idx for idx, kk in enumerate(merged_support)}
    col1 = np.asarray([col_of[kk + 1] for kk in nu.support], dtype=np.int64)
    col2 = np.asarray([col_of[kk] for kk in nu_prime.support], dtype=np.int64)
    kids1 = np.asarray(nu.support, dtype=np.int64)
    kids2 = np.asarray(nu_prime.support, dtype=np.int64)
    cum1 = np.cumsum(nu.weights)
    cum2 = np.cumsum(nu_prime.weights)

    def census(gen, hist, typ, truncated):
        rows1, rows2 = hist[typ], hist[~typ]
        pop = hist.shape[0]
        return TwoTypeGeneration(
            gen,
            GenerationReport(gen, rows1.shape[0], merged_support,
                             _histogram_of(rows1), rows1.shape[0] > 0, truncated),
            GenerationReport(gen, rows2.shape[0], merged_support,
                             _histogram_of(rows2), rows2.shape[0] > 0, truncated),
            GenerationReport(gen, pop, merged_support,
                             _histogram_of(hist), pop > 0, truncated))

    hist = np.zeros((1, m), dtype=np.int32)
    typ = np.ones(1, dtype=bool)
    out = [census(0, hist, typ, 1 >= pop_cap)]
    if out[0].merged.truncated:
        return out
    for g in range(n_max):
        n = hist.shape[0]
        if n == 0:
            break
        g_rng = rng.generator("two-type", g)
        u = g_rng.random(n)
        j = np.empty(n, dtype=np.int64)
        j[typ] = _fresh_indices(cum1, u[typ])
        j[~typ] = _fresh_indices(cum2, u[~typ])
        col = np.where(typ, col1[np.minimum(j, len(col1) - 1)],
                       col2[np.minimum(j, len(col2) - 1)])
        own_kids = np.where(typ, kids1[np.minimum(j, len(kids1) - 1)],
                            kids2[np.minimum(j, len(kids2) - 1)])
        reps = own_kids + typ.astype(np.int64)
        child = hist.copy()
        child[np.arange(n), col] += 1
        hist = np.repeat(child, reps, axis=0)
        new_typ = np.repeat(typ, reps)
        ends = np.cumsum(reps)
        last_of_type1 = ends[typ] - 1
        new_typ[last_of_type1] = False
        typ = new_typ
        pop = hist.shape[0]
        truncated = pop >= pop_cap
        out.append(census(g + 1, hist, typ, truncated))
        if pop == 0 or truncated:
            break
    return out


def gibbs_conditional_estimate(nu: OffspringLaw, q: float, n: int, w, c: float,
                               replicas: int, rng: RngStream) -> tuple[ProbVector, float]:
    """Mean draw frequency of reinforced sequences conditioned on a halfspace.

    Rejection sampling: run ``replicas`` reinforced sequences of length n and
    keep those whose empirical frequency vector rho satisfies <rho, w> >= c.
    Returns the conditional mean vector and the acceptance rate. Raises a
    statistical failure with diagnostics if nothing is accepted.
    """
    _check_q(q, allow_zero=True)
    if n < 1 or replicas < 1:
        raise ContractViolationError("n and replicas must be >= 1")
    w_arr = np.asarray(w, dtype=float)
    if w_arr.shape != (len(nu.support),):
        raise ContractViolationError(
            f"constraint vector must have length {len(nu.support)}")
    counts, _ = _urn_batch(nu, q, n, replicas, rng.generator("gibbs"),
                           want_weights=False)
    scores = counts @ w_arr / n
    accept = scores >= c
    hits = int(accept.sum())
    if hits == 0:
        raise StatisticalFailureError(
            "no replica satisfied the halfspace constraint",
            diagnostics={"replicas": replicas, "accepted": 0,
                         "threshold": float(c),
                         "best_score": float(scores.max())})
    mean = counts[accept].mean(axis=0) / n
    return ProbVector(nu.support, mean), hits / replicas
