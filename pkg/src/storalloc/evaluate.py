"""Exact and Monte-Carlo evaluation of Pr[w . X >= theta].

Exact evaluation is #P-hard in general, so two bounded exact paths are
provided:

  * enumeration over outcomes for n <= exact_eval_max_n, run as a pruned
    DFS with memoization on the partial weight sum;
  * a grouping path for vectors with few distinct weight values (uniform
    splits, granular tails): coordinates sharing a weight collapse into a
    success-count variable with a Poisson-binomial law, shrinking the
    search to products of group sizes.

The boundary w . x = theta counts as success everywhere, and every exact
comparison is done in rational arithmetic: float dot products misclassify
ties, which are common for granular weights.

Monte-Carlo sampling draws Bernoulli bits with numpy PCG64 in fixed-size
chunks (so results do not depend on worker count), then classifies the
*unique* bit patterns exactly.  Everything is bit-reproducible from the
seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import GuardError, InputError
from .core import ProblemInstance
from .util import derived_rng, ordered_map, to_fraction

SAMPLE_CHUNK = 1 << 15

# Enumeration guards: widest allowed product of (group size + 1) factors and
# the most distinct weight values the grouping path accepts.
MAX_GROUPS = 12
COMBO_LIMIT = 1 << 24


@dataclass(frozen=True)
class ObjectiveEstimate:
    """Value of Obj(w), exact or sampled.  m=0 for the exact kind."""

    value: Fraction
    kind: str  # "exact" | "monte_carlo"
    m: int = 0
    seed: Optional[int] = None

    def __post_init__(self):
        if not 0 <= self.value <= 1:
            raise InputError(f"objective value {self.value} outside [0,1]")
        if self.kind not in ("exact", "monte_carlo"):
            raise InputError(f"unknown estimate kind {self.kind!r}")


@dataclass(frozen=True)
class DiscreteDist:
    """Finite-support distribution with exact probabilities, sorted support."""

    values: tuple[Fraction, ...]
    probs: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.values) != len(self.probs) or not self.values:
            raise InputError("malformed discrete distribution")
        if any(self.values[i] >= self.values[i + 1] for i in range(len(self.values) - 1)):
            raise InputError("support must be strictly sorted")
        if sum(self.probs, Fraction(0)) != 1 or any(p < 0 for p in self.probs):
            raise InputError("probabilities must be non-negative and sum to 1")

    def mass_at_least(self, t: Fraction) -> Fraction:
        return sum((p for v, p in zip(self.values, self.probs) if v >= t), Fraction(0))


@dataclass(frozen=True)
class EmpiricalDist:
    """Multiset of m sampled points, stored run-length compressed and sorted."""

    values: tuple[Fraction, ...]
    counts: tuple[int, ...]
    m: int

    def __post_init__(self):
        if self.m < 1 or sum(self.counts) != self.m:
            raise InputError("empirical distribution needs m >= 1 matching counts")

    @classmethod
    def from_points(cls, points: Sequence) -> "EmpiricalDist":
        pts = sorted(to_fraction(p) for p in points)
        if not pts:
            raise InputError("empty sample")
        values, counts = [], []
        for p in pts:
            if values and values[-1] == p:
                counts[-1] += 1
            else:
                values.append(p)
                counts.append(1)
        return cls(tuple(values), tuple(counts), len(pts))

    @property
    def points(self) -> tuple[Fraction, ...]:
        out = []
        for v, c in zip(self.values, self.counts):
            out.extend([v] * c)
        return tuple(out)

    def to_discrete(self) -> DiscreteDist:
        return DiscreteDist(self.values, tuple(Fraction(c, self.m) for c in self.counts))

    def mean(self) -> Fraction:
        return sum((v * c for v, c in zip(self.values, self.counts)), Fraction(0)) / self.m


def _as_discrete(dist) -> DiscreteDist:
    if isinstance(dist, DiscreteDist):
        return dist
    if isinstance(dist, EmpiricalDist):
        return dist.to_discrete()
    return EmpiricalDist.from_points(dist).to_discrete()


def kolmogorov_distance(d1, d2) -> Fraction:
    """sup_t |F1(t) - F2(t)| for step CDFs, exact over the merged jump points."""
    a, b = _as_discrete(d1), _as_discrete(d2)
    ia = ib = 0
    fa = fb = Fraction(0)
    best = Fraction(0)
    while ia < len(a.values) or ib < len(b.values):
        va = a.values[ia] if ia < len(a.values) else None
        vb = b.values[ib] if ib < len(b.values) else None
        if vb is None or (va is not None and va <= vb):
            t = va
        else:
            t = vb
        while ia < len(a.values) and a.values[ia] == t:
            fa += a.probs[ia]
            ia += 1
        while ib < len(b.values) and b.values[ib] == t:
            fb += b.probs[ib]
            ib += 1
        best = max(best, abs(fa - fb))
    return best


# ---------------------------------------------------------------------------
# Exact evaluation


def _count_pmf(ps: Sequence[Fraction]) -> list[Fraction]:
    """Poisson-binomial PMF of the number of successes among Bernoulli(ps)."""
    pmf = [Fraction(1)]
    for p in ps:
        q = 1 - p
        nxt = [Fraction(0)] * (len(pmf) + 1)
        for k, mass in enumerate(pmf):
            if mass:
                nxt[k] += mass * q
                nxt[k + 1] += mass * p
        pmf = nxt
    return pmf


def _grouped(probs: Sequence[Fraction], weights: Sequence[Fraction]):
    """Distinct nonzero weights (descending) with their probability lists."""
    groups: dict[Fraction, list[Fraction]] = {}
    for p, w in zip(probs, weights):
        if w != 0:
            groups.setdefault(w, []).append(p)
    return sorted(groups.items(), key=lambda kv: kv[0], reverse=True)


def exact_objective_probs(
    probs: Sequence,
    weights: Sequence,
    theta,
    max_n: int = 22,
) -> Fraction:
    """Exact Pr[w . X >= theta] for arbitrary probability vectors.

    Raises GuardError when both exact paths are out of reach.
    """
    probs = [to_fraction(p) for p in probs]
    weights = [to_fraction(w) for w in weights]
    theta = to_fraction(theta)
    if len(probs) != len(weights):
        raise InputError("probs and weights length mismatch")
    if any(w < 0 for w in weights):
        raise InputError("weights must be non-negative")
    if any(not 0 <= p <= 1 for p in probs):
        raise InputError("probabilities must lie in [0,1]")

    groups = _grouped(probs, weights)
    if len(groups) > MAX_GROUPS:
        active = sum(1 for w in weights if w != 0)
        if active > max_n:
            raise GuardError(
                f"exact evaluation needs n <= {max_n} or <= {MAX_GROUPS} distinct "
                f"weights; got n={active} with {len(groups)} values",
                estimate=active,
                limit=max_n,
            )
        # singleton groups: plain outcome enumeration with pruning
        groups = [(w, [p]) for w, p in sorted(
            ((w, p) for p, w in zip(probs, weights) if w != 0), reverse=True)]

    combos = 1
    for _, ps in groups:
        combos *= len(ps) + 1
        if combos > COMBO_LIMIT:
            raise GuardError(
                f"exact grouping state space exceeds {COMBO_LIMIT}",
                estimate=combos,
                limit=COMBO_LIMIT,
            )

    if theta <= 0:
        return Fraction(1)

    pmfs = [_count_pmf(ps) for _, ps in groups]
    gw = [w for w, _ in groups]
    max_rest = [Fraction(0)] * (len(groups) + 1)
    for g in range(len(groups) - 1, -1, -1):
        max_rest[g] = max_rest[g + 1] + gw[g] * (len(pmfs[g]) - 1)

    memo: dict[tuple[int, Fraction], Fraction] = {}

    def success_prob(g: int, partial: Fraction) -> Fraction:
        if partial >= theta:
            return Fraction(1)
        if g == len(groups) or partial + max_rest[g] < theta:
            return Fraction(0)
        key = (g, partial)
        hit = memo.get(key)
        if hit is not None:
            return hit
        acc = Fraction(0)
        for count, mass in enumerate(pmfs[g]):
            if mass:
                acc += mass * success_prob(g + 1, partial + gw[g] * count)
        memo[key] = acc
        return acc

    return success_prob(0, Fraction(0))


def exact_objective(instance: ProblemInstance, weights: Sequence, max_n: Optional[int] = None) -> ObjectiveEstimate:
    """Exact Obj(w) for an instance, as an ObjectiveEstimate."""
    limit = max_n if max_n is not None else 22
    value = exact_objective_probs(instance.probs, weights, instance.theta, max_n=limit)
    return ObjectiveEstimate(value=value, kind="exact")


def linear_form_dist(weights: Sequence, probs: Sequence, support_limit: int = 1 << 20) -> DiscreteDist:
    """Exact law of w . X over Bernoulli(probs), grouped by distinct weight."""
    probs = [to_fraction(p) for p in probs]
    weights = [to_fraction(w) for w in weights]
    if len(probs) != len(weights):
        raise InputError("probs and weights length mismatch")
    dist: dict[Fraction, Fraction] = {Fraction(0): Fraction(1)}
    for w, ps in _grouped(probs, weights):
        pmf = _count_pmf(ps)
        nxt: dict[Fraction, Fraction] = {}
        for value, mass in dist.items():
            for count, cmass in enumerate(pmf):
                if cmass:
                    key = value + w * count
                    nxt[key] = nxt.get(key, Fraction(0)) + mass * cmass
        dist = nxt
        if len(dist) > support_limit:
            raise GuardError(
                f"linear-form support exceeds {support_limit}",
                estimate=len(dist),
                limit=support_limit,
            )
    values = tuple(sorted(dist))
    return DiscreteDist(values, tuple(dist[v] for v in values))


# ---------------------------------------------------------------------------
# Sampling


def _pattern_counts(
    probs: Sequence[Fraction], m: int, seed: int, threads: int = 1
) -> dict[bytes, int]:
    """Counts of packed Bernoulli bit rows over m draws, chunked and seeded.

    Chunk c uses the generator derived from (seed, c) regardless of how many
    workers run, so the aggregate is worker-count independent.
    """
    n = len(probs)
    pf = np.array([float(p) for p in probs])
    n_chunks = (m + SAMPLE_CHUNK - 1) // SAMPLE_CHUNK

    def one_chunk(c: int) -> dict[bytes, int]:
        size = min(SAMPLE_CHUNK, m - c * SAMPLE_CHUNK)
        rng = derived_rng(seed, c)
        bits = rng.random((size, n)) < pf
        packed = np.packbits(bits, axis=1)
        rows, counts = np.unique(packed, axis=0, return_counts=True)
        return {rows[i].tobytes(): int(counts[i]) for i in range(len(rows))}

    total: dict[bytes, int] = {}
    for part in ordered_map(one_chunk, range(n_chunks), threads):
        for key, cnt in part.items():
            total[key] = total.get(key, 0) + cnt
    return total


def _unpack(key: bytes, n: int) -> tuple[int, ...]:
    bits = np.unpackbits(np.frombuffer(key, dtype=np.uint8))[:n]
    return tuple(int(b) for b in bits)


def mc_estimate_probs(
    probs: Sequence,
    weights: Sequence,
    theta,
    m: int,
    seed: int,
    threads: int = 1,
) -> ObjectiveEstimate:
    """Fraction of m independent draws X ~ D_p with w . X >= theta.

    Deterministic given the seed; the pattern classification is exact.
    """
    if m < 1:
        raise InputError("m must be >= 1")
    probs = [to_fraction(p) for p in probs]
    weights = [to_fraction(w) for w in weights]
    theta = to_fraction(theta)
    if len(weights) != len(probs):
        raise InputError("weight vector length mismatch")
    counts = _pattern_counts(probs, m, seed, threads)
    hits = 0
    for key, cnt in counts.items():
        x = _unpack(key, len(probs))
        dot = sum((w for w, b in zip(weights, x) if b), Fraction(0))
        if dot >= theta:
            hits += cnt
    return ObjectiveEstimate(value=Fraction(hits, m), kind="monte_carlo", m=m, seed=seed)


def mc_estimate(
    instance: ProblemInstance,
    weights: Sequence,
    m: int,
    seed: int,
    threads: int = 1,
) -> ObjectiveEstimate:
    return mc_estimate_probs(instance.probs, weights, instance.theta, m, seed, threads)


def sample_tail_empirical(
    instance: ProblemInstance,
    tail_weights: Sequence,
    m: int,
    seed: int,
    threads: int = 1,
) -> EmpiricalDist:
    """m i.i.d. draws of tail_weights . X over the instance's last coordinates.

    tail_weights pair with probs[n - len(tail_weights):] (tails are suffixes).
    Sample values are exact rationals, so jump points line up with the exact
    tail law in Kolmogorov-distance comparisons.
    """
    if m < 1:
        raise InputError("m must be >= 1")
    tail = [to_fraction(w) for w in tail_weights]
    if any(w < 0 for w in tail):
        raise InputError("tail weights must be non-negative")
    if len(tail) > instance.n:
        raise InputError("tail longer than the instance")
    probs = instance.probs[instance.n - len(tail):]
    if not tail:
        return EmpiricalDist((Fraction(0),), (m,), m)
    counts = _pattern_counts(probs, m, seed, threads)
    agg: dict[Fraction, int] = {}
    for key, cnt in counts.items():
        x = _unpack(key, len(tail))
        value = sum((w for w, b in zip(tail, x) if b), Fraction(0))
        agg[value] = agg.get(value, 0) + cnt
    values = tuple(sorted(agg))
    return EmpiricalDist(values, tuple(agg[v] for v in values), m)
