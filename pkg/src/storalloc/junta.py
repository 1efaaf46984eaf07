"""Head-only optimization: best allocation supported on the first L nodes.

For every threshold-realizable S over the head cube, an LP feasibility
check asks whether some head w >= 0 with sum(w) <= W reaches tau on all of
S; the witness's realized event probability is computed exactly and the
best witness wins.  With non-negative weights only upward-closed sets can
be realized, and the upward closure of a feasible S is feasible with the
same witness, so the enumeration is restricted to monotone sets without
changing the optimum.

Called with (p_1..p_L, theta, 1) this is exactly optimal whenever the
optimal allocation is supported on the first L coordinates; it also serves
the large-critical-index case with shifted thresholds and reduced budgets
(which may leave (0,1) and are handled naturally).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import InputError
from .halfspaces import HalfspaceSet, enumerate_halfspace_sets, point_bits
from .lp import LinearProgram, lp_solve
from .util import ordered_map, to_fraction


@dataclass(frozen=True)
class JuntaRequest:
    head_probs: tuple[Fraction, ...]
    tau: Fraction
    W: Fraction

    def __post_init__(self):
        probs = tuple(to_fraction(p) for p in self.head_probs)
        object.__setattr__(self, "head_probs", probs)
        object.__setattr__(self, "tau", to_fraction(self.tau))
        object.__setattr__(self, "W", to_fraction(self.W))
        if not probs:
            raise InputError("empty head")
        if any(not 0 < p < 1 for p in probs):
            raise InputError("head probabilities must lie in (0,1)")
        if any(probs[i] < probs[i + 1] for i in range(len(probs) - 1)):
            raise InputError("head probabilities must be sorted non-increasing")
        if not 0 <= self.W <= 1:
            raise InputError("budget W must lie in [0,1]")

    @property
    def L(self) -> int:
        return len(self.head_probs)


@dataclass(frozen=True)
class JuntaResult:
    weights: tuple[Fraction, ...]
    value: Fraction
    realized_mask: int
    sets_examined: int


def outcome_probabilities(probs: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """Exact probability of every point of {0,1}^k under the product law."""
    k = len(probs)
    out = []
    for x in range(1 << k):
        pr = Fraction(1)
        for j, p in enumerate(probs):
            pr *= p if (x >> j) & 1 else 1 - p
        out.append(pr)
    return tuple(out)


def mask_probability(point_probs: Sequence[Fraction], mask: int) -> Fraction:
    return sum(
        (pr for x, pr in enumerate(point_probs) if (mask >> x) & 1), Fraction(0)
    )


def realized_event_mask(weights: Sequence[Fraction], tau: Fraction, k: int) -> int:
    mask = 0
    for x in range(1 << k):
        dot = sum((w for w, b in zip(weights, point_bits(x, k)) if b), Fraction(0))
        if dot >= tau:
            mask |= 1 << x
    return mask


def _head_lp(set_: HalfspaceSet, tau: Fraction, W: Fraction, L: int) -> Optional[tuple[Fraction, ...]]:
    """Feasible head for S, or None.  Only minimal members constrain (w >= 0)."""
    cons = []
    for x in set_.minimal_members():
        row = [Fraction(b) for b in point_bits(x, L)]
        cons.append((row, ">=", tau))
    cons.append(([Fraction(1)] * L, "<=", W))
    res = lp_solve(LinearProgram(L, cons, objective=None))
    return res.x if res.status == "optimal" else None


def _sort_key(weights: Sequence[Fraction]) -> tuple:
    return tuple(sorted(weights, reverse=True))


def find_optimal_junta(
    req: JuntaRequest,
    sets: Optional[Sequence[HalfspaceSet]] = None,
    monotone: bool = True,
    threads: int = 1,
    strategy: str = "exhaustive",
) -> JuntaResult:
    """Exact maximizer of Pr[w . X >= tau] over heads with sum(w) <= W.

    Ties between equally good witnesses break toward the lexicographically
    smallest descending-sorted weight vector.

    strategy="first_feasible" scans sets by event probability descending and
    stops at the first feasible one.  Any witness's value is the probability
    of its realized set, which is itself a feasible enumerated set, so the
    first feasible set in this order already carries the optimal value; only
    the tie-break among equally-good witnesses differs.  Used by the n=5
    oracle, where the exhaustive scan costs thousands of LPs.
    """
    L = req.L
    tau, W = req.tau, req.W
    point_probs = outcome_probabilities(req.head_probs)

    if tau <= 0:
        # Every outcome qualifies regardless of w; the zero head wins ties.
        full = (1 << (1 << L)) - 1
        return JuntaResult((Fraction(0),) * L, Fraction(1), full, 0)

    if sets is None:
        sets = enumerate_halfspace_sets(L, monotone=monotone)

    def quick_reject(set_: HalfspaceSet) -> bool:
        if set_.mask and tau > W:
            return True  # w.x <= sum(w) <= W < tau for every x
        return bool(set_.mask & 1)  # all-zeros point can never reach tau > 0

    if strategy == "first_feasible":
        order = sorted(
            sets, key=lambda s: (-mask_probability(point_probs, s.mask), s.mask)
        )
        examined = 0
        for set_ in order:
            if quick_reject(set_):
                continue
            examined += 1
            witness = _head_lp(set_, tau, W, L)
            if witness is None:
                continue
            realized = realized_event_mask(witness, tau, L)
            value = mask_probability(point_probs, realized)
            assert value == mask_probability(point_probs, set_.mask)
            return JuntaResult(tuple(witness), value, realized, examined)
        return JuntaResult((Fraction(0),) * L, Fraction(0), 0, examined)
    if strategy != "exhaustive":
        raise InputError(f"unknown strategy {strategy!r}")

    def examine(set_: HalfspaceSet):
        if quick_reject(set_):
            return None
        witness = _head_lp(set_, tau, W, L)
        if witness is None:
            return None
        realized = realized_event_mask(witness, tau, L)
        return witness, realized, mask_probability(point_probs, realized)

    results = ordered_map(examine, sets, threads)
    best: Optional[tuple] = None
    for item in results:
        if item is None:
            continue
        witness, realized, value = item
        key = (value, [-x for x in _sort_key(witness)])
        if best is None or key > best[0]:
            best = (key, witness, realized, value)
    if best is None:
        # Only the empty set was feasible: the zero head with value 0.
        return JuntaResult((Fraction(0),) * L, Fraction(0), 0, len(sets))
    return JuntaResult(tuple(best[1]), best[3], best[2], len(sets))
