"""Case 2: the optimum has critical index beyond the head cutoff L.

The tail of a near-optimal solution can then be assumed kappa-granular and
sharply concentrated, so only three integer statistics of the tail matter:

    A = sum w_i^2 / kappa^2          (concentration radius)
    B = sum w_i p_i / (kappa eps/4n) (mean, integral by granularity A2)
    C = sum w_i / kappa              (weight spent)

A reachability DP over tail slots lists every achievable (A,B,C) with one
witness tail each; for each triple the head is completed by the junta
solver against the shifted threshold

    theta - B kappa (eps/4n) + kappa * sqrt(ln(200/eps) * A)

with budget 1 - C kappa.  If the optimum really is of this type, one of
the assembled candidates is within eps/2 of it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import ProblemInstance, SolverConfig
from .errors import GuardError, InputError
from .junta import JuntaRequest, JuntaResult, find_optimal_junta
from .util import half_power_ceil, ln_upper, ordered_map, sqrt_upper, to_fraction


@dataclass(frozen=True)
class TailTriple:
    A: int
    B: int
    C: int
    kappa: Fraction
    witness: tuple[Fraction, ...]


def theory_kappa_case2(n: int, L: int) -> Fraction:
    """kappa = 1/(n^2 ((L+2)^((L+2)/2) + 1)), the half power rounded up."""
    return Fraction(1, n * n * (half_power_ceil(L + 2, L + 2) + 1))


def _state_space_estimate(n_slots: int, kappa: Fraction, instance: ProblemInstance) -> int:
    """Cheap upper bound on DP cells: min(granular tails, conceivable triples)."""
    jmax = int(1 / kappa)
    tails = (jmax + 1) ** n_slots
    a_max = jmax * jmax
    c_max = jmax
    b_max = int(4 * instance.n / (kappa * instance.epsilon)) + 1
    return min(tails, (a_max + 1) * (b_max + 1) * (c_max + 1))


def case2_kappa(instance: ProblemInstance, L: int, config: SolverConfig) -> Fraction:
    """Tail granularity for Case 2; practical mode may override it.

    Refuses with the state-space estimate when the implied DP exceeds
    config.state_space_limit.
    """
    if config.mode == "practical" and config.kappa_override is not None:
        kappa = config.kappa_override
    else:
        kappa = theory_kappa_case2(instance.n, L)
    if kappa > 1:
        raise InputError(f"kappa={kappa} exceeds the unit budget")
    estimate = _state_space_estimate(max(instance.n - L, 1), kappa, instance)
    if estimate > config.state_space_limit:
        raise GuardError(
            f"case-2 tail DP needs ~{estimate} cells (limit "
            f"{config.state_space_limit}); use practical mode with a coarser "
            f"--kappa or raise --state-space-limit",
            estimate=estimate,
            limit=config.state_space_limit,
        )
    return kappa


def _tail_dp(
    probs: tuple[Fraction, ...],
    start_slot: int,
    kappa: Fraction,
    instance: ProblemInstance,
    config: SolverConfig,
    extend,
    zero_state,
):
    """Layered reachability over slots start_slot..n (1-based).

    ``extend(state, j, m_t)`` returns the successor after spending j kappa
    units on slot t with granular probability multiplier m_t.  States map
    to (slot, predecessor, j) for witness reconstruction; determinism comes
    from sorted snapshots and ascending j.
    """
    grid = instance.grid
    jmax = int(1 / kappa)
    states: dict = {zero_state: (None, None, 0)}
    for t in range(start_slot, instance.n + 1):
        m_t = probs[t - 1] / grid
        if m_t.denominator != 1:
            raise InputError("probabilities are not eps/(4n)-granular (A2)")
        m_t = int(m_t)
        snapshot = sorted(states)
        for state in snapshot:
            budget_used = state[2]  # C component, third slot by convention
            for j in range(1, jmax - budget_used + 1):
                nxt = extend(state, j, m_t)
                if nxt not in states:
                    states[nxt] = (t, state, j)
                    if len(states) > config.state_space_limit:
                        raise GuardError(
                            f"tail DP exceeded {config.state_space_limit} states",
                            estimate=len(states),
                            limit=config.state_space_limit,
                        )
    return states


def _witness(states: dict, state, start_slot: int, n: int, kappa: Fraction) -> tuple[Fraction, ...]:
    tail = [Fraction(0)] * (n - start_slot + 1)
    cur = state
    while True:
        t, prev, j = states[cur]
        if t is None:
            break
        tail[t - start_slot] = j * kappa
        cur = prev
    return tuple(tail)


def construct_achievable_tails(
    instance: ProblemInstance,
    L: int,
    kappa: Fraction,
    config: Optional[SolverConfig] = None,
) -> list[TailTriple]:
    """Every achievable (A,B,C) triple over slots L+1..n, with one witness.

    L = n yields exactly the zero-tail triple (0,0,0).
    """
    config = config or SolverConfig()
    kappa = to_fraction(kappa)
    if not 0 < kappa <= 1:
        raise InputError("kappa must lie in (0,1]")
    if not 0 <= L <= instance.n:
        raise InputError(f"L={L} outside [0, n]")

    def extend(state, j, m_t):
        a, b, c = state
        return (a + j * j, b + j * m_t, c + j)

    states = _tail_dp(instance.probs, L + 1, kappa, instance, config, extend, (0, 0, 0))
    out = []
    for state in sorted(states):
        a, b, c = state
        out.append(
            TailTriple(
                A=a,
                B=b,
                C=c,
                kappa=kappa,
                witness=_witness(states, state, L + 1, instance.n, kappa),
            )
        )
    return out


@dataclass(frozen=True)
class LargeCICandidate:
    triple: TailTriple
    head: JuntaResult
    weights: tuple[Fraction, ...]  # full n-vector, sorted-instance order
    shifted_threshold: Fraction
    head_budget: Fraction


def shifted_threshold(instance: ProblemInstance, triple: TailTriple) -> Fraction:
    """theta - B kappa eps/(4n) + kappa sqrt(ln(200/eps) A), rounded up.

    The upward rounding of the irrational shift only tightens the head
    problem, which the analysis tolerates.
    """
    kappa = triple.kappa
    mu = triple.B * kappa * instance.grid
    shift = kappa * sqrt_upper(ln_upper(Fraction(200) / instance.epsilon) * triple.A)
    return instance.theta - mu + shift


def find_near_opt_large_ci(
    instance: ProblemInstance,
    L: int,
    kappa: Fraction,
    config: Optional[SolverConfig] = None,
    threads: int = 1,
) -> list[LargeCICandidate]:
    """One feasible candidate per achievable tail triple (Case 2 pool)."""
    if not 1 <= L < instance.n:
        raise InputError("case 2 needs 1 <= L < n")
    config = config or SolverConfig()
    triples = construct_achievable_tails(instance, L, kappa, config)
    head_probs = instance.probs[:L]

    def complete(triple: TailTriple) -> LargeCICandidate:
        tau = shifted_threshold(instance, triple)
        budget = 1 - triple.C * triple.kappa
        head = find_optimal_junta(JuntaRequest(head_probs, tau, budget))
        weights = head.weights + triple.witness
        return LargeCICandidate(
            triple=triple,
            head=head,
            weights=weights,
            shifted_threshold=tau,
            head_budget=budget,
        )

    return ordered_map(complete, triples, threads)
