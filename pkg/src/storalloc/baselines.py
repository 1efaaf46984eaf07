"""Ground truth for tiny instances and the classical heuristic baseline.

The brute-force oracle is the junta solver run at full dimension: when L
equals n there is no tail, so the head enumeration is exhaustive over all
realizable event sets and the result is exactly optimal.  Desk scale caps
this at n = 4 through the function-enumeration path; n = 5 is available
behind a flag through the weight-grid path (validated by realized-set
counts, see halfspaces).

The uniform k-split baseline and the n=5 counterexample that beats it are
kept here for benchmarking: with five nodes at p = 0.9 and theta = 5/12,
the split (1/4, 1/4, 1/6, 1/6, 1/6) achieves 0.99711 while the best
uniform split (k=4) only reaches 0.9963.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import ProblemInstance, preprocess
from .errors import InputError
from .evaluate import exact_objective_probs
from .halfspaces import enumerate_halfspace_sets
from .junta import JuntaRequest, find_optimal_junta


@dataclass(frozen=True)
class OracleResult:
    opt_value: Fraction
    witness: tuple[Fraction, ...]  # sorted-instance order
    sets_examined: int
    method: str


ORACLE_FUNCTION_MAX_N = 4
ORACLE_GRID_MAX_N = 5


def brute_force_optimum(
    instance: ProblemInstance, allow_grid_n5: bool = False, threads: int = 1
) -> OracleResult:
    """Exactly optimal allocation by exhaustive event-set enumeration.

    n <= 4 uses the function-enumeration oracle; n = 5 requires
    ``allow_grid_n5`` (weight-grid enumeration, count-validated).
    """
    n = instance.n
    if n > ORACLE_GRID_MAX_N:
        raise InputError(f"oracle supports n <= {ORACLE_GRID_MAX_N}; got n={n}")
    if n == ORACLE_GRID_MAX_N and not allow_grid_n5:
        raise InputError(
            "n=5 oracle uses the weight-grid enumeration; pass allow_grid_n5=True"
        )
    method = "functions" if n <= ORACLE_FUNCTION_MAX_N else "grid(count-validated)"
    sets = enumerate_halfspace_sets(
        n, method="functions" if n <= ORACLE_FUNCTION_MAX_N else "grid", monotone=True
    )
    # n=5 has thousands of monotone sets; the probability-ordered scan stops
    # at the first feasible one, which already carries the optimal value.
    strategy = "exhaustive" if n <= ORACLE_FUNCTION_MAX_N else "first_feasible"
    result = find_optimal_junta(
        JuntaRequest(instance.probs, instance.theta, Fraction(1)),
        sets=sets,
        threads=threads,
        strategy=strategy,
    )
    return OracleResult(
        opt_value=result.value,
        witness=result.weights,
        sets_examined=len(sets),
        method=method,
    )


@dataclass(frozen=True)
class UniformSplitResult:
    best_k: int
    value: Fraction
    per_k: tuple[Fraction, ...]


def uniform_split_baseline(instance: ProblemInstance) -> UniformSplitResult:
    """Exact value of w = (1/k,...,1/k,0,...,0) for every k; argmax reported.

    The two-valued weight structure keeps exact evaluation cheap at any n.
    """
    values = []
    for k in range(1, instance.n + 1):
        w = [Fraction(1, k)] * k + [Fraction(0)] * (instance.n - k)
        values.append(exact_objective_probs(instance.probs, w, instance.theta))
    best_k = max(range(instance.n), key=lambda i: (values[i], -i)) + 1
    return UniformSplitResult(best_k=best_k, value=values[best_k - 1], per_k=tuple(values))


@dataclass(frozen=True)
class CounterexampleReport:
    candidate: tuple[Fraction, ...]
    candidate_value: Fraction
    best_uniform_k: int
    best_uniform_value: Fraction
    passed: bool


def kleinberg_counterexample() -> CounterexampleReport:
    """Reproduce the non-uniform-beats-uniform example exactly.

    n=5, theta=5/12, p_i = 1 - eps0 with eps0 = 0.1 (verified sufficient);
    the candidate (1/4,1/4,1/6,1/6,1/6) must strictly beat every uniform
    split.
    """
    eps0 = Fraction(1, 10)
    p = [1 - eps0] * 5
    theta = Fraction(5, 12)
    # eps=0.05 keeps p granular (0.9 = 360/400) and below the 1-eps shortcut.
    instance = preprocess(p, theta, Fraction(1, 20), Fraction(1, 20)).instance
    candidate = (
        Fraction(1, 4),
        Fraction(1, 4),
        Fraction(1, 6),
        Fraction(1, 6),
        Fraction(1, 6),
    )
    candidate_value = exact_objective_probs(instance.probs, candidate, theta)
    uniform = uniform_split_baseline(instance)
    return CounterexampleReport(
        candidate=candidate,
        candidate_value=candidate_value,
        best_uniform_k=uniform.best_k,
        best_uniform_value=uniform.value,
        passed=candidate_value > uniform.value,
    )
