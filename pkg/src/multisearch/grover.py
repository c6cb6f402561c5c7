"""Single-element search: exact Grover, BBHT-style search, bounded search, maximum finding."""
from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass

import numpy as np

from .oracle import BitStringOracle, FixedVector, Threshold, threshold_oracle
from .qsim import DenseState, RotationState, apply_grover_iterate, measure_index

__all__ = [
    "SearchOutcome",
    "exact_grover_schedule",
    "get_backend",
    "grover_23",
    "grover_certainty",
    "grover_expectation",
    "max_find",
    "max_find_boosted",
    "run_grover",
    "use_backend",
]

DENSE_MAX_N = 1 << 14
BBHT_GROWTH = 6 / 5
GROVER23_C = 9.0

_backend = "rotation"


def get_backend() -> str:
    return _backend


@contextlib.contextmanager
def use_backend(name: str):
    """Temporarily switch the simulation backend (``rotation`` or ``dense``)."""
    global _backend
    if name not in ("rotation", "dense"):
        raise ValueError(f"unknown backend {name!r}")
    old, _backend = _backend, name
    try:
        yield
    finally:
        _backend = old


@dataclass
class SearchOutcome:
    index: int | None
    queries_used: int
    verified: bool
    truncated: bool = False


def run_grover(oracle: BitStringOracle, iterations: int, rng: np.random.Generator, amp_scale: float = 1.0) -> int:
    """Prepare the (optionally damped) uniform state, apply ``iterations`` iterates, measure.

    Each iterate is one application of the phase oracle and is charged as such.
    Returns a 1-based index.
    """
    n = oracle.n_total
    marked = oracle.marked_positions
    oracle.charge(iterations)
    if _backend == "dense" and n <= DENSE_MAX_N:
        if amp_scale >= 1.0:
            state = DenseState.uniform(n)
        else:
            state = DenseState.scaled_uniform(n, amp_scale)
        good = state.good_positions(marked)
        for _ in range(iterations):
            state = apply_grover_iterate(state, good)
        return measure_index(state, good, rng) + 1
    state = RotationState(n, marked.shape[0], amp_scale, iterations)
    return measure_index(state, marked, rng) + 1


def exact_grover_schedule(n_total: int, k0: int) -> tuple[int, float]:
    """Iteration count ``m`` and damping ``amp_scale`` that hit the good subspace exactly when |x| = k0."""
    if not 1 <= k0 <= n_total:
        raise ValueError(f"need 1 <= k0 <= N, got k0={k0}, N={n_total}")
    a0 = k0 / n_total
    theta0 = math.asin(math.sqrt(a0))
    # the 1e-9 guards against x = 1.0000000002 style rounding on exact cases
    m = max(0, math.ceil(math.pi / (4 * theta0) - 0.5 - 1e-9))
    amp_scale = min(1.0, math.sin(math.pi / (2 * (2 * m + 1))) ** 2 / a0)
    return m, amp_scale


def grover_certainty(oracle: BitStringOracle, k0: int, rng: np.random.Generator) -> SearchOutcome:
    """Exact Grover for a known weight ``k0``; the returned index is verified with one query.

    If ``|x| = k0`` the measured index is marked with certainty. Uses ``m + 1`` queries.
    """
    m, amp_scale = exact_grover_schedule(oracle.n_total, k0)
    i = run_grover(oracle, m, rng, amp_scale)
    ok = oracle.query(i) == 1
    return SearchOutcome(i, m + 1, ok)


def grover_expectation(
    oracle: BitStringOracle,
    rng: np.random.Generator,
    hard_cap: int | None = None,
    *,
    max_queries: int | None = None,
) -> SearchOutcome:
    """Search with unknown weight: random iteration counts from a geometrically growing range.

    Each round costs its iterations plus one verification query. A round that
    would exceed the query limit is not started; the outcome is then
    ``truncated``. The default ``hard_cap`` is ``1000 * sqrt(N)``.
    """
    n = oracle.n_total
    limit = math.ceil(1000 * math.sqrt(n)) if hard_cap is None else hard_cap
    if max_queries is not None:
        limit = min(limit, max_queries)
    sqrt_n = math.sqrt(n)
    budget = 1.0
    used = 0
    if _backend == "rotation":
        return _bbht_rotation(oracle, rng, limit, sqrt_n)
    while True:
        j = int(rng.integers(math.ceil(budget)))
        if used + j + 1 > limit:
            return SearchOutcome(None, used, False, truncated=True)
        i = run_grover(oracle, j, rng)
        used += j + 1
        if oracle.query(i):
            return SearchOutcome(i, used, True)
        budget = min(BBHT_GROWTH * budget, sqrt_n)


def _bbht_rotation(oracle: BitStringOracle, rng: np.random.Generator, limit: int, sqrt_n: float) -> SearchOutcome:
    # Same rounds and charges as the generic loop; a round's measure-then-verify
    # collapses to one Bernoulli draw with the closed-form success probability.
    marked = oracle.marked_positions
    k = marked.shape[0]
    theta = math.asin(math.sqrt(k / oracle.n_total))
    budget = 1.0
    used = 0
    while True:
        j = int(rng.integers(math.ceil(budget)))
        if used + j + 1 > limit:
            oracle.charge(used)
            return SearchOutcome(None, used, False, truncated=True)
        used += j + 1
        if k and rng.random() < math.sin((2 * j + 1) * theta) ** 2:
            oracle.charge(used)
            return SearchOutcome(int(marked[rng.integers(k)]) + 1, used, True)
        budget = min(BBHT_GROWTH * budget, sqrt_n)


def grover_23(oracle: BitStringOracle, k_lb: int, rng: np.random.Generator, C: float = GROVER23_C) -> SearchOutcome:
    """Search truncated at ``C * sqrt(N / k_lb)`` queries; succeeds w.p. >= 2/3 when ``k_lb <= |x|``."""
    if k_lb < 1:
        raise ValueError("k_lb must be >= 1")
    limit = math.floor(C * math.sqrt(oracle.n_total / k_lb))
    return grover_expectation(oracle, rng, max_queries=limit)


def max_find(v: FixedVector, rng: np.random.Generator, budget_factor: float = 22.5) -> int:
    """Durr-Hoyer maximum finding; returns the tie-broken argmax w.p. >= 1/2.

    Repeatedly searches for an entry strictly above the current candidate until
    the query budget ``22.5 sqrt(N) + 1.4 log2(N)^2`` is spent.
    """
    n = v.n_total
    if n == 1:
        return 1
    budget = math.ceil(budget_factor * math.sqrt(n) + 1.4 * math.log2(n) ** 2)
    y = int(rng.integers(1, n + 1))
    used = 0
    while used < budget:
        above = threshold_oracle(v, Threshold(0.0, v.key_of(y) + 1))
        out = grover_expectation(above, rng, max_queries=budget - used)
        used += out.queries_used
        if out.index is None:
            break
        y = out.index
    return y


def max_find_boosted(v: FixedVector, rho: float, rng: np.random.Generator) -> int:
    """Best of ``ceil(log2(1/rho))`` maximum-finding runs."""
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    runs = max(1, math.ceil(math.log2(1 / rho)))
    best = max_find(v, rng)
    for _ in range(runs - 1):
        cand = max_find(v, rng)
        if v.key_of(cand) > v.key_of(best):
            best = cand
    return best
