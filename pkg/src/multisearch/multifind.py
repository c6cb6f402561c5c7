"""Finding every marked element.

Three procedures with different query/gate trade-offs:

* :func:`grover_certainty_multiple` runs exact Grover ``k_ub`` times, masking
  each hit. Query-optimal, but every masked query pays one comparator per
  found index.
* :func:`grover_coupon` samples uniformly random marked elements until ``t``
  distinct ones are collected.
* :func:`grover_multiple_fast` uses a coupon stage to cut ``[N]`` into
  intervals holding few marked elements each, then runs the first procedure
  on every interval.

:func:`find_all` picks between them from ``k_est`` and ``rho``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .counting import estimate_k_32
from .grover import grover_23, grover_certainty
from .oracle import BitStringOracle, SortedIndexList, mask_found, restrict_interval

__all__ = [
    "MultiFindResult",
    "choose_lambda",
    "coupon_rounds_fast",
    "find_all",
    "grover_certainty_multiple",
    "grover_coupon",
    "grover_multiple_fast",
]

LAMBDA_MIN = 6.0


@dataclass
class MultiFindResult:
    """Found indices (1-based) plus cost; ``success`` compares against the true support."""

    found: SortedIndexList
    queries_used: int
    analytic_gates: int
    success: bool
    path: str = ""
    rounds: int = 0
    details: dict = field(default_factory=dict)


def _result(oracle: BitStringOracle, found: SortedIndexList, before: tuple[int, int], path: str, **kw) -> MultiFindResult:
    q0, g0 = before
    q1, g1 = oracle.ledger.snapshot()
    truth = oracle.support()
    success = len(found) == truth.shape[0] and bool(np.array_equal(found.to_array(), truth))
    return MultiFindResult(found, q1 - q0, g1 - g0, success, path, **kw)


def grover_certainty_multiple(oracle: BitStringOracle, k_ub: int, rng: np.random.Generator) -> MultiFindResult:
    """Find all marked indices when ``|x| <= k_ub``, with certainty.

    Runs exact Grover for weights ``k_ub, k_ub - 1, ..., 1`` on the oracle with
    the already-found indices masked out. While the remaining weight is below
    the assumed one the run may miss; once they meet, every later run hits.
    """
    if k_ub < 1:
        raise ValueError("k_ub must be >= 1")
    before = oracle.ledger.snapshot()
    found = SortedIndexList()
    # a weight above N is impossible, so those iterations are skipped
    for m in range(min(k_ub, oracle.n_total), 0, -1):
        out = grover_certainty(mask_found(oracle, found), m, rng)
        if out.verified:
            found.insert(out.index)
    return _result(oracle, found, before, "certainty_multiple", rounds=min(k_ub, oracle.n_total))


def grover_coupon(oracle: BitStringOracle, R: int, k_lb: int, t: int, rng: np.random.Generator) -> MultiFindResult:
    """Collect up to ``t`` distinct marked indices in at most ``R`` bounded searches.

    Each round is one :func:`grover_23` call whose output is already verified.
    Stops as soon as ``t`` distinct indices are held. ``rounds`` records how
    many searches were made.
    """
    if t < 1 or k_lb < 1:
        raise ValueError("need t >= 1 and k_lb >= 1")
    before = oracle.ledger.snapshot()
    found = SortedIndexList()
    rounds = 0
    while rounds < R and len(found) < t:
        rounds += 1
        out = grover_23(oracle, k_lb, rng)
        if out.verified:
            found.insert(out.index)
    return _result(oracle, found, before, "coupon", rounds=rounds)


def coupon_rounds_fast(t: int, rho: float) -> int:
    """Stage-1 round count ``ceil(6 ln2 (t+1) + 2 ln(1/rho) / ln(3/2))``."""
    return math.ceil(6 * math.log(2) * (t + 1) + 2 * math.log(1 / rho) / math.log(1.5))


def _fast_t(k_est: int, lam: float) -> int:
    return math.ceil(k_est / lam)


def _fast_condition(k_est: int, rho: float, lam: float) -> bool:
    return _fast_t(k_est, lam) >= math.log2(6 * k_est / rho)


def grover_multiple_fast(
    oracle: BitStringOracle,
    k_est: int,
    rho: float,
    lam: float,
    rng: np.random.Generator,
) -> MultiFindResult:
    """Find all marked indices with probability ``>= 1 - rho``, given ``k/2 <= k_est <= 3k/2``.

    Stage 1 samples ``t = ceil(k_est / lam)`` distinct marked indices; they cut
    ``[N]`` into ``t + 1`` open intervals. Stage 2 estimates the weight of each
    nonempty interval and clears it with :func:`grover_certainty_multiple`.
    The parameter relation ``t >= log2(6 k_est / rho)`` is checked before any query.
    """
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    if k_est < 1 or not LAMBDA_MIN <= lam <= k_est:
        raise ValueError(f"need 6 <= lambda <= k_est, got lambda={lam}, k_est={k_est}")
    t = _fast_t(k_est, lam)
    if not _fast_condition(k_est, rho, lam):
        raise ValueError(f"t = {t} < log2(6 k_est / rho) = {math.log2(6 * k_est / rho):.3f}")

    before = oracle.ledger.snapshot()
    R = coupon_rounds_fast(t, rho)
    k_lb = math.ceil(2 * k_est / 3)
    stage1 = grover_coupon(oracle, R, k_lb, t, rng)
    cuts = [0, *stage1.found, oracle.n_total + 1]

    found = SortedIndexList(stage1.found)
    rho_j = rho / (3 * (t + 1))
    intervals = 0
    for lo, hi in zip(cuts, cuts[1:]):
        if hi == lo + 1:
            continue
        sub = restrict_interval(oracle, lo, hi)
        k_j = int(estimate_k_32(sub, rho_j, rng).value)
        intervals += 1
        if k_j == 0:
            continue
        res = grover_certainty_multiple(sub, 2 * k_j, rng)
        for j in res.found:
            found.insert(lo + j)
    return _result(
        oracle,
        found,
        before,
        "fast",
        rounds=stage1.rounds,
        details={"t": t, "R": R, "stage1": stage1.found, "intervals": intervals},
    )


def choose_lambda(k_est: int, rho: float, mode: str = "query_optimal") -> float:
    """``lambda`` for :func:`find_all`.

    ``simple`` uses 6; ``query_optimal`` uses
    ``min(k_est / log2(6 k_est / rho), log2(k_est / rho)^2)``, which may drop below 6.
    """
    if mode == "simple":
        return LAMBDA_MIN
    if mode != "query_optimal":
        raise ValueError(f"unknown mode {mode!r}")
    return min(k_est / math.log2(6 * k_est / rho), math.log2(k_est / rho) ** 2)


def find_all(
    oracle: BitStringOracle,
    k_est: int,
    rho: float,
    rng: np.random.Generator,
    mode: str = "query_optimal",
    lam: float | None = None,
) -> MultiFindResult:
    """Find all marked indices given a factor-3/2 estimate ``k_est`` of ``|x|``.

    Uses :func:`grover_multiple_fast` when its parameter conditions hold and
    falls back to :func:`grover_certainty_multiple` with ``k_ub = 2 k_est``
    otherwise (small ``k_est`` or ``lambda < 6``). ``k_est = 0`` returns at once.
    """
    k_est = int(k_est)
    if k_est <= 0:
        return _result(oracle, SortedIndexList(), oracle.ledger.snapshot(), "empty")
    if lam is None:
        lam = choose_lambda(k_est, rho, mode)
    if LAMBDA_MIN <= lam <= k_est and _fast_condition(k_est, rho, lam):
        return grover_multiple_fast(oracle, k_est, rho, lam, rng)
    res = grover_certainty_multiple(oracle, 2 * k_est, rng)
    res.path = "fallback"
    return res
