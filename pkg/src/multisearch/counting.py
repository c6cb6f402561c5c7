"""Amplitude estimation and the counters built on it."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grover import max_find_boosted
from .oracle import BitStringOracle, FixedVector, QueryLedger
from .qsim import qpe_outcome_sample

__all__ = [
    "AmplitudeSource",
    "CountEstimate",
    "amp_est",
    "approx_count",
    "estimate_k_32",
    "mean_estimate_baseline",
    "median_repeats",
    "next_pow2",
    "oracle_source",
]

# Final-stage precision of one counting run: M = COUNT_FINAL_FACTOR * 2^l / eps.
COUNT_FINAL_FACTOR = 8.0
MEDIAN_C = 4.5


def next_pow2(x: float) -> int:
    n = max(1, math.ceil(x))
    return 1 << (n - 1).bit_length()


def median_repeats(rho: float) -> int:
    """Odd repetition count ``2 * ceil(4.5 ln(1/rho)) + 1`` for median boosting."""
    if not 0 < rho < 1:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    return 2 * math.ceil(MEDIAN_C * math.log(1 / rho)) + 1


@dataclass
class AmplitudeSource:
    """What amplitude estimation needs to know about a state-preparation unitary ``U``.

    ``a`` is the good-state weight, ``charge(n)`` books ``n`` (controlled)
    applications of ``U`` or its inverse, and ``qubits`` sizes the gate estimate.
    """

    a: float
    charge: Callable[[int], None]
    ledger: QueryLedger
    qubits: float
    c_gate: float = 1.0


def oracle_source(oracle: BitStringOracle) -> AmplitudeSource:
    """Uniform superposition followed by one query: good weight ``|x| / N``."""
    return AmplitudeSource(
        oracle.hamming_weight() / oracle.n_total,
        oracle.charge,
        oracle.ledger,
        math.log2(oracle.n_total) + 1,
        oracle.c_gate,
    )


@dataclass
class CountEstimate:
    value: float
    queries_used: int
    confidence: float


def amp_est(source: AmplitudeSource, M: int, rng: np.random.Generator) -> float:
    """Estimate ``a`` as ``sin^2(pi y / M)`` from one phase-estimation outcome.

    ``M`` is rounded up to a power of two (at least 2). Charges ``M``
    applications of controlled-U and ``M`` of controlled-U^dagger.
    """
    if M < 1:
        raise ValueError("M must be positive")
    M = max(2, next_pow2(M))
    source.charge(2 * M)
    source.ledger.charge(0, source.c_gate * source.qubits * M)
    y = qpe_outcome_sample(source.a, M, rng)
    return math.sin(math.pi * y / M) ** 2


def _count_once(oracle: BitStringOracle, eps: float, rng: np.random.Generator) -> int:
    n = oracle.n_total
    src = oracle_source(oracle)
    level = 0
    while True:
        level += 1
        est = amp_est(src, 1 << level, rng)
        if est > 0:
            break
        if (1 << level) > 2 * math.sqrt(n):
            return 0
    M = COUNT_FINAL_FACTOR * (1 << level) / eps
    est = amp_est(src, M, rng)
    return int(min(n, max(0, round(n * est))))


def approx_count(oracle: BitStringOracle, eps: float, rho: float, rng: np.random.Generator, repeats: int | None = None) -> CountEstimate:
    """Estimate ``k = |x|`` within relative error ``eps`` with probability ``>= 1 - rho``.

    One run doubles the phase-estimation grid until a nonzero outcome appears
    (or the grid exceeds ``2 sqrt(N)``, giving 0), then re-estimates at a grid
    ``COUNT_FINAL_FACTOR / eps`` times finer. The median of
    ``median_repeats(rho)`` runs is returned.
    """
    n = oracle.n_total
    if not 1 / (3 * n) < eps <= 1:
        raise ValueError(f"eps must lie in (1/(3N), 1], got {eps}")
    reps = median_repeats(rho) if repeats is None else repeats
    before = oracle.ledger.oracle_queries
    vals = sorted(_count_once(oracle, eps, rng) for _ in range(reps))
    return CountEstimate(vals[len(vals) // 2], oracle.ledger.oracle_queries - before, 1 - rho)


def estimate_k_32(oracle: BitStringOracle, rho: float, rng: np.random.Generator) -> CountEstimate:
    """``k_est`` with ``k/2 <= k_est <= 3k/2`` with probability ``>= 1 - rho``."""
    return approx_count(oracle, 0.5, rho, rng)


def mean_estimate_baseline(v: FixedVector, delta: float, rho: float, rng: np.random.Generator) -> float:
    """Multiplicative ``delta``-approximation of the mean by maximum finding plus amplitude estimation.

    Each application of the preparation unitary computes and uncomputes ``v_i``
    (two queries). The failure budget is split evenly between the two stages.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    i_max = max_find_boosted(v, rho / 2, rng)
    v_max = v.query(i_max)
    if v_max == 0:
        return 0.0
    w = np.clip(v.values / v_max, 0.0, 1.0)
    src = AmplitudeSource(float(np.mean(w)), lambda n: v.charge(2 * n), v.ledger, math.log2(v.n_total) + v.bits, v.c_gate)
    M = next_pow2(8 * math.sqrt(v.n_total) / delta)
    ests = sorted(amp_est(src, M, rng) for _ in range(median_repeats(rho / 2)))
    return ests[len(ests) // 2] * v_max
