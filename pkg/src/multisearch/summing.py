"""Quantile estimation and multiplicative approximation of ``sum(v)``."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .counting import AmplitudeSource, amp_est, estimate_k_32, median_repeats, next_pow2
from .grover import max_find
from .multifind import LAMBDA_MIN, find_all
from .oracle import FixedVector, Threshold, rescaled_amplitude, threshold_oracle

__all__ = [
    "QUANTILE_C",
    "ParamChoice",
    "SumEstimate",
    "approx_sum",
    "choose_params",
    "quantile_bounds",
    "quantile_estimate",
    "quantile_plan",
    "regime_violations",
    "sum_grid_size",
]

QUANTILE_C = 0.5


@dataclass
class SumEstimate:
    value: float
    queries_used: int
    branch: str
    components: tuple[float, float]
    threshold: Threshold | None = None
    details: dict = field(default_factory=dict)


def quantile_bounds(N: int, p: float, c: float = QUANTILE_C) -> tuple[int, int]:
    """Admissible descending ranks ``[ceil(c p N), ceil(p N)]`` of the threshold entry.

    Rank 1 is the largest entry under the tie-broken order. An entry of rank
    ``r`` satisfies ``Q(p) <= v <= Q(c p)`` exactly when ``r`` lies in this range.
    """
    return max(1, math.ceil(c * p * N - 1e-9)), max(1, math.ceil(p * N - 1e-9))


def _miss_prob(N: int, K: int, m: int) -> float:
    """Probability that a uniform ``m``-subset of ``[N]`` avoids a fixed ``K``-subset."""
    if K <= 0:
        return 1.0
    if m > N - K:
        return 0.0
    return float(math.exp(gammaln(N - K + 1) - gammaln(N - K - m + 1) - gammaln(N + 1) + gammaln(N - m + 1)))


def quantile_plan(N: int, p: float, c: float = QUANTILE_C) -> tuple[int, float, float]:
    """Sample size ``m`` and the two tail probabilities of the subset maximum's rank.

    The maximum of a uniform ``m``-subset has rank above ``hi`` with probability
    ``q_hi`` (no sample hit the top ``hi``) and rank below ``lo`` with probability
    ``q_lo``. ``m`` minimises ``max(q_hi, q_lo)``.
    """
    lo, hi = quantile_bounds(N, p, c)

    def tails(m: int) -> tuple[float, float]:
        return _miss_prob(N, hi, m), 1.0 - _miss_prob(N, lo - 1, m)

    a, b = 1, N
    while b - a > 1:
        mid = (a + b) // 2
        q_hi, q_lo = tails(mid)
        if q_hi > q_lo:
            a = mid
        else:
            b = mid
    best = min((a, b), key=lambda m: max(tails(m)))
    return (best, *tails(best))


def quantile_estimate(
    v: FixedVector,
    p: float,
    rho: float,
    rng: np.random.Generator,
    c: float = QUANTILE_C,
) -> Threshold:
    """Threshold ``z`` with ``Q(p) <= z <= Q(c p)`` with probability ``>= 1 - rho``.

    Each run draws a uniform ``m``-subset of indices (classically, no queries)
    and finds its maximum with quantum maximum finding over the subset. The
    run's rank lands in the admissible window with probability bounded away
    from 1/2 on either side, so the median of ``O(log(1/rho))`` runs does too.
    """
    N = v.n_total
    if p * N < 1:
        raise ValueError(f"need p N >= 1, got p N = {p * N}")
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    m, q_hi, q_lo = quantile_plan(N, p, c)
    gap = 0.5 - max(q_hi, q_lo)
    runs = math.ceil(math.log(2 / rho) / (2 * gap * gap))
    runs += 1 - runs % 2
    picks = []
    for _ in range(runs):
        S = rng.choice(N, size=m, replace=False) + 1
        sub = v.gather(S)
        j = max_find(sub, rng)
        i = int(sub.parent_index[j - 1]) if j <= m else int(S[0])
        picks.append(i)
    picks.sort(key=v.key_of)
    return v.threshold_at(picks[len(picks) // 2])


@dataclass
class ParamChoice:
    p: float
    lam: float
    violations: list[str]


def regime_violations(N: int, p: float, lam: float, rho: float, c: float = QUANTILE_C) -> list[str]:
    """Hypotheses on ``(p, lambda)`` that fail; empty when the accuracy guarantee applies."""
    out = []
    if not 0 < p < 1:
        out.append(f"p = {p} not in (0, 1)")
        return out
    if p * N < 1:
        out.append(f"p N = {p * N:.3g} < 1")
    cpn = c * p * N
    upper = min(cpn / math.log2(p * N / rho), math.log2(cpn / rho) ** 2) if p * N / rho > 1 else 0.0
    if lam < LAMBDA_MIN:
        out.append(f"lambda = {lam:.3g} < 6")
    if lam > upper:
        out.append(f"lambda = {lam:.3g} > {upper:.3g}")
    return out


def choose_params(N: int, delta: float, rho: float, mode: str = "simple", alpha: float = 1.0, c: float = QUANTILE_C) -> ParamChoice:
    """Quantile ``p`` and ``lambda`` for :func:`approx_sum`.

    ``simple``: ``p = alpha / (delta N)`` and ``lambda = 6``.
    ``query_optimal``: ``p = alpha log2(1/rho) / (delta N)`` and
    ``lambda = min(c p N / log2(6 p N / rho), log2(c p N / rho)^2)``.
    ``p`` is capped at 1/2 and floored at ``1/N``; violations of the accuracy
    hypotheses are reported rather than raised.
    """
    if not 0 < delta < 1 or not 0 < rho < 1:
        raise ValueError("delta and rho must lie in (0, 1)")
    if mode == "simple":
        p = alpha / (delta * N)
        lam = LAMBDA_MIN
    elif mode == "query_optimal":
        p = alpha * math.log2(1 / rho) / (delta * N)
        p_c = max(1 / N, min(0.5, p))
        cpn = c * p_c * N
        lam = min(cpn / math.log2(6 * p_c * N / rho), math.log2(cpn / rho) ** 2) if cpn / rho > 1 else 0.0
    else:
        raise ValueError(f"unknown mode {mode!r}")
    p = max(1 / N, min(0.5, p))
    return ParamChoice(p, lam, regime_violations(N, p, lam, rho, c))


def sum_grid_size(delta: float, p: float, c: float = QUANTILE_C) -> int:
    """Amplitude-estimation grid: next power of two ``>= 12 pi / sqrt(delta^2 p c)``."""
    return next_pow2(12 * math.pi / math.sqrt(delta * delta * p * c))


def approx_sum(
    v: FixedVector,
    delta: float,
    p: float,
    lam: float,
    rho: float,
    rng: np.random.Generator,
    *,
    c: float = QUANTILE_C,
    force: bool = False,
) -> SumEstimate:
    """Multiplicative ``delta``-approximation of ``sum(v)`` with probability ``>= 1 - rho``.

    Finds a threshold near the ``p``-quantile, collects every entry at or above
    it and sums those classically, then estimates the mean of the rescaled
    remainder ``w_i = v_i / z`` by amplitude estimation. Each stage gets a
    ``rho / 4`` share of the failure budget. With ``force`` the ``(p, lambda)``
    hypotheses are not enforced and the search stage falls back to the
    certainty-based finder whenever its fast path does not apply.
    """
    if not 0 < delta < 1 or not 0 < rho < 1:
        raise ValueError("delta and rho must lie in (0, 1)")
    bad = regime_violations(v.n_total, p, lam, rho, c)
    if bad and not force:
        raise ValueError("parameters outside the guaranteed regime: " + "; ".join(bad))
    N = v.n_total
    before = v.ledger.oracle_queries
    z = quantile_estimate(v, p, rho / 4, rng, c)
    x = threshold_oracle(v, z)
    k_est = int(estimate_k_32(x, rho / 4, rng).value)
    res = find_all(x, k_est, rho / 4, rng, lam=lam)
    classical = sum(v.query(i) for i in res.found)
    details = {"k_est": k_est, "found": len(res.found), "path": res.path}
    if z.value == 0:
        return SumEstimate(classical, v.ledger.oracle_queries - before, "classical_only", (classical, 0.0), z, details)

    a = rescaled_amplitude(v, z, delta)
    # one application of U computes and uncomputes v_i
    src = AmplitudeSource(a, lambda n: v.charge(2 * n), v.ledger, math.log2(N) + v.bits, v.c_gate)
    M = sum_grid_size(delta, p, c)
    ests = sorted(amp_est(src, M, rng) for _ in range(median_repeats(rho / 4)))
    a_est = ests[len(ests) // 2]
    amp_part = N * z.value * a_est
    details.update(M=M, a=a, a_est=a_est)
    return SumEstimate(classical + amp_part, v.ledger.oracle_queries - before, "hybrid", (classical, amp_part), z, details)
