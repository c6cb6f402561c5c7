"""Classical companions: harmonic numbers, tail thresholds, sample budgets, run lengths.

Everything here is deterministic and side-effect free. The harness uses these
functions as reference values for its statistical checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

__all__ = [
    "EULER_GAMMA",
    "Budget",
    "coupon_budget",
    "coupon_budget_simple",
    "geo_tail_threshold",
    "harmonic",
    "harmonic_bounds_check",
    "query_budget",
    "run_length_bound",
    "run_length_exact",
]

EULER_GAMMA = 0.57721566490153286061


def harmonic(k: int) -> float:
    """``H_k = sum_{j<=k} 1/j`` with ``H_0 = 0``, summed smallest terms first."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return math.fsum(1.0 / j for j in range(k, 0, -1))


@lru_cache(maxsize=None)
def _harmonic_prefix(k: int) -> tuple[float, ...]:
    out = [0.0]
    acc = 0.0
    comp = 0.0
    for j in range(1, k + 1):
        y = 1.0 / j - comp
        s = acc + y
        comp = (s - acc) - y
        acc = s
        out.append(acc)
    return tuple(out)


def harmonic_bounds_check(k: int, t: int = 0) -> tuple[bool, bool, bool]:
    """The three harmonic-number inequalities at ``(k, t)``.

    (i)   ``1/(2(k+1)) <= H_k - gamma - ln k <= 1/(2k)``;
    (ii)  ``H_k - H_{k-t} <= ln(k/(k-t)) + (2k-t+1)/(2k(k-t+1))`` for ``t < k``;
    (iii) ``H_k - H_{k-t} <= 2(t+1)/k`` for ``t <= k/2``.

    A check whose hypothesis does not apply reports True.
    """
    if k < 1 or not 0 <= t <= k:
        raise ValueError("need k >= 1 and 0 <= t <= k")
    hk = harmonic(k)
    d = hk - EULER_GAMMA - math.log(k)
    slack = 1e-12
    ok1 = 1 / (2 * (k + 1)) - slack <= d <= 1 / (2 * k) + slack
    diff = hk - harmonic(k - t)
    ok2 = True
    if t < k:
        ok2 = diff <= math.log(k / (k - t)) + (2 * k - t + 1) / (2 * k * (k - t + 1)) + slack
    ok3 = True
    if 2 * t <= k:
        ok3 = diff <= 2 * (t + 1) / k + slack
    return ok1, ok2, ok3


def geo_tail_threshold(mu: float, p_star: float, rho: float) -> float:
    """``T = 2 ln2 mu + 2 ln(1/rho) / ln(1/(1-p*))``.

    For a sum ``X`` of independent geometric variables with mean ``mu`` and all
    success probabilities at least ``p*``, ``Pr[X >= T] <= rho``.
    """
    if mu <= 0 or not 0 < p_star <= 1 or not 0 < rho <= 1:
        raise ValueError("need mu > 0, p* in (0, 1], rho in (0, 1]")
    base = 2 * math.log(2) * mu
    if p_star == 1 or rho == 1:
        return base
    return base + 2 * math.log(1 / rho) / -math.log1p(-p_star)


def coupon_budget(t: int, k: int, rho: float) -> float:
    """Rounds ``R_{t,k,rho}`` after which ``t`` distinct marked elements are held w.p. ``>= 1 - rho``.

    ``R = 3 ln2 k (H_k - H_{k-t}) + 2 ln(1/rho) / ln(3k / (k + 2(t-1)))``.
    """
    if not 1 <= t <= k:
        raise ValueError(f"need 1 <= t <= k, got t={t}, k={k}")
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    H = _harmonic_prefix(k)
    return 3 * math.log(2) * k * (H[k] - H[k - t]) + 2 * math.log(1 / rho) / math.log(3 * k / (k + 2 * (t - 1)))


def coupon_budget_simple(t: int, rho: float) -> float:
    """Upper bound ``6 ln2 (t+1) + 2 ln(1/rho) / ln(3/2)`` on ``R_{t,k,rho}`` for ``t <= k/2``."""
    return 6 * math.log(2) * (t + 1) + 2 * math.log(1 / rho) / math.log(1.5)


def run_length_bound(k: int, t: int, ell: int) -> float:
    """``(k - ell + 1)(1 - t/k)^ell``.

    Bounds the probability that ``[k]`` minus a uniform ``t``-subset contains
    ``ell`` consecutive integers.
    """
    if not 1 <= t <= k or not 1 <= ell <= k - t:
        raise ValueError(f"need 1 <= t <= k and 1 <= ell <= k - t, got k={k}, t={t}, ell={ell}")
    return (k - ell + 1) * (1 - t / k) ** ell


def _bounded_compositions(total: int, parts: int, cap: int) -> int:
    # number of (g_1..g_parts) with 0 <= g_i <= cap and sum = total
    ways = [1] + [0] * total
    for _ in range(parts):
        nxt = [0] * (total + 1)
        acc = 0
        for s in range(total + 1):
            acc += ways[s]
            if s - cap - 1 >= 0:
                acc -= ways[s - cap - 1]
            nxt[s] = acc
        ways = nxt
    return ways[total]


def run_length_exact(k: int, t: int, ell: int) -> float:
    """Exact probability that the complement of a uniform ``t``-subset of ``[k]`` has a run ``>= ell``.

    The complement splits into ``t + 1`` gaps summing to ``k - t``; there is no
    long run iff every gap is below ``ell``.
    """
    if not 0 <= t <= k or ell < 1:
        raise ValueError("need 0 <= t <= k and ell >= 1")
    good = _bounded_compositions(k - t, t + 1, ell - 1)
    return 1 - good / math.comb(k, t)


@dataclass(frozen=True)
class Budget:
    queries: float
    gates: float
    label: str


def _log2(x: float) -> float:
    return math.log2(x) if x > 1 else 0.0


def query_budget(label: str, **params) -> Budget:
    """Theoretical query (and gate) expression for ``label``, with unit constants.

    Labels and their parameters:

    ``grover23``             N, k_lb
    ``certainty_multiple``   N, k_ub, k (optional, for gates)
    ``coupon``               N, k_lb, R
    ``multiple_fast``        N, k, rho, lam
    ``approx_count``         N, k, eps
    ``amp_est``              M, q (optional)
    ``approx_sum``           N, p, lam, rho, delta, b (optional)
    """
    p = params
    if label == "grover23":
        q = math.sqrt(p["N"] / p["k_lb"])
        return Budget(q, q * _log2(p["N"]), label)
    if label == "certainty_multiple":
        q = math.sqrt(p["N"] * p["k_ub"])
        return Budget(q, q * (p.get("k", p["k_ub"]) + 1) * _log2(p["N"]), label)
    if label == "coupon":
        q = math.sqrt(p["N"] / p["k_lb"]) * p["R"]
        return Budget(q, q * _log2(p["N"]), label)
    if label == "multiple_fast":
        N, k, rho, lam = p["N"], p["k"], p["rho"], p["lam"]
        q = math.sqrt(N * k) * (1 + _log2(k / (rho * lam)) / math.sqrt(lam))
        g = math.sqrt(N * k) * lam * _log2(k / rho) * _log2(N)
        return Budget(q, g, label)
    if label == "approx_count":
        N, k, eps = p["N"], p["k"], p["eps"]
        d = math.floor(eps * k) + 1
        q = math.sqrt(N / d) + math.sqrt(k * (N - k)) / d
        return Budget(q, q * _log2(N), label)
    if label == "amp_est":
        M = p["M"]
        return Budget(float(M), float(M) * p.get("q", 1), label)
    if label == "approx_sum":
        N, pp, lam, rho, delta = p["N"], p["p"], p["lam"], p["rho"], p["delta"]
        b = p.get("b", 32)
        L = math.log(1 / rho)
        terms = (
            L / math.sqrt(pp),
            math.sqrt(N / (N * pp + 1)) * L,
            N * math.sqrt(pp) * (1 + _log2(N * pp / (lam * rho)) / math.sqrt(lam)),
            L / (delta * math.sqrt(pp)),
        )
        g = (
            terms[0] * b * _log2(b) * _log2(N)
            + terms[1] * _log2(N)
            + N * math.sqrt(pp) * lam * _log2(pp * N / rho) * _log2(N)
            + terms[3] * b * _log2(b) * _log2(N / delta) * _log2(_log2(N / delta)) ** 2
        )
        return Budget(sum(terms), g, label)
    raise ValueError(f"unknown budget label {label!r}")
