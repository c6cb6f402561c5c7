"""Monte Carlo trials, parameter sweeps, CSV output and bound-verification suites."""
from __future__ import annotations

import csv
import itertools
import logging
import math
import os
from dataclasses import dataclass, field, fields
from typing import Callable, Iterable, Iterator, TextIO

import numpy as np
from scipy import stats

from . import analysis
from .counting import approx_count, estimate_k_32, mean_estimate_baseline
from .grover import exact_grover_schedule, grover_23, grover_certainty, use_backend
from .multifind import choose_lambda, find_all, grover_certainty_multiple, grover_coupon, grover_multiple_fast
from .oracle import (
    BitStringOracle,
    FixedVector,
    QueryLedger,
    _rescaled_weights,
    load_bits,
    load_vector,
    mask_found,
    restrict_interval,
    threshold_oracle,
)
from .qsim import DenseState, apply_grover_iterate, derive_seed, grover_success_prob, make_rng, qpe_outcome_sample
from .summing import approx_sum, choose_params

__all__ = [
    "ALGORITHMS",
    "CSV_FIELDS",
    "Check",
    "Report",
    "SUITES",
    "SweepSpec",
    "TrialRecord",
    "emit_csv",
    "fail_rate_check",
    "loglog_slope",
    "parse_spec",
    "load_spec",
    "rate_check",
    "read_csv",
    "run_trial",
    "run_trials",
    "verify_bounds",
]

log = logging.getLogger(__name__)

CSV_FIELDS = (
    "algorithm", "N", "k", "rho", "delta", "lambda", "p", "trial", "seed",
    "queries", "analytic_gates", "success", "value", "error",
)


@dataclass
class TrialRecord:
    """One trial. ``error`` is ``value - truth`` for counts and relative error for sums."""

    algorithm: str
    N: int
    k: int | None = None
    rho: float | None = None
    delta: float | None = None
    lam: float | None = None
    p: float | None = None
    trial: int = 0
    seed: int = 0
    queries: int = 0
    analytic_gates: int = 0
    success: bool = False
    value: float | None = None
    error: float | None = None

    def row(self) -> list[str]:
        out = []
        for f in fields(self):
            x = getattr(self, f.name)
            if x is None:
                out.append("")
            elif isinstance(x, bool):
                out.append("1" if x else "0")
            else:
                out.append(repr(x) if isinstance(x, float) else str(x))
        return out

    @classmethod
    def from_row(cls, row: dict[str, str]) -> TrialRecord:
        def num(s: str, kind):
            return None if s == "" else kind(s)

        return cls(
            row["algorithm"],
            int(row["N"]),
            num(row["k"], int),
            num(row["rho"], float),
            num(row["delta"], float),
            num(row["lambda"], float),
            num(row["p"], float),
            int(row["trial"]),
            int(row["seed"]),
            int(row["queries"]),
            int(row["analytic_gates"]),
            row["success"] == "1",
            num(row["value"], float),
            num(row["error"], float),
        )


def emit_csv(records: Iterable[TrialRecord], out: str | os.PathLike | TextIO) -> int:
    """Write a header plus one row per record, flushing as records arrive. Returns the row count."""
    if isinstance(out, (str, os.PathLike)):
        with open(out, "w", newline="", encoding="utf-8") as fh:
            return emit_csv(records, fh)
    w = csv.writer(out, lineterminator="\r\n")
    w.writerow(CSV_FIELDS)
    n = 0
    for r in records:
        w.writerow(r.row())
        out.flush()
        n += 1
    return n


def read_csv(src: str | os.PathLike | TextIO) -> list[TrialRecord]:
    if isinstance(src, (str, os.PathLike)):
        with open(src, newline="", encoding="utf-8") as fh:
            return read_csv(fh)
    return [TrialRecord.from_row(r) for r in csv.DictReader(src)]


# --------------------------------------------------------------------------
# Sweep specifications
# --------------------------------------------------------------------------

_SCALAR_KEYS = {"algorithm", "trials", "seed", "out", "backend", "input"}
_INT_KEYS = {"N", "k", "k_ub", "t", "R", "bits", "k_lb"}
_STR_KEYS = {"mode"}


def _parse_number(s: str, as_int: bool):
    s = s.strip()
    for op in ("**", "^"):
        if op in s:
            b, e = s.split(op)
            val = float(b) ** float(e)
            break
    else:
        val = float(s)
    if as_int:
        if val != int(val):
            raise ValueError(f"expected an integer, got {s!r}")
        return int(val)
    return val


@dataclass
class SweepSpec:
    """An algorithm, a grid of parameter values, and how many seeded trials per cell."""

    algorithm: str
    grid: dict[str, list] = field(default_factory=dict)
    trials: int = 1
    seed: int = 0
    out: str | None = None
    backend: str = "rotation"
    input: str | None = None

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if any(len(v) == 0 for v in self.grid.values()):
            raise ValueError("every grid axis needs at least one value")

    def cells(self) -> list[dict]:
        keys = list(self.grid)
        return [dict(zip(keys, combo)) for combo in itertools.product(*(self.grid[k] for k in keys))]


def parse_spec(text: str) -> SweepSpec:
    """``key=value`` lines; grid axes take comma-separated values, ``#`` starts a comment."""
    scalars: dict[str, str] = {}
    grid: dict[str, list] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key == "lambda":
            key = "lam"
        if key in _SCALAR_KEYS:
            scalars[key] = val
        elif key in _STR_KEYS:
            grid[key] = [v.strip() for v in val.split(",") if v.strip()]
        else:
            grid[key] = [_parse_number(v, key in _INT_KEYS) for v in val.split(",") if v.strip()]
    if "algorithm" not in scalars:
        raise ValueError("spec needs an algorithm line")
    return SweepSpec(
        scalars["algorithm"],
        grid,
        trials=int(scalars.get("trials", 1)),
        seed=int(scalars.get("seed", 0)),
        out=scalars.get("out"),
        backend=scalars.get("backend", "rotation"),
        input=scalars.get("input"),
    )


def load_spec(path: str | os.PathLike) -> SweepSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_spec(fh.read())


# --------------------------------------------------------------------------
# Trials
# --------------------------------------------------------------------------


def _bit_instance(params: dict, rng: np.random.Generator, input_path: str | None) -> BitStringOracle:
    if input_path:
        return load_bits(input_path, QueryLedger())
    N, k = params["N"], params.get("k", 0)
    if not 0 <= k <= N:
        raise ValueError(f"need 0 <= k <= N, got k={k}, N={N}")
    support = rng.choice(N, size=k, replace=False) + 1
    return BitStringOracle.from_support(N, support, QueryLedger())


def _vector_instance(params: dict, rng: np.random.Generator, input_path: str | None) -> FixedVector:
    bits = params.get("bits", 32)
    if input_path:
        return load_vector(input_path, bits, QueryLedger())
    return FixedVector.random(params["N"], rng, bits, QueryLedger())


def _record(algorithm: str, params: dict, ledger: QueryLedger, **kw) -> TrialRecord:
    base = {
        "N": params.get("N"),
        "k": params.get("k"),
        "rho": params.get("rho"),
        "delta": params.get("delta"),
        "lam": params.get("lam"),
        "p": params.get("p"),
    }
    base.update(kw)
    return TrialRecord(algorithm, queries=ledger.oracle_queries, analytic_gates=ledger.analytic_gates, **base)


def _caller_estimate(x: BitStringOracle, rho: float, rng: np.random.Generator) -> int:
    """Factor-3/2 weight estimate made on a copy of ``x`` with its own ledger.

    The finder's record then counts the finder's queries only. The estimate
    takes half of the failure budget ``rho``; the finder gets the other half.
    """
    twin = BitStringOracle.from_support(x.n_total, x.support(), QueryLedger())
    return int(estimate_k_32(twin, rho / 2, rng).value)


def _run_multifind(params, rng, input_path):
    x = _bit_instance(params, rng, input_path)
    rho = params.get("rho", 0.05)
    k = x.hamming_weight()
    k_est = _caller_estimate(x, rho, rng)
    lam = params.get("lam")
    if lam is None and k_est > 0:
        lam = choose_lambda(k_est, rho / 2, params.get("mode", "query_optimal"))
    res = find_all(x, k_est, rho / 2, rng, lam=lam)
    sound = int(np.isin(res.found.to_array(), x.support()).sum()) == len(res.found)
    rec = _record("multifind", params, x.ledger, N=x.n_total, k=k, lam=lam, success=res.success,
                  value=float(len(res.found)), error=float(len(res.found) - k))
    return rec, {"sound": sound, "path": res.path, "k_est": k_est}


def _run_multifind_fast(params, rng, input_path):
    x = _bit_instance(params, rng, input_path)
    rho = params.get("rho", 0.05)
    k = x.hamming_weight()
    k_est = params.get("k_est") or _caller_estimate(x, rho, rng)
    res = grover_multiple_fast(x, k_est, rho / 2, params["lam"], rng)
    sound = int(np.isin(res.found.to_array(), x.support()).sum()) == len(res.found)
    rec = _record("multifind_fast", params, x.ledger, N=x.n_total, k=k, success=res.success,
                  value=float(len(res.found)), error=float(len(res.found) - k))
    return rec, {"sound": sound, "stage1": res.details.get("stage1")}


def _run_certainty_multiple(params, rng, input_path):
    x = _bit_instance(params, rng, input_path)
    k = x.hamming_weight()
    res = grover_certainty_multiple(x, params.get("k_ub", max(k, 1)), rng)
    sound = int(np.isin(res.found.to_array(), x.support()).sum()) == len(res.found)
    rec = _record("certainty_multiple", params, x.ledger, N=x.n_total, k=k, success=res.success,
                  value=float(len(res.found)), error=float(len(res.found) - k))
    return rec, {"sound": sound}


def _run_coupon(params, rng, input_path):
    x = _bit_instance(params, rng, input_path)
    k = x.hamming_weight()
    rho = params.get("rho", 0.1)
    t = params.get("t", max(1, k // 2))
    R = params.get("R") or math.ceil(analysis.coupon_budget(t, k, rho))
    res = grover_coupon(x, R, params.get("k_lb", k), t, rng)
    rec = _record("coupon", params, x.ledger, N=x.n_total, k=k, success=len(res.found) == t,
                  value=float(res.rounds), error=None)
    return rec, {"found": tuple(res.found), "rounds": res.rounds}


def _run_count(params, rng, input_path):
    x = _bit_instance(params, rng, input_path)
    k = x.hamming_weight()
    eps = params.get("delta", 0.5)
    est = approx_count(x, eps, params.get("rho", 0.05), rng).value
    rec = _record("count", params, x.ledger, N=x.n_total, k=k, delta=eps,
                  success=abs(est - k) <= eps * k, value=float(est), error=float(est - k))
    return rec, {}


def _sum_params(params, N):
    delta, rho = params["delta"], params.get("rho", 0.05)
    choice = choose_params(N, delta, rho, params.get("mode", "simple"), params.get("alpha", 1.0))
    p = params.get("p", choice.p)
    lam = params.get("lam", choice.lam)
    return delta, rho, p, lam, choice.violations


def _run_approx_sum(params, rng, input_path):
    v = _vector_instance(params, rng, input_path)
    N = v.n_total
    delta, rho, p, lam, bad = _sum_params(params, N)
    if bad and not params.get("force", 1):
        raise ValueError("; ".join(bad))
    res = approx_sum(v, delta, p, lam, rho, rng, force=True)
    s = v.total()
    err = (res.value - s) / s if s > 0 else float(res.value)
    k = int((v.keys >= res.threshold.key).sum()) if res.threshold is not None else None
    rec = _record("approx_sum", params, v.ledger, N=N, k=k, delta=delta, rho=rho, lam=lam, p=p,
                  success=abs(res.value - s) <= delta * s, value=float(res.value), error=float(err))
    return rec, {"branch": res.branch, "violations": bad, "vector": v, "threshold": res.threshold, "path": res.details.get("path")}


def _run_mean_baseline(params, rng, input_path):
    v = _vector_instance(params, rng, input_path)
    N = v.n_total
    delta, rho = params["delta"], params.get("rho", 0.05)
    est = N * mean_estimate_baseline(v, delta, rho, rng)
    s = v.total()
    err = (est - s) / s if s > 0 else est
    rec = _record("mean_baseline", params, v.ledger, N=N, delta=delta, rho=rho,
                  success=abs(est - s) <= delta * s, value=float(est), error=float(err))
    return rec, {}


def _run_grover_certainty(params, rng, input_path):
    x = _bit_instance(params, rng, input_path)
    k = x.hamming_weight()
    out = grover_certainty(x, params.get("k0", k), rng)
    rec = _record("grover_certainty", params, x.ledger, N=x.n_total, k=k, success=out.verified,
                  value=float(out.index), error=None)
    return rec, {}


def _run_grover23(params, rng, input_path):
    x = _bit_instance(params, rng, input_path)
    k = x.hamming_weight()
    out = grover_23(x, params.get("k_lb", max(k, 1)), rng)
    rec = _record("grover23", params, x.ledger, N=x.n_total, k=k, success=out.verified,
                  value=None if out.index is None else float(out.index), error=None)
    return rec, {}


ALGORITHMS: dict[str, Callable] = {
    "multifind": _run_multifind,
    "multifind_fast": _run_multifind_fast,
    "certainty_multiple": _run_certainty_multiple,
    "coupon": _run_coupon,
    "count": _run_count,
    "approx_sum": _run_approx_sum,
    "mean_baseline": _run_mean_baseline,
    "grover_certainty": _run_grover_certainty,
    "grover23": _run_grover23,
}


def _run_one(algorithm: str, params: dict, trial: int, seed: int, input_path: str | None = None):
    rng = make_rng(seed)
    rec, extra = ALGORITHMS[algorithm](params, rng, input_path)
    rec.trial = trial
    rec.seed = seed
    return rec, extra


def run_trial(algorithm: str, params: dict, trial: int, seed: int, input_path: str | None = None) -> TrialRecord:
    """Run one seeded trial; the same arguments always give the same record."""
    return _run_one(algorithm, params, trial, seed, input_path)[0]


def _iter_trials(spec: SweepSpec, errors: list | None = None) -> Iterator[tuple[dict, TrialRecord, dict]]:
    with use_backend(spec.backend):
        for ci, cell in enumerate(spec.cells()):
            for trial in range(spec.trials):
                seed = derive_seed(spec.seed, ci, trial)
                try:
                    rec, extra = _run_one(spec.algorithm, cell, trial, seed, spec.input)
                except ValueError as exc:
                    msg = f"cell {ci} {cell}: {exc}"
                    log.warning(msg)
                    if errors is not None:
                        errors.append(msg)
                    break
                yield cell, rec, extra


def run_trials(spec: SweepSpec, errors: list | None = None) -> Iterator[TrialRecord]:
    """Records for every (cell, trial) in order, seeded by ``(master seed, cell, trial)``.

    Trials run serially. A cell whose parameters are rejected is skipped after
    the first failure; the message is logged and appended to ``errors``.
    """
    for _, rec, _ in _iter_trials(spec, errors):
        yield rec


# --------------------------------------------------------------------------
# Statistics
# --------------------------------------------------------------------------


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


@dataclass
class Report:
    suite: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def text(self) -> str:
        head = f"suite {self.suite}: {'PASS' if self.passed else 'FAIL'} ({sum(c.passed for c in self.checks)}/{len(self.checks)})"
        return "\n".join([head, *("  " + c.line() for c in self.checks)])


def rate_check(name: str, successes: int, n: int, target: float) -> Check:
    """Pass iff the success rate is at least ``target - 3 sigma``, sigma the binomial sd at ``target``."""
    sigma = math.sqrt(target * (1 - target) / n)
    rate = successes / n
    band = target - 3 * sigma
    return Check(name, rate >= band, f"n={n} rate={rate:.5f} >= {band:.5f} (target {target:.4f} - 3sd)")


def fail_rate_check(name: str, failures: int, n: int, rho: float) -> Check:
    """Pass iff the failure rate is at most ``rho + 3 sigma``."""
    sigma = math.sqrt(rho * (1 - rho) / n)
    rate = failures / n
    band = rho + 3 * sigma
    return Check(name, rate <= band, f"n={n} fail={rate:.5f} <= {band:.5f} (rho {rho} + 3sd)")


def loglog_slope(x: Iterable[float], y: Iterable[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    lx = np.log(np.asarray(list(x), dtype=float))
    ly = np.log(np.asarray(list(y), dtype=float))
    if lx.shape[0] < 2:
        raise ValueError("need at least two points")
    return float(stats.linregress(lx, ly).slope)


def slope_check(name: str, x, y, target: float, tol: float) -> Check:
    x, y = list(x), list(y)
    s = loglog_slope(x, y)
    pts = ", ".join(f"({a:.4g}, {b:.4g})" for a, b in zip(x, y))
    return Check(name, abs(s - target) <= tol, f"points={len(x)} slope={s:.3f} in {target}+-{tol}; {pts}")


# --------------------------------------------------------------------------
# Verification suites
# --------------------------------------------------------------------------


def suite_harmonic(report: Report, kmax: int = 10**6, seed: int = 0) -> None:
    rng = make_rng(seed)
    report.add(Check("H_0, H_1, H_4", analysis.harmonic(0) == 0 and analysis.harmonic(1) == 1
                     and abs(analysis.harmonic(4) - 25 / 12) < 1e-15, "0, 1, 25/12"))
    H = np.array(analysis._harmonic_prefix(kmax))
    k = np.arange(1, kmax + 1)
    Hk = H[1:]
    d = Hk - analysis.EULER_GAMMA - np.log(k)
    tol = 1e-14
    ok1 = (d >= 1 / (2 * (k + 1)) - tol) & (d <= 1 / (2 * k) + tol)
    report.add(Check("H_k - gamma - ln k bracket", bool(ok1.all()), f"k=1..{kmax}, violations={int((~ok1).sum())}"))
    for label, t in (("sampled t", rng.integers(0, k)), ("t = k/2", k // 2)):
        diff = Hk - H[k - t]
        ok2 = diff <= np.log(k / (k - t)) + (2 * k - t + 1) / (2 * k * (k - t + 1)) + tol
        half = 2 * t <= k
        ok3 = ~half | (diff <= 2 * (t + 1) / k + tol)
        report.add(Check(f"H_k - H_(k-t) log bound ({label})", bool(ok2.all()), f"k=1..{kmax}, violations={int((~ok2).sum())}"))
        report.add(Check(f"H_k - H_(k-t) <= 2(t+1)/k ({label})", bool(ok3.all()),
                         f"k=1..{kmax}, applicable={int(half.sum())}, violations={int((~ok3).sum())}"))


def suite_tails(report: Report, samples: int = 10**5, seed: int = 0) -> None:
    rng = make_rng(seed)
    lam = np.concatenate([np.linspace(1, 10, 100001), np.geomspace(10, 1e8, 100001)])
    conv = lam - 1 - np.log(lam) >= lam / 2 - math.log(2) - 1e-12
    report.add(Check("lambda - 1 - ln lambda >= lambda/2 - ln 2", bool(conv.all()), f"grid={lam.shape[0]} on [1, 1e8]"))

    ok = abs(analysis.geo_tail_threshold(3.0, 0.4, 1.0) - 2 * math.log(2) * 3.0) < 1e-12
    report.add(Check("rho = 1 gives T = 2 ln2 mu", ok, ""))

    worst = 0.0
    for p in np.linspace(0.01, 1.0, 100):
        for rho in (0.5, 0.1, 0.01, 1e-3, 1e-6):
            T = analysis.geo_tail_threshold(1 / p, p, rho)
            tail = (1 - p) ** max(0, math.ceil(T) - 1)
            worst = max(worst, tail / rho)
    report.add(Check("single geometric, exact tail <= rho", worst <= 1, f"grid=100x5, max tail/rho={worst:.4f}"))

    ps = np.linspace(0.3, 0.9, 10)
    X = rng.geometric(ps, size=(samples, ps.shape[0])).sum(axis=1)
    mu = float(np.sum(1 / ps))
    for rho in (0.1, 0.01):
        T = analysis.geo_tail_threshold(mu, 0.3, rho)
        rate = float(np.mean(X >= T))
        report.add(Check(f"10 geometrics, Pr[X >= T] <= rho={rho}", rate <= rho, f"n={samples} T={T:.2f} tail={rate:.5f}"))

    grid = [(t, k, rho) for k in range(2, 201) for t in range(1, k // 2 + 1) for rho in (0.3, 0.1, 0.01, 1e-4)]
    viol = [g for g in grid if analysis.coupon_budget(*g) > analysis.coupon_budget_simple(g[0], g[2]) + 1e-9]
    report.add(Check("R_{t,k,rho} <= 6 ln2 (t+1) + 2 ln(1/rho)/ln(3/2), t <= k/2", not viol,
                     f"grid={len(grid)}, violations={len(viol)}"))

    for k, t in ((8, 4), (16, 8), (32, 16), (64, 8)):
        for rho in (0.1, 0.01):
            R = analysis.coupon_budget(t, k, rho)
            probs = (2 / 3) * (k - np.arange(t)) / k
            draws = rng.geometric(probs, size=(samples // 10, t)).sum(axis=1)
            rate = float(np.mean(draws > R))
            report.add(Check(f"coupon process k={k} t={t}: Pr[draws > R] <= rho={rho}", rate <= rho,
                             f"n={samples // 10} R={R:.2f} tail={rate:.5f}"))


def suite_run_length(report: Report, kmax: int = 32) -> None:
    worst = -1.0
    count = 0
    bad = []
    for k in range(1, kmax + 1):
        for t in range(1, k + 1):
            for ell in range(1, k - t + 1):
                ex = analysis.run_length_exact(k, t, ell)
                bd = analysis.run_length_bound(k, t, ell)
                count += 1
                worst = max(worst, ex - bd)
                if ex > bd + 1e-12:
                    bad.append((k, t, ell))
    report.add(Check(f"exact run probability <= bound, k <= {kmax}", not bad,
                     f"cases={count}, violations={len(bad)}, max(exact - bound)={worst:.4g}"))


def suite_ampest(report: Report, samples: int = 10**5, seed: int = 0) -> None:
    rng = make_rng(seed)
    target = 8 / math.pi**2
    for a in (0.01, 0.1, 0.3, 0.5, 0.9):
        for M in (16, 64, 256):
            y = qpe_outcome_sample(a, M, rng, size=samples)
            est = np.sin(np.pi * y / M) ** 2
            bound = 2 * math.pi * math.sqrt(a * (1 - a)) / M + math.pi**2 / M**2
            hits = int(np.sum(np.abs(est - a) <= bound + 1e-12))
            report.add(rate_check(f"amp_est a={a} M={M} error bound", hits, samples, target))
    a = math.sin(math.pi * 3 / 16) ** 2
    ys = qpe_outcome_sample(a, 16, rng, size=1000)
    report.add(Check("on-grid a = sin^2(3 pi/16), M=16 is exact", bool(np.all(np.isin(ys, (3, 13)))), "n=1000"))
    ys = qpe_outcome_sample(0.0, 64, rng, size=1000)
    report.add(Check("a = 0 gives estimate 0", bool(np.all(ys == 0)), "n=1000"))


def suite_counting(report: Report, trials: int = 10**4, seed: int = 0, N: int = 4096) -> None:
    rho = 0.05
    for ci, k in enumerate((0, 1, 64, 2048)):
        inside = 0
        zeros = 0
        for tr in range(trials):
            rng = make_rng(derive_seed(seed, ci, tr))
            x = BitStringOracle.from_support(N, rng.choice(N, size=k, replace=False) + 1)
            est = estimate_k_32(x, rho, rng).value
            inside += k / 2 <= est <= 1.5 * k
            zeros += est == 0
        if k == 0:
            report.add(Check(f"k=0 returns 0 on every trial (N={N})", zeros == trials, f"n={trials} zeros={zeros}"))
        else:
            report.add(rate_check(f"k_est in [k/2, 3k/2], N={N} k={k}", inside, trials, 1 - rho))


def suite_grover_exact(report: Report, pairs: int = 200, reps: int = 5, seed: int = 0) -> None:
    rng = make_rng(seed)
    misses = 0
    worst = 0.0
    runs = 0
    for _ in range(pairs):
        N = 1 << int(rng.integers(3, 13))
        k = int(rng.integers(1, N + 1))
        m, s = exact_grover_schedule(N, k)
        worst = max(worst, abs(1 - grover_success_prob(N, k, m, s)))
        x = BitStringOracle.from_support(N, rng.choice(N, size=k, replace=False) + 1)
        for _ in range(reps):
            misses += not grover_certainty(x, k, rng).verified
            runs += 1
    report.add(Check("exact Grover hits a marked index on every trial", misses == 0,
                     f"pairs={pairs} runs={runs} misses={misses}, N in 2^3..2^12"))
    report.add(Check("closed-form success probability = 1", worst <= 1e-9, f"max |1 - P|={worst:.3g}"))

    worst = 0.0
    cases = 0
    for N in (8, 16, 32, 64, 128, 256):
        for k in sorted({1, 2, 3, N // 4, N // 2, N - 1, N, int(rng.integers(1, N + 1))}):
            m, s = exact_grover_schedule(N, k)
            marked = np.sort(rng.choice(N, size=k, replace=False))
            st = DenseState.scaled_uniform(N, s) if s < 1 else DenseState.uniform(N)
            good = st.good_positions(marked)
            for _ in range(m):
                st = apply_grover_iterate(st, good)
            worst = max(worst, abs(1 - st.probability(good)))
            cases += 1
    report.add(Check("dense statevector agrees (N <= 256)", worst <= 1e-9, f"cases={cases} max |1 - P|={worst:.3g}"))
    with use_backend("dense"):
        misses = 0
        for N in (8, 64, 256):
            for k in (1, 5, N // 3):
                x = BitStringOracle.from_support(N, rng.choice(N, size=k, replace=False) + 1)
                misses += sum(not grover_certainty(x, k, rng).verified for _ in range(3))
    report.add(Check("dense-backend runs hit on every trial", misses == 0, "runs=27"))


def _chi2_uniform(counts: dict, n_cells: int) -> tuple[float, float]:
    obs = np.zeros(n_cells)
    obs[: len(counts)] = list(counts.values())
    res = stats.chisquare(obs)
    return float(res.statistic), float(res.pvalue)


def suite_coupon(report: Report, trials: int = 10**4, seed: int = 0, N: int = 1024) -> None:
    grid = [(k, t) for k in (4, 8, 16) for t in sorted({1, max(1, k // 4), k // 2})]
    for ci, (k, t) in enumerate(grid):
        cap = 10 * math.ceil(analysis.coupon_budget(t, k, 0.01)) + 100
        rounds = np.empty(trials, dtype=np.int64)
        subsets: dict[tuple, int] = {}
        x_rng = make_rng(derive_seed(seed, ci))
        x = BitStringOracle.from_support(N, x_rng.choice(N, size=k, replace=False) + 1)
        for tr in range(trials):
            rng = make_rng(derive_seed(seed, ci, tr))
            res = grover_coupon(x, cap, k, t, rng)
            rounds[tr] = res.rounds if len(res.found) == t else cap + 1
            key = tuple(res.found)
            subsets[key] = subsets.get(key, 0) + 1
        for rho in (0.1, 0.01):
            R = analysis.coupon_budget(t, k, rho)
            over = int(np.sum(rounds > R))
            report.add(fail_rate_check(f"coupon k={k} t={t}: Pr[rounds > R={R:.2f}]", over, trials, rho))
        n_cells = math.comb(k, t)
        if n_cells > 1 and trials / n_cells >= 5:
            chi2, pval = _chi2_uniform(subsets, n_cells)
            report.add(Check(f"coupon k={k} t={t}: t-subsets uniform (chi2, alpha=0.001)", pval >= 1e-3,
                             f"n={trials} subsets={n_cells} chi2={chi2:.1f} p={pval:.4f}"))


def _budget_for(rec: TrialRecord) -> float:
    lam = max(rec.lam or 6.0, 1.0)
    return analysis.query_budget("multiple_fast", N=rec.N, k=max(rec.k, 1), rho=rec.rho, lam=lam).queries


def suite_multifind(
    report: Report,
    trials: int = 2000,
    seed: int = 0,
    N: int = 1 << 16,
    ks: tuple[int, ...] = (4, 16, 64, 256),
    rho: float = 0.05,
) -> None:
    for mode in ("simple", "query_optimal"):
        mean_q = []
        ratios = []
        for k in ks:
            params = {"N": N, "k": k, "rho": rho, "mode": mode}
            if mode == "simple":
                params["lam"] = 6.0
            spec = SweepSpec("multifind", {key: [val] for key, val in params.items()}, trials=trials, seed=seed)
            fails = 0
            unsound = 0
            qs = []
            paths: dict[str, int] = {}
            for _, rec, extra in _iter_trials(spec):
                fails += not rec.success
                unsound += not extra["sound"]
                qs.append(rec.queries)
                ratios.append(rec.queries / _budget_for(rec))
                paths[extra["path"]] = paths.get(extra["path"], 0) + 1
            mean_q.append(float(np.mean(qs)))
            c = fail_rate_check(f"multifind {mode} N={N} k={k}: failure rate", fails, trials, rho)
            c.detail += f" paths={paths} mean queries={mean_q[-1]:.0f}"
            report.add(c)
            report.add(Check(f"multifind {mode} N={N} k={k}: soundness", unsound == 0, f"n={trials} unsound trials={unsound}"))
        report.add(slope_check(f"multifind {mode}: log queries vs log k", ks, mean_q, 0.5, 0.1))
        r = np.asarray(ratios)
        fit = float(np.median(r))
        spread = float(max(r.max() / fit, fit / r.min()))
        report.add(Check(f"multifind {mode}: queries within 10x of fitted constant * budget", spread <= 10,
                         f"n={r.shape[0]} fitted constant={fit:.3g} ratio range=[{r.min():.3g}, {r.max():.3g}] max spread={spread:.3g}"))


def suite_summing(
    report: Report,
    trials: int = 2000,
    slope_trials: int = 500,
    seed: int = 0,
    N: int = 4096,
    rho: float = 0.05,
    rate_deltas: tuple[float, ...] = (0.1, 0.02),
    slope_deltas: tuple[float, ...] = (0.32, 0.08, 0.02, 0.005),
) -> None:
    base_q: dict[float, list] = {}
    for mode in ("simple", "query_optimal"):
        sum_q: dict[float, list] = {}
        for di, delta in enumerate(sorted(set(rate_deltas) | set(slope_deltas), reverse=True)):
            n = trials if delta in rate_deltas else slope_trials
            spec = SweepSpec("approx_sum", {"N": [N], "delta": [delta], "rho": [rho], "mode": [mode]}, trials=n, seed=seed)
            ok = 0
            ok_base = 0
            decomp_bad = 0
            qs = []
            for cell, rec, extra in _iter_trials(spec):
                ok += rec.success
                qs.append(rec.queries)
                v = extra["vector"]
                if extra["branch"] == "hybrid":
                    # exact decomposition identity against direct summation
                    z = extra["threshold"]
                    above = v.keys >= z.key
                    lhs = float(v.values[above].sum()) + z.value * float(_rescaled_weights(v, z).sum())
                    decomp_bad += abs(lhs - v.total()) > 1e-9 * max(1.0, v.total())
                if mode == "simple":
                    # baseline on the same instance, fresh ledger and stream
                    v.ledger.reset()
                    est = N * mean_estimate_baseline(v, delta, rho, make_rng(derive_seed(rec.seed, 1)))
                    base_q.setdefault(delta, []).append(v.ledger.oracle_queries)
                    ok_base += abs(est - v.total()) <= delta * v.total()
            sum_q[delta] = qs
            if delta in rate_deltas:
                report.add(rate_check(f"approx_sum {mode} N={N} delta={delta}: |s~ - s| <= delta s", ok, n, 1 - rho))
                report.add(Check(f"approx_sum {mode} delta={delta}: exact decomposition identity", decomp_bad == 0,
                                 f"n={n} violations={decomp_bad}"))
                if mode == "simple":
                    report.add(rate_check(f"baseline N={N} delta={delta}: |s~ - s| <= delta s", ok_base, n, 1 - rho))
        ds = sorted(slope_deltas, reverse=True)
        report.add(slope_check(f"approx_sum {mode}: log queries vs log(1/delta)", [1 / d for d in ds],
                               [np.mean(sum_q[d]) for d in ds], 0.5, 0.1))
    ds = sorted(slope_deltas, reverse=True)
    report.add(slope_check("baseline: log queries vs log(1/delta)", [1 / d for d in ds],
                           [np.mean(base_q[d]) for d in ds], 1.0, 0.1))


def suite_oracle(report: Report, seed: int = 0, random_per_n: int = 200) -> None:
    rng = make_rng(seed)

    def instances():
        for N in (2, 4, 8):
            for bits in itertools.product("01", repeat=N):
                yield "".join(bits)
        for N in (16, 32, 64):
            for _ in range(random_per_n):
                yield "".join(rng.choice(["0", "1"], size=N, p=[0.7, 0.3]))

    mask_bad = restrict_bad = cases = 0
    for s in instances():
        N = len(s)
        x = BitStringOracle(s)
        support = [i + 1 for i, c in enumerate(s) if c == "1"]
        subsets = (
            itertools.chain.from_iterable(itertools.combinations(support, r) for r in range(len(support) + 1))
            if N <= 8
            else [tuple(sorted(rng.choice(support, size=rng.integers(0, len(support) + 1), replace=False).tolist()))
                  if support else ()]
        )
        for J in subsets:
            want = "".join("0" if (i + 1) in J else s[i] for i in range(N))
            mask_bad += mask_found(x, J).bits() != want
            cases += 1
        for lo in range(0, N + 1):
            for hi in range(lo + 2, N + 2):
                y = restrict_interval(x, lo, hi)
                length = hi - 1 - lo
                dom = 1
                while dom < length:
                    dom *= 2
                want = "".join(s[lo + j] if lo + j + 1 < hi else "0" for j in range(dom))
                restrict_bad += y.bits() != want
                cases += 1
    report.add(Check("mask_found reproduces z (all J for N <= 8, sampled J to N = 64)", mask_bad == 0, f"mismatches={mask_bad}"))
    report.add(Check("restrict_interval reproduces y (all intervals, N <= 64)", restrict_bad == 0,
                     f"mismatches={restrict_bad} total cases={cases}"))

    thr_bad = thr_cases = 0
    for N in (2, 4, 8, 16, 32, 64):
        for b in (1, 2, 3, 8):
            for _ in range(20):
                raw = rng.integers(0, 2**b, size=N)
                v = FixedVector(None, b, raw=raw)  # type: ignore[arg-type]
                for zr in range(0, 2**b + 1):
                    z = zr / 2**b
                    want = "".join("1" if raw[i] / 2**b >= z else "0" for i in range(N))
                    thr_bad += threshold_oracle(v, z).bits() != want
                    thr_cases += 1
                for j in range(1, N + 1):
                    # tie-broken: entry i counts iff (raw_i, i) >= (raw_j, j)
                    want = "".join("1" if (raw[i], i) >= (raw[j - 1], j - 1) else "0" for i in range(N))
                    thr_bad += threshold_oracle(v, v.threshold_at(j)).bits() != want
                    thr_cases += 1
    report.add(Check("threshold_oracle reproduces [v_i >= z] (plain and tie-broken)", thr_bad == 0,
                     f"cases={thr_cases} mismatches={thr_bad}"))


SUITES: dict[str, Callable] = {
    "harmonic": suite_harmonic,
    "tails": suite_tails,
    "run_length": suite_run_length,
    "ampest": suite_ampest,
    "counting": suite_counting,
    "grover_exact": suite_grover_exact,
    "coupon": suite_coupon,
    "multifind": suite_multifind,
    "summing": suite_summing,
    "oracle": suite_oracle,
}


def verify_bounds(suite: str, **options) -> Report:
    """Run one verification suite; ``options`` override its sample sizes and seed."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    report = Report(suite)
    SUITES[suite](report, **options)
    return report
