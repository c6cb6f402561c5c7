"""Simulated quantum search, counting and summing with exact query accounting."""
from .analysis import Budget, coupon_budget, geo_tail_threshold, harmonic, query_budget, run_length_bound
from .counting import CountEstimate, amp_est, approx_count, estimate_k_32, mean_estimate_baseline
from .grover import grover_23, grover_certainty, grover_expectation, max_find, use_backend
from .harness import SweepSpec, TrialRecord, emit_csv, run_trials, verify_bounds
from .multifind import MultiFindResult, find_all, grover_certainty_multiple, grover_coupon, grover_multiple_fast
from .oracle import (
    BitStringOracle,
    FixedVector,
    QueryLedger,
    SortedIndexList,
    Threshold,
    mask_found,
    restrict_interval,
    threshold_oracle,
)
from .qsim import derive_seed, make_rng
from .summing import SumEstimate, approx_sum, choose_params, quantile_estimate

__all__ = [
    "BitStringOracle",
    "Budget",
    "CountEstimate",
    "FixedVector",
    "MultiFindResult",
    "QueryLedger",
    "SortedIndexList",
    "SumEstimate",
    "SweepSpec",
    "Threshold",
    "TrialRecord",
    "amp_est",
    "approx_count",
    "approx_sum",
    "choose_params",
    "coupon_budget",
    "derive_seed",
    "emit_csv",
    "estimate_k_32",
    "find_all",
    "geo_tail_threshold",
    "grover_23",
    "grover_certainty",
    "grover_certainty_multiple",
    "grover_coupon",
    "grover_expectation",
    "grover_multiple_fast",
    "harmonic",
    "make_rng",
    "mask_found",
    "max_find",
    "mean_estimate_baseline",
    "query_budget",
    "quantile_estimate",
    "restrict_interval",
    "run_length_bound",
    "run_trials",
    "threshold_oracle",
    "use_backend",
    "verify_bounds",
]
