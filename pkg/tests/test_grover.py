import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multisearch.grover import (
    exact_grover_schedule,
    get_backend,
    grover_23,
    grover_certainty,
    grover_expectation,
    max_find,
    max_find_boosted,
    run_grover,
    use_backend,
)
from multisearch.oracle import BitStringOracle, FixedVector
from multisearch.qsim import grover_success_prob


def random_oracle(n, k, rng):
    return BitStringOracle.from_support(n, rng.choice(n, size=k, replace=False) + 1)


# (N, k) -> (m, amp_scale), evaluated independently at 40 digits
SCHEDULES = {
    (4, 1): (1, 1.0),
    (64, 1): (6, 0.92986184236633513),
    (64, 3): (4, 0.64327871161697724),
    (1024, 7): (9, 0.99757323682944925),
    (4096, 1): (50, 0.99065386600844304),
    (8, 8): (0, 1.0),
    (16, 5): (1, 0.8),
}


@pytest.mark.parametrize("nk", sorted(SCHEDULES))
def test_exact_schedule_frozen(nk):
    m, s = exact_grover_schedule(*nk)
    assert m == SCHEDULES[nk][0]
    assert s == pytest.approx(SCHEDULES[nk][1], rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 16).flatmap(lambda e: st.tuples(st.just(1 << e), st.integers(1, 1 << e))))
def test_exact_schedule_hits_with_certainty(nk):
    n, k = nk
    m, s = exact_grover_schedule(n, k)
    assert grover_success_prob(n, k, m, s) == pytest.approx(1.0, abs=1e-9)
    # m is the smallest count that can reach the good subspace
    assert (2 * m + 1) * math.asin(math.sqrt(k / n)) >= math.pi / 2 - 1e-9


def test_exact_schedule_rejects():
    with pytest.raises(ValueError):
        exact_grover_schedule(8, 0)
    with pytest.raises(ValueError):
        exact_grover_schedule(8, 9)


@pytest.mark.parametrize("backend", ["rotation", "dense"])
def test_grover_certainty_all_weights_small(backend):
    rng = np.random.default_rng(5)
    with use_backend(backend):
        for n in (2, 4, 8, 16, 32, 64):
            for k in range(1, n + 1):
                x = random_oracle(n, k, rng)
                out = grover_certainty(x, k, rng)
                assert out.verified and x.query(out.index) == 1
                m, _ = exact_grover_schedule(n, k)
                assert out.queries_used == m + 1


def test_grover_certainty_charges_ledger():
    x = random_oracle(1024, 7, np.random.default_rng(0))
    out = grover_certainty(x, 7, np.random.default_rng(1))
    assert x.ledger.oracle_queries == out.queries_used == 10


def test_backend_context_restores():
    assert get_backend() == "rotation"
    with use_backend("dense"):
        assert get_backend() == "dense"
    assert get_backend() == "rotation"
    with pytest.raises(ValueError):
        with use_backend("gpu"):
            pass


def test_run_grover_returns_one_based():
    rng = np.random.default_rng(0)
    x = BitStringOracle("0001")
    assert run_grover(x, 1, rng) == 4


def test_grover_expectation_finds_and_counts():
    rng = np.random.default_rng(2)
    for k in (1, 3, 50):
        x = random_oracle(256, k, rng)
        out = grover_expectation(x, rng)
        assert out.verified and x.query(out.index) == 1
        assert x.ledger.oracle_queries == out.queries_used + 1


def test_grover_expectation_empty_truncates():
    rng = np.random.default_rng(2)
    x = BitStringOracle.from_support(256, [])
    out = grover_expectation(x, rng, hard_cap=500)
    assert out.truncated and out.index is None
    assert out.queries_used <= 500
    assert x.ledger.oracle_queries == out.queries_used


def test_grover_expectation_backends_agree_in_mean():
    qs = {}
    for backend in ("rotation", "dense"):
        rng = np.random.default_rng(9)
        tot = 0
        with use_backend(backend):
            for _ in range(1500):
                tot += grover_expectation(random_oracle(64, 2, rng), rng).queries_used
        qs[backend] = tot / 1500
    assert qs["rotation"] == pytest.approx(qs["dense"], rel=0.1)


def test_grover_23_success_rate():
    rng = np.random.default_rng(4)
    n_trials = 3000
    hits = 0
    for _ in range(n_trials):
        x = random_oracle(1024, 5, rng)
        out = grover_23(x, 5, rng)
        hits += out.verified
        assert out.queries_used <= math.floor(9 * math.sqrt(1024 / 5))
    assert hits / n_trials >= 2 / 3 - 3 * math.sqrt(2 / 9 / n_trials)


def test_grover_23_rejects_zero_lb():
    with pytest.raises(ValueError):
        grover_23(BitStringOracle("0001"), 0, np.random.default_rng(0))


def argmax_tiebroken(v):
    return int(np.argmax(v.keys)) + 1


def test_max_find_rate():
    rng = np.random.default_rng(6)
    n_trials = 600
    hits = 0
    for _ in range(n_trials):
        v = FixedVector.random(256, rng, bits=6)
        hits += max_find(v, rng) == argmax_tiebroken(v)
    assert hits / n_trials >= 0.5


def test_max_find_trivial_and_boosted():
    rng = np.random.default_rng(7)
    assert max_find(FixedVector([0.3]), rng) == 1
    v = FixedVector.random(1024, rng)
    assert max_find_boosted(v, 1e-3, rng) == argmax_tiebroken(v)
    with pytest.raises(ValueError):
        max_find_boosted(v, 0.0, rng)
