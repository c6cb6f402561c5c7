import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multisearch.counting import (
    AmplitudeSource,
    amp_est,
    approx_count,
    estimate_k_32,
    mean_estimate_baseline,
    median_repeats,
    next_pow2,
    oracle_source,
)
from multisearch.oracle import BitStringOracle, FixedVector, QueryLedger


def random_oracle(n, k, rng):
    return BitStringOracle.from_support(n, rng.choice(n, size=k, replace=False) + 1)


def source(a, ledger=None):
    ledger = ledger or QueryLedger()
    return AmplitudeSource(a, lambda n: ledger.charge(n), ledger, 4.0)


def test_next_pow2():
    assert [next_pow2(x) for x in (0.3, 1, 2, 3, 16, 17, 1000.5)] == [1, 1, 2, 4, 16, 32, 1024]


def test_median_repeats():
    assert median_repeats(0.05) == 2 * math.ceil(4.5 * math.log(20)) + 1
    assert median_repeats(0.05) % 2 == 1
    with pytest.raises(ValueError):
        median_repeats(1.0)


def test_amp_est_zero_is_certain():
    rng = np.random.default_rng(0)
    assert all(amp_est(source(0.0), 64, rng) == 0.0 for _ in range(200))


def test_amp_est_on_grid_exact():
    a = math.sin(math.pi * 3 / 16) ** 2
    rng = np.random.default_rng(0)
    assert all(amp_est(source(a), 16, rng) == pytest.approx(a, abs=1e-15) for _ in range(100))


def test_amp_est_charges_and_rounds_M():
    led = QueryLedger()
    amp_est(source(0.3, led), 10, np.random.default_rng(0))
    # M rounded to 16; M controlled-U plus M inverses
    assert led.oracle_queries == 32
    assert led.analytic_gates == 64
    with pytest.raises(ValueError):
        amp_est(source(0.3), 0, np.random.default_rng(0))


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 1), st.sampled_from([2, 8, 64, 512]), st.integers(0, 2**32 - 1))
def test_amp_est_output_on_grid(a, M, seed):
    est = amp_est(source(a), M, np.random.default_rng(seed))
    y = math.asin(math.sqrt(est)) * M / math.pi
    assert abs(y - round(y)) < 1e-6 or abs((M - y) - round(M - y)) < 1e-6


def test_amp_est_bound_rate_a03_M64():
    rng = np.random.default_rng(1)
    n = 10**5
    from multisearch.qsim import qpe_outcome_sample

    y = qpe_outcome_sample(0.3, 64, rng, size=n)
    est = np.sin(np.pi * y / 64) ** 2
    bound = 2 * math.pi * math.sqrt(0.21) / 64 + math.pi**2 / 64**2
    target = 8 / math.pi**2
    assert np.mean(np.abs(est - 0.3) <= bound) >= target - 3 * math.sqrt(target * (1 - target) / n)


def test_oracle_source_fields():
    x = random_oracle(64, 4, np.random.default_rng(0))
    s = oracle_source(x)
    assert s.a == 4 / 64 and s.qubits == 7


def test_count_zero_is_exact():
    rng = np.random.default_rng(2)
    for _ in range(50):
        x = BitStringOracle.from_support(1024, [])
        assert approx_count(x, 0.5, 0.1, rng).value == 0


def test_count_full_clamped():
    rng = np.random.default_rng(3)
    for _ in range(30):
        x = BitStringOracle.from_support(256, range(1, 257))
        assert 128 <= approx_count(x, 0.5, 0.1, rng).value <= 256


def test_count_eps_range():
    x = BitStringOracle.from_support(16, [1])
    with pytest.raises(ValueError):
        approx_count(x, 1 / 48, 0.1, np.random.default_rng(0))
    with pytest.raises(ValueError):
        approx_count(x, 1.5, 0.1, np.random.default_rng(0))


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 10).flatmap(lambda e: st.tuples(st.just(1 << e), st.integers(0, 1 << e))), st.integers(0, 2**32 - 1))
def test_count_within_domain(nk, seed):
    n, k = nk
    rng = np.random.default_rng(seed)
    est = approx_count(random_oracle(n, k, rng), 0.5, 0.2, rng)
    assert 0 <= est.value <= n
    assert est.queries_used > 0


def test_count_rate_n1024_k100():
    rng = np.random.default_rng(4)
    n_trials = 2000
    ok = sum(abs(approx_count(random_oracle(1024, 100, rng), 0.5, 0.05, rng).value - 100) <= 50 for _ in range(n_trials))
    assert ok / n_trials >= 0.95 - 3 * math.sqrt(0.95 * 0.05 / n_trials)


@pytest.mark.parametrize("rho", [0.1, 0.01])
def test_median_boosting_failure_rate(rho):
    rng = np.random.default_rng(int(1 / rho))
    n_trials = 1500
    fails = 0
    for _ in range(n_trials):
        k = int(rng.integers(1, 1025))
        est = estimate_k_32(random_oracle(1024, k, rng), rho, rng).value
        fails += not k / 2 <= est <= 1.5 * k
    assert fails / n_trials <= rho + 3 * math.sqrt(rho * (1 - rho) / n_trials)


def test_estimate_k_32_n4096_k64_rate():
    rng = np.random.default_rng(5)
    n_trials = 1500
    ok = sum(32 <= estimate_k_32(random_oracle(4096, 64, rng), 0.05, rng).value <= 96 for _ in range(n_trials))
    assert ok / n_trials >= 0.95 - 3 * math.sqrt(0.95 * 0.05 / n_trials)


def test_baseline_zero_vector():
    assert mean_estimate_baseline(FixedVector(np.zeros(64)), 0.1, 0.1, np.random.default_rng(0)) == 0.0


def test_baseline_constant_vector():
    rng = np.random.default_rng(6)
    v = FixedVector(np.full(256, 0.375), bits=8)
    for _ in range(20):
        assert mean_estimate_baseline(v, 0.05, 0.1, rng) == pytest.approx(0.375, abs=0.05 * 0.375)


def test_baseline_rate_n1024():
    rng = np.random.default_rng(7)
    n_trials = 400
    ok = 0
    for _ in range(n_trials):
        v = FixedVector.random(1024, rng)
        ok += abs(1024 * mean_estimate_baseline(v, 0.05, 0.05, rng) - v.total()) <= 0.05 * v.total()
    assert ok / n_trials >= 0.95 - 3 * math.sqrt(0.95 * 0.05 / n_trials)


def test_baseline_queries_scale_inverse_delta():
    q = []
    for delta in (0.2, 0.05):
        v = FixedVector.random(1024, np.random.default_rng(8))
        mean_estimate_baseline(v, delta, 0.1, np.random.default_rng(9))
        q.append(v.ledger.oracle_queries)
    assert 3 < q[1] / q[0] < 5
