import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from multisearch.qsim import (
    DenseState,
    RotationState,
    apply_grover_iterate,
    derive_seed,
    grover_success_prob,
    measure_index,
    qpe_outcome_distribution,
    qpe_outcome_sample,
    sample_unmarked,
)


def dense_good_prob(n, marked, m, scale=1.0):
    st_ = DenseState.uniform(n) if scale >= 1 else DenseState.scaled_uniform(n, scale)
    good = st_.good_positions(marked)
    for _ in range(m):
        st_ = apply_grover_iterate(st_, good)
    return st_.probability(good)


def test_success_prob_single_marked_n4_is_one():
    # one iterate on N=4, k=1 lands exactly
    assert grover_success_prob(4, 1, 1) == pytest.approx(1.0, abs=1e-12)


def test_success_prob_zero_iterations_is_fraction():
    assert grover_success_prob(64, 3, 0) == pytest.approx(3 / 64)


def test_success_prob_rejects_bad_args():
    with pytest.raises(ValueError):
        grover_success_prob(8, 9, 1)
    with pytest.raises(ValueError):
        grover_success_prob(8, 1, -1)
    with pytest.raises(ValueError):
        grover_success_prob(8, 1, 1, amp_scale=1.5)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(2, 7).flatmap(lambda e: st.tuples(st.just(1 << e), st.integers(0, 1 << e))),
    st.integers(0, 12),
    st.floats(0.05, 1.0),
    st.integers(0, 2**32 - 1),
)
def test_rotation_matches_dense(nk, m, scale, seed):
    n, k = nk
    rng = np.random.default_rng(seed)
    marked = np.sort(rng.choice(n, size=k, replace=False))
    assert grover_success_prob(n, k, m, scale) == pytest.approx(dense_good_prob(n, marked, m, scale), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 20))
def test_dense_iterate_preserves_norm(e, m):
    n = 1 << e
    s = DenseState.uniform(n)
    for _ in range(m):
        s = apply_grover_iterate(s, [0])
    assert float(np.vdot(s.amplitudes, s.amplitudes).real) == pytest.approx(1.0, abs=1e-9)


def test_dense_rejects_unnormalised():
    with pytest.raises(ValueError):
        DenseState(np.ones(4))
    with pytest.raises(ValueError):
        DenseState(np.ones(3) / math.sqrt(3))


def test_rotation_iterate_accumulates():
    s = RotationState(64, 2).iterate(3).iterate(2)
    assert s.iterations == 5
    assert s.good_amp == pytest.approx(grover_success_prob(64, 2, 5))


def test_derive_seed_is_stable_and_key_sensitive():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert derive_seed(1, 2, 3) != derive_seed(1, 3, 2)
    assert 0 <= derive_seed(2**70, 1) < 2**64


@pytest.mark.parametrize("k", [1, 5, 40, 60, 63])
def test_sample_unmarked_uniform(k):
    rng = np.random.default_rng(k)
    n = 64
    marked = np.sort(rng.choice(n, size=k, replace=False))
    draws = np.array([sample_unmarked(n, marked, rng) for _ in range(4000)])
    assert not np.isin(draws, marked).any()
    free = np.setdiff1d(np.arange(n), marked)
    counts = np.array([(draws == f).sum() for f in free])
    if free.size > 1:
        assert stats.chisquare(counts).pvalue > 1e-4


def test_sample_unmarked_full_raises():
    with pytest.raises(ValueError):
        sample_unmarked(4, np.arange(4), np.random.default_rng(0))


def test_measure_index_marginals_match_dense():
    # damped start: the bad component weights marked indices by (1 - s)
    rng = np.random.default_rng(3)
    n, marked, s, m = 16, np.array([2, 7, 11]), 0.45, 1
    rot = RotationState(n, 3, s, m)
    draws = np.array([measure_index(rot, marked, rng) for _ in range(20000)])
    dense = DenseState.scaled_uniform(n, s)
    good = dense.good_positions(marked)
    for _ in range(m):
        dense = apply_grover_iterate(dense, good)
    probs = np.abs(dense.amplitudes) ** 2
    per_index = probs[:n] + probs[n:]
    expect = per_index * draws.shape[0]
    obs = np.bincount(draws, minlength=n)
    assert stats.chisquare(obs, expect).pvalue > 1e-4


def test_qpe_distribution_frozen_values():
    # independent high-precision evaluation of the two-branch kernel, a = 0.3, M = 8
    want = [0.0517888, 0.23627768229165797, 0.194208, 0.03252231770834203,
            0.0221952, 0.03252231770834203, 0.194208, 0.23627768229165797]
    assert qpe_outcome_distribution(0.3, 8) == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("a", [0.0, 0.01, 0.3, 0.5, 0.77, 1.0])
@pytest.mark.parametrize("M", [2, 16, 1024])
def test_qpe_distribution_normalised(a, M):
    assert qpe_outcome_distribution(a, M).sum() == pytest.approx(1.0, abs=1e-9)


def test_qpe_on_grid_is_exact():
    a = math.sin(math.pi * 3 / 16) ** 2
    ys = {qpe_outcome_sample(a, 16, np.random.default_rng(i)) for i in range(200)}
    assert ys <= {3, 13}


def test_qpe_rejects_bad_M():
    with pytest.raises(ValueError):
        qpe_outcome_sample(0.3, 12, np.random.default_rng(0))
    with pytest.raises(ValueError):
        qpe_outcome_sample(1.2, 16, np.random.default_rng(0))


@pytest.mark.parametrize("a,M", [(0.3, 64), (0.001, 2048), (0.9, 1024)])
def test_qpe_scalar_sampler_matches_distribution(a, M):
    rng = np.random.default_rng(11)
    n = 20000
    draws = np.array([qpe_outcome_sample(a, M, rng) for _ in range(n)])
    dist = qpe_outcome_distribution(a, M)
    # pool outcomes with small expectation into one bin
    big = dist * n >= 5
    obs = np.append(np.bincount(draws, minlength=M)[big], (~big[draws]).sum())
    exp = np.append(dist[big] * n, dist[~big].sum() * n)
    keep = exp > 0
    assert stats.chisquare(obs[keep], exp[keep] * obs.sum() / exp[keep].sum()).pvalue > 1e-4
