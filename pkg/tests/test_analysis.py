import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from multisearch.analysis import (
    EULER_GAMMA,
    coupon_budget,
    coupon_budget_simple,
    geo_tail_threshold,
    harmonic,
    harmonic_bounds_check,
    query_budget,
    run_length_bound,
    run_length_exact,
)


def test_harmonic_exact():
    assert harmonic(0) == 0.0
    assert harmonic(10) - harmonic(5) == pytest.approx(1627 / 2520, rel=1e-15)
    assert harmonic(1) - EULER_GAMMA == pytest.approx(0.42278433509846713939, rel=1e-15)
    assert harmonic(20) == pytest.approx(float(sum(Fraction(1, j) for j in range(1, 21))), rel=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 5000).flatmap(lambda k: st.tuples(st.just(k), st.integers(0, k))))
def test_harmonic_bounds_hold(kt):
    assert all(harmonic_bounds_check(*kt))


def test_harmonic_bounds_rejects():
    with pytest.raises(ValueError):
        harmonic_bounds_check(0)
    with pytest.raises(ValueError):
        harmonic_bounds_check(4, 5)


def test_coupon_budget_frozen():
    assert coupon_budget(1, 1, 0.1) == pytest.approx(6.271248090258605, rel=1e-13)
    assert coupon_budget(8, 16, 0.1) == pytest.approx(31.85261097843008617, rel=1e-13)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 4000).flatmap(lambda k: st.tuples(st.just(k), st.integers(1, k // 2))),
       st.floats(1e-6, 0.9))
def test_coupon_budget_below_simple(kt, rho):
    k, t = kt
    assert coupon_budget(t, k, rho) <= coupon_budget_simple(t, rho) + 1e-9


def test_geo_tail_frozen():
    assert geo_tail_threshold(2, 0.5, 0.1) == pytest.approx(9.416444912014506, rel=1e-13)
    assert geo_tail_threshold(3, 1.0, 0.1) == pytest.approx(6 * math.log(2))
    with pytest.raises(ValueError):
        geo_tail_threshold(0, 0.5, 0.1)


@pytest.mark.parametrize("args,want", [
    ((4, 2, 2), Fraction(1, 2)),
    ((32, 8, 12), Fraction(62983, 584350)),
    ((32, 8, 6), Fraction(1086409, 1168700)),
    ((20, 5, 4), Fraction(1931, 1938)),
])
def test_run_length_exact_frozen(args, want):
    assert run_length_exact(*args) == pytest.approx(float(want), rel=1e-13)


def test_run_length_bound_frozen():
    assert run_length_bound(4, 2, 2) == pytest.approx(0.75)
    assert run_length_bound(32, 8, 12) == pytest.approx(21 * 0.75**12)
    with pytest.raises(ValueError):
        run_length_bound(8, 4, 5)


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 60).flatmap(lambda k: st.tuples(st.just(k), st.integers(1, k - 1))).flatmap(
    lambda kt: st.tuples(st.just(kt[0]), st.just(kt[1]), st.integers(1, kt[0] - kt[1]))))
def test_run_length_bound_dominates_exact(ktl):
    assert run_length_exact(*ktl) <= run_length_bound(*ktl) + 1e-12


def test_run_length_exact_edges():
    assert run_length_exact(10, 10, 1) == 0.0
    assert run_length_exact(10, 0, 10) == 1.0
    assert run_length_exact(10, 0, 11) == 0.0


def test_query_budget_multiple_fast_frozen():
    b = query_budget("multiple_fast", N=2**16, k=64, rho=0.05, lam=6)
    assert b.queries == pytest.approx(8516.818897297571, rel=1e-12)
    assert b.label == "multiple_fast"


def test_query_budget_labels():
    assert query_budget("grover23", N=1024, k_lb=4).queries == pytest.approx(16.0)
    assert query_budget("certainty_multiple", N=1024, k_ub=4).queries == pytest.approx(64.0)
    assert query_budget("amp_est", M=128).queries == 128
    assert query_budget("approx_count", N=1024, k=0, eps=0.5).queries == pytest.approx(32.0)
    s = query_budget("approx_sum", N=4096, p=0.01, lam=6, rho=0.1, delta=0.1)
    assert s.queries > 0 and s.gates > s.queries
    with pytest.raises(ValueError):
        query_budget("nonsense")
