import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multisearch.oracle import (
    BitStringOracle,
    FixedVector,
    QueryLedger,
    SortedIndexList,
    Threshold,
    load_bits,
    load_vector,
    mask_found,
    rescaled_amplitude,
    restrict_interval,
    threshold_oracle,
)


def test_ledger_charge_and_reset():
    led = QueryLedger()
    led.charge(3, 2.2)
    led.charge(1)
    assert led.snapshot() == (4, 3)
    led.reset()
    assert led.snapshot() == (0, 0)
    with pytest.raises(ValueError):
        led.charge(-1)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(1, 200)))
def test_sorted_index_list_matches_set(items):
    J = SortedIndexList()
    seen = set()
    for i in items:
        assert J.insert(i) == (i not in seen)
        seen.add(i)
    assert list(J) == sorted(seen)
    assert len(J) == len(seen)
    assert all(i in J for i in seen)
    assert 0 not in J


def test_query_counts_and_values():
    x = BitStringOracle("0110")
    assert [x.query(i) for i in range(1, 5)] == [0, 1, 1, 0]
    assert x.ledger.oracle_queries == 4
    with pytest.raises(IndexError):
        x.query(0)
    with pytest.raises(IndexError):
        x.query(5)


def test_bitstring_validation():
    with pytest.raises(ValueError):
        BitStringOracle("011")
    with pytest.raises(ValueError):
        BitStringOracle("0120")
    with pytest.raises(ValueError):
        BitStringOracle("1")


def test_from_support_roundtrip():
    x = BitStringOracle.from_support(8, [1, 8, 3])
    assert x.bits() == "10100001"
    assert list(x.support()) == [1, 3, 8]
    assert x.hamming_weight() == 3


def test_mask_found_semantics_and_cost():
    x = BitStringOracle("01101001")
    z = mask_found(x, [2, 5])
    assert z.bits() == "00100001"
    z.query(3)
    # one root query plus |J| log2 N comparator gates
    assert x.ledger.snapshot() == (1, 2 * 3)


def test_mask_found_rejects_unmarked():
    with pytest.raises(ValueError):
        mask_found(BitStringOracle("0100"), [1])


def test_restrict_interval_semantics():
    x = BitStringOracle("01101001")
    y = restrict_interval(x, 1, 7)  # positions 2..6
    assert y.n_total == 8
    assert y.bits() == "11010000"
    y1 = restrict_interval(x, 2, 4)  # position 3 only
    assert y1.n_total == 1 and y1.bits() == "1"
    with pytest.raises(ValueError):
        restrict_interval(x, 3, 4)
    with pytest.raises(ValueError):
        restrict_interval(x, 0, 10)


def test_derived_oracles_share_root_ledger():
    x = BitStringOracle("01101001")
    restrict_interval(mask_found(x, [2]), 0, 5).query(3)
    assert x.ledger.oracle_queries == 1


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6).flatmap(lambda e: st.lists(st.integers(0, 1), min_size=1 << e, max_size=1 << e)), st.data())
def test_restrict_interval_property(bits, data):
    n = len(bits)
    lo = data.draw(st.integers(0, n - 1))
    hi = data.draw(st.integers(lo + 2, n + 1))
    y = restrict_interval(BitStringOracle(bits), lo, hi)
    length = hi - 1 - lo
    assert y.n_total >= length and y.n_total < 2 * max(length, 1) + 1
    assert [int(c) for c in y.bits()[:length]] == bits[lo:hi - 1]
    assert set(y.bits()[length:]) <= {"0"}


def test_fixed_vector_rounding_and_clip():
    v = FixedVector([0.0, 0.5, 1.0, 0.3], bits=4)
    assert list(v.raw) == [0, 8, 15, 5]
    assert v.values[2] == 15 / 16
    with pytest.raises(ValueError):
        FixedVector([0.1, 1.2], bits=4)
    with pytest.raises(ValueError):
        FixedVector([0.1, 0.2, 0.3], bits=4)


def test_fixed_vector_keys_break_ties_by_index():
    v = FixedVector([0.5, 0.5, 0.25, 0.5], bits=2)
    order = sorted(range(1, 5), key=v.key_of)
    assert order == [3, 1, 2, 4]


def test_threshold_oracle_plain_and_tiebroken():
    v = FixedVector([0.5, 0.5, 0.25, 0.75], bits=2)
    assert threshold_oracle(v, 0.5).bits() == "1101"
    assert threshold_oracle(v, 0.0).bits() == "1111"
    assert threshold_oracle(v, v.threshold_at(2)).bits() == "0101"
    x = threshold_oracle(v, 0.3)
    x.query(1)
    # computing and uncomputing v_i
    assert v.ledger.oracle_queries == 2


def test_gather_shares_ledger_and_keys():
    v = FixedVector([0.1, 0.9, 0.4, 0.6], bits=8)
    g = v.gather([4, 2, 3])
    assert g.n_total == 4
    assert g.key_of(2) == v.key_of(2)
    assert g.key_of(4) == -1
    g.query(1)
    assert v.ledger.oracle_queries == 1
    assert list(g.parent_index) == [4, 2, 3]


def test_rescaled_amplitude_direct():
    v = FixedVector([0.2, 0.4, 0.8, 0.1], bits=16)
    z = Threshold(float(v.values[1]), v.key_of(2))
    w = np.array([v.values[0] / z.value, 0.0, 0.0, v.values[3] / z.value])
    assert rescaled_amplitude(v, z, 0.01) == pytest.approx(w.mean(), abs=4 * 2 ** -math.ceil(math.log2(4 * 4 / 0.01)))
    with pytest.raises(ValueError):
        rescaled_amplitude(v, 0.0, 0.1)


def test_load_files(tmp_path):
    p = tmp_path / "x.txt"
    p.write_text("0110\n1000\n")
    assert load_bits(p).bits() == "01101000"
    p.write_text("1\n0\n# comment\n1\n1\n")
    assert load_bits(p).bits() == "1011"
    q = tmp_path / "v.txt"
    q.write_text("0b1\n0.25\n0b0001\n0\n")
    v = load_vector(q, bits=4)
    assert list(v.raw) == [8, 4, 1, 0]
    q.write_text("0b10101\n0\n")
    with pytest.raises(ValueError):
        load_vector(q, bits=4)
