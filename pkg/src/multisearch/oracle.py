"""Oracle models, oracle transformers and query accounting.

A :class:`BitStringOracle` stands in for the unitary ``U_x`` and a
:class:`FixedVector` for ``U_v``. Both hold the ground truth (needed by the
simulator to sample measurement outcomes) but the algorithms only learn about
it through :meth:`query` and through simulated Grover runs, each of which is
charged to a :class:`QueryLedger`.

Derived oracles (masked, restricted, thresholded) keep a reference to the
root ledger so every charge lands in one place.
"""
from __future__ import annotations

import bisect
import math
import os
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

__all__ = [
    "BitStringOracle",
    "FixedVector",
    "QueryLedger",
    "SortedIndexList",
    "Threshold",
    "load_bits",
    "load_vector",
    "mask_found",
    "query",
    "rescaled_amplitude",
    "restrict_interval",
    "threshold_oracle",
]


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass
class QueryLedger:
    """Exact count of oracle applications plus an analytic gate estimate."""

    oracle_queries: int = 0
    analytic_gates: int = 0

    def charge(self, queries: int, gates: float = 0) -> None:
        if queries < 0 or gates < 0:
            raise ValueError("ledger charges must be nonnegative")
        self.oracle_queries += int(queries)
        self.analytic_gates += int(math.ceil(gates))

    def reset(self) -> None:
        self.oracle_queries = 0
        self.analytic_gates = 0

    def snapshot(self) -> tuple[int, int]:
        return self.oracle_queries, self.analytic_gates


class SortedIndexList:
    """Sorted duplicate-free list of indices with logarithmic insert and lookup."""

    __slots__ = ("_items",)

    def __init__(self, items: Iterable[int] = ()) -> None:
        self._items: list[int] = sorted(set(int(i) for i in items))

    def insert(self, i: int) -> bool:
        """Insert ``i``; return False if it was already present."""
        pos = bisect.bisect_left(self._items, i)
        if pos < len(self._items) and self._items[pos] == i:
            return False
        self._items.insert(pos, int(i))
        return True

    def __contains__(self, i: object) -> bool:
        pos = bisect.bisect_left(self._items, i)  # type: ignore[arg-type]
        return pos < len(self._items) and self._items[pos] == i

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self) -> Iterator[int]:
        return iter(self._items)

    def __getitem__(self, pos: int) -> int:
        return self._items[pos]

    def __eq__(self, other: object) -> bool:
        if isinstance(other, SortedIndexList):
            return self._items == other._items
        return NotImplemented

    def __repr__(self) -> str:
        return f"SortedIndexList({self._items})"

    def to_array(self) -> np.ndarray:
        return np.asarray(self._items, dtype=np.int64)


class BitStringOracle:
    """Query access to ``x in {0,1}^N``; indices are 1-based as in ``[N]``.

    ``query_cost`` is the number of root-ledger queries one application of this
    oracle costs and ``gate_cost`` the analytic gate charge per application.
    """

    def __init__(
        self,
        bits: str | Sequence[int] | np.ndarray,
        ledger: QueryLedger | None = None,
        *,
        c_gate: float = 1.0,
    ) -> None:
        if isinstance(bits, str):
            if set(bits) - {"0", "1"}:
                raise ValueError("bit string may only contain 0 and 1")
            arr = np.frombuffer(bits.encode(), dtype=np.uint8) - ord("0")
        else:
            arr = np.asarray(bits, dtype=np.int64)
            if arr.size and (arr.min() < 0 or arr.max() > 1):
                raise ValueError("bits must be 0 or 1")
        n = int(arr.shape[0])
        if n < 2 or not _is_power_of_two(n):
            raise ValueError(f"length must be 2^n with n >= 1, got {n}")
        self._setup(n, np.flatnonzero(arr).astype(np.int64), ledger or QueryLedger(), 1, 0.0, c_gate, n)

    def _setup(self, n, marked0, ledger, query_cost, gate_cost, c_gate, root_n) -> None:
        self.n_total = n
        self._marked = marked0
        self.ledger = ledger
        self.query_cost = query_cost
        self.gate_cost = gate_cost
        self.c_gate = c_gate
        self.root_n = root_n

    @classmethod
    def _derived(cls, n, marked0, parent: BitStringOracle, *, query_cost=None, extra_gates=0.0) -> BitStringOracle:
        obj = cls.__new__(cls)
        obj._setup(
            n,
            marked0,
            parent.ledger,
            parent.query_cost if query_cost is None else query_cost,
            parent.gate_cost + extra_gates,
            parent.c_gate,
            parent.root_n,
        )
        return obj

    @classmethod
    def from_support(cls, n: int, support: Iterable[int], ledger: QueryLedger | None = None, **kw) -> BitStringOracle:
        bits = np.zeros(n, dtype=np.int64)
        idx = np.asarray(list(support), dtype=np.int64)
        if idx.size and (idx.min() < 1 or idx.max() > n):
            raise IndexError("support index out of range")
        bits[idx - 1] = 1
        return cls(bits, ledger, **kw)

    # -- accounting -----------------------------------------------------

    @property
    def log_n(self) -> float:
        return math.log2(self.root_n)

    def charge(self, count: int = 1) -> None:
        """Charge ``count`` applications of this oracle to the root ledger."""
        self.ledger.charge(count * self.query_cost, count * self.gate_cost)

    def query(self, i: int) -> int:
        if not 1 <= i <= self.n_total:
            raise IndexError(f"index {i} outside [1, {self.n_total}]")
        self.charge(1)
        return int(self._bit0(i - 1))

    def _bit0(self, pos: int) -> bool:
        j = np.searchsorted(self._marked, pos)
        return bool(j < self._marked.shape[0] and self._marked[j] == pos)

    # -- ground truth (simulator and test harness only) -------------------

    @property
    def marked_positions(self) -> np.ndarray:
        """Sorted 0-based marked positions; read by the simulator, never by algorithms."""
        return self._marked

    def hamming_weight(self) -> int:
        return int(self._marked.shape[0])

    def support(self) -> np.ndarray:
        return self._marked + 1

    def bits(self) -> str:
        out = np.zeros(self.n_total, dtype=np.uint8)
        out[self._marked] = 1
        return "".join("1" if b else "0" for b in out)

    def __repr__(self) -> str:
        return f"BitStringOracle(N={self.n_total}, query_cost={self.query_cost})"


def query(oracle: BitStringOracle, i: int) -> int:
    return oracle.query(i)


def mask_found(oracle: BitStringOracle, found: SortedIndexList | Iterable[int]) -> BitStringOracle:
    """Oracle for ``z`` with ``z_i = x_i`` off ``found`` and ``z_i = 0`` on it.

    Every index in ``found`` must be marked in ``x``. Each query to ``z`` costs one
    query to ``x`` plus ``|found| * c_gate * log2(N)`` gates for the ``C_j`` gates.
    """
    J = np.asarray(list(found), dtype=np.int64) - 1
    if J.size == 0:
        return BitStringOracle._derived(oracle.n_total, oracle._marked, oracle)
    m = oracle._marked
    hit = np.searchsorted(m, J)
    ok = (hit < m.shape[0]) & (m[np.minimum(hit, m.shape[0] - 1)] == J) if m.size else np.zeros(J.shape, bool)
    if not np.all(ok):
        bad = (J[~ok] + 1).tolist()
        raise ValueError(f"cannot mask unmarked indices {bad}")
    marked = np.setdiff1d(m, J, assume_unique=True)
    extra = J.size * oracle.c_gate * oracle.log_n
    return BitStringOracle._derived(oracle.n_total, marked, oracle, extra_gates=extra)


def restrict_interval(oracle: BitStringOracle, lo: int, hi: int) -> BitStringOracle:
    """Oracle for ``y_j = x_{lo+j}`` if ``lo + j < hi`` else 0, on a power-of-two domain.

    ``lo`` and ``hi`` are exclusive ends, ``0 <= lo < hi <= N + 1``.
    """
    length = hi - 1 - lo
    if not 0 <= lo < hi <= oracle.n_total + 1:
        raise ValueError(f"interval ({lo}, {hi}) outside [0, {oracle.n_total + 1}]")
    if length < 1:
        raise ValueError(f"empty interval ({lo}, {hi})")
    domain = 1 << (length - 1).bit_length()
    m = oracle._marked
    # 1-based p in (lo, hi) <=> 0-based pos in [lo, hi - 2]
    a = np.searchsorted(m, lo, side="left")
    b = np.searchsorted(m, hi - 2, side="right")
    marked = m[a:b] - lo
    extra = oracle.c_gate * oracle.log_n
    return BitStringOracle._derived(domain, marked, oracle, extra_gates=extra)


# --------------------------------------------------------------------------
# Fixed-point vectors
# --------------------------------------------------------------------------


class Threshold(NamedTuple):
    """Comparison threshold: an entry value together with its tie-breaking key."""

    value: float
    key: int


class FixedVector:
    """Query access to ``v in [0, 1 - 2^-b]^N`` in ``(0, b)`` fixed point.

    Ties are broken by index: entries compare as ``(value, index)``, encoded in
    the integer ``keys = raw * N + (i - 1)``.
    """

    def __init__(
        self,
        values: Sequence[float] | np.ndarray,
        bits: int = 32,
        ledger: QueryLedger | None = None,
        *,
        c_gate: float = 1.0,
        raw: np.ndarray | None = None,
    ) -> None:
        if bits < 1:
            raise ValueError("bit width must be positive")
        if raw is None:
            vals = np.asarray(values, dtype=np.float64)
            if vals.size and (vals.min() < 0.0 or vals.max() > 1.0):
                raise ValueError("entries must lie in [0, 1]")
            raw = np.minimum(np.rint(vals * 2.0**bits), 2**bits - 1).astype(np.int64)
        raw = np.asarray(raw, dtype=np.int64)
        n = int(raw.shape[0])
        if not _is_power_of_two(n):
            raise ValueError(f"length must be a power of two, got {n}")
        if bits + max(1, (n - 1).bit_length()) > 62:
            raise ValueError("bit width too large for tie-broken keys")
        self.bits = bits
        self.raw = raw
        self.n_total = n
        self.ledger = ledger or QueryLedger()
        self.c_gate = c_gate
        self.query_cost = 1
        self.gate_cost = 0.0
        self.root_n = n
        self.keys = raw * n + np.arange(n, dtype=np.int64)
        self.parent_index: np.ndarray | None = None

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, bits: int = 32, ledger: QueryLedger | None = None) -> FixedVector:
        """I.i.d. uniform ``bits``-bit fractions."""
        raw = rng.integers(0, 2**bits, size=n, dtype=np.int64)
        return cls(None, bits, ledger, raw=raw)  # type: ignore[arg-type]

    @property
    def values(self) -> np.ndarray:
        return self.raw / float(2**self.bits)

    @property
    def log_n(self) -> float:
        return math.log2(self.root_n)

    def charge(self, count: int = 1) -> None:
        self.ledger.charge(count * self.query_cost, count * self.gate_cost)

    def query(self, i: int) -> float:
        if not 1 <= i <= self.n_total:
            raise IndexError(f"index {i} outside [1, {self.n_total}]")
        self.charge(1)
        return float(self.raw[i - 1]) / 2**self.bits

    def key_of(self, i: int) -> int:
        return int(self.keys[i - 1])

    def threshold_at(self, i: int) -> Threshold:
        return Threshold(float(self.raw[i - 1]) / 2**self.bits, int(self.keys[i - 1]))

    def total(self) -> float:
        """Exact sum (ground truth for the harness)."""
        return float(self.raw.sum()) / 2**self.bits

    def gather(self, indices: Sequence[int] | np.ndarray) -> FixedVector:
        """View of the entries at 1-based ``indices``, zero-padded to a power of two.

        The view shares the ledger and keeps the parent's tie-breaking keys;
        padding entries sort below every real entry.
        """
        idx = np.asarray(indices, dtype=np.int64) - 1
        m = max(1, int(idx.shape[0]))
        dom = 1 << (m - 1).bit_length()
        view = FixedVector.__new__(FixedVector)
        view.bits = self.bits
        view.raw = np.zeros(dom, dtype=np.int64)
        view.raw[: idx.shape[0]] = self.raw[idx]
        view.n_total = dom
        view.ledger = self.ledger
        view.c_gate = self.c_gate
        view.query_cost = self.query_cost
        # index lookup into the sample table
        view.gate_cost = self.gate_cost + self.c_gate * self.log_n
        view.root_n = self.root_n
        view.keys = np.full(dom, -1, dtype=np.int64)
        view.keys[: idx.shape[0]] = self.keys[idx]
        view.parent_index = idx + 1
        return view

    def __repr__(self) -> str:
        return f"FixedVector(N={self.n_total}, bits={self.bits})"


def _threshold_key(v: FixedVector, z: float | Threshold) -> int:
    if isinstance(z, Threshold):
        return int(z.key)
    if z < 0:
        raise ValueError("threshold must be nonnegative")
    # v_i >= z  <=>  raw_i >= ceil(z * 2^b)  <=>  key_i >= ceil(z * 2^b) * N
    return int(math.ceil(z * 2**v.bits - 1e-9)) * v.n_total


def threshold_oracle(v: FixedVector, z: float | Threshold) -> BitStringOracle:
    """Oracle for ``x_i = [v_i >= z]``; with a :class:`Threshold` the comparison is tie-broken.

    One query to ``x`` computes ``v_i``, compares and uncomputes: two queries to ``v``.
    """
    zkey = _threshold_key(v, z)
    marked = np.flatnonzero(v.keys >= zkey).astype(np.int64)
    obj = BitStringOracle.__new__(BitStringOracle)
    obj._setup(
        v.n_total,
        marked,
        v.ledger,
        2 * v.query_cost,
        2 * v.gate_cost + v.c_gate * v.bits,
        v.c_gate,
        v.root_n,
    )
    return obj


def rescaled_amplitude(v: FixedVector, z: float | Threshold, delta: float) -> float:
    """Good-state weight ``(1/N) sum sin^2(alpha_i)`` of the rescaled small entries.

    ``w_i = v_i / z`` below the threshold and 0 otherwise; ``alpha_i`` is
    ``arcsin(sqrt(w_i))`` rounded to ``ceil(log2(4N/delta))`` fractional bits.
    """
    zval = z.value if isinstance(z, Threshold) else float(z)
    if zval <= 0:
        raise ValueError("threshold must be positive; take the classical branch for z = 0")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    w = _rescaled_weights(v, z)
    n = v.n_total
    L = math.ceil(math.log2(4 * n / delta))
    alpha = np.rint(np.arcsin(np.sqrt(w)) * 2.0**L) / 2.0**L
    return float(np.mean(np.sin(alpha) ** 2))


def _rescaled_weights(v: FixedVector, z: float | Threshold) -> np.ndarray:
    zval = z.value if isinstance(z, Threshold) else float(z)
    below = v.keys < _threshold_key(v, z)
    w = np.where(below, v.values / zval, 0.0)
    return np.clip(w, 0.0, 1.0)


# --------------------------------------------------------------------------
# Input files
# --------------------------------------------------------------------------


def _lines(path: str | os.PathLike) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]


def load_bits(path: str | os.PathLike, ledger: QueryLedger | None = None) -> BitStringOracle:
    """Bit string file: one 0/1 per line, or the whole string on one line."""
    text = "".join(_lines(path))
    return BitStringOracle(text, ledger)


def load_vector(path: str | os.PathLike, bits: int = 32, ledger: QueryLedger | None = None) -> FixedVector:
    """Vector file, one entry per line.

    ``0b0101`` is the binary fraction ``0.0101`` (at most ``bits`` digits); anything
    else is parsed as a decimal and rounded to the nearest ``bits``-bit fraction.
    """
    raw = []
    for ln in _lines(path):
        if ln.startswith("0b"):
            digits = ln[2:]
            if len(digits) > bits or set(digits) - {"0", "1"}:
                raise ValueError(f"bad binary fraction {ln!r}")
            raw.append(int(digits.ljust(bits, "0"), 2) if digits else 0)
        else:
            x = float(ln)
            if not 0.0 <= x <= 1.0:
                raise ValueError(f"entry {x} outside [0, 1]")
            raw.append(min(int(round(x * 2**bits)), 2**bits - 1))
    return FixedVector(None, bits, ledger, raw=np.asarray(raw, dtype=np.int64))  # type: ignore[arg-type]
