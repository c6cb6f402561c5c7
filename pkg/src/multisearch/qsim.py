"""Simulation engine for Grover-type dynamics and phase-estimation sampling.

Two backends are provided. The rotation backend tracks only the angle in the
two-dimensional good/bad plane and is exact for a uniform start. The dense
backend keeps the full amplitude vector and exists to cross-check the rotation
algebra on small instances.

All indices handled here are 0-based positions in the state vector; the oracle
layer translates to the 1-based indices used by the algorithms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "DenseState",
    "RotationState",
    "apply_grover_iterate",
    "derive_seed",
    "grover_success_prob",
    "make_rng",
    "measure_index",
    "qpe_outcome_distribution",
    "qpe_outcome_sample",
    "sample_unmarked",
]

ATOL = 1e-9

# Half-width of the exact window used when sampling phase-estimation outcomes.
# The kernel mass outside the window is below 1/(pi^2 * _QPE_WINDOW).
_QPE_WINDOW = 256


def make_rng(seed: int | None) -> np.random.Generator:
    return np.random.default_rng(seed)


def derive_seed(master: int, *keys: int) -> int:
    """64-bit seed for the stream identified by ``(master, *keys)``."""
    ss = np.random.SeedSequence([int(master) & 0xFFFFFFFFFFFFFFFF, *map(int, keys)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


# --------------------------------------------------------------------------
# Closed-form rotation backend
# --------------------------------------------------------------------------


def grover_success_prob(n_total: int, marked_count: int, iterations: int, amp_scale: float = 1.0) -> float:
    """Probability of landing in the good subspace after ``iterations`` Grover iterates.

    ``amp_scale`` multiplies the initial good squared-amplitude ``marked_count / n_total``.
    """
    if n_total < 1 or not 0 <= marked_count <= n_total:
        raise ValueError(f"need 0 <= marked_count <= n_total, got {marked_count}, {n_total}")
    if iterations < 0:
        raise ValueError("iterations must be nonnegative")
    if not 0.0 <= amp_scale <= 1.0:
        raise ValueError(f"amp_scale must lie in [0, 1], got {amp_scale}")
    a = amp_scale * marked_count / n_total
    if a > 1.0 + ATOL:
        raise ValueError(f"scaled amplitude {a} exceeds 1")
    theta = math.asin(math.sqrt(min(a, 1.0)))
    p = math.sin((2 * iterations + 1) * theta) ** 2
    return min(max(p, 0.0), 1.0)


@dataclass
class RotationState:
    """Grover state restricted to the span of the uniform good and bad vectors.

    With ``amp_scale < 1`` the initial state is the uniform superposition followed
    by a rotation of a flag qubit; the good subspace is then "marked index and
    flag set", and the bad component still carries some weight on marked indices.
    """

    n_total: int
    marked_count: int
    amp_scale: float = 1.0
    iterations: int = 0

    def __post_init__(self) -> None:
        if self.n_total < 1 or not 0 <= self.marked_count <= self.n_total:
            raise ValueError("need 0 <= marked_count <= n_total")
        if not 0.0 <= self.amp_scale <= 1.0:
            raise ValueError("amp_scale must lie in [0, 1]")

    @property
    def good_amp(self) -> float:
        return grover_success_prob(self.n_total, self.marked_count, self.iterations, self.amp_scale)

    def iterate(self, m: int = 1) -> RotationState:
        if m < 0:
            raise ValueError("iteration count must be nonnegative")
        return RotationState(self.n_total, self.marked_count, self.amp_scale, self.iterations + m)


# --------------------------------------------------------------------------
# Dense backend
# --------------------------------------------------------------------------


@dataclass
class DenseState:
    """Full amplitude vector.

    ``reference`` is the state the diffusion step reflects about (the initial
    state). When a flag qubit is present the vector has length ``2 * n_index``,
    flag-0 block first.
    """

    amplitudes: np.ndarray
    reference: np.ndarray = field(default=None)  # type: ignore[assignment]
    n_index: int = 0

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        dim = self.amplitudes.shape[0]
        if not _is_power_of_two(dim):
            raise ValueError(f"dimension must be a power of two, got {dim}")
        if self.reference is None:
            self.reference = self.amplitudes.copy()
        if not self.n_index:
            self.n_index = dim
        norm = float(np.vdot(self.amplitudes, self.amplitudes).real)
        if abs(norm - 1.0) > ATOL:
            raise ValueError(f"state not normalized: {norm}")

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @classmethod
    def uniform(cls, dim: int) -> DenseState:
        amps = np.full(dim, 1.0 / math.sqrt(dim), dtype=np.complex128)
        return cls(amps, amps.copy(), dim)

    @classmethod
    def scaled_uniform(cls, n_index: int, amp_scale: float) -> DenseState:
        """Uniform index superposition with a flag qubit rotated to weight ``amp_scale``."""
        amps = np.empty(2 * n_index, dtype=np.complex128)
        amps[:n_index] = math.sqrt((1.0 - amp_scale) / n_index)
        amps[n_index:] = math.sqrt(amp_scale / n_index)
        return cls(amps, amps.copy(), n_index)

    def good_positions(self, marked) -> np.ndarray:
        marked = np.asarray(sorted(marked), dtype=np.int64)
        if self.dim == self.n_index:
            return marked
        return marked + self.n_index

    def probability(self, positions) -> float:
        positions = np.asarray(list(positions), dtype=np.int64)
        if positions.size == 0:
            return 0.0
        return float(np.sum(np.abs(self.amplitudes[positions]) ** 2))


def apply_grover_iterate(state: DenseState, marked) -> DenseState:
    """One Grover iterate: phase flip on ``marked`` positions, then reflection about the reference."""
    pos = np.asarray(sorted(marked), dtype=np.int64)
    if pos.size and (pos[0] < 0 or pos[-1] >= state.dim):
        raise IndexError("marked position outside the state")
    psi = state.amplitudes.copy()
    psi[pos] *= -1.0
    ref = state.reference
    psi = 2.0 * np.vdot(ref, psi) * ref - psi
    return DenseState(psi, ref, state.n_index)


# --------------------------------------------------------------------------
# Measurement
# --------------------------------------------------------------------------


def sample_unmarked(n_total: int, marked: np.ndarray, rng: np.random.Generator) -> int:
    """Uniform position in ``[0, n_total)`` outside the sorted array ``marked``."""
    k = marked.shape[0]
    if k >= n_total:
        raise ValueError("no unmarked position")
    if 2 * k <= n_total:
        while True:
            i = int(rng.integers(n_total))
            j = np.searchsorted(marked, i)
            if j == k or marked[j] != i:
                return i
    # j-th unmarked position is j + #{r : marked[r] - r <= j}
    j = int(rng.integers(n_total - k))
    gaps = marked - np.arange(k)
    return j + int(np.searchsorted(gaps, j, side="right"))


def measure_index(state: RotationState | DenseState, marked, rng: np.random.Generator) -> int:
    """Sample an index from ``state``; ``marked`` are the marked positions (0-based)."""
    if isinstance(state, DenseState):
        probs = np.abs(state.amplitudes) ** 2
        pos = int(rng.choice(state.dim, p=probs / probs.sum()))
        return pos % state.n_index

    marked = np.asarray(marked, dtype=np.int64)
    k, n = state.marked_count, state.n_total
    if marked.shape[0] != k:
        raise ValueError("marked set does not match the state's marked_count")
    if k == 0:
        return int(rng.integers(n))
    u = rng.random()
    p_good = state.good_amp
    if u < p_good:
        return int(marked[rng.integers(k)])
    # bad component: unmarked indices with weight 1, marked with weight 1 - amp_scale
    s = state.amp_scale
    if k < n:
        p_marked_bad = k * (1.0 - s) / (n - k * s)
    else:
        p_marked_bad = 1.0
    if rng.random() < p_marked_bad:
        return int(marked[rng.integers(k)])
    return sample_unmarked(n, marked, rng)


# --------------------------------------------------------------------------
# Phase-estimation outcome distribution
# --------------------------------------------------------------------------


def _check_qpe_args(a: float, M: int) -> None:
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"amplitude must lie in [0, 1], got {a}")
    if M < 2 or not _is_power_of_two(M):
        raise ValueError(f"M must be a power of two >= 2, got {M}")


def _kernel(offsets: np.ndarray, M: int) -> np.ndarray:
    """Fejer-type kernel sin^2(pi u) / (M^2 sin^2(pi u / M)) at real offsets u = y - M*phase."""
    num = np.sin(np.pi * offsets) ** 2
    den = (M * np.sin(np.pi * offsets / M)) ** 2
    out = np.ones_like(offsets)
    nz = np.abs(offsets) > 1e-12
    out[nz] = num[nz] / den[nz]
    return out


def _center(a: float, M: int) -> float:
    return M * math.asin(math.sqrt(a)) / math.pi


def qpe_outcome_distribution(a: float, M: int) -> np.ndarray:
    """Exact distribution of the phase-estimation outcome ``y`` in ``[0, M)``.

    Mixture with weights 1/2 over the eigenphases +theta and -theta, theta = arcsin(sqrt(a)).
    """
    _check_qpe_args(a, M)
    c = _center(a, M)
    y = np.arange(M, dtype=np.float64)
    plus = _kernel(_wrap(y - c, M), M)
    minus = _kernel(_wrap(y + c, M), M)
    return 0.5 * (plus + minus)


def _wrap(u: np.ndarray, M: int) -> np.ndarray:
    # offsets modulo M into (-M/2, M/2]
    return u - M * np.round(u / M)


@lru_cache(maxsize=8192)
def _window_table(a: float, M: int) -> tuple[np.ndarray, np.ndarray, bool]:
    """Outcome table for the +theta branch: (outcomes, cdf, complete)."""
    c = _center(a, M)
    r = round(c)
    if abs(c - r) < ATOL:
        return np.array([r % M], dtype=np.int64), np.array([1.0]), True
    base = math.floor(c)
    if M <= 2 * _QPE_WINDOW:
        ys = np.arange(base - M // 2 + 1, base + M // 2 + 1, dtype=np.int64)
        complete = True
    else:
        ys = np.arange(base - _QPE_WINDOW + 1, base + _QPE_WINDOW + 1, dtype=np.int64)
        complete = False
    probs = _kernel(ys.astype(np.float64) - c, M)
    cdf = np.cumsum(probs)
    if complete:
        cdf /= cdf[-1]
    return ys % M, cdf, complete


def _sample_plus_branch(a: float, M: int, rng: np.random.Generator) -> int:
    ys, cdf, complete = _window_table(a, M)
    u = rng.random()
    if complete or u < cdf[-1]:
        return int(ys[min(int(np.searchsorted(cdf, u, side="right")), ys.shape[0] - 1)])
    # rare: outcome outside the window, enumerate the rest exactly
    c = _center(a, M)
    base = math.floor(c)
    rest = np.arange(base + _QPE_WINDOW + 1, base - _QPE_WINDOW + 1 + M, dtype=np.int64)
    probs = _kernel(rest.astype(np.float64) - c, M)
    rc = np.cumsum(probs)
    v = (u - cdf[-1]) / (1.0 - cdf[-1]) * rc[-1]
    return int(rest[min(int(np.searchsorted(rc, v, side="right")), rest.shape[0] - 1)] % M)


def qpe_outcome_sample(a: float, M: int, rng: np.random.Generator, size: int | None = None):
    """Sample phase-estimation outcomes ``y`` for amplitude ``a`` with ``M`` grid points.

    The estimate is ``sin(pi * y / M) ** 2``. With ``size`` an array of outcomes is
    returned; batches enumerate the full distribution, so keep ``M`` moderate.
    """
    _check_qpe_args(a, M)
    if size is not None:
        dist = qpe_outcome_distribution(a, M)
        return rng.choice(M, size=size, p=dist / dist.sum())
    y = _sample_plus_branch(a, M, rng)
    if rng.random() < 0.5:
        y = (M - y) % M
    return y
