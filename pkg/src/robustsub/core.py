"""Machinery shared by the centralized, streaming and distributed algorithms.

Thresholds live on the geometric grid ``(1 + eps) ** i`` and are always
identified by their integer exponent ``i``; floating values are derived from
the exponent on demand so that a builder, an extractor and other machines
agree on which threshold is which.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import InputError, PreconditionError
from .objectives import SubmodularOracle

POLICIES = ("permutation", "uniform")
_GOLDEN = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """SplitMix64 output finalizer."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def child_seed(master: int, i: int) -> int:
    """Seed of child ``i``: ``splitmix64(master XOR (i+1) * 0x9E3779B97F4A7C15)``."""
    return splitmix64((int(master) & _MASK64) ^ (((i + 1) * _GOLDEN) & _MASK64))


def quota(d: int, epsilon: float) -> int:
    """Minimum pool size ``ceil(d / eps)``, at least 1."""
    if d <= 0:
        return 1
    # round before ceil: 3 / 0.1 is 30.000000000000004 in binary floating point
    return max(1, math.ceil(round(d / epsilon, 9)))


@dataclass(frozen=True)
class AlgoParams:
    k: int
    d: int = 0
    epsilon: float = 0.1
    seed: int = 0
    policy: str = "permutation"

    def __post_init__(self):
        if self.k < 1:
            raise InputError("k must be at least 1")
        if self.d < 0:
            raise InputError("d must be non-negative")
        if not 0 < self.epsilon < 1:
            raise InputError("epsilon must lie in (0, 1)")
        if self.policy not in POLICIES:
            raise InputError(f"selection policy must be one of {POLICIES}")
        if not 0 <= int(self.seed) <= _MASK64:
            raise InputError("seed must be a 64-bit unsigned integer")

    @classmethod
    def from_delta(cls, k: int, d: int, delta: float, mode: str = "centralized", **kw) -> "AlgoParams":
        """``eps = 2*delta/3`` for centralized/streaming, ``delta/2`` for distributed."""
        if mode in ("centralized", "streaming"):
            eps = 2.0 * delta / 3.0
        elif mode in ("distributed", "compact"):
            eps = delta / 2.0
        else:
            raise InputError(f"unknown mode {mode!r}")
        return cls(k=k, d=d, epsilon=eps, **kw)

    @property
    def pool_quota(self) -> int:
        return quota(self.d, self.epsilon)

    def replace(self, **changes) -> "AlgoParams":
        data = dict(k=self.k, d=self.d, epsilon=self.epsilon, seed=self.seed, policy=self.policy)
        data.update(changes)
        return AlgoParams(**data)


@dataclass(frozen=True)
class ThresholdGrid:
    """The ladder ``{(1 + eps) ** i : i integer}``."""

    epsilon: float

    @property
    def ratio(self) -> float:
        return 1.0 + self.epsilon

    def value(self, i: int) -> float:
        return self.ratio ** int(i)

    def floor_exponent(self, x: float) -> int:
        """Largest ``i`` with ``(1+eps)**i <= x``."""
        if not x > 0:
            raise InputError("grid exponents exist only for positive values")
        i = math.floor(math.log(x) / math.log(self.ratio))
        while self.value(i + 1) <= x:
            i += 1
        while self.value(i) > x:
            i -= 1
        return i

    def ceil_exponent(self, x: float) -> int:
        """Smallest ``i`` with ``(1+eps)**i >= x``."""
        if not x > 0:
            raise InputError("grid exponents exist only for positive values")
        i = math.ceil(math.log(x) / math.log(self.ratio))
        while self.value(i - 1) >= x:
            i -= 1
        while self.value(i) < x:
            i += 1
        return i

    def window(self, delta_hi: float, k: int) -> list[int]:
        """Exponents of grid points in ``[delta_hi / (2 (1+eps) k), delta_hi]``, descending."""
        if not delta_hi > 0:
            return []
        hi = self.floor_exponent(delta_hi)
        lo = self.ceil_exponent(delta_hi / (2.0 * self.ratio * k))
        return list(range(hi, lo - 1, -1))

    def max_window_len(self, k: int) -> int:
        return math.ceil(math.log(2.0 * self.ratio * k) / math.log(self.ratio)) + 1


def window_thresholds(grid: ThresholdGrid, delta_hi: float, k: int) -> list[float]:
    return [grid.value(i) for i in grid.window(delta_hi, k)]


@dataclass(frozen=True)
class SingletonReserve:
    """The ``d + 1`` best singletons (``ids`` in descending value order)."""

    ids: tuple[int, ...]
    delta_d: float
    delta_0: float


def top_singletons(oracle: SubmodularOracle, V: Iterable[int], d: int) -> SingletonReserve:
    V = np.asarray(sorted(set(int(e) for e in V)), dtype=np.intp)
    if V.size == 0:
        return SingletonReserve((), 0.0, 0.0)
    s = oracle.singletons()[V]
    order = np.lexsort((V, -s))  # value descending, then id ascending
    top = V[order[: d + 1]]
    vals = s[order[: d + 1]]
    return SingletonReserve(tuple(int(e) for e in top), float(vals[-1]), float(vals[0]))


class PoolPicker:
    """Random selection from candidate pools for one build.

    A permutation ``priority`` over all ids is drawn once from the seed.  The
    ``permutation`` policy returns the pool member of highest priority (lowest
    rank); ``uniform`` draws a uniformly random member from the same generator.
    Pool truncation always keeps the highest-priority members.
    """

    def __init__(self, n: int, seed: int, policy: str = "permutation"):
        if policy not in POLICIES:
            raise InputError(f"selection policy must be one of {POLICIES}")
        self.policy = policy
        self.rng = np.random.default_rng(int(seed))
        self.priority = self.rng.permutation(n)

    def pick(self, pool) -> int:
        pool = np.asarray(pool, dtype=np.intp)
        if pool.size == 0:
            raise PreconditionError("cannot pick from an empty pool")
        if self.policy == "permutation":
            return int(pool[np.argmin(self.priority[pool])])
        return int(np.sort(pool)[self.rng.integers(pool.size)])

    def rank(self, pool) -> np.ndarray:
        """``pool`` ordered by descending priority."""
        pool = np.asarray(pool, dtype=np.intp)
        return pool[np.argsort(self.priority[pool], kind="stable")]

    def truncate(self, pool, size: int) -> np.ndarray:
        return self.rank(pool)[:size]


def pool_pick(pool, picker: PoolPicker) -> int:
    return picker.pick(pool)


@dataclass
class CoreSet:
    """Output of a core-set builder.

    ``A`` maps threshold exponents to selected elements in insertion order.
    ``B`` maps exponents to candidate pools (for streaming builds the union of
    the row's buckets, which are kept in ``buckets``).  ``reserve`` holds the
    ``d + 1`` top singletons.  ``singletons`` records ``f({e})`` for every
    stored element so the core-set is self-describing after persistence.
    """

    provenance: str
    k: int
    d: int
    epsilon: float
    seed: int
    policy: str = "permutation"
    reserve: list[int] = field(default_factory=list)
    delta_d: float = 0.0
    A: dict[int, list[int]] = field(default_factory=dict)
    B: dict[int, list[int]] = field(default_factory=dict)
    buckets: dict[int, dict[int, list[int]]] | None = None
    singletons: dict[int, float] = field(default_factory=dict)

    @property
    def params(self) -> AlgoParams:
        return AlgoParams(k=self.k, d=self.d, epsilon=self.epsilon, seed=self.seed, policy=self.policy)

    @property
    def grid(self) -> ThresholdGrid:
        return ThresholdGrid(self.epsilon)

    def selected(self) -> list[int]:
        return [e for i in sorted(self.A, reverse=True) for e in self.A[i]]

    def elements(self) -> set[int]:
        out = set(self.reserve)
        for lst in self.A.values():
            out.update(lst)
        for lst in self.B.values():
            out.update(lst)
        return out

    def __len__(self) -> int:
        return len(self.elements())

    def stored_count(self) -> int:
        """Entries stored, counting an element once per structure that holds it."""
        return len(self.reserve) + sum(map(len, self.A.values())) + sum(map(len, self.B.values()))

    def is_empty(self) -> bool:
        return not self.reserve and not any(self.A.values()) and not any(self.B.values())


@dataclass(frozen=True)
class Solution:
    """A feasible answer: ``elements`` in insertion order and ``value = f(elements)``."""

    elements: tuple[int, ...]
    value: float
    info: dict = field(default_factory=dict, compare=False)

    @classmethod
    def empty(cls, **info) -> "Solution":
        return cls((), 0.0, dict(info))

    def __len__(self) -> int:
        return len(self.elements)


@dataclass
class BuildTrace:
    """Optional instrumentation filled in by builders.

    ``picks`` holds one ``(exponent, element, pool_size, gain)`` tuple per
    element appended to an ``A`` set.  ``sweeps`` (centralized, when
    ``record_sweeps`` is set) holds ``(exponent, circulating_ids, union)`` at
    the start of every threshold.  ``memory`` (streaming) holds the stored
    entry count after every arrival.
    """

    record_sweeps: bool = False
    picks: list[tuple[int, int, int, float]] = field(default_factory=list)
    sweeps: list[tuple[int, list[int], list[int]]] = field(default_factory=list)
    memory: list[int] = field(default_factory=list)
