"""Greedy, stochastic greedy, and the oversampling deletion baselines."""

from __future__ import annotations

import heapq
import math
from typing import Iterable

import numpy as np

from .core import Solution
from .errors import InputError
from .objectives import SubmodularOracle


def _pool(V) -> list[int]:
    return sorted(set(int(e) for e in V))


def greedy(oracle: SubmodularOracle, V: Iterable[int], k: int) -> Solution:
    """Lazy greedy; ties go to the smaller id, stops early once no gain is positive."""
    pool = _pool(V)
    st = oracle.state()
    if k <= 0 or not pool:
        return Solution.empty()
    gains = st.gains(pool)
    heap = [(-g, e, 0) for g, e in zip(gains.tolist(), pool)]
    heapq.heapify(heap)
    while heap and len(st) < k:
        neg, e, stamp = heapq.heappop(heap)
        if stamp == len(st):
            if -neg <= 0:
                break
            st.add(e)
            continue
        heapq.heappush(heap, (-st.gain(e), e, len(st)))
    return Solution(tuple(st.elements), st.value)


def naive_greedy(oracle: SubmodularOracle, V: Iterable[int], k: int) -> Solution:
    """Reference greedy recomputing every gain each round."""
    pool = _pool(V)
    st = oracle.state()
    while len(st) < k:
        rest = [e for e in pool if e not in st]
        if not rest:
            break
        g = st.gains(rest)
        j = int(np.argmax(g))  # first maximum is the smallest id
        if g[j] <= 0:
            break
        st.add(rest[j])
    return Solution(tuple(st.elements), st.value)


def sg_sample_size(n: int, k: int, sg_epsilon: float) -> int:
    return max(1, math.ceil(n / k * math.log(1.0 / sg_epsilon)))


def stochastic_greedy(
    oracle: SubmodularOracle,
    V: Iterable[int],
    k: int,
    sg_epsilon: float = 0.1,
    seed: int = 0,
) -> Solution:
    """``k`` rounds, each taking the best of a fresh uniform sample of the unselected pool."""
    if not 0 < sg_epsilon < 1:
        raise InputError("sg_epsilon must lie in (0, 1)")
    pool = np.asarray(_pool(V), dtype=np.intp)
    if k <= 0 or pool.size == 0:
        return Solution.empty()
    rng = np.random.default_rng(int(seed))
    s = sg_sample_size(pool.size, k, sg_epsilon)
    st = oracle.state()
    rest = pool
    for _ in range(min(k, pool.size)):
        if s >= rest.size:
            sample = rest
        else:
            sample = np.sort(rng.choice(rest, size=s, replace=False))
        g = st.gains(sample)
        e = int(sample[int(np.argmax(g))])
        st.add(e)
        rest = rest[rest != e]
    return Solution(tuple(st.elements), st.value)


def sg_robust_baseline(
    oracle: SubmodularOracle,
    V: Iterable[int],
    k: int,
    D: Iterable[int] = (),
    oversample: int = 6,
    seed: int = 0,
    sg_epsilon: float = 0.1,
) -> Solution:
    """Stochastic greedy picks ``oversample * k`` elements; greedy then runs on the survivors."""
    kept = stochastic_greedy(oracle, V, oversample * k, sg_epsilon, seed)
    D = set(int(e) for e in D)
    out = greedy(oracle, [e for e in kept.elements if e not in D], k)
    return Solution(out.elements, out.value, {"stored": len(kept)})


def sg_distributed_baseline(
    oracle: SubmodularOracle,
    V: Iterable[int],
    m: int,
    k: int,
    D: Iterable[int] = (),
    seed: int = 0,
    oversample: int = 6,
    sg_epsilon: float = 0.1,
) -> Solution:
    """Per-machine stochastic greedy of size ``oversample * k``, greedy over the surviving union."""
    from .core import child_seed
    from .distributed import partition_random

    D = set(int(e) for e in D)
    parts = partition_random(V, m, seed)
    union: list[int] = []
    for i, part in enumerate(parts):
        union.extend(stochastic_greedy(oracle, part, oversample * k, sg_epsilon, child_seed(seed, i)).elements)
    out = greedy(oracle, [e for e in union if e not in D], k)
    return Solution(out.elements, out.value, {"stored": len(union)})
