import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_logdet
from robustsub import (
    AlgoParams,
    BuildTrace,
    IdenticalItemsOracle,
    ModularOracle,
    StreamState,
    ThresholdGrid,
    build_coreset_centralized,
    build_coreset_streaming,
    extract_solution_streaming,
    finalize_stream,
    stream_insert,
)
from robustsub.errors import InputError, PreconditionError


def check_state(ss: StreamState):
    """Between-arrival invariants, by full recomputation."""
    p, grid, o = ss.params, ss.grid, ss.oracle
    assert ss.window == grid.window(ss.delta_d, p.k)
    assert set(ss.rows) == set(ss.window)
    assert len(ss.reserve) <= p.d + 1
    assert ss.stored_count() <= ss.memory_bound()
    for i, row in ss.rows.items():
        assert len(row.state) <= p.k
        for j, bucket in row.buckets.items():
            assert j >= i
            assert len(bucket) <= p.pool_quota
            if len(row.state) < p.k:
                assert len(bucket) < p.pool_quota
            for e, cached in bucket.items():
                assert e not in ss.reserve
                g = o.marginal_gain(e, row.state.elements)
                assert abs(g - cached) <= 1e-9
                assert grid.value(j) - 1e-12 <= cached < grid.value(j + 1)


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 10**6),
    n=st.integers(1, 30),
    k=st.integers(1, 5),
    d=st.integers(0, 3),
    eps=st.sampled_from([0.2, 0.5, 0.9]),
    clustered=st.booleans(),
)
def test_stream_invariants_every_step(seed, n, k, d, eps, clustered):
    o = random_logdet(max(n, 4), seed, clustered=clustered)
    p = AlgoParams(k, d, eps, seed)
    trace = BuildTrace()
    ss = StreamState(o, p, trace)
    order = np.random.default_rng(seed).permutation(n)
    evicted: set[int] = set()
    last_delta_d = 0.0
    for e in order:
        before = set(ss.window)
        ss.insert(int(e))
        check_state(ss)
        # while the reserve is filling, delta_d is the smallest singleton seen and may drop
        if ss.t > d + 1:
            assert ss.delta_d >= last_delta_d
            if ss.t > d + 2:
                evicted |= before - set(ss.window)
            assert not evicted & set(ss.window), "evicted thresholds never come back"
        last_delta_d = ss.delta_d
    assert len(trace.memory) == n
    for i, e, size, _ in trace.picks:
        assert size >= p.pool_quota
    cs = ss.finalize()
    for i, lst in cs.B.items():
        for e in lst:
            assert o.marginal_gain(e, cs.A.get(i, [])) >= ss.grid.value(i) - 1e-12


def test_ascending_stream_memory_bound():
    n = 40
    o = ModularOracle(2.0 ** np.arange(n) / 2**20)
    trace = BuildTrace()
    ss = StreamState(o, AlgoParams(5, 2, 0.5, 1), trace)
    for e in range(n):
        ss.insert(e)
        assert ss.stored_count() <= ss.memory_bound()
        assert ss.window[-1] >= ss.grid.ceil_exponent(ss.delta_d / (2 * 1.5 * 5))
    assert max(trace.memory) <= ss.memory_bound()


def test_reserve_fills_first():
    o = ModularOracle([9, 7, 5, 3, 1])
    ss = StreamState(o, AlgoParams(2, 2, 0.5))
    for e in range(3):
        ss.insert(e)
        assert all(not r.buckets and not r.state.elements for r in ss.rows.values())
    assert ss.reserve == [0, 1, 2]
    assert ss.delta_d == 5


def test_quota_one_is_sieve():
    o = ModularOracle([10, 8, 5, 3, 1])
    ss = StreamState(o, AlgoParams(2, 0, 0.5))
    ss.insert(0).insert(1)
    assert all(r.state.elements == [1] for r in ss.rows.values())
    assert all(not r.buckets for r in ss.rows.values())


def test_modular_stream_extraction():
    o = ModularOracle([10, 8, 5, 3, 1])
    cs = build_coreset_streaming(o, range(5), AlgoParams(2, 0, 0.5))
    sol = extract_solution_streaming(o, cs, ())
    assert sol.value == 18.0


def test_robust_refill_from_pool():
    o = ModularOracle(np.ones(10))
    cs = build_coreset_streaming(o, range(10), AlgoParams(2, 1, 0.5, 4))
    assert cs.A[0] and cs.B.get(0)
    D = set(cs.A[0]) | set(cs.reserve)
    for lst in cs.A.values():
        D |= set(lst)
    survivors = set(cs.B[0]) - D
    assert survivors
    sol = extract_solution_streaming(o, cs, D)
    assert sol.value >= 1.0
    assert set(sol.elements) <= set().union(*cs.B.values()) - D


def test_empty_and_single():
    o = ModularOracle([3.0, 1.0])
    empty = build_coreset_streaming(o, [], AlgoParams(2, 1, 0.5))
    assert empty.is_empty()
    assert extract_solution_streaming(o, empty, ()).value == 0.0
    one = finalize_stream(stream_insert(StreamState(o, AlgoParams(2, 1, 0.5)), 1))
    assert one.reserve == [1] and not one.A and not one.B


def test_duplicate_insert_rejected():
    ss = StreamState(ModularOracle([1.0, 2.0]), AlgoParams(1))
    ss.insert(0)
    with pytest.raises(InputError):
        ss.insert(0)


def test_rejects_centralized_coreset():
    o = ModularOracle([1.0, 2.0, 3.0])
    cs = build_coreset_centralized(o, None, AlgoParams(1))
    with pytest.raises(PreconditionError):
        extract_solution_streaming(o, cs, ())


def test_example_one_stream():
    o = IdenticalItemsOracle(5)
    for seed in range(20):
        for order in (range(5), range(4, -1, -1)):
            cs = build_coreset_streaming(o, order, AlgoParams(1, 1, 0.5, seed))
            for e in range(5):
                assert extract_solution_streaming(o, cs, {e}).value == 1.0


def test_stream_determinism():
    o = random_logdet(30, 3, clustered=True)
    p = AlgoParams(3, 2, 0.5, 8)
    assert build_coreset_streaming(o, range(30), p) == build_coreset_streaming(o, range(30), p)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), k=st.integers(1, 5), data=st.data())
def test_extraction_contract(seed, k, data):
    o = random_logdet(16, seed, clustered=seed % 2 == 0)
    cs = build_coreset_streaming(o, range(16), AlgoParams(k, 2, 0.5, seed))
    D = data.draw(st.sets(st.integers(0, 15), max_size=6))
    sol = extract_solution_streaming(o, cs, D)
    assert len(sol) <= k and not set(sol.elements) & D
    assert abs(sol.value - o.value(sol.elements)) <= 1e-8
    grid = ThresholdGrid(cs.epsilon)
    if sol.elements:
        assert sol.info["exponent"] in grid.window(max(o.singleton_value(e) for e in cs.elements() - D), k)
