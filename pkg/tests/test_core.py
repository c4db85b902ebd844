import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustsub import AlgoParams, ModularOracle, PoolPicker, ThresholdGrid, child_seed, pool_pick, top_singletons
from robustsub import IdenticalItemsOracle, window_thresholds
from robustsub.core import quota, splitmix64
from robustsub.errors import InputError, PreconditionError


def test_window_powers_of_two():
    assert window_thresholds(ThresholdGrid(1.0), 8.0, 4) == [8.0, 4.0, 2.0, 1.0, 0.5]
    assert ThresholdGrid(1.0).window(8.0, 4) == [3, 2, 1, 0, -1]


def test_window_length_bound():
    grid = ThresholdGrid(0.1)
    w = grid.window(1.0, 10)
    assert len(w) <= math.ceil(math.log(22) / math.log(1.1)) + 1 == 34
    assert len(w) <= grid.max_window_len(10)


def test_window_degenerate():
    assert ThresholdGrid(0.5).window(0.0, 3) == []
    assert ThresholdGrid(0.5).window(-1.0, 3) == []


@settings(max_examples=300, deadline=None)
@given(
    eps=st.floats(0.01, 0.99),
    delta=st.floats(1e-6, 1e6),
    k=st.integers(1, 200),
)
def test_window_membership(eps, delta, k):
    grid = ThresholdGrid(eps)
    w = grid.window(delta, k)
    lo = delta / (2 * (1 + eps) * k)
    assert w, "window is non-empty for positive delta"
    assert w == sorted(w, reverse=True)
    assert all(b == a - 1 for a, b in zip(w, w[1:]))
    assert grid.value(w[0]) <= delta < grid.value(w[0] + 1)
    assert grid.value(w[-1]) >= lo > grid.value(w[-1] - 1)
    assert len(w) <= grid.max_window_len(k)


def test_quota():
    assert quota(0, 0.5) == 1
    assert quota(3, 0.1) == 30
    assert quota(2, 0.2) == 10
    assert quota(1, 0.3) == 4
    assert AlgoParams(5, 10, 0.1).pool_quota == 100


def test_params_validation_and_delta():
    assert AlgoParams.from_delta(3, 2, 0.3).epsilon == pytest.approx(0.2)
    assert AlgoParams.from_delta(3, 1, 0.2, "distributed").epsilon == pytest.approx(0.1)
    for bad in (dict(k=0), dict(k=1, d=-1), dict(k=1, epsilon=1.0), dict(k=1, policy="x"), dict(k=1, seed=-1)):
        with pytest.raises(InputError):
            AlgoParams(**bad)


def test_top_singletons_examples():
    o = ModularOracle([1, 10, 5, 8, 3])
    r = top_singletons(o, range(5), 2)
    assert r.ids == (1, 3, 2) and r.delta_d == 5 and r.delta_0 == 10
    r0 = top_singletons(o, range(5), 0)
    assert r0.ids == (1,) and r0.delta_d == r0.delta_0 == 10
    ri = top_singletons(IdenticalItemsOracle(5), range(5), 1)
    assert ri.ids == (0, 1) and ri.delta_d == 1


def test_top_singletons_small_ground_set():
    r = top_singletons(ModularOracle([4, 2]), range(2), 5)
    assert set(r.ids) == {0, 1} and r.delta_d == 2


def test_pool_pick_priority_order():
    picker = PoolPicker(3, seed=0)
    picker.priority = np.array([1, 0, 2])  # b > a > c
    assert pool_pick([0, 1, 2], picker) == 1
    assert list(picker.truncate([0, 1, 2], 2)) == [1, 0]


@pytest.mark.parametrize("policy", ["permutation", "uniform"])
def test_pool_pick_singleton_and_empty(policy):
    picker = PoolPicker(10, seed=4, policy=policy)
    assert pool_pick([7], picker) == 7
    with pytest.raises(PreconditionError):
        pool_pick([], picker)


def test_uniform_pick_frequencies():
    picker = PoolPicker(8, seed=123, policy="uniform")
    pool = [2, 3, 5, 7]
    draws = np.array([pool_pick(pool, picker) for _ in range(10_000)])
    sigma = math.sqrt(10_000 * 0.25 * 0.75)
    for e in pool:
        assert abs((draws == e).sum() - 2500) <= 3 * sigma


def test_picker_determinism():
    a, b = PoolPicker(50, 9), PoolPicker(50, 9)
    assert np.array_equal(a.priority, b.priority)
    assert not np.array_equal(a.priority, PoolPicker(50, 10).priority)


def test_child_seeds_known_values():
    # the first SplitMix64 outputs from state 0
    assert child_seed(0, 0) == 0xE220A8397B1DCDAF
    assert child_seed(0, 1) == 0x6E789E6AA1B965F4
    assert child_seed(0, 2) == 0x06C45D188009454F
    assert splitmix64(0) == 0
    assert len({child_seed(77, i) for i in range(1000)}) == 1000
