"""Deletion-robust core-set over a fully accessible ground set, and extraction.

The builder sweeps thresholds from high to low.  At threshold ``tau`` the pool
is every circulating element whose gain with respect to the union of the
``A`` sets built so far lies in ``[tau, (1+eps) tau)``; while that pool holds
at least ``ceil(d/eps)`` elements one member is picked at random into
``A_tau``.  The final pool is stored and leaves circulation.  Because each pick
comes from a large pool of near-identical candidates, an adversary who does
not see the random bits deletes any particular pick with probability at most
``eps``.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .core import AlgoParams, BuildTrace, CoreSet, PoolPicker, Solution, ThresholdGrid, quota, top_singletons
from .errors import PreconditionError
from .objectives import OracleState, SubmodularOracle


def _ids(V, n: int) -> np.ndarray:
    if V is None:
        return np.arange(n, dtype=np.intp)
    return np.asarray(sorted(set(int(e) for e in V)), dtype=np.intp)


def coreset_size_bound(params: AlgoParams, window_len: int) -> int:
    """``(d+1) + k + ceil(d/eps) * window_len``: the most a centralized build may store."""
    return (params.d + 1) + params.k + quota(params.d, params.epsilon) * window_len


def build_coreset_centralized(
    oracle: SubmodularOracle,
    V: Iterable[int] | None,
    params: AlgoParams,
    trace: BuildTrace | None = None,
    provenance: str = "centralized",
) -> CoreSet:
    """Build a deletion-robust core-set from ``V`` (all of ``oracle``'s ids if ``None``)."""
    V = _ids(V, oracle.n)
    cs = CoreSet(provenance, params.k, params.d, params.epsilon, params.seed, params.policy)
    if V.size == 0:
        return cs
    grid = ThresholdGrid(params.epsilon)
    q = params.pool_quota
    picker = PoolPicker(oracle.n, params.seed, params.policy)
    single = oracle.singletons()

    reserve = top_singletons(oracle, V, params.d)
    cs.reserve = list(reserve.ids)
    cs.delta_d = reserve.delta_d

    in_reserve = np.isin(V, cs.reserve)
    circ = V[~in_reserve]
    cached = single[circ].astype(float)
    state = oracle.state()
    total = 0

    for i in grid.window(reserve.delta_d, params.k):
        tau, ceiling = grid.value(i), grid.value(i + 1)
        if trace is not None and trace.record_sweeps:
            trace.sweeps.append((i, circ.tolist(), list(state.elements)))
        picked: list[int] = []
        while True:
            # cached gains are upper bounds; only those that could reach tau need refreshing
            stale = cached >= tau
            if stale.any():
                cached[stale] = state.gains(circ[stale])
            in_pool = (cached >= tau) & (cached < ceiling)
            pool = circ[in_pool]
            if total >= params.k or pool.size < q:
                break
            e = picker.pick(pool)
            j = int(np.flatnonzero(circ == e)[0])
            if trace is not None:
                trace.picks.append((i, e, int(pool.size), float(cached[j])))
            state.add(e)
            picked.append(e)
            total += 1
            circ = np.delete(circ, j)
            cached = np.delete(cached, j)
        if pool.size > q:
            pool = picker.truncate(pool, q)
        if picked:
            cs.A[i] = picked
        if pool.size:
            cs.B[i] = sorted(int(e) for e in pool)
            keep = ~np.isin(circ, pool)
            circ, cached = circ[keep], cached[keep]

    cs.singletons = {e: float(single[e]) for e in sorted(cs.elements())}
    return cs


def threshold_fill(state: OracleState, candidates: np.ndarray, tau: float, k: int) -> OracleState:
    """Scan ``candidates`` in order, adding each whose gain is ``>= tau`` while ``|S| < k``.

    Gains are recomputed lazily: a candidate whose last computed gain fell
    below ``tau`` can never qualify again.
    """
    cands = np.asarray([e for e in candidates if e not in state], dtype=np.intp)
    if len(state) >= k or cands.size == 0:
        return state
    g = state.gains(cands)
    pos = 0
    while len(state) < k:
        hits = np.flatnonzero(g[pos:] >= tau)
        if hits.size == 0:
            break
        j = pos + int(hits[0])
        state.add(int(cands[j]))
        pos = j + 1
        if pos >= cands.size:
            break
        live = pos + np.flatnonzero(g[pos:] >= tau)
        if live.size:
            g[live] = state.gains(cands[live])
    return state


def _singleton_lookup(oracle: SubmodularOracle, coreset: CoreSet):
    if coreset.singletons:
        return lambda e: coreset.singletons[e] if e in coreset.singletons else oracle.singleton_value(e)
    return oracle.singleton_value


def ordered_candidates(elements: Iterable[int], value_of) -> np.ndarray:
    """Sort by descending singleton value, then ascending id."""
    return np.asarray(sorted(set(elements), key=lambda e: (-value_of(e), e)), dtype=np.intp)


def extract_solution_centralized(
    oracle: SubmodularOracle,
    coreset: CoreSet,
    D: Iterable[int] = (),
    k: int | None = None,
) -> Solution:
    """Best size-``<=k`` solution from the core-set survivors once ``D`` is known."""
    if coreset.provenance not in ("centralized", "compact"):
        raise PreconditionError(f"centralized extraction cannot read a {coreset.provenance} core-set")
    k = coreset.k if k is None else int(k)
    D = set(int(e) for e in D)
    A_alive = {i: [e for e in lst if e not in D] for i, lst in coreset.A.items()}
    B_alive = [e for e in coreset.reserve if e not in D]
    for lst in coreset.B.values():
        B_alive.extend(e for e in lst if e not in D)
    survivors = set(B_alive).union(*A_alive.values()) if A_alive else set(B_alive)
    if not survivors or k <= 0:
        return Solution.empty()
    value_of = _singleton_lookup(oracle, coreset)
    delta0 = max(value_of(e) for e in survivors)
    if not delta0 > 0:
        return Solution.empty()

    grid = ThresholdGrid(coreset.epsilon)
    cands = ordered_candidates(B_alive, value_of)
    a_exps = sorted(A_alive, reverse=True)
    best: Solution | None = None
    for i in grid.window(delta0, k):
        tau = grid.value(i)
        seed = [e for j in a_exps if j >= i for e in A_alive[j]]
        st = threshold_fill(oracle.state(seed[:k]), cands, tau, k)
        if best is None or st.value > best.value:
            best = Solution(tuple(st.elements), st.value, {"exponent": i, "threshold": tau})
    return best if best is not None else Solution.empty()
