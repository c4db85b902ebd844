"""Single-pass deletion-robust core-set and its extraction.

Every active threshold ``tau`` runs its own instance ("row"): a selected list
``A_tau`` and buckets ``B_{tau,tau'}`` holding elements whose gain with
respect to ``A_tau`` lies in ``[tau', (1+eps) tau')``.  A bucket that reaches
``ceil(d/eps)`` members donates one random member to ``A_tau``; the row's
gains are then recomputed and its elements re-bucketed or dropped.

The ``d + 1`` largest singletons seen so far are held aside in a reserve and
define ``Delta_d``; the active window is the grid inside
``[Delta_d / (2 (1+eps) k), Delta_d]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .centralized import ordered_candidates, threshold_fill
from .core import AlgoParams, BuildTrace, CoreSet, PoolPicker, Solution, ThresholdGrid
from .errors import InputError, PreconditionError
from .objectives import OracleState, SubmodularOracle


@dataclass
class _Row:
    state: OracleState
    buckets: dict[int, dict[int, float]] = field(default_factory=dict)  # tau' -> {element: gain}

    def size(self) -> int:
        return len(self.state) + sum(map(len, self.buckets.values()))


class StreamState:
    """Incremental builder; feed elements with :meth:`insert`, then :meth:`finalize`."""

    def __init__(self, oracle: SubmodularOracle, params: AlgoParams, trace: BuildTrace | None = None):
        self.oracle = oracle
        self.params = params
        self.grid = ThresholdGrid(params.epsilon)
        self.quota = params.pool_quota
        self.picker = PoolPicker(oracle.n, params.seed, params.policy)
        self.trace = trace
        self.t = 0
        self.seen: set[int] = set()
        self.reserve: list[int] = []  # descending (value, -id)
        self.rows: dict[int, _Row] = {}
        self.window: list[int] = []
        self._single = oracle.singletons()

    # reserve ---------------------------------------------------------------
    def _key(self, e: int):
        return (-float(self._single[e]), e)

    @property
    def delta_0(self) -> float:
        return float(self._single[self.reserve[0]]) if self.reserve else 0.0

    @property
    def delta_d(self) -> float:
        return float(self._single[self.reserve[-1]]) if self.reserve else 0.0

    def _admit(self, e: int) -> int | None:
        """Offer ``e`` to the reserve; return the element that must be bucketed, if any."""
        cap = self.params.d + 1
        if len(self.reserve) < cap:
            self.reserve.append(e)
            self.reserve.sort(key=self._key)
            return None
        if self._key(e) < self._key(self.reserve[-1]):
            out = self.reserve.pop()
            self.reserve.append(e)
            self.reserve.sort(key=self._key)
            return out
        return e

    # rows --------------------------------------------------------------------
    def _slide_window(self) -> None:
        window = self.grid.window(self.delta_d, self.params.k)
        active = set(window)
        for i in [i for i in self.rows if i not in active]:
            del self.rows[i]
        for row in self.rows.values():
            for j in [j for j in row.buckets if j not in active]:
                del row.buckets[j]
        for i in window:
            if i not in self.rows:
                self.rows[i] = _Row(self.oracle.state())
        self.window = window

    def _place(self, row: _Row, e: int, g: float) -> None:
        j = self.grid.floor_exponent(g)
        row.buckets.setdefault(j, {})[e] = g

    def _cascade(self, i: int, row: _Row) -> None:
        tau = self.grid.value(i)
        while len(row.state) < self.params.k:
            full = [j for j, b in row.buckets.items() if len(b) >= self.quota]
            if not full:
                return
            j = max(full)
            pool = np.fromiter(row.buckets[j], dtype=np.intp)
            e = self.picker.pick(pool)
            if self.trace is not None:
                self.trace.picks.append((i, e, int(pool.size), row.buckets[j][e]))
            del row.buckets[j][e]
            row.state.add(e)
            members = np.fromiter((x for b in row.buckets.values() for x in b), dtype=np.intp)
            row.buckets = {}
            if members.size:
                gains = row.state.gains(members)
                for x, g in zip(members.tolist(), gains.tolist()):
                    if g >= tau:
                        self._place(row, x, g)
        # a full row accepts nothing more; keep at most quota members per bucket
        for j, b in row.buckets.items():
            if len(b) > self.quota:
                keep = set(self.picker.truncate(np.fromiter(b, dtype=np.intp), self.quota).tolist())
                row.buckets[j] = {x: g for x, g in b.items() if x in keep}

    def _process(self, e: int) -> None:
        for i in self.window:
            row = self.rows[i]
            if len(row.state) >= self.params.k:
                continue
            g = row.state.gain(e)
            if g >= self.grid.value(i):
                self._place(row, e, g)
                self._cascade(i, row)

    # public ------------------------------------------------------------------
    def insert(self, e: int) -> "StreamState":
        e = int(e)
        self.oracle._check_id(e)
        if e in self.seen:
            raise InputError(f"element {e} was already streamed")
        self.seen.add(e)
        self.t += 1
        pending = self._admit(e)
        self._slide_window()
        if pending is not None:
            self._process(pending)
        if self.trace is not None:
            self.trace.memory.append(self.stored_count())
        return self

    def extend(self, stream: Iterable[int]) -> "StreamState":
        for e in stream:
            self.insert(e)
        return self

    def stored_count(self) -> int:
        """Retained entries, counting an element once per row that holds it."""
        return len(self.reserve) + sum(row.size() for row in self.rows.values())

    def memory_bound(self) -> int:
        """``(d+1) + |window| * (k + |window| * ceil(d/eps))``."""
        w = len(self.window)
        return (self.params.d + 1) + w * (self.params.k + w * self.quota)

    def finalize(self) -> CoreSet:
        p = self.params
        cs = CoreSet("streaming", p.k, p.d, p.epsilon, p.seed, p.policy)
        cs.reserve = list(self.reserve)
        cs.delta_d = self.delta_d
        cs.buckets = {}
        for i in sorted(self.rows, reverse=True):
            row = self.rows[i]
            if row.state.elements:
                cs.A[i] = list(row.state.elements)
            buckets = {j: sorted(b) for j, b in sorted(row.buckets.items(), reverse=True) if b}
            if buckets:
                cs.buckets[i] = buckets
                cs.B[i] = sorted(x for b in buckets.values() for x in b)
        cs.singletons = {e: float(self._single[e]) for e in sorted(cs.elements())}
        return cs


def stream_insert(state: StreamState, e: int) -> StreamState:
    return state.insert(e)


def finalize_stream(state: StreamState) -> CoreSet:
    return state.finalize()


def build_coreset_streaming(
    oracle: SubmodularOracle,
    stream: Iterable[int],
    params: AlgoParams,
    trace: BuildTrace | None = None,
) -> CoreSet:
    return StreamState(oracle, params, trace).extend(stream).finalize()


def extract_solution_streaming(
    oracle: SubmodularOracle,
    coreset: CoreSet,
    D: Iterable[int] = (),
    k: int | None = None,
) -> Solution:
    """Per threshold, start from the surviving ``A_tau`` alone and refill from its pool and the reserve."""
    if coreset.provenance != "streaming":
        raise PreconditionError(f"streaming extraction cannot read a {coreset.provenance} core-set")
    k = coreset.k if k is None else int(k)
    D = set(int(e) for e in D)
    A_alive = {i: [e for e in lst if e not in D] for i, lst in coreset.A.items()}
    B_alive = {i: [e for e in lst if e not in D] for i, lst in coreset.B.items()}
    R_alive = [e for e in coreset.reserve if e not in D]
    survivors = set(R_alive)
    for lst in (*A_alive.values(), *B_alive.values()):
        survivors.update(lst)
    if not survivors or k <= 0:
        return Solution.empty()

    def value_of(e):
        return coreset.singletons[e] if e in coreset.singletons else oracle.singleton_value(e)

    delta0 = max(value_of(e) for e in survivors)
    if not delta0 > 0:
        return Solution.empty()
    grid = ThresholdGrid(coreset.epsilon)
    best: Solution | None = None
    for i in grid.window(delta0, k):
        tau = grid.value(i)
        cands = ordered_candidates([*B_alive.get(i, ()), *R_alive], value_of)
        st = threshold_fill(oracle.state(A_alive.get(i, [])[:k]), cands, tau, k)
        if best is None or st.value > best.value:
            best = Solution(tuple(st.elements), st.value, {"exponent": i, "threshold": tau})
    return best if best is not None else Solution.empty()
