"""Two-round robust maximization over ``m`` simulated machines.

Round one partitions the ground set uniformly at random and builds one
centralized core-set per machine.  After deletions, every machine's core-set
is extracted independently and, separately, greedy runs over the union of all
surviving core-set elements; the better of the two answers wins.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .baselines import greedy
from .centralized import _ids, build_coreset_centralized, extract_solution_centralized
from .core import AlgoParams, BuildTrace, CoreSet, Solution, child_seed
from .errors import InputError
from .objectives import SubmodularOracle

PARALLELISM_ENV = "ROBUSTSUB_PARALLELISM"


def default_parallelism() -> int:
    try:
        return max(1, int(os.environ.get(PARALLELISM_ENV, "1")))
    except ValueError:
        return 1


@dataclass
class DistributedCoreSet:
    m: int
    seed: int
    machines: list[CoreSet]
    assignment: dict[int, int] = field(default_factory=dict)  # element -> machine

    @property
    def child_seeds(self) -> list[int]:
        return [child_seed(self.seed, i) for i in range(self.m)]

    def parts(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.m)]
        for e, i in sorted(self.assignment.items()):
            out[i].append(e)
        return out

    def elements(self) -> set[int]:
        return set().union(*(c.elements() for c in self.machines)) if self.machines else set()

    def __len__(self) -> int:
        return sum(len(c) for c in self.machines)


def partition_random(V: Iterable[int], m: int, seed: int) -> list[list[int]]:
    """Assign every element independently and uniformly to one of ``m`` parts."""
    if m < 1:
        raise InputError("need at least one machine")
    V = sorted(set(int(e) for e in V))
    where = np.random.default_rng(int(seed)).integers(0, m, size=len(V))
    parts: list[list[int]] = [[] for _ in range(m)]
    for e, i in zip(V, where.tolist()):
        parts[i].append(e)
    return parts


def build_distributed(
    oracle: SubmodularOracle,
    V: Iterable[int] | None,
    m: int,
    params: AlgoParams,
    parallelism: int | None = None,
    traces: list[BuildTrace] | None = None,
) -> DistributedCoreSet:
    """Partition with ``params.seed`` and build machine ``i`` with ``child_seed(seed, i)``.

    When ``traces`` is a list, one :class:`BuildTrace` per machine is appended
    to it in machine order.
    """
    V = _ids(V, oracle.n)
    parts = partition_random(V.tolist(), m, params.seed)
    machine_traces = [BuildTrace() if traces is not None else None for _ in range(m)]
    jobs = [(parts[i], params.replace(seed=child_seed(params.seed, i)), machine_traces[i]) for i in range(m)]
    workers = min(m, parallelism or default_parallelism())

    def run(job):
        part, p, trace = job
        return build_coreset_centralized(oracle, part, p, trace)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            machines = list(ex.map(run, jobs))
    else:
        machines = [run(j) for j in jobs]
    if traces is not None:
        traces.extend(machine_traces)
    assignment = {e: i for i, part in enumerate(parts) for e in part}
    return DistributedCoreSet(m, params.seed, machines, assignment)


def extract_solution_distributed(
    oracle: SubmodularOracle,
    dcs: DistributedCoreSet,
    D: Iterable[int] = (),
    k: int | None = None,
) -> Solution:
    D = set(int(e) for e in D)
    if k is None:
        k = dcs.machines[0].k if dcs.machines else 0
    if k <= 0:
        return Solution.empty()
    best_s: Solution | None = None
    for i, cs in enumerate(dcs.machines):
        s = extract_solution_centralized(oracle, cs, D, k)
        if best_s is None or s.value > best_s.value:
            best_s = Solution(s.elements, s.value, {**s.info, "machine": i})
    union = sorted(dcs.elements() - D)
    if not union:
        return Solution.empty()
    t = greedy(oracle, union, k)
    if best_s is None or t.value >= best_s.value:
        return Solution(t.elements, t.value, {"source": "union-greedy"})
    return Solution(best_s.elements, best_s.value, {**best_s.info, "source": "machine"})


def compact_coreset(
    oracle: SubmodularOracle,
    dcs: DistributedCoreSet,
    params: AlgoParams,
    trace: BuildTrace | None = None,
) -> CoreSet:
    """Re-run the centralized builder on the union of all machine core-sets.

    Uses ``child_seed(params.seed, m)``, the first seed index no machine uses.
    """
    p = params.replace(seed=child_seed(params.seed, dcs.m))
    return build_coreset_centralized(oracle, sorted(dcs.elements()), p, trace, provenance="compact")
