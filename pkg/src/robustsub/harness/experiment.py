"""Experiment orchestration: build once per trial seed, delete, extract, normalise.

Every row is normalised by a reference algorithm that knows ``D`` in advance:
greedy on ``V \\ D`` for centralized, streaming and single-machine baselines,
and stochastic-greedy-distributed on ``V \\ D`` for distributed algorithms.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..baselines import greedy, sg_distributed_baseline, stochastic_greedy
from ..centralized import build_coreset_centralized, extract_solution_centralized
from ..core import AlgoParams, child_seed
from ..deletions import DeletionSpec, deletion_seed
from ..distributed import (
    build_distributed,
    compact_coreset,
    default_parallelism,
    extract_solution_distributed,
    partition_random,
)
from ..errors import InputError
from ..objectives import SubmodularOracle
from ..streaming import build_coreset_streaming, extract_solution_streaming
from .datasets import DatasetDescriptor, LoadedData, load_dataset, make_oracle

ALGORITHMS = (
    "robust-centralized",
    "robust-streaming",
    "robust-distributed",
    "compact-distributed",
    "greedy",
    "sg",
    "sg-robust",
    "sg-distributed",
)
DISTRIBUTED = frozenset({"robust-distributed", "compact-distributed", "sg-distributed"})
COLUMNS = (
    "algorithm", "k", "d", "epsilon", "seed", "deletion", "r", "raw", "reference",
    "normalized", "stored", "oracle_calls", "wall_time", "status",
)  # fmt: skip


class ConfigError(InputError):
    """The experiment configuration is inconsistent or incomplete."""


@dataclass
class ExperimentConfig:
    dataset: DatasetDescriptor
    algorithms: list[str]
    k: int
    d: int = 0
    delta: float | None = None
    epsilon: float | None = None
    objective: dict = field(default_factory=dict)
    deletions: list[DeletionSpec] = field(default_factory=lambda: [DeletionSpec("none")])
    trials: int = 1
    seed: int = 0
    machines: int = 1
    policy: str = "permutation"
    stream_order: str = "index"
    oversample: int = 6
    sg_epsilon: float = 0.1
    parallelism: int | None = None
    output: str | None = None

    def __post_init__(self):
        if isinstance(self.algorithms, str):
            self.algorithms = [self.algorithms]
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise ConfigError(f"unknown algorithm(s) {bad}; choose from {ALGORITHMS}")
        if (self.delta is None) == (self.epsilon is None):
            raise ConfigError("give exactly one of delta or epsilon")
        if self.k < 1 or self.d < 0 or self.trials < 1 or self.machines < 1:
            raise ConfigError("k, trials and machines must be positive and d non-negative")
        if self.stream_order not in ("index", "shuffle"):
            raise ConfigError("stream_order must be 'index' or 'shuffle'")

    def epsilon_for(self, algorithm: str) -> float:
        if self.epsilon is not None:
            return float(self.epsilon)
        mode = "distributed" if algorithm in DISTRIBUTED else "centralized"
        return AlgoParams.from_delta(self.k, self.d, float(self.delta), mode).epsilon

    def params_for(self, algorithm: str, seed: int) -> AlgoParams:
        try:
            return AlgoParams(self.k, self.d, self.epsilon_for(algorithm), seed, self.policy)
        except InputError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        try:
            ds = data.pop("dataset")
            dataset = DatasetDescriptor.parse(ds) if isinstance(ds, str) else DatasetDescriptor.from_dict(ds)
            algs = data.pop("algorithms", None) or data.pop("algorithm", None)
            dels = data.pop("deletions", None)
            if dels is None:
                deletions = [DeletionSpec("none")]
            else:
                deletions = [DeletionSpec.parse(x) if isinstance(x, str) else DeletionSpec.from_dict(x) for x in dels]
            return cls(dataset=dataset, algorithms=algs, deletions=deletions, **data)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad experiment config: {exc}") from exc


@dataclass
class ExperimentReport:
    rows: list[dict[str, Any]] = field(default_factory=list)

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=COLUMNS)
            w.writeheader()
            for row in self.rows:
                w.writerow({c: row.get(c, "") for c in COLUMNS})

    def select(self, **match) -> list[dict]:
        return [r for r in self.rows if all(r.get(k) == v for k, v in match.items())]

    def mean_normalized(self, algorithm: str, deletion: str | None = None) -> float:
        vals = [
            r["normalized"]
            for r in self.select(algorithm=algorithm, **({} if deletion is None else {"deletion": deletion}))
            if r["status"] == "ok"
        ]
        return float(np.mean(vals)) if vals else math.nan


class _Trial:
    """One trial seed: deletion sets, references, and every algorithm's rows."""

    def __init__(self, cfg: ExperimentConfig, data: LoadedData, oracle: SubmodularOracle, index: int):
        self.cfg = cfg
        self.data = data
        self.oracle = oracle
        self.index = index
        self.seed = child_seed(cfg.seed, index)
        self.build_seed = child_seed(self.seed, 0)
        self.ref_seed = child_seed(self.seed, 1)
        self.V = list(range(oracle.n))

    def deletion_sets(self) -> list[tuple[DeletionSpec, set[int]]]:
        return [
            (spec, spec.generate(self.oracle, self.data.ground, deletion_seed(self.seed, j)))
            for j, spec in enumerate(self.cfg.deletions)
        ]

    def reference(self, algorithm: str, D: set[int]) -> float:
        alive = [e for e in self.V if e not in D]
        if algorithm in DISTRIBUTED:
            cfg = self.cfg
            return sg_distributed_baseline(
                self.oracle, alive, cfg.machines, cfg.k, (), self.ref_seed, cfg.oversample, cfg.sg_epsilon
            ).value
        return greedy(self.oracle, alive, self.cfg.k).value

    def _phase_one(self, algorithm: str, o: SubmodularOracle):
        """Return ``(extract(D) -> Solution, stored)`` for one algorithm."""
        cfg, k = self.cfg, self.cfg.k
        params = cfg.params_for(algorithm, self.build_seed) if algorithm.startswith(("robust", "compact")) else None
        if algorithm == "robust-centralized":
            cs = build_coreset_centralized(o, None, params)
            return (lambda D: extract_solution_centralized(o, cs, D, k)), len(cs)
        if algorithm == "robust-streaming":
            order = np.arange(o.n)
            if cfg.stream_order == "shuffle":
                order = np.random.default_rng(self.build_seed).permutation(o.n)
            cs = build_coreset_streaming(o, order.tolist(), params)
            return (lambda D: extract_solution_streaming(o, cs, D, k)), len(cs)
        if algorithm in ("robust-distributed", "compact-distributed"):
            dcs = build_distributed(o, None, cfg.machines, params, parallelism=1)
            if algorithm == "robust-distributed":
                return (lambda D: extract_solution_distributed(o, dcs, D, k)), len(dcs)
            cs = compact_coreset(o, dcs, params)
            return (lambda D: extract_solution_centralized(o, cs, D, k)), len(cs)
        if algorithm == "greedy":
            return (lambda D: greedy(o, [e for e in self.V if e not in D], k)), k
        if algorithm == "sg":
            S = stochastic_greedy(o, self.V, k, cfg.sg_epsilon, self.build_seed)

            def sg_extract(D):
                alive = [e for e in S.elements if e not in D]
                st = o.state(alive)
                return type(S)(tuple(alive), st.value)

            return sg_extract, len(S)
        if algorithm == "sg-robust":
            kept = stochastic_greedy(o, self.V, cfg.oversample * k, cfg.sg_epsilon, self.build_seed).elements
        else:  # sg-distributed
            kept = []
            for i, part in enumerate(partition_random(self.V, cfg.machines, self.build_seed)):
                kept.extend(
                    stochastic_greedy(o, part, cfg.oversample * k, cfg.sg_epsilon, child_seed(self.build_seed, i)).elements
                )
        return (lambda D: greedy(o, [e for e in kept if e not in D], k)), len(kept)

    def run(self) -> list[dict]:
        cfg = self.cfg
        deletions = self.deletion_sets()
        refs: dict[tuple[bool, int], float] = {}
        rows = []
        for algorithm in cfg.algorithms:
            o = self.oracle.clone()
            t0 = time.perf_counter()
            extract, stored = self._phase_one(algorithm, o)
            build_time, build_calls = time.perf_counter() - t0, o.calls
            for j, (spec, D) in enumerate(deletions):
                calls0, t1 = o.calls, time.perf_counter()
                sol = extract(D)
                elapsed = build_time + time.perf_counter() - t1
                calls = build_calls + o.calls - calls0
                key = (algorithm in DISTRIBUTED, j)
                if key not in refs:
                    refs[key] = self.reference(algorithm, D)
                ref = refs[key]
                ok = ref > 0
                rows.append(
                    {
                        "algorithm": algorithm,
                        "k": cfg.k,
                        "d": cfg.d,
                        "epsilon": cfg.epsilon_for(algorithm),
                        "seed": self.seed,
                        "deletion": spec.label,
                        "r": len(D),
                        "raw": sol.value,
                        "reference": ref,
                        "normalized": sol.value / ref if ok else math.nan,
                        "stored": stored,
                        "oracle_calls": calls,
                        "wall_time": round(elapsed, 6),
                        "status": "ok" if ok else "degenerate",
                    }
                )
        return rows


def run_experiment(
    config: ExperimentConfig,
    data: LoadedData | None = None,
    oracle: SubmodularOracle | None = None,
) -> ExperimentReport:
    """Run every trial; rows come back in (trial, algorithm, deletion) order."""
    if data is None:
        data = load_dataset(config.dataset)
    if oracle is None:
        oracle = make_oracle(data, config.objective)
    trials = [_Trial(config, data, oracle, t) for t in range(config.trials)]
    workers = min(len(trials), config.parallelism or default_parallelism())
    report = ExperimentReport()
    done: list[list[dict] | None] = [None] * len(trials)
    try:
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                futures = [ex.submit(t.run) for t in trials]
                for i, fut in enumerate(futures):
                    done[i] = fut.result()
        else:
            for i, t in enumerate(trials):
                done[i] = t.run()
    except Exception as exc:
        for rows in done:
            report.rows.extend(rows or [])
        report.rows.append({"algorithm": "-", "status": f"failed: {type(exc).__name__}: {exc}"})
        if config.output:
            report.to_csv(config.output)
        raise
    for rows in done:
        report.rows.extend(rows)
    if config.output:
        report.to_csv(config.output)
    return report
