"""Command-line entry point: ``robustsub build|extract|run|oracle-check``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric-integrity
error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from ..baselines import greedy
from ..centralized import build_coreset_centralized, extract_solution_centralized
from ..core import AlgoParams
from ..deletions import DeletionSpec, deletion_seed
from ..distributed import DistributedCoreSet, build_distributed, compact_coreset, extract_solution_distributed
from ..errors import FormatError, InputError, NumericIntegrityError, PreconditionError, SchemaError
from ..streaming import build_coreset_streaming, extract_solution_streaming
from .datasets import DatasetDescriptor, load_dataset, make_oracle, read_config_file
from .experiment import ConfigError, ExperimentConfig, ExperimentReport, _Trial, run_experiment
from .persistence import load_coreset, save_coreset

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
BUILD_ALGORITHMS = ("robust-centralized", "robust-streaming", "robust-distributed", "compact-distributed")


def _objective(text: str | None) -> dict:
    if not text:
        return {}
    try:
        obj = json.loads(text)
    except json.JSONDecodeError:
        # shorthand: logdet | mi | logdet:linear
        kind, _, kernel = text.partition(":")
        obj = {"kind": kind}
        if kernel:
            obj["kernel"] = kernel
    if not isinstance(obj, dict):
        raise ConfigError("--objective must be a JSON object or a kind name")
    return obj


def cmd_build(args) -> int:
    if (args.delta is None) == (args.epsilon is None):
        raise ConfigError("give exactly one of --delta or --epsilon")
    desc = DatasetDescriptor.parse(args.dataset)
    objective = _objective(args.objective)
    data = load_dataset(desc)
    oracle = make_oracle(data, objective)
    try:
        if args.delta is not None:
            mode = "distributed" if args.algorithm in ("robust-distributed", "compact-distributed") else "centralized"
            params = AlgoParams.from_delta(args.k, args.d, args.delta, mode, seed=args.seed, policy=args.policy)
        else:
            params = AlgoParams(args.k, args.d, args.epsilon, args.seed, args.policy)
    except InputError as exc:
        raise ConfigError(str(exc)) from exc
    t0 = time.perf_counter()
    if args.algorithm == "robust-centralized":
        obj = build_coreset_centralized(oracle, None, params)
    elif args.algorithm == "robust-streaming":
        order = np.arange(oracle.n)
        if args.stream_order == "shuffle":
            order = np.random.default_rng(args.seed).permutation(oracle.n)
        obj = build_coreset_streaming(oracle, order.tolist(), params)
    else:
        obj = build_distributed(oracle, None, args.machines, params, parallelism=args.parallelism)
        if args.algorithm == "compact-distributed":
            obj = compact_coreset(oracle, obj, params)
    meta = {
        "algorithm": args.algorithm,
        "dataset": desc.to_dict(),
        "objective": objective,
        "machines": args.machines,
        "build_calls": oracle.calls,
        "build_time": round(time.perf_counter() - t0, 6),
    }
    save_coreset(obj, args.out, meta)
    print(f"{args.algorithm}: stored {len(obj)} of {oracle.n} elements -> {args.out}")
    return EXIT_OK


def cmd_extract(args) -> int:
    obj, meta = load_coreset(args.coreset, with_meta=True)
    try:
        desc = DatasetDescriptor.from_dict(meta["dataset"])
        algorithm = meta["algorithm"]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"core-set file lacks build metadata: {exc}") from exc
    data = load_dataset(desc)
    oracle = make_oracle(data, meta.get("objective", {}))
    spec = DeletionSpec.parse(args.delete)
    D = spec.generate(oracle, data.ground, deletion_seed(args.seed))
    t0 = time.perf_counter()
    k = obj.machines[0].k if isinstance(obj, DistributedCoreSet) else obj.k
    if isinstance(obj, DistributedCoreSet):
        sol = extract_solution_distributed(oracle, obj, D, k)
    elif obj.provenance == "streaming":
        sol = extract_solution_streaming(oracle, obj, D, k)
    else:
        sol = extract_solution_centralized(oracle, obj, D, k)
    elapsed = time.perf_counter() - t0
    calls = oracle.calls
    # reference value knows D in advance
    if isinstance(obj, DistributedCoreSet) or algorithm == "compact-distributed":
        cfg = ExperimentConfig(desc, [algorithm], k, epsilon=0.5, machines=int(meta.get("machines", 1)), seed=args.seed)
        ref = _Trial(cfg, data, oracle, 0).reference(algorithm, D)
    else:
        ref = greedy(oracle, [e for e in range(oracle.n) if e not in D], k).value
    ok = ref > 0
    first = obj.machines[0] if isinstance(obj, DistributedCoreSet) else obj
    row = {
        "algorithm": algorithm, "k": k, "d": first.d, "epsilon": first.epsilon, "seed": args.seed,
        "deletion": spec.label, "r": len(D), "raw": sol.value,
        "reference": ref, "normalized": sol.value / ref if ok else float("nan"), "stored": len(obj),
        "oracle_calls": calls, "wall_time": round(elapsed, 6), "status": "ok" if ok else "degenerate",
    }  # fmt: skip
    ExperimentReport([row]).to_csv(args.out)
    if args.selected:
        with open(args.selected, "w") as fh:
            json.dump({"elements": list(sol.elements), "value": sol.value, "deleted": sorted(D)}, fh)
    print(f"value {sol.value:.6g} / reference {ref:.6g} with |D|={len(D)} -> {args.out}")
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        raw = read_config_file(args.config)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"{args.config}: {exc}") from exc
    if args.out:
        raw["output"] = args.out
    if args.parallelism is not None:
        raw["parallelism"] = args.parallelism
    cfg = ExperimentConfig.from_dict(raw)
    report = run_experiment(cfg)
    ok = sum(r["status"] == "ok" for r in report.rows)
    print(f"{len(report.rows)} rows ({ok} ok) -> {cfg.output or '(not written)'}")
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    """Randomised monotonicity and diminishing-returns checks on the loaded objective."""
    data = load_dataset(DatasetDescriptor.parse(args.dataset))
    oracle = make_oracle(data, _objective(args.objective))
    rng = np.random.default_rng(args.seed)
    n, tol = oracle.n, 1e-9
    cap = min(n - 1, args.max_size)
    bad_mono = bad_sub = 0
    for _ in range(args.trials):
        size_b = int(rng.integers(0, cap + 1))
        perm = rng.permutation(n)
        B = perm[:size_b].tolist()
        A = B[: int(rng.integers(0, size_b + 1))]
        e = int(perm[size_b])
        gain_b = oracle.marginal_gain(e, B)
        gain_a = oracle.marginal_gain(e, A)
        bad_mono += gain_b < -tol
        bad_sub += gain_a < gain_b - tol * max(1.0, abs(gain_b))
    print(f"monotonicity: {args.trials - bad_mono}/{args.trials} ok")
    print(f"submodularity: {args.trials - bad_sub}/{args.trials} ok")
    return EXIT_OK if bad_mono == bad_sub == 0 else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="robustsub", description="Deletion-robust submodular maximization.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a core-set and save it")
    b.add_argument("--algorithm", choices=BUILD_ALGORITHMS, default="robust-centralized")
    b.add_argument("--dataset", required=True, help="descriptor file, synthetic:NAME[,k=v] or SCHEMA:PATH")
    b.add_argument("--objective", help="JSON objective description or shorthand (logdet, mi, logdet:linear)")
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--d", type=int, default=0)
    b.add_argument("--delta", type=float)
    b.add_argument("--epsilon", type=float)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--machines", type=int, default=1)
    b.add_argument("--parallelism", type=int)
    b.add_argument("--policy", choices=("permutation", "uniform"), default="permutation")
    b.add_argument("--stream-order", choices=("index", "shuffle"), default="index")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_build)

    x = sub.add_parser("extract", help="apply deletions to a saved core-set and extract a solution")
    x.add_argument("--coreset", required=True)
    x.add_argument("--delete", default="none", help="none, greedy:R, sg:R, random:F, predicate:ATTR==V, names:A,B, ids:1,2")
    x.add_argument("--seed", type=int, default=0)
    x.add_argument("--out", required=True, help="CSV report path")
    x.add_argument("--selected", help="also write the chosen elements as JSON")
    x.set_defaults(func=cmd_extract)

    r = sub.add_parser("run", help="run an experiment from a TOML or JSON config")
    r.add_argument("--config", required=True)
    r.add_argument("--out")
    r.add_argument("--parallelism", type=int)
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("oracle-check", help="randomised property checks of an objective")
    c.add_argument("--dataset", required=True)
    c.add_argument("--objective")
    c.add_argument("--trials", type=int, default=200)
    c.add_argument("--max-size", type=int, default=10)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_oracle_check)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, PreconditionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericIntegrityError as exc:
        print(f"numeric integrity error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SchemaError, InputError, FormatError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
