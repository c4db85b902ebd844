"""Normalised value against the number of greedy deletions on clustered pickups.

Runs robust-centralized, robust-streaming and the oversampled stochastic
greedy baseline on a synthetic pickup cloud and prints one mean per (algorithm,
r).  Pass ``--csv PATH`` to keep the per-trial rows.
"""

import argparse

from robustsub import DeletionSpec
from robustsub.harness.datasets import DatasetDescriptor
from robustsub.harness.experiment import ExperimentConfig, run_experiment


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--epsilon", type=float, default=0.1)
    ap.add_argument("--csv")
    args = ap.parse_args()

    cfg = ExperimentConfig(
        DatasetDescriptor("synthetic", schema={"generator": "uber"}, params={"n": args.n}, seed=0),
        ["robust-centralized", "robust-streaming", "sg-robust"],
        k=20, d=5, epsilon=args.epsilon, trials=args.trials,
        deletions=[DeletionSpec("greedy", r=r) for r in range(1, 11)],
        stream_order="shuffle", output=args.csv,
    )  # fmt: skip
    report = run_experiment(cfg)
    print("r   " + "  ".join(f"{a:>18}" for a in cfg.algorithms))
    for r in range(1, 11):
        means = [report.mean_normalized(a, f"greedy:{r}") for a in cfg.algorithms]
        print(f"{r:<3} " + "  ".join(f"{m:>18.4f}" for m in means))


if __name__ == "__main__":
    main()
