"""Distributed core-sets against distributed stochastic greedy on census-like rows.

Both algorithms run on four simulated machines; rows are normalised by a
distributed stochastic greedy run that knows the deleted rows in advance.
"""

import argparse

from robustsub import DeletionSpec
from robustsub.harness.datasets import DatasetDescriptor
from robustsub.harness.experiment import ExperimentConfig, run_experiment


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=5000)
    ap.add_argument("--trials", type=int, default=3)
    args = ap.parse_args()

    deletions = ["random:0.5", "random:0.8", "predicate:iSex==0"]
    cfg = ExperimentConfig(
        DatasetDescriptor("synthetic", schema={"generator": "census"}, params={"n": args.n}, seed=0),
        ["robust-distributed", "compact-distributed", "sg-distributed"],
        k=25, d=10, epsilon=0.1, machines=4, trials=args.trials,
        deletions=[DeletionSpec.parse(x) for x in deletions],
    )  # fmt: skip
    report = run_experiment(cfg)
    for spec in cfg.deletions:
        cells = ", ".join(f"{a} {report.mean_normalized(a, spec.label):.4f}" for a in cfg.algorithms)
        print(f"{spec.label:<18} {cells}")
    for a in cfg.algorithms:
        stored = report.select(algorithm=a)[0]["stored"]
        print(f"{a:<20} stores {stored} rows")


if __name__ == "__main__":
    main()
