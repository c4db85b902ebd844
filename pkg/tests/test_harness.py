import csv
import math

import numpy as np
import pytest

from conftest import random_logdet
from robustsub import AlgoParams, DeletionSpec, ThresholdGrid, brute_force_opt, coreset_size_bound
from robustsub.harness.datasets import (
    DatasetDescriptor,
    LoadedData,
    load_dataset,
    make_oracle,
    synthetic_census,
)
from robustsub.harness.experiment import (
    ALGORITHMS,
    COLUMNS,
    ConfigError,
    ExperimentConfig,
    run_experiment,
)
from robustsub.errors import InputError, SchemaError
from robustsub.objectives import GroundSet

SYN_UBER = DatasetDescriptor("synthetic", schema={"generator": "uber"}, params={"n": 120}, seed=1)


def _cfg(**kw):
    base = dict(dataset=SYN_UBER, algorithms=list(ALGORITHMS), k=5, d=2, epsilon=0.2, machines=2, trials=2)
    base.update(kw)
    return ExperimentConfig(**base)


def test_greedy_without_deletion_is_one():
    rep = run_experiment(_cfg(algorithms=["greedy"]))
    assert all(r["normalized"] == 1.0 for r in rep.rows)


def test_example_one_normalised():
    desc = DatasetDescriptor("synthetic", schema={"generator": "identical"}, params={"n": 5})
    cfg = ExperimentConfig(
        desc, ["robust-centralized"], k=1, d=1, epsilon=0.5, trials=10,
        deletions=[DeletionSpec("ids", ids=(e,)) for e in range(5)],
    )  # fmt: skip
    rep = run_experiment(cfg)
    assert len(rep.rows) == 50 and all(r["normalized"] == 1.0 for r in rep.rows)


def test_reproducible_and_parallel_invariant():
    dels = [DeletionSpec("greedy", r=2), DeletionSpec("random", fraction=0.3)]
    a = run_experiment(_cfg(deletions=dels, parallelism=1))
    b = run_experiment(_cfg(deletions=dels, parallelism=4))

    def strip(rows):
        return [{k: v for k, v in r.items() if k != "wall_time"} for r in rows]

    assert strip(a.rows) == strip(b.rows)
    assert len(a.rows) == 2 * len(ALGORITHMS) * 2


def test_stored_conservation():
    cfg = _cfg(deletions=[DeletionSpec("greedy", r=2)])
    rep = run_experiment(cfg)
    p = AlgoParams(cfg.k, cfg.d, cfg.epsilon)
    worst = coreset_size_bound(p, ThresholdGrid(cfg.epsilon).max_window_len(cfg.k))
    for r in rep.rows:
        if r["algorithm"] in ("robust-centralized", "compact-distributed"):
            assert r["stored"] <= worst
        if r["algorithm"] == "robust-distributed":
            assert r["stored"] <= cfg.machines * worst
        if r["algorithm"] == "sg-robust":
            assert r["stored"] == 6 * cfg.k
        if r["algorithm"] == "sg-distributed":
            assert r["stored"] == 6 * cfg.k * cfg.machines
        assert r["status"] == "ok" and r["oracle_calls"] > 0


def test_normalised_below_opt_ratio():
    o = random_logdet(12, 4, clustered=True)
    data = LoadedData(GroundSet(12), "logdet")
    dels = [DeletionSpec("ids", ids=(0, 3)), DeletionSpec("greedy", r=1)]
    cfg = ExperimentConfig(SYN_UBER, list(ALGORITHMS), k=3, d=2, epsilon=0.2, deletions=dels, trials=3, machines=2)
    rep = run_experiment(cfg, data=data, oracle=o)
    for r in rep.rows:
        D = {0, 3} if r["deletion"] == "ids:2" else {int(np.argmax([o.singleton_value(e) for e in range(12)]))}
        opt = brute_force_opt(o, range(12), 3, D)[1]
        assert r["raw"] <= opt + 1e-9
        assert r["normalized"] <= opt / r["reference"] + 1e-9


def test_delta_maps_to_epsilon():
    cfg = _cfg(epsilon=None, delta=0.3)
    assert cfg.epsilon_for("robust-centralized") == pytest.approx(0.2)
    assert cfg.epsilon_for("robust-distributed") == pytest.approx(0.15)


def test_csv_columns_and_failure_row(tmp_path):
    out = tmp_path / "r.csv"
    run_experiment(_cfg(algorithms=["greedy", "sg"], output=str(out)))
    with out.open() as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == COLUMNS and len(rows) == 5

    bad = tmp_path / "bad.csv"
    cfg = _cfg(algorithms=["greedy"], deletions=[DeletionSpec("greedy", r=999)], output=str(bad))
    with pytest.raises(InputError):
        run_experiment(cfg)
    with bad.open() as fh:
        last = list(csv.DictReader(fh))[-1]
    assert last["status"].startswith("failed")


def test_config_errors():
    with pytest.raises(ConfigError):
        _cfg(epsilon=None)
    with pytest.raises(ConfigError):
        _cfg(delta=0.1)
    with pytest.raises(ConfigError):
        _cfg(algorithms=["nope"])
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"algorithms": ["greedy"], "k": 2, "epsilon": 0.1})
    with pytest.raises(ConfigError):
        run_experiment(_cfg(epsilon=1.5, algorithms=["robust-centralized"]))


def test_config_from_dict_strings():
    cfg = ExperimentConfig.from_dict(
        {"dataset": "synthetic:uber,n=50,seed=2", "algorithms": ["greedy"], "k": 3, "epsilon": 0.1,
         "deletions": ["greedy:2", {"strategy": "random", "fraction": 0.5}]}
    )  # fmt: skip
    assert cfg.dataset.params == {"n": 50} and cfg.dataset.seed == 2
    assert [d.label for d in cfg.deletions] == ["greedy:2", "random:0.5"]


def test_synthetic_loaders_deterministic():
    a, b = load_dataset(SYN_UBER), load_dataset(SYN_UBER)
    assert np.array_equal(a.points, b.points)
    census = load_dataset(DatasetDescriptor("synthetic", schema={"generator": "census"}, params={"n": 200}))
    assert census.points.min() >= 0 and census.points.max() <= 1
    K = make_oracle(census).kernel
    sub = K.block(range(50), range(50))
    assert np.all(sub >= 0) and np.all(sub <= 1)
    X, sex = synthetic_census(n=100, features=5, seed=3)
    assert X.shape == (100, 5) and set(np.unique(sex)) <= {0, 1}


def test_csv_loader(tmp_path):
    good = tmp_path / "pts.csv"
    good.write_text("Date/Time,Lat,Lon,Base\nx,40.7,-74.0,B\ny,40.8,-73.9,B\nz,40.6,-73.8,B\n")
    data = load_dataset(DatasetDescriptor("geo-points", str(good), {"latitude": "Lat", "longitude": "Lon"}))
    assert data.ground.n == 3

    ragged = tmp_path / "ragged.csv"
    ragged.write_text("Lat,Lon\n40.7,-74.0\n40.8\n")
    with pytest.raises(InputError, match=":3:"):
        load_dataset(DatasetDescriptor("geo-points", str(ragged)))

    nonnum = tmp_path / "nonnum.csv"
    nonnum.write_text("Lat,Lon\n40.7,-74.0\nabc,-73.0\n")
    with pytest.raises(InputError, match=":3:"):
        load_dataset(DatasetDescriptor("geo-points", str(nonnum)))

    with pytest.raises(SchemaError):
        load_dataset(DatasetDescriptor("geo-points", str(good), {"latitude": "Latitude"}))
    with pytest.raises(InputError):
        load_dataset(DatasetDescriptor("geo-points", str(tmp_path / "missing.csv")))


def test_subsample_deterministic(tmp_path):
    path = tmp_path / "v.csv"
    rows = "\n".join(f"{i},{i * 2},{i % 2}" for i in range(50))
    path.write_text("a,b,iSex\n" + rows + "\n")
    desc = DatasetDescriptor("numeric-vectors", str(path), {"attributes": ["iSex"]}, subsample=10, seed=4)
    a, b = load_dataset(desc), load_dataset(desc)
    assert a.ground.n == 10 and np.array_equal(a.points, b.points)
    assert set(np.unique(a.ground.attributes["iSex"])) <= {0.0, 1.0}
    assert math.isclose(a.points.max(), 1.0)
