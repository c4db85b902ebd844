"""Dataset descriptors, file loaders, synthetic generators and oracle construction.

Files are never bundled.  Descriptors name the columns a loader needs; the
synthetic generators produce data with the same schema at any size for tests
and demos.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..errors import InputError, SchemaError
from ..objectives import (
    GroundSet,
    LabeledBinaryDataset,
    LogDetOracle,
    MutualInfoOracle,
    ModularOracle,
    IdenticalItemsOracle,
    SubmodularOracle,
    gaussian_kernel,
    linear_similarity_kernel,
)

KINDS = ("geo-points", "labeled-binary", "numeric-vectors", "synthetic")

# Sensitive-feature prefixes used when no explicit deletion list is given.
ADULT_SENSITIVE = ("sex=", "race=", "native-country=", "marital-status=", "relationship=")
COMMUNITIES_SENSITIVE = (
    "racepctblack", "racePctWhite", "racePctAsian", "racePctHisp",
    "PctPolicWhite", "PctPolicBlack", "PctPolicHisp", "PctPolicAsian", "PctPolicMinor",
    "MalePctDivorce", "MalePctNevMarr", "FemalePctDiv",
)  # fmt: skip

ADULT_COLUMNS = (
    "age", "workclass", "fnlwgt", "education", "education-num", "marital-status",
    "occupation", "relationship", "race", "sex", "capital-gain", "capital-loss",
    "hours-per-week", "native-country", "income",
)  # fmt: skip


@dataclass
class DatasetDescriptor:
    """Where data comes from and which columns play which role.

    ``schema`` keys by kind:

    * geo-points: ``latitude``, ``longitude``
    * numeric-vectors: ``features`` (list, default all numeric columns except
      ``drop``), ``drop``, ``attributes`` (columns exposed to predicates)
    * labeled-binary: ``label``, ``positive`` (label value or ``"median"``),
      ``features``, ``drop``, ``encoding`` (``binary``, ``median`` or
      ``onehot``), ``columns`` (names for header-less files)
    * synthetic: ``generator`` plus generator keyword arguments in ``params``
    """

    kind: str
    path: str | None = None
    schema: dict[str, Any] = field(default_factory=dict)
    params: dict[str, Any] = field(default_factory=dict)
    subsample: int | None = None
    seed: int = 0
    name: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"dataset kind must be one of {KINDS}")
        if self.kind != "synthetic" and not self.path:
            raise InputError(f"{self.kind} datasets need a path")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "DatasetDescriptor":
        return cls(**data)

    @classmethod
    def parse(cls, text: str) -> "DatasetDescriptor":
        """Accept a descriptor file, ``synthetic:NAME[,key=value...]`` or ``SCHEMA:PATH``.

        ``SCHEMA`` is one of ``uber``, ``census1990``, ``adult``, ``communities``.
        """
        head, sep, rest = text.partition(":")
        if sep and head == "synthetic":
            gen, *pairs = rest.split(",")
            params: dict[str, Any] = {}
            for pair in pairs:
                key, _, raw = pair.partition("=")
                params[key.strip()] = _literal(raw.strip())
            seed = int(params.pop("seed", 0))
            return cls("synthetic", schema={"generator": gen.strip()}, params=params, seed=seed, name=gen.strip())
        if sep and head in BUILTIN_SCHEMAS:
            return BUILTIN_SCHEMAS[head](rest)
        path = Path(text)
        if not path.exists():
            raise InputError(f"no descriptor file {text!r}")
        return cls.from_dict(read_config_file(path))


def _literal(raw: str):
    for conv in (int, float):
        try:
            return conv(raw)
        except ValueError:
            pass
    return raw


def read_config_file(path) -> dict:
    """Load a JSON or TOML mapping."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:  # Python < 3.11
            import tomli as tomllib
        return tomllib.loads(text)
    return json.loads(text)


def uber_descriptor(path: str) -> DatasetDescriptor:
    return DatasetDescriptor("geo-points", path, {"latitude": "Lat", "longitude": "Lon"}, name="uber")


def census_descriptor(path: str) -> DatasetDescriptor:
    return DatasetDescriptor(
        "numeric-vectors", path, {"drop": ["caseid"], "attributes": ["iSex"]}, name="census1990"
    )


def adult_descriptor(path: str) -> DatasetDescriptor:
    return DatasetDescriptor(
        "labeled-binary",
        path,
        {"label": "income", "positive": ">50K", "encoding": "onehot", "columns": list(ADULT_COLUMNS),
         "sensitive": list(ADULT_SENSITIVE)},
        name="adult",
    )  # fmt: skip


def communities_descriptor(path: str) -> DatasetDescriptor:
    return DatasetDescriptor(
        "labeled-binary",
        path,
        {"label": "ViolentCrimesPerPop", "positive": "median", "encoding": "median",
         "drop": ["state", "county", "community", "communityname", "fold"],
         "sensitive": list(COMMUNITIES_SENSITIVE)},
        name="communities",
    )  # fmt: skip


BUILTIN_SCHEMAS = {
    "uber": uber_descriptor,
    "census1990": census_descriptor,
    "adult": adult_descriptor,
    "communities": communities_descriptor,
}


# ---------------------------------------------------------------------------
# synthetic generators
# ---------------------------------------------------------------------------


def synthetic_uber(n: int = 2000, clusters: int = 12, seed: int = 0) -> np.ndarray:
    """Pickup-like ``(lat, lon)`` points: Gaussian hot spots over Manhattan."""
    rng = np.random.default_rng(seed)
    centers = np.column_stack([rng.uniform(40.70, 40.82, clusters), rng.uniform(-74.02, -73.93, clusters)])
    weights = rng.dirichlet(np.ones(clusters))
    which = rng.choice(clusters, size=n, p=weights)
    spread = rng.uniform(0.004, 0.02, clusters)[which][:, None]
    return centers[which] + spread * rng.normal(size=(n, 2))


def synthetic_census(n: int = 20000, features: int = 68, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Integer-coded census-like records plus a 0/1 ``iSex`` column.

    Records come from a mixture of archetypes so the data has cluster
    structure; ``iSex`` shifts a handful of columns.
    """
    rng = np.random.default_rng(seed)
    levels = rng.integers(2, 10, size=features)
    archetypes = rng.uniform(0, 1, size=(16, features))
    which = rng.integers(0, 16, size=n)
    sex = rng.integers(0, 2, size=n)
    latent = archetypes[which] + 0.15 * rng.normal(size=(n, features))
    latent[:, :6] += 0.25 * sex[:, None]
    X = np.clip(np.floor(latent * levels), 0, levels - 1)
    return X, sex


def synthetic_adult(n: int = 4000, features: int = 40, seed: int = 0) -> LabeledBinaryDataset:
    """Binary features of varying informativeness about a binary label.

    Features come in correlated groups, so redundant features exist and the
    mutual-information objective has real diminishing returns.
    """
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, size=n)
    groups = max(1, features // 4)
    latent = rng.normal(size=(n, groups)) + rng.uniform(0.0, 1.5, size=groups) * (2 * y[:, None] - 1)
    X = np.empty((n, features), dtype=np.uint8)
    for j in range(features):
        g = j % groups
        noisy = latent[:, g] + rng.uniform(0.2, 1.5) * rng.normal(size=n)
        X[:, j] = noisy > rng.normal(scale=0.3)
    names = tuple(f"{'sex' if j < 2 else 'race' if j < 4 else 'f'}={j}" for j in range(features))
    return LabeledBinaryDataset(X, y, names)


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------


@dataclass
class LoadedData:
    """Ground set plus the raw arrays an objective is built from."""

    ground: GroundSet
    kind: str
    points: np.ndarray | None = None  # geo: (n, 2) lat/lon; vectors: (n, F) scaled to [0, 1]
    dataset: LabeledBinaryDataset | None = None
    weights: np.ndarray | None = None
    sensitive: tuple[str, ...] = ()


def _read_table(path: str, columns: list[str] | None = None) -> tuple[list[str], list[list[str]]]:
    p = Path(path)
    if not p.exists():
        raise InputError(f"{path}: no such file")
    with p.open(newline="") as fh:
        sample = fh.read(4096)
        fh.seek(0)
        try:
            dialect = csv.Sniffer().sniff(sample, delimiters=",;\t")
        except csv.Error:
            dialect = csv.excel
        reader = csv.reader(fh, dialect)
        rows = [[c.strip() for c in row] for row in reader if row and any(c.strip() for c in row)]
    if columns:
        header = list(columns)
    else:
        if not rows:
            raise InputError(f"{path}: empty file")
        header, rows = rows[0], rows[1:]
    for lineno, row in enumerate(rows, start=1 if columns else 2):
        if len(row) != len(header):
            raise InputError(f"{path}:{lineno}: expected {len(header)} fields, found {len(row)}")
    return header, rows


def _column(header, rows, name, path, numeric=True):
    if name not in header:
        raise SchemaError(f"{path}: declared column {name!r} not in header")
    j = header.index(name)
    if not numeric:
        return np.array([r[j] for r in rows], dtype=object)
    out = np.empty(len(rows))
    for i, r in enumerate(rows):
        try:
            out[i] = float(r[j])
        except ValueError:
            raise InputError(f"{path}:{i + 2}: column {name!r} value {r[j]!r} is not numeric") from None
    if not np.all(np.isfinite(out)):
        bad = int(np.flatnonzero(~np.isfinite(out))[0])
        raise InputError(f"{path}:{bad + 2}: non-finite value in column {name!r}")
    return out


def _subsample_rows(n: int, desc: DatasetDescriptor) -> np.ndarray:
    if desc.subsample is None or desc.subsample >= n:
        return np.arange(n)
    rng = np.random.default_rng(desc.seed)
    return np.sort(rng.choice(n, size=desc.subsample, replace=False))


def minmax_scale(X: np.ndarray) -> np.ndarray:
    lo = X.min(0)
    span = X.max(0) - lo
    span[span == 0] = 1.0
    return (X - lo) / span


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def _binary_table(header, rows, desc: DatasetDescriptor) -> LabeledBinaryDataset:
    sc = desc.schema
    path = desc.path
    label = sc.get("label")
    if label is None:
        raise SchemaError("labeled-binary schema needs a 'label' column")
    drop = set(sc.get("drop", [])) | {label}
    feats = sc.get("features") or [c for c in header if c not in drop]
    raw_y = _column(header, rows, label, path, numeric=False)
    positive = sc.get("positive")
    if positive == "median":
        yv = np.array([float(v) for v in raw_y])
        y = (yv > np.median(yv)).astype(int)
    elif positive is not None:
        y = np.array([str(v).rstrip(".") == str(positive) for v in raw_y], dtype=int)
    else:
        y = raw_y
    encoding = sc.get("encoding", "binary")
    cols, names = [], []
    for name in feats:
        col = _column(header, rows, name, path, numeric=False)
        missing = np.array([v in ("?", "") for v in col])
        numeric = all(_is_number(v) for v in col[~missing])
        if encoding == "onehot" and not numeric:
            for level in sorted(set(col[~missing])):
                cols.append((col == level).astype(np.uint8))
                names.append(f"{name}={level}")
        elif numeric:
            if missing.any():
                continue  # columns with missing entries carry no usable signal
            v = col.astype(float)
            if encoding == "binary":
                if not np.isin(v, (0.0, 1.0)).all():
                    raise InputError(f"{path}: column {name!r} is not binary")
                cols.append(v.astype(np.uint8))
            else:
                cols.append((v > np.median(v)).astype(np.uint8))
            names.append(name)
        else:
            raise InputError(f"{path}: column {name!r} is categorical; use encoding='onehot'")
    if not cols:
        raise InputError(f"{path}: no usable feature columns")
    return LabeledBinaryDataset(np.column_stack(cols), y, tuple(names))


def load_dataset(desc: DatasetDescriptor) -> LoadedData:
    """Materialise a descriptor into a :class:`LoadedData`."""
    if desc.kind == "synthetic":
        return _load_synthetic(desc)
    if desc.kind == "labeled-binary":
        header, rows = _read_table(desc.path, desc.schema.get("columns"))
        data = _binary_table(header, rows, desc)
        return LoadedData(
            GroundSet(data.n_features, names=data.feature_names), desc.kind, dataset=data,
            sensitive=tuple(desc.schema.get("sensitive", ())),
        )  # fmt: skip
    header, rows = _read_table(desc.path, desc.schema.get("columns"))
    keep = _subsample_rows(len(rows), desc)
    rows = [rows[i] for i in keep]
    if desc.kind == "geo-points":
        lat = _column(header, rows, desc.schema.get("latitude", "Lat"), desc.path)
        lon = _column(header, rows, desc.schema.get("longitude", "Lon"), desc.path)
        P = np.column_stack([lat, lon])
        return LoadedData(GroundSet(len(rows), payload=P), desc.kind, points=P)
    # numeric-vectors
    attrs = list(desc.schema.get("attributes", []))
    drop = set(desc.schema.get("drop", []))
    feats = desc.schema.get("features") or [c for c in header if c not in drop]
    X = np.column_stack([_column(header, rows, c, desc.path) for c in feats]) if rows else np.zeros((0, len(feats)))
    attributes = {a: _column(header, rows, a, desc.path) for a in attrs}
    Xs = minmax_scale(X) if len(X) else X
    return LoadedData(GroundSet(len(rows), payload=Xs, attributes=attributes), desc.kind, points=Xs)


def _load_synthetic(desc: DatasetDescriptor) -> LoadedData:
    gen = desc.schema.get("generator", desc.name)
    params = dict(desc.params)
    if gen == "uber":
        P = synthetic_uber(seed=desc.seed, **params)
        return LoadedData(GroundSet(len(P), payload=P), "geo-points", points=P)
    if gen == "census":
        X, sex = synthetic_census(seed=desc.seed, **params)
        Xs = minmax_scale(X)
        return LoadedData(GroundSet(len(X), payload=Xs, attributes={"iSex": sex}), "numeric-vectors", points=Xs)
    if gen == "adult":
        data = synthetic_adult(seed=desc.seed, **params)
        return LoadedData(
            GroundSet(data.n_features, names=data.feature_names), "labeled-binary", dataset=data,
            sensitive=("sex=", "race="),
        )  # fmt: skip
    if gen == "identical":
        n = int(params.get("n", 10))
        return LoadedData(GroundSet(n), "identical")
    if gen == "modular":
        w = np.asarray(params.get("weights", [10, 8, 5, 3, 1]), dtype=float)
        return LoadedData(GroundSet(w.size), "modular", weights=w)
    raise InputError(f"unknown synthetic generator {gen!r}")


def default_objective(data: LoadedData) -> dict:
    if data.kind == "geo-points":
        return {"kind": "logdet", "kernel": "gaussian", "h": 5000.0, "alpha": 1.0}
    if data.kind == "numeric-vectors":
        return {"kind": "logdet", "kernel": "linear", "alpha": 1.0}
    if data.kind == "labeled-binary":
        return {"kind": "mi", "smoothing": True}
    return {"kind": data.kind}


def make_oracle(data: LoadedData, objective: dict | None = None) -> SubmodularOracle:
    """Build the oracle an objective description asks for over loaded data."""
    obj = dict(default_objective(data))
    obj.update(objective or {})
    kind = obj.get("kind")
    if kind == "logdet":
        if data.points is None:
            raise InputError("log-det objective needs point or vector data")
        alpha = float(obj.get("alpha", 1.0))
        if obj.get("kernel", "gaussian") == "gaussian":
            metric = obj.get("metric", "geodesic" if data.kind == "geo-points" else "euclidean")
            K = gaussian_kernel(data.points, float(obj.get("h", 5000.0)), metric, alpha=alpha)
        else:
            K = linear_similarity_kernel(data.points, alpha=alpha)
        return LogDetOracle(K)
    if kind == "mi":
        if data.dataset is None:
            raise InputError("mutual-information objective needs a labeled binary dataset")
        return MutualInfoOracle(data.dataset, smoothing=bool(obj.get("smoothing", True)))
    if kind == "identical":
        return IdenticalItemsOracle(data.ground.n)
    if kind == "modular":
        return ModularOracle(data.weights)
    raise InputError(f"unknown objective kind {kind!r}")
