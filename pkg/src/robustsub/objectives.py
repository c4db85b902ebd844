"""Monotone submodular objectives and the oracle contract used by every algorithm.

An oracle owns immutable problem data (a kernel, a labelled dataset, a weight
vector).  Incremental evaluation happens in :class:`OracleState` objects that
the caller creates with :meth:`SubmodularOracle.state`; states are never shared
between workers, so one oracle can serve many concurrent builds.

Three objective families are provided:

* :class:`LogDetOracle` -- ``f(S) = log det(I + alpha K_SS)`` over a
  :class:`KernelMatrix` (Gaussian kernel on coordinates, linear similarity on
  feature vectors, or an explicit matrix).
* :class:`MutualInfoOracle` -- ``I(Y; X_S)`` in bits for binary features under
  the naive Bayes factorisation.
* :class:`ModularOracle` and :class:`IdenticalItemsOracle` -- small analytic
  objectives used in tests and demos.
"""

from __future__ import annotations

import copy
import itertools
import math
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import CapacityError, InputError, NumericIntegrityError, PreconditionError

GAIN_CLAMP = 1e-9
EARTH_RADIUS_M = 6371000.0
MI_MAX_FEATURES = 25
BRUTE_FORCE_GUARD = 10**6


@dataclass(frozen=True)
class GroundSet:
    """Dense universe ``0..n-1`` with optional per-element payload.

    ``attributes`` maps attribute names to length-``n`` arrays and is what
    deletion predicates address.  ``names`` labels elements (feature names for
    feature-selection problems).
    """

    n: int
    payload: Any = None
    attributes: Mapping[str, np.ndarray] = field(default_factory=dict)
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.n < 0:
            raise InputError("ground set size must be non-negative")
        for key, col in self.attributes.items():
            if len(col) != self.n:
                raise InputError(f"attribute {key!r} has {len(col)} entries, expected {self.n}")
        if self.names is not None and len(self.names) != self.n:
            raise InputError("names must have one entry per element")

    @property
    def ids(self) -> range:
        return range(self.n)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


class KernelMatrix:
    """Symmetric similarity matrix, either stored densely or generated by blocks.

    Large problems (hundreds of thousands of points) cannot afford ``n**2``
    storage, so a kernel may instead carry its points and a block function;
    algorithms only ever request ``K[rows, cols]`` blocks and the diagonal.
    """

    def __init__(
        self,
        n: int,
        *,
        alpha: float = 1.0,
        provenance: str = "explicit",
        dense: np.ndarray | None = None,
        block_fn: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
        diag: np.ndarray | None = None,
    ):
        if not alpha > 0:
            raise InputError("alpha must be positive")
        if dense is None and block_fn is None:
            raise InputError("kernel needs either a dense matrix or a block function")
        self.n = int(n)
        self.alpha = float(alpha)
        self.provenance = provenance
        self._dense = dense
        self._block_fn = block_fn
        if diag is None:
            if dense is not None:
                diag = np.diag(dense).copy()
            else:
                idx = np.arange(self.n)
                diag = np.array([block_fn(idx[i : i + 1], idx[i : i + 1])[0, 0] for i in range(self.n)])
        diag = np.asarray(diag, dtype=float)
        if not np.all(np.isfinite(diag)):
            raise InputError("kernel diagonal must be finite")
        self._diag = diag

    @classmethod
    def explicit(cls, K, alpha: float = 1.0) -> "KernelMatrix":
        K = np.array(K, dtype=float)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise InputError("kernel matrix must be square")
        if not np.all(np.isfinite(K)):
            raise InputError("kernel matrix must be finite")
        if np.max(np.abs(K - K.T), initial=0.0) > 1e-12:
            raise InputError("kernel matrix must be symmetric")
        return cls(K.shape[0], alpha=alpha, provenance="explicit", dense=K)

    @property
    def is_dense(self) -> bool:
        return self._dense is not None

    def diag(self) -> np.ndarray:
        return self._diag

    def block(self, rows, cols) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.intp)
        cols = np.asarray(cols, dtype=np.intp)
        if self._dense is not None:
            return self._dense[rows][:, cols]
        return self._block_fn(rows, cols)

    def to_dense(self) -> np.ndarray:
        if self._dense is not None:
            return self._dense
        idx = np.arange(self.n)
        return self.block(idx, idx)

    def with_alpha(self, alpha: float) -> "KernelMatrix":
        out = copy.copy(self)
        if not alpha > 0:
            raise InputError("alpha must be positive")
        out.alpha = float(alpha)
        return out


def haversine_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Great-circle distances in meters between ``(lat, lon)`` rows of ``a`` and ``b``."""
    lat1 = np.radians(a[:, 0])[:, None]
    lon1 = np.radians(a[:, 1])[:, None]
    lat2 = np.radians(b[:, 0])[None, :]
    lon2 = np.radians(b[:, 1])[None, :]
    h = np.sin((lat2 - lat1) / 2) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin((lon2 - lon1) / 2) ** 2
    return 2 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))


def _euclidean_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    sq = (a * a).sum(1)[:, None] + (b * b).sum(1)[None, :] - 2.0 * (a @ b.T)
    return np.sqrt(np.maximum(sq, 0.0))


def gaussian_kernel(
    points,
    h: float = 5000.0,
    metric: str = "geodesic",
    *,
    alpha: float = 1.0,
    materialize: bool | None = None,
) -> KernelMatrix:
    """``K_ij = exp(-d_ij**2 / h**2)``.

    With ``metric="geodesic"`` the points are ``(latitude, longitude)`` pairs in
    degrees and ``d`` is the haversine distance in meters.  With
    ``metric="euclidean"`` ``d`` is the plain Euclidean distance.
    """
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or P.shape[0] < 1:
        raise InputError("need at least one point given as a 2-d array")
    if not np.all(np.isfinite(P)):
        raise InputError("coordinates must be finite")
    if not h > 0:
        raise InputError("bandwidth h must be positive")
    if metric == "geodesic":
        if P.shape[1] != 2:
            raise InputError("geodesic metric expects (lat, lon) pairs")
        dist = haversine_matrix
    elif metric == "euclidean":
        dist = _euclidean_matrix
    else:
        raise InputError(f"unknown metric {metric!r}")

    def block(rows, cols):
        out = np.exp(-(dist(P[rows], P[cols]) ** 2) / (h * h))
        out[rows[:, None] == cols[None, :]] = 1.0
        return out

    n = P.shape[0]
    if materialize is None:
        materialize = n <= 4000
    diag = np.ones(n)
    if materialize:
        idx = np.arange(n)
        K = block(idx, idx)
        K = 0.5 * (K + K.T)
        np.fill_diagonal(K, 1.0)
        return KernelMatrix(n, alpha=alpha, provenance=f"gaussian(h={h:g})", dense=K, diag=diag)
    return KernelMatrix(n, alpha=alpha, provenance=f"gaussian(h={h:g})", block_fn=block, diag=diag)


def linear_similarity_kernel(vectors, *, alpha: float = 1.0, materialize: bool | None = None) -> KernelMatrix:
    """``K_ij = 1 - ||x_i - x_j|| / sqrt(F)`` for ``F``-dimensional feature vectors.

    Features are expected to be scaled to ``[0, 1]`` so every entry is
    non-negative; a negative entry means the data was not scaled and raises.
    """
    try:
        X = np.asarray(vectors, dtype=float)
    except ValueError as exc:
        raise InputError("all vectors must have the same dimension") from exc
    if X.ndim != 2 or X.shape[0] < 1:
        raise InputError("need a non-empty list of equal-length vectors")
    if not np.all(np.isfinite(X)):
        raise InputError("feature vectors must be finite")
    F = X.shape[1]
    scale = math.sqrt(F)

    def block(rows, cols):
        out = 1.0 - _euclidean_matrix(X[rows], X[cols]) / scale
        out[rows[:, None] == cols[None, :]] = 1.0
        if out.size and out.min() < -1e-12:
            raise InputError("negative similarity: features are not scaled to [0, 1]")
        return np.maximum(out, 0.0)

    n = X.shape[0]
    if materialize is None:
        materialize = n <= 4000
    prov = f"linear-{F}"
    diag = np.ones(n)
    if materialize:
        idx = np.arange(n)
        K = block(idx, idx)
        K = 0.5 * (K + K.T)
        return KernelMatrix(n, alpha=alpha, provenance=prov, dense=K, diag=diag)
    return KernelMatrix(n, alpha=alpha, provenance=prov, block_fn=block, diag=diag)


def logdet_value(kernel: KernelMatrix, S: Iterable[int]) -> float:
    """Direct ``log det(I + alpha K_SS)`` via ``slogdet``; the cross-check path."""
    S = np.fromiter(S, dtype=np.intp)
    if S.size == 0:
        return 0.0
    M = np.eye(S.size) + kernel.alpha * kernel.block(S, S)
    sign, logdet = np.linalg.slogdet(M)
    if sign <= 0:
        raise NumericIntegrityError("I + alpha*K_SS is not positive definite")
    return float(logdet)


# ---------------------------------------------------------------------------
# oracle contract
# ---------------------------------------------------------------------------


def _clean_gains(raw: np.ndarray) -> np.ndarray:
    if raw.size and (np.isnan(raw).any() or raw.min() < -GAIN_CLAMP):
        bad = raw[np.isnan(raw) | (raw < -GAIN_CLAMP)]
        raise NumericIntegrityError(f"marginal gain {bad[0]!r} below -{GAIN_CLAMP}; oracle is not monotone")
    return np.maximum(raw, 0.0)


class OracleState:
    """Incremental evaluation of ``f`` on a growing set.

    States are cheap and single-owner; copy one with :meth:`copy` to branch.
    """

    def __init__(self, oracle: "SubmodularOracle"):
        self.oracle = oracle
        self.elements: list[int] = []
        self._members: set[int] = set()
        self.value = 0.0

    def __len__(self):
        return len(self.elements)

    def __contains__(self, e):
        return e in self._members

    def gains(self, cands) -> np.ndarray:
        """Marginal gains of ``cands`` (none of which may be members)."""
        cands = np.asarray(cands, dtype=np.intp)
        if cands.size == 0:
            return np.zeros(0)
        self.oracle._count(cands.size)
        return _clean_gains(np.asarray(self._raw_gains(cands), dtype=float))

    def gain(self, e: int) -> float:
        return float(self.gains([e])[0])

    def add(self, e: int) -> float:
        """Insert ``e`` and return its marginal gain."""
        e = int(e)
        if e in self._members:
            raise PreconditionError(f"element {e} already in the set")
        self.oracle._check_id(e)
        self.oracle._count(1)
        g = float(_clean_gains(np.array([self._push(e)]))[0])
        self.elements.append(e)
        self._members.add(e)
        self.value += g
        return g

    def extend(self, es: Iterable[int]) -> "OracleState":
        for e in es:
            self.add(e)
        return self

    def copy(self) -> "OracleState":
        out = copy.copy(self)
        out.elements = list(self.elements)
        out._members = set(self._members)
        return out

    def _raw_gains(self, cands: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _push(self, e: int) -> float:
        raise NotImplementedError


class SubmodularOracle:
    """Normalised monotone submodular set function over ids ``0..n-1``."""

    kind = "abstract"

    def __init__(self, n: int):
        self.n = int(n)
        self._calls = 0
        self._lock = threading.Lock()
        self._singletons: np.ndarray | None = None

    # instrumentation -----------------------------------------------------
    @property
    def calls(self) -> int:
        return self._calls

    def _count(self, m: int) -> None:
        with self._lock:
            self._calls += m

    def clone(self) -> "SubmodularOracle":
        """Same problem data, fresh call counter."""
        out = copy.copy(self)
        out._calls = 0
        out._lock = threading.Lock()
        return out

    # evaluation ------------------------------------------------------------
    def _check_id(self, e) -> None:
        if not 0 <= int(e) < self.n:
            raise InputError(f"unknown element id {e}")

    def state(self, S: Iterable[int] = ()) -> OracleState:
        st = self._new_state()
        st.extend(S)
        return st

    def value(self, S: Iterable[int]) -> float:
        return self.state(S).value

    def singletons(self) -> np.ndarray:
        """``f({e})`` for every element, computed once and cached."""
        if self._singletons is None:
            st = self._new_state()
            vals = st.gains(np.arange(self.n))
            vals.setflags(write=False)
            self._singletons = vals
        return self._singletons

    def singleton_value(self, e: int) -> float:
        self._check_id(e)
        return float(self.singletons()[int(e)])

    def marginal_gain(self, e: int, S: Iterable[int] = ()) -> float:
        S = list(S)
        self._check_id(e)
        if int(e) in set(S):
            raise PreconditionError(f"element {e} is already in S")
        return self.state(S).gain(int(e))

    def _new_state(self) -> OracleState:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# log-determinant
# ---------------------------------------------------------------------------


class _LogDetState(OracleState):
    """Cholesky factor ``L`` of ``I + alpha K_SS``.

    For dense kernels the projections ``C = L^{-1} alpha K_{S,:}`` of every
    column are maintained too, together with the Schur residual
    ``1 + alpha K_ee - ||C_e||^2``; a gain is then a single lookup and an
    insertion costs ``O(|S| n)``.  Block-generated kernels solve against ``L``
    per query instead.
    """

    def __init__(self, oracle: "LogDetOracle"):
        super().__init__(oracle)
        K = oracle.kernel
        self._L = np.zeros((8, 8))
        self._dense = K.is_dense
        if self._dense:
            self._C = np.zeros((8, K.n))
            self._resid = 1.0 + K.alpha * K.diag()

    def copy(self):
        out = super().copy()
        out._L = self._L.copy()
        if self._dense:
            out._C = self._C.copy()
            out._resid = self._resid.copy()
        return out

    def _project(self, cands):
        K = self.oracle.kernel
        s = len(self.elements)
        B = K.alpha * K.block(self.elements, cands)
        return solve_triangular(self._L[:s, :s], B, lower=True, check_finite=False)

    def _schur(self, cands):
        if self._dense:
            return self._resid[cands]
        K = self.oracle.kernel
        base = 1.0 + K.alpha * K.diag()[cands]
        if not self.elements:
            return base
        V = self._project(cands)
        return base - np.einsum("ij,ij->j", V, V)

    def _raw_gains(self, cands):
        sch = self._schur(cands)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(sch > 0, np.log(np.where(sch > 0, sch, 1.0)), -np.inf)

    def _grow(self, s):
        if s + 1 > self._L.shape[0]:
            cap = 2 * self._L.shape[0]
            L = np.zeros((cap, cap))
            L[:s, :s] = self._L[:s, :s]
            self._L = L
            if self._dense:
                C = np.zeros((cap, self._C.shape[1]))
                C[:s] = self._C[:s]
                self._C = C

    def _push(self, e):
        K = self.oracle.kernel
        s = len(self.elements)
        if self._dense:
            sch = float(self._resid[e])
            if not sch > 0:
                raise NumericIntegrityError("I + alpha*K_SS lost positive definiteness")
            self._grow(s)
            root = math.sqrt(sch)
            self._L[s, :s] = self._C[:s, e]
            self._L[s, s] = root
            row = (K.alpha * K.to_dense()[e] - self._L[s, :s] @ self._C[:s]) / root
            self._C[s] = row
            self._resid = self._resid - row * row
            return math.log(sch)
        cands = np.array([e], dtype=np.intp)
        V = self._project(cands) if s else None
        sch = 1.0 + K.alpha * float(K.diag()[e])
        if V is not None:
            sch -= float(V[:, 0] @ V[:, 0])
        if not sch > 0:
            raise NumericIntegrityError("I + alpha*K_SS lost positive definiteness")
        self._grow(s)
        if s:
            self._L[s, :s] = V[:, 0]
        self._L[s, s] = math.sqrt(sch)
        return math.log(sch)


class LogDetOracle(SubmodularOracle):
    """``f(S) = log det(I + alpha K_SS)`` with Schur-complement marginal gains.

    The state keeps the lower Cholesky factor ``L`` of ``I + alpha K_SS``;
    the gain of ``e`` is ``log(1 + alpha K_ee - ||L^{-1} alpha K_Se||^2)``.
    """

    kind = "logdet"

    def __init__(self, kernel: KernelMatrix):
        super().__init__(kernel.n)
        self.kernel = kernel

    @property
    def alpha(self) -> float:
        return self.kernel.alpha

    def _new_state(self):
        return _LogDetState(self)

    def direct_value(self, S: Iterable[int]) -> float:
        return logdet_value(self.kernel, S)


# ---------------------------------------------------------------------------
# naive-Bayes mutual information
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LabeledBinaryDataset:
    """Rows of 0/1 features with one class label per row."""

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self):
        X = np.asarray(self.X)
        y = np.asarray(self.y)
        if X.ndim != 2:
            raise InputError("features must form a 2-d table")
        if X.shape[0] == 0 or y.size == 0:
            raise InputError("dataset is empty")
        if y.shape[0] != X.shape[0]:
            raise InputError("one label per row is required")
        if not np.isin(X, (0, 1)).all():
            raise InputError("features must be binary")
        if self.feature_names is not None and len(self.feature_names) != X.shape[1]:
            raise InputError("feature_names must match the feature count")
        object.__setattr__(self, "X", X.astype(np.uint8))
        object.__setattr__(self, "y", y)

    @property
    def n_features(self) -> int:
        return self.X.shape[1]


def _xlog2x(p):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)


class _MIState(OracleState):
    def __init__(self, oracle: "MutualInfoOracle"):
        super().__init__(oracle)
        # P[x, y] = prod_i p(x_i | y) over the selected features
        self._P = np.ones((1, oracle.p_y.size))
        self._H = 0.0  # H(X_S)

    def copy(self):
        out = super().copy()
        out._P = self._P.copy()
        return out

    def _raw_gains(self, cands):
        o = self.oracle
        if len(self.elements) + 1 > MI_MAX_FEATURES:
            raise CapacityError(f"naive-Bayes MI enumerates 2^|S|; |S| is capped at {MI_MAX_FEATURES}")
        W = self._P * o.p_y  # p(x_S, y)
        q = o.q[cands]  # (m, C)
        p1 = W @ q.T
        p0 = W @ (1.0 - q).T
        h_new = -(_xlog2x(p0).sum(0) + _xlog2x(p1).sum(0))
        return h_new - self._H - o.h_cond[cands]

    def _push(self, e):
        o = self.oracle
        if len(self.elements) + 1 > MI_MAX_FEATURES:
            raise CapacityError(f"naive-Bayes MI enumerates 2^|S|; |S| is capped at {MI_MAX_FEATURES}")
        g = float(self._raw_gains(np.array([e]))[0])
        q = o.q[e]
        self._P = np.concatenate([self._P * (1.0 - q), self._P * q], axis=0)
        self._H = float(-_xlog2x(self._P @ o.p_y).sum())
        return g


class MutualInfoOracle(SubmodularOracle):
    """``I(Y; X_S)`` in bits with ``p(y, x_S) = p(y) prod_i p(x_i | y)``.

    ``p(x_i | y)`` comes from frequency counts, add-one smoothed unless
    ``smoothing=False``; ``p(y)`` is the raw class frequency.
    """

    kind = "mi"

    def __init__(self, dataset: LabeledBinaryDataset, smoothing: bool = True):
        super().__init__(dataset.n_features)
        self.dataset = dataset
        self.smoothing = smoothing
        classes, y_idx = np.unique(dataset.y, return_inverse=True)
        self.classes = classes
        counts_y = np.bincount(y_idx, minlength=classes.size).astype(float)
        self.p_y = counts_y / counts_y.sum()
        onehot = np.zeros((y_idx.size, classes.size))
        onehot[np.arange(y_idx.size), y_idx] = 1.0
        ones = dataset.X.T.astype(float) @ onehot  # (F, C) count of x_i = 1 per class
        if smoothing:
            self.q = (ones + 1.0) / (counts_y + 2.0)
        else:
            self.q = ones / counts_y
        self.h_cond = -(_xlog2x(self.q) + _xlog2x(1.0 - self.q)) @ self.p_y

    def _new_state(self):
        return _MIState(self)


def naive_bayes_mi(dataset: LabeledBinaryDataset, S: Iterable[int], smoothing: bool = True) -> float:
    S = list(S)
    if len(S) > MI_MAX_FEATURES:
        raise CapacityError(f"|S|={len(S)} exceeds the enumeration cap of {MI_MAX_FEATURES}")
    return MutualInfoOracle(dataset, smoothing=smoothing).value(S)


# ---------------------------------------------------------------------------
# analytic test objectives
# ---------------------------------------------------------------------------


class _ModularState(OracleState):
    def _raw_gains(self, cands):
        return self.oracle.weights[cands]

    def _push(self, e):
        return float(self.oracle.weights[e])


class ModularOracle(SubmodularOracle):
    """``f(S) = sum_{e in S} w(e)`` with non-negative weights."""

    kind = "modular"

    def __init__(self, weights: Sequence[float]):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or (w < 0).any() or not np.isfinite(w).all():
            raise InputError("weights must be a finite non-negative vector")
        super().__init__(w.size)
        self.weights = w

    def _new_state(self):
        return _ModularState(self)


class _IdenticalState(OracleState):
    def _raw_gains(self, cands):
        return np.full(cands.size, 0.0 if self.elements else 1.0)

    def _push(self, e):
        return 0.0 if self.elements else 1.0


class IdenticalItemsOracle(SubmodularOracle):
    """``f(S) = 1`` for any non-empty ``S``: every item is a perfect substitute."""

    kind = "identical"

    def __init__(self, n: int):
        super().__init__(n)

    def _new_state(self):
        return _IdenticalState(self)


# ---------------------------------------------------------------------------
# exhaustive optimum
# ---------------------------------------------------------------------------


def brute_force_opt(
    oracle: SubmodularOracle,
    V: Iterable[int],
    k: int,
    forbidden: Iterable[int] = (),
) -> tuple[tuple[int, ...], float]:
    """Exact ``max f(S)`` over ``S`` within ``V \\ forbidden`` with ``|S| <= k``.

    Ties go to the lexicographically smallest sorted id tuple.
    """
    banned = set(int(e) for e in forbidden)
    pool = sorted(set(int(e) for e in V) - banned)
    kk = min(int(k), len(pool))
    if kk < 0:
        raise InputError("k must be non-negative")
    if math.comb(len(pool), kk) > BRUTE_FORCE_GUARD:
        raise CapacityError(f"C({len(pool)}, {kk}) subsets exceed the brute-force guard")
    best: tuple[int, ...] = ()
    best_val = 0.0
    for size in range(1, kk + 1):
        for combo in itertools.combinations(pool, size):
            val = oracle.value(combo)
            if val > best_val or (val == best_val and combo < best):
                best, best_val = combo, val
    return best, best_val
