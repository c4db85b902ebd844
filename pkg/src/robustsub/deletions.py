"""Adversarial deletion sets.

Deletion seeds live in their own namespace (:func:`deletion_seed`) so the
adversary never shares a random stream with a core-set build.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from typing import Any, Iterable

import numpy as np

from .baselines import greedy, stochastic_greedy
from .core import child_seed, splitmix64
from .errors import InputError, SchemaError
from .objectives import GroundSet, SubmodularOracle

DELETION_SALT = 0xD1B54A32D192ED03

COMPARATORS = {
    "==": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}


def deletion_seed(trial_seed: int, j: int = 0) -> int:
    """Seed for the ``j``-th deletion of a trial, disjoint from build seeds."""
    return child_seed(splitmix64(int(trial_seed) ^ DELETION_SALT), j)


def _check_r(V: list[int], r: int) -> None:
    if r < 0 or r > len(V):
        raise InputError(f"cannot delete {r} of {len(V)} elements")


def delete_by_greedy(oracle: SubmodularOracle, V: Iterable[int], r: int) -> set[int]:
    """The first ``r`` greedy picks.  Zero-gain tails are filled in id order."""
    V = sorted(set(int(e) for e in V))
    _check_r(V, r)
    chosen = list(greedy(oracle, V, r).elements)
    if len(chosen) < r:
        taken = set(chosen)
        chosen.extend([e for e in V if e not in taken][: r - len(chosen)])
    return set(chosen)


def delete_by_sg(oracle: SubmodularOracle, V: Iterable[int], r: int, seed: int = 0, sg_epsilon: float = 0.1) -> set[int]:
    V = sorted(set(int(e) for e in V))
    _check_r(V, r)
    return set(stochastic_greedy(oracle, V, r, sg_epsilon, seed).elements)


def delete_random_fraction(V: Iterable[int], fraction: float, seed: int = 0) -> set[int]:
    if not 0.0 <= fraction <= 1.0:
        raise InputError("fraction must lie in [0, 1]")
    V = np.asarray(sorted(set(int(e) for e in V)), dtype=np.intp)
    size = int(round(fraction * V.size))
    rng = np.random.default_rng(int(seed))
    return set(rng.choice(V, size=size, replace=False).tolist()) if size else set()


@dataclass(frozen=True)
class Predicate:
    attribute: str
    comparator: str
    value: Any

    @classmethod
    def parse(cls, text: str) -> "Predicate":
        for op in sorted(COMPARATORS, key=len, reverse=True):
            if op in text:
                attr, raw = text.split(op, 1)
                raw = raw.strip()
                try:
                    val: Any = float(raw)
                except ValueError:
                    val = raw
                return cls(attr.strip(), op, val)
        raise InputError(f"no comparator in predicate {text!r}")

    def mask(self, ground: GroundSet) -> np.ndarray:
        if self.attribute not in ground.attributes:
            raise SchemaError(f"unknown attribute {self.attribute!r}")
        if self.comparator not in COMPARATORS:
            raise InputError(f"unknown comparator {self.comparator!r}")
        col = np.asarray(ground.attributes[self.attribute])
        value = self.value
        if isinstance(value, float) and col.dtype.kind in "OUS":
            value = str(int(value)) if value.is_integer() else str(value)
        return np.asarray(COMPARATORS[self.comparator](col, value), dtype=bool)


def delete_by_predicate(ground: GroundSet, predicate) -> set[int]:
    """Every element whose attribute record satisfies ``predicate``.

    ``predicate`` is a :class:`Predicate`, its string form (``"sex==1"``), or a
    callable receiving the attribute mapping and returning a boolean mask.
    """
    if isinstance(predicate, str):
        predicate = Predicate.parse(predicate)
    if isinstance(predicate, Predicate):
        mask = predicate.mask(ground)
    else:
        mask = np.broadcast_to(np.asarray(predicate(ground.attributes), dtype=bool), (ground.n,))
    return set(np.flatnonzero(mask).tolist())


def delete_by_names(ground: GroundSet, names: Iterable[str]) -> set[int]:
    """Ids whose element name starts with any of ``names`` (sensitive-feature lists)."""
    if ground.names is None:
        raise SchemaError("ground set carries no element names")
    prefixes = tuple(names)
    return {i for i, nm in enumerate(ground.names) if nm.startswith(prefixes)}


@dataclass(frozen=True)
class DeletionSpec:
    """``strategy`` is one of ``none``, ``greedy``, ``sg``, ``random``, ``predicate``, ``names``, ``ids``."""

    strategy: str
    r: int = 0
    fraction: float = 0.0
    predicate: str = ""
    names: tuple[str, ...] = ()
    ids: tuple[int, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "DeletionSpec":
        """``none``, ``greedy:5``, ``sg:5``, ``random:0.5``, ``predicate:sex==1``, ``names:sex,race``, ``ids:1,2``."""
        kind, _, arg = text.partition(":")
        kind = kind.strip().lower()
        if kind == "none":
            return cls("none")
        if kind in ("greedy", "sg"):
            return cls(kind, r=int(arg))
        if kind == "random":
            return cls(kind, fraction=float(arg))
        if kind == "predicate":
            return cls(kind, predicate=arg)
        if kind == "names":
            return cls(kind, names=tuple(s.strip() for s in arg.split(",") if s.strip()))
        if kind == "ids":
            return cls(kind, ids=tuple(int(s) for s in arg.split(",") if s.strip()))
        raise InputError(f"unknown deletion strategy {kind!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "DeletionSpec":
        data = dict(data)
        if "names" in data:
            data["names"] = tuple(data["names"])
        if "ids" in data:
            data["ids"] = tuple(int(e) for e in data["ids"])
        return cls(**data)

    @property
    def label(self) -> str:
        if self.strategy in ("greedy", "sg"):
            return f"{self.strategy}:{self.r}"
        if self.strategy == "random":
            return f"random:{self.fraction:g}"
        if self.strategy == "predicate":
            return f"predicate:{self.predicate}"
        if self.strategy == "names":
            return "names:" + ",".join(self.names)
        if self.strategy == "ids":
            return f"ids:{len(self.ids)}"
        return self.strategy

    def generate(self, oracle: SubmodularOracle, ground: GroundSet, seed: int = 0) -> set[int]:
        V = range(ground.n)
        if self.strategy == "none":
            return set()
        if self.strategy == "greedy":
            return delete_by_greedy(oracle, V, self.r)
        if self.strategy == "sg":
            return delete_by_sg(oracle, V, self.r, seed)
        if self.strategy == "random":
            return delete_random_fraction(V, self.fraction, seed)
        if self.strategy == "predicate":
            return delete_by_predicate(ground, self.predicate)
        if self.strategy == "names":
            return delete_by_names(ground, self.names)
        if self.strategy == "ids":
            return set(self.ids)
        raise InputError(f"unknown deletion strategy {self.strategy!r}")
