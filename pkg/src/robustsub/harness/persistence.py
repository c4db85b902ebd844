"""Versioned JSON persistence for core-sets with a CRC-32 trailer.

Layout::

    { "format": "robustsub-coreset", "version": 1, "type": ..., "meta": ..., "body": ... }
    #crc32=<8 hex digits of the JSON text>

Floats are written with Python's shortest round-trip repr, so a loaded
core-set is structurally identical to the saved one.
"""

from __future__ import annotations

import json
import zlib
from pathlib import Path

from ..core import CoreSet
from ..distributed import DistributedCoreSet
from ..errors import FormatError

FORMAT = "robustsub-coreset"
VERSION = 1
_TRAILER = "#crc32="


def coreset_to_dict(cs: CoreSet) -> dict:
    return {
        "provenance": cs.provenance,
        "params": {"k": cs.k, "d": cs.d, "epsilon": cs.epsilon, "seed": cs.seed, "policy": cs.policy},
        "delta_d": cs.delta_d,
        "reserve": list(cs.reserve),
        "A": [[i, list(v)] for i, v in cs.A.items()],
        "B": [[i, list(v)] for i, v in cs.B.items()],
        "buckets": None
        if cs.buckets is None
        else [[i, [[j, list(v)] for j, v in row.items()]] for i, row in cs.buckets.items()],
        "singletons": [[e, v] for e, v in cs.singletons.items()],
    }


def coreset_from_dict(data: dict) -> CoreSet:
    try:
        p = data["params"]
        cs = CoreSet(
            data["provenance"], int(p["k"]), int(p["d"]), float(p["epsilon"]), int(p["seed"]), p["policy"],
            reserve=[int(e) for e in data["reserve"]],
            delta_d=float(data["delta_d"]),
            A={int(i): [int(e) for e in v] for i, v in data["A"]},
            B={int(i): [int(e) for e in v] for i, v in data["B"]},
            singletons={int(e): float(v) for e, v in data["singletons"]},
        )  # fmt: skip
        if data.get("buckets") is not None:
            cs.buckets = {int(i): {int(j): [int(e) for e in v] for j, v in row} for i, row in data["buckets"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed core-set body: {exc}") from exc
    return cs


def dumps(obj: CoreSet | DistributedCoreSet, meta: dict | None = None) -> str:
    if isinstance(obj, DistributedCoreSet):
        kind = "distributed"
        body = {
            "m": obj.m,
            "seed": obj.seed,
            "machines": [coreset_to_dict(c) for c in obj.machines],
            "assignment": [[e, i] for e, i in sorted(obj.assignment.items())],
        }
    else:
        kind = "coreset"
        body = coreset_to_dict(obj)
    doc = {"format": FORMAT, "version": VERSION, "type": kind, "meta": meta or {}, "body": body}
    text = json.dumps(doc, sort_keys=False, separators=(",", ":"))
    return f"{text}\n{_TRAILER}{zlib.crc32(text.encode()):08x}\n"


def loads(text: str, with_meta: bool = False):
    lines = text.rstrip("\n").rsplit("\n", 1)
    if len(lines) != 2 or not lines[1].startswith(_TRAILER):
        raise FormatError("missing checksum trailer (truncated file?)")
    body, trailer = lines
    try:
        expected = int(trailer[len(_TRAILER):], 16)
    except ValueError:
        raise FormatError("unreadable checksum trailer") from None
    if zlib.crc32(body.encode()) != expected:
        raise FormatError("checksum mismatch: file is corrupt")
    try:
        doc = json.loads(body)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    if doc.get("format") != FORMAT:
        raise FormatError("not a robustsub core-set file")
    if doc.get("version") != VERSION:
        raise FormatError(f"unsupported format version {doc.get('version')!r} (expected {VERSION})")
    b = doc["body"]
    if doc.get("type") == "distributed":
        obj = DistributedCoreSet(
            int(b["m"]), int(b["seed"]), [coreset_from_dict(c) for c in b["machines"]],
            {int(e): int(i) for e, i in b["assignment"]},
        )  # fmt: skip
    elif doc.get("type") == "coreset":
        obj = coreset_from_dict(b)
    else:
        raise FormatError(f"unknown payload type {doc.get('type')!r}")
    return (obj, doc.get("meta", {})) if with_meta else obj


def save_coreset(obj: CoreSet | DistributedCoreSet, path, meta: dict | None = None) -> None:
    Path(path).write_text(dumps(obj, meta))


def load_coreset(path, with_meta: bool = False):
    try:
        text = Path(path).read_text()
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: not a text file") from exc
    return loads(text, with_meta)
