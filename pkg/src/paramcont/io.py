"""JSON file formats: schemas, loaders with located errors, deterministic writers.

Floats are written with ``repr`` (shortest string that round-trips), keys are
sorted and lists follow node id / alternative index order, so equal values
always serialize to identical bytes.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from paramcont.model import (
    EXTERNAL_TOLERANCE,
    AlternativeSet,
    Correspondence,
    Node,
    PreferenceField,
    SampledSpace,
    UtilityField,
    validate_space,
)
from paramcont.maxtheorem import PriceWealthGrid


class InputError(ValueError):
    """Bad input file; ``path`` is a JSONPath-like location inside the document."""

    def __init__(self, file: str | Path, path: str, message: str) -> None:
        self.file = str(file)
        self.path = path
        super().__init__(f"{self.file}: at {path}: {message}")


_NUM = {"type": "number"}
_IDS = {"type": "array", "items": {"type": "integer", "minimum": 0}}

ALTERNATIVES_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["count", "labels"],
    "properties": {
        "count": {"type": "integer", "minimum": 1},
        "labels": {"type": "array", "items": {"type": "string"}},
        "embedding": {"type": "array", "items": _IDS},
    },
}

SPACE_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["nodes", "flags"],
    "properties": {
        "name": {"type": "string"},
        "nodes": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id", "coords", "neighborhoods"],
                "properties": {
                    "id": {"type": "integer", "minimum": 0},
                    "coords": {"type": "array", "items": _NUM},
                    "neighborhoods": {"type": "array", "minItems": 1, "items": _IDS},
                },
            },
        },
        "metric": {"type": "array", "items": {"type": "array", "items": _NUM}},
        "flags": {
            "type": "object",
            "required": ["metrizable", "perfectly_normal"],
            "properties": {
                "metrizable": {"type": "boolean"},
                "perfectly_normal": {"type": "boolean"},
            },
        },
    },
}

PREFS_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["alternatives", "strict"],
    "properties": {
        "space": {"type": "string"},
        "nodes": {"type": "integer", "minimum": 1},
        "alternatives": ALTERNATIVES_SCHEMA,
        "strict": {
            "type": "object",
            "propertyNames": {"pattern": "^(0|[1-9][0-9]*)$"},
            "additionalProperties": {
                "type": "array",
                "items": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2},
            },
        },
    },
}

UTILITY_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["values", "provenance"],
    "properties": {
        "values": {
            "type": "object",
            "minProperties": 1,
            "propertyNames": {"pattern": "^(0|[1-9][0-9]*)$"},
            "additionalProperties": {"type": "array", "items": _NUM},
        },
        "provenance": {"enum": ["urysohn", "inductive", "external"]},
        "tolerance": {"type": "number", "minimum": 0},
    },
}

GRID_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["prices", "wealth", "alternatives"],
    "properties": {
        "prices": {"type": "array", "items": {"type": "array", "items": _NUM, "minItems": 1}},
        "wealth": {"type": "array", "items": _NUM},
        "alternatives": ALTERNATIVES_SCHEMA,
    },
}


# --- serialization ---------------------------------------------------------------------------


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (frozenset, set)):
        return sorted(_plain(v) for v in obj)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if x != x:
            raise ValueError("NaN cannot be serialized")
        if x in (float("inf"), float("-inf")):
            return "+inf" if x > 0 else "-inf"
        return x
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=1, ensure_ascii=False, allow_nan=False) + "\n"


def write_json(path: str | Path, obj: Any) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def digest(path: str | Path) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


# --- loading ---------------------------------------------------------------------------------


def _json_path(parts: Any) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def read_json(path: str | Path) -> Any:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise InputError(p, "$", "file not found") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(p, "$", f"cannot read file ({exc})") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(p, "$", f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return doc


def space_to_json(space: SampledSpace) -> dict[str, Any]:
    out: dict[str, Any] = {
        "name": space.name,
        "nodes": [
            {"id": n.id, "coords": list(n.coords), "neighborhoods": [sorted(nb) for nb in n.neighborhoods]}
            for n in space.nodes
        ],
        "flags": {"metrizable": space.metrizable, "perfectly_normal": space.perfectly_normal},
    }
    if space.metric is not None:
        out["metric"] = space.metric
    return out


def space_from_json(doc: dict[str, Any], file: str | Path = "<space>") -> SampledSpace:
    jsonschema_check(doc, SPACE_SCHEMA, file)
    nodes = []
    for i, rec in enumerate(doc["nodes"]):
        if rec["id"] != i:
            raise InputError(file, f"$.nodes[{i}].id", f"node id {rec['id']} must equal its position {i}")
        nodes.append(Node(i, tuple(float(c) for c in rec["coords"]), tuple(frozenset(nb) for nb in rec["neighborhoods"])))
    metric = None
    if "metric" in doc:
        rows = doc["metric"]
        if len(rows) != len(nodes) or any(len(r) != len(nodes) for r in rows):
            raise InputError(file, "$.metric", f"metric must be {len(nodes)} x {len(nodes)}")
        metric = np.asarray(rows, dtype=float)
    flags = doc["flags"]
    space = SampledSpace(
        tuple(nodes),
        metric=metric,
        metrizable=flags["metrizable"],
        perfectly_normal=flags["perfectly_normal"],
        name=doc.get("name", ""),
    )
    report = validate_space(space)
    if not report.ok:
        raise InputError(file, "$.nodes", "invalid space: " + "; ".join(report.violations[:5]))
    return space


def jsonschema_check(doc: Any, schema: dict[str, Any], file: str | Path) -> None:
    errors = sorted(
        jsonschema.Draft202012Validator(schema).iter_errors(doc),
        key=lambda e: (list(map(str, e.absolute_path)), e.message),
    )
    if errors:
        raise InputError(file, _json_path(errors[0].absolute_path), errors[0].message)


def alternatives_to_json(alts: AlternativeSet) -> dict[str, Any]:
    out: dict[str, Any] = {"count": alts.count, "labels": list(alts.labels)}
    if alts.embedding is not None:
        out["embedding"] = alts.embedding
    return out


def alternatives_from_json(doc: dict[str, Any], file: str | Path, where: str) -> AlternativeSet:
    if len(doc["labels"]) != doc["count"]:
        raise InputError(file, f"{where}.labels", f"expected {doc['count']} labels, got {len(doc['labels'])}")
    try:
        return AlternativeSet(tuple(doc["labels"]), doc.get("embedding"))
    except ValueError as exc:
        raise InputError(file, where, str(exc)) from None


def prefs_to_json(field: PreferenceField) -> dict[str, Any]:
    return {
        "space": field.space_name,
        "nodes": field.n_nodes,
        "alternatives": alternatives_to_json(field.alternatives),
        "strict": {str(x): [list(p) for p in field.pairs(x)] for x in range(field.n_nodes)},
    }


def prefs_from_json(doc: dict[str, Any], n_nodes: int, file: str | Path = "<prefs>") -> PreferenceField:
    jsonschema_check(doc, PREFS_SCHEMA, file)
    if "nodes" in doc and doc["nodes"] != n_nodes:
        raise InputError(file, "$.nodes", f"preference file has {doc['nodes']} nodes, space has {n_nodes}")
    alts = alternatives_from_json(doc["alternatives"], file, "$.alternatives")
    J = alts.count
    s = np.zeros((n_nodes, J, J), dtype=bool)
    for key, pairs in doc["strict"].items():
        x = int(key)
        if x >= n_nodes:
            raise InputError(file, f"$.strict.{key}", f"node {x} does not exist (space has {n_nodes} nodes)")
        for i, (a, b) in enumerate(pairs):
            if a >= J or b >= J:
                raise InputError(file, f"$.strict.{key}[{i}]", f"alternative index out of range 0..{J - 1}")
            if a == b:
                raise InputError(file, f"$.strict.{key}[{i}]", f"reflexive pair ({a},{a})")
            s[x, a, b] = True
    return PreferenceField(s, alts, doc.get("space", ""))


def utility_to_json(U: UtilityField) -> dict[str, Any]:
    return {
        "values": {str(a): U.values[a] for a in range(U.n_alts)},
        "provenance": U.provenance,
        "tolerance": U.tolerance,
    }


def utility_from_json(doc: dict[str, Any], file: str | Path = "<utility>") -> UtilityField:
    jsonschema_check(doc, UTILITY_SCHEMA, file)
    vals = doc["values"]
    J = len(vals)
    if sorted(int(k) for k in vals) != list(range(J)):
        raise InputError(file, "$.values", f"alternative keys must be exactly 0..{J - 1}")
    rows = [vals[str(a)] for a in range(J)]
    n = len(rows[0])
    for a, r in enumerate(rows):
        if len(r) != n:
            raise InputError(file, f"$.values.{a}", f"expected {n} node values, got {len(r)}")
    prov = doc["provenance"]
    tol = doc.get("tolerance", EXTERNAL_TOLERANCE if prov == "external" else 0.0)
    return UtilityField(np.array(rows, dtype=float), prov, float(tol))


def grid_to_json(grid: PriceWealthGrid, alts: AlternativeSet) -> dict[str, Any]:
    return {"prices": grid.prices, "wealth": grid.wealth, "alternatives": alternatives_to_json(alts)}


def grid_from_json(doc: dict[str, Any], file: str | Path = "<grid>") -> tuple[PriceWealthGrid, AlternativeSet]:
    jsonschema_check(doc, GRID_SCHEMA, file)
    alts = alternatives_from_json(doc["alternatives"], file, "$.alternatives")
    if alts.embedding is None:
        raise InputError(file, "$.alternatives", "budget constraints need an embedding of the alternatives")
    d = alts.embedding.shape[1]
    for i, p in enumerate(doc["prices"]):
        if len(p) != d:
            raise InputError(file, f"$.prices[{i}]", f"expected {d} prices, got {len(p)}")
    try:
        return PriceWealthGrid(np.array(doc["prices"], dtype=float), np.array(doc["wealth"], dtype=float)), alts
    except ValueError as exc:
        raise InputError(file, "$", str(exc)) from None


def correspondence_to_json(corr: Correspondence) -> list[list[int]]:
    return [sorted(s) for s in corr.sets]


def load_space(path: str | Path) -> SampledSpace:
    return space_from_json(read_json(path), path)


def load_prefs(path: str | Path, n_nodes: int) -> PreferenceField:
    return prefs_from_json(read_json(path), n_nodes, path)


def load_utility(path: str | Path) -> UtilityField:
    return utility_from_json(read_json(path), path)


def load_grid(path: str | Path) -> tuple[PriceWealthGrid, AlternativeSet]:
    return grid_from_json(read_json(path), path)
