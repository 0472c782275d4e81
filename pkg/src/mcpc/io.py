"""JSON documents for instances and assignments.

Instance document::

    {"kind": "mcpc", "items": [{"id": 0, "profit": "5"}],
     "sets": [{"id": 0, "cost": "2", "items": [0, 1]}],
     "knapsacks": [{"id": 0, "capacity": "4", "cluster": 0}],
     "clusters": [{"id": 0, "capacity": "7"}]}

Rationals may be given as JSON integers, ``"a/b"`` strings or finite
decimals (numbers or strings); decimals are converted exactly. Rationals are
always written back as strings.
"""

from __future__ import annotations

import json
from decimal import Decimal
from fractions import Fraction
from typing import Any, Optional

from .model import (
    Assignment,
    Cluster,
    CoverSet,
    Instance,
    Item,
    Kind,
    Knapsack,
    ValidationError,
    validate_and_normalize,
)

_FIELDS = {
    "document": ({"items", "sets", "knapsacks", "clusters"}, {"kind"}),
    "item": ({"id", "profit"}, set()),
    "set": ({"id", "cost", "items"}, set()),
    "knapsack": ({"id", "capacity", "cluster"}, set()),
    "cluster": ({"id", "capacity"}, set()),
}


def to_rational(value: Any, entity: str = "value") -> Fraction:
    if isinstance(value, bool):
        raise ValidationError("booleans are not numbers", entity)
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Decimal):
        if not value.is_finite():
            raise ValidationError("non-finite number", entity)
        return Fraction(value)
    if isinstance(value, float):
        # only reachable when callers bypass parse_instance
        raise ValidationError("binary floats are not accepted; use a string", entity)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"not a rational: {value!r}", entity) from exc
    if isinstance(value, Fraction):
        return value
    raise ValidationError(f"not a rational: {value!r}", entity)


def rational_str(value: Fraction) -> str:
    return str(Fraction(value))


def _reject_constant(name: str):
    raise ValidationError(f"non-finite number {name}", "document")


def _load(text) -> Any:
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    try:
        return json.loads(text, parse_float=Decimal, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON: {exc}", "document") from exc


def _fields(obj: Any, what: str, entity: str) -> None:
    if not isinstance(obj, dict):
        raise ValidationError(f"expected an object for {what}", entity)
    required, optional = _FIELDS[what]
    unknown = set(obj) - required - optional
    if unknown:
        raise ValidationError(f"unknown fields {sorted(unknown)}", entity)
    missing = required - set(obj)
    if missing:
        raise ValidationError(f"missing fields {sorted(missing)}", entity)


def _int(value: Any, entity: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"expected an integer id, got {value!r}", entity)
    return value


def _list(doc: dict, key: str) -> list:
    value = doc[key]
    if not isinstance(value, list):
        raise ValidationError("expected a list", key)
    return value


def instance_from_document(doc: Any, normalize: bool = True) -> Instance:
    _fields(doc, "document", "document")
    items, sets, knaps, clusters = [], [], [], []
    for pos, obj in enumerate(_list(doc, "items")):
        _fields(obj, "item", f"items[{pos}]")
        ent = f"item {obj['id']}"
        items.append(Item(_int(obj["id"], ent), to_rational(obj["profit"], ent)))
    for pos, obj in enumerate(_list(doc, "sets")):
        _fields(obj, "set", f"sets[{pos}]")
        ent = f"set {obj['id']}"
        if not isinstance(obj["items"], list):
            raise ValidationError("items must be a list", ent)
        members = [_int(i, ent) for i in obj["items"]]
        if len(set(members)) != len(members):
            raise ValidationError("repeated item in set", ent)
        sets.append(CoverSet(_int(obj["id"], ent), to_rational(obj["cost"], ent), frozenset(members)))
    for pos, obj in enumerate(_list(doc, "knapsacks")):
        _fields(obj, "knapsack", f"knapsacks[{pos}]")
        ent = f"knapsack {obj['id']}"
        knaps.append(
            Knapsack(_int(obj["id"], ent), to_rational(obj["capacity"], ent), _int(obj["cluster"], ent))
        )
    for pos, obj in enumerate(_list(doc, "clusters")):
        _fields(obj, "cluster", f"clusters[{pos}]")
        ent = f"cluster {obj['id']}"
        clusters.append(Cluster(_int(obj["id"], ent), to_rational(obj["capacity"], ent)))
    kind = doc.get("kind")
    if kind is not None:
        try:
            kind = Kind(kind)
        except ValueError as exc:
            raise ValidationError(f"unknown kind {kind!r}", "kind") from exc
    raw = Instance(tuple(items), tuple(sets), tuple(knaps), tuple(clusters), kind)
    return validate_and_normalize(raw) if normalize else raw


def parse_instance(text) -> Instance:
    """Parse and normalize an instance document (bytes or str)."""
    return instance_from_document(_load(text))


def instance_to_document(inst: Instance) -> dict:
    doc = {}
    if inst.kind is not None:
        doc["kind"] = Kind(inst.kind).value
    doc["items"] = [{"id": i.id, "profit": rational_str(i.profit)} for i in inst.items]
    doc["sets"] = [
        {"id": s.id, "cost": rational_str(s.cost), "items": sorted(s.members)} for s in inst.sets
    ]
    doc["knapsacks"] = [
        {"id": k.id, "capacity": rational_str(k.capacity), "cluster": k.cluster_id}
        for k in inst.knapsacks
    ]
    doc["clusters"] = [{"id": c.id, "capacity": rational_str(c.capacity)} for c in inst.clusters]
    return doc


def serialize_instance(inst: Instance) -> bytes:
    return (json.dumps(instance_to_document(inst), indent=2) + "\n").encode("utf-8")


def assignment_to_document(inst: Instance, a: Assignment, value: Optional[Fraction] = None) -> dict:
    doc = {"assignment": {str(j): a.get(j) for j in range(inst.m)}}
    if value is not None:
        doc["value"] = rational_str(value)
    return doc


def assignment_from_document(doc: Any) -> tuple:
    """Returns ``(assignment, claimed value or None)``."""
    if not isinstance(doc, dict) or "assignment" not in doc:
        raise ValidationError("expected an object with an 'assignment' field", "solution")
    mapping = doc["assignment"]
    if not isinstance(mapping, dict):
        raise ValidationError("assignment must be an object", "solution")
    pairs = []
    for key, k in mapping.items():
        try:
            j = int(key)
        except ValueError as exc:
            raise ValidationError(f"bad set id {key!r}", "solution") from exc
        if k is not None:
            pairs.append((j, _int(k, f"set {j}")))
    value = doc.get("value")
    return Assignment.from_pairs(pairs), (None if value is None else to_rational(value, "value"))


def parse_assignment(text) -> tuple:
    return assignment_from_document(_load(text))


def to_jsonable(obj: Any) -> Any:
    """Recursively turn Fractions into rational strings and tuples into lists."""
    if isinstance(obj, Fraction):
        return rational_str(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, Kind):
        return obj.value
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), indent=2) + "\n"
