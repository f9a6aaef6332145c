"""JSON graph documents.

A document has three top-level fields::

    {"nodes": [{"id", "kind", "type", "name"?, "properties", "provenance"?}],
     "edges": [{"from", "to", "orientation", "role", "weight"}],
     "weight_policy": {"original_weight", "opposite_weight", "overrides"?}}

Properties are ``{"name", "value"?, "children"?}`` objects, nested freely.
Unknown fields anywhere are rejected.
"""

from __future__ import annotations

import json
from typing import Any

import jsonschema

from .errors import GraphFormatError
from .model import (DataGraph, Edge, EdgeRole, GraphNode, NodeKind, Orientation,
                    PropertyNode, WeightPolicy)

_WEIGHT = {"type": "number", "minimum": 0}

GRAPH_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["nodes", "edges"],
    "properties": {
        "nodes": {"type": "array", "items": {"$ref": "#/$defs/node"}},
        "edges": {"type": "array", "items": {"$ref": "#/$defs/edge"}},
        "weight_policy": {"$ref": "#/$defs/policy"},
    },
    "$defs": {
        "property": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name"],
            "properties": {
                "name": {"type": "string", "minLength": 1},
                "value": {"type": "string"},
                "children": {"type": "array", "items": {"$ref": "#/$defs/property"}},
            },
        },
        "node": {
            "type": "object",
            "additionalProperties": False,
            "required": ["id", "kind", "type"],
            "properties": {
                "id": {"type": "string", "minLength": 1},
                "kind": {"enum": [k.value for k in NodeKind]},
                "type": {"type": "string", "minLength": 1},
                "name": {"type": "string"},
                "properties": {"type": "array", "items": {"$ref": "#/$defs/property"}},
                "provenance": {"type": "string"},
            },
        },
        "edge": {
            "type": "object",
            "additionalProperties": False,
            "required": ["from", "to", "orientation", "role", "weight"],
            "properties": {
                "from": {"type": "string"},
                "to": {"type": "string"},
                "orientation": {"enum": [o.value for o in Orientation]},
                "role": {"enum": [r.value for r in EdgeRole]},
                "weight": _WEIGHT,
            },
        },
        "policy": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "original_weight": _WEIGHT,
                "opposite_weight": _WEIGHT,
                "overrides": {
                    "type": "object",
                    "propertyNames": {"enum": [r.value for r in EdgeRole]},
                    "additionalProperties": {
                        "type": "array", "items": _WEIGHT, "minItems": 2, "maxItems": 2,
                    },
                },
            },
        },
    },
}

_validator = jsonschema.Draft202012Validator(GRAPH_SCHEMA)


def _property_to_json(prop: PropertyNode) -> dict:
    doc: dict[str, Any] = {"name": prop.name}
    if prop.value is not None:
        doc["value"] = prop.value
    if prop.children:
        doc["children"] = [_property_to_json(c) for c in prop.children]
    return doc


def _property_from_json(doc: dict) -> PropertyNode:
    return PropertyNode(
        doc["name"],
        doc.get("value"),
        tuple(_property_from_json(c) for c in doc.get("children", ())),
    )


def to_document(graph: DataGraph) -> dict:
    """Plain-JSON form of ``graph``; node and edge order is canonical."""
    nodes = []
    for node_id in sorted(graph.nodes):
        node = graph.node(node_id)
        doc: dict[str, Any] = {"id": node.id, "kind": node.kind.value, "type": node.node_type}
        if node.name is not None:
            doc["name"] = node.name
        doc["properties"] = [_property_to_json(p) for p in node.properties]
        if node.provenance is not None:
            doc["provenance"] = node.provenance
        nodes.append(doc)
    edges = [
        {"from": e.source, "to": e.target, "orientation": e.orientation.value,
         "role": e.role.value, "weight": e.weight}
        for e in sorted(graph.edges, key=Edge.sort_key)
    ]
    policy = graph.weight_policy
    pdoc: dict[str, Any] = {
        "original_weight": policy.original_weight,
        "opposite_weight": policy.opposite_weight,
    }
    if policy.overrides:
        pdoc["overrides"] = {r.value: list(w) for r, w in sorted(policy.overrides.items())}
    return {"nodes": nodes, "edges": edges, "weight_policy": pdoc}


def serialize(graph: DataGraph) -> bytes:
    return json.dumps(to_document(graph), ensure_ascii=False, indent=1).encode("utf-8") + b"\n"


def from_document(doc: Any) -> DataGraph:
    errors = sorted(_validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        first = errors[0]
        where = "/".join(str(p) for p in first.absolute_path) or "<root>"
        raise GraphFormatError(f"invalid graph document at {where}: {first.message}")

    try:
        nodes = [
            GraphNode(
                id=n["id"],
                kind=NodeKind(n["kind"]),
                node_type=n["type"],
                name=n.get("name"),
                properties=tuple(_property_from_json(p) for p in n.get("properties", ())),
                provenance=n.get("provenance"),
            )
            for n in doc["nodes"]
        ]
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from exc

    seen: set[str] = set()
    for n in nodes:
        if n.id in seen:
            raise GraphFormatError(f"duplicate node id {n.id!r}")
        seen.add(n.id)

    edges = []
    for i, e in enumerate(doc["edges"]):
        for end in ("from", "to"):
            if e[end] not in seen:
                raise GraphFormatError(f"edge {i}: {end!r} endpoint {e[end]!r} is not a node")
        edges.append(Edge(e["from"], e["to"], Orientation(e["orientation"]),
                          EdgeRole(e["role"]), e["weight"]))

    pdoc = doc.get("weight_policy")
    try:
        policy = WeightPolicy(
            original_weight=pdoc.get("original_weight", 1.0),
            opposite_weight=pdoc.get("opposite_weight", 2.0),
            overrides={EdgeRole(r): tuple(w) for r, w in pdoc.get("overrides", {}).items()},
        ) if pdoc is not None else WeightPolicy()
    except ValueError as exc:
        raise GraphFormatError(f"invalid weight policy: {exc}") from exc
    return DataGraph(nodes, edges, policy)


def deserialize(data: bytes | str) -> DataGraph:
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise GraphFormatError(f"not a JSON document: {exc}") from exc
    return from_document(doc)
