"""Relational database to data graph.

Each relation falls into one of four cases depending on how its primary key
relates to its foreign keys:

1. the primary key contains no foreign key: every tuple is an object;
2. the key contains exactly one foreign key (plus other attributes, or the
   foreign key is significantly named): every tuple is an object (a weak entity);
3. the key contains two or more foreign keys: every tuple is a relationship,
   an explicit connector when all its foreign keys are insignificantly named
   and an object otherwise;
4. the relation has a single insignificantly named foreign key that is also
   its key: an auxiliary table, folded into the referenced object as a nested
   property.

A foreign key whose attribute names merely echo the target (``student`` ->
``Student``) becomes a plain edge; a significantly named one (``grader`` ->
``Student``) becomes an explicit connector of that type.
"""

from __future__ import annotations

import csv
import enum
import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping

from .config import BuildConfig
from .errors import (DanglingReference, DataGraphWarning, RowError, SchemaError,
                     UnknownRelation, UnknownTarget)
from .model import (DataGraph, Edge, EdgeRole, GraphNode, NodeKind, Orientation,
                    PropertyNode, add_opposite_edges)
from .naming import Significance, choose_object_name, normalize_attr_name

__all__ = [
    "ForeignKey", "Relation", "RelationalSchema", "RelationalDatabase", "RelationCase",
    "Significance", "normalize_attr_name", "fk_significance", "classify_relation",
    "choose_object_name", "build_graph", "load_database",
]


@dataclass(frozen=True)
class ForeignKey:
    attrs: tuple[str, ...]
    target: str
    # target attributes matched positionally against ``attrs``; defaults to the target's key
    target_key: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "attrs", tuple(self.attrs))
        if self.target_key is not None:
            object.__setattr__(self, "target_key", tuple(self.target_key))
        if not self.attrs:
            raise SchemaError(f"foreign key to {self.target!r} has no attributes")

    @property
    def connector_type(self) -> str:
        return "_".join(self.attrs)


@dataclass(frozen=True)
class Relation:
    name: str
    attributes: tuple[str, ...]
    primary_key: tuple[str, ...]
    foreign_keys: tuple[ForeignKey, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "attributes", tuple(self.attributes))
        object.__setattr__(self, "primary_key", tuple(self.primary_key))
        object.__setattr__(self, "foreign_keys", tuple(self.foreign_keys))
        if not self.name:
            raise SchemaError("relation name must be nonempty")
        if len(set(self.attributes)) != len(self.attributes):
            raise SchemaError(f"{self.name}: duplicate attribute names")
        if not self.primary_key:
            raise SchemaError(f"{self.name}: primary key is empty")
        attrs = set(self.attributes)
        if not set(self.primary_key) <= attrs:
            raise SchemaError(f"{self.name}: primary key uses unknown attributes "
                              f"{sorted(set(self.primary_key) - attrs)}")
        seen: set[frozenset[str]] = set()
        for fk in self.foreign_keys:
            if not set(fk.attrs) <= attrs:
                raise SchemaError(f"{self.name}: foreign key uses unknown attributes "
                                  f"{sorted(set(fk.attrs) - attrs)}")
            key = frozenset(fk.attrs)
            if key in seen:
                raise SchemaError(f"{self.name}: two foreign keys on ({', '.join(fk.attrs)})")
            seen.add(key)

    @property
    def fk_attributes(self) -> frozenset[str]:
        return frozenset(a for fk in self.foreign_keys for a in fk.attrs)

    def fks_in_key(self) -> list[ForeignKey]:
        key = set(self.primary_key)
        return [fk for fk in self.foreign_keys if set(fk.attrs) <= key]


class RelationalSchema:
    def __init__(self, relations: Iterable[Relation]):
        self.relations: dict[str, Relation] = {}
        for rel in relations:
            if rel.name in self.relations:
                raise SchemaError(f"relation {rel.name!r} declared twice")
            self.relations[rel.name] = rel
        for rel in self.relations.values():
            for fk in rel.foreign_keys:
                target = self.relations.get(fk.target)
                if target is None:
                    raise UnknownTarget(rel.name, fk.target)
                key = self.target_key(fk)
                if len(key) != len(fk.attrs):
                    raise SchemaError(
                        f"{rel.name}: foreign key ({', '.join(fk.attrs)}) has {len(fk.attrs)} "
                        f"attribute(s) but target key of {fk.target} has {len(key)}")
                if not set(key) <= set(target.attributes):
                    raise SchemaError(f"{rel.name}: target key {key} is not in {fk.target}")

    def __getitem__(self, name: str) -> Relation:
        return self.relations[name]

    def __iter__(self):
        return iter(self.relations.values())

    def target_key(self, fk: ForeignKey) -> tuple[str, ...]:
        return fk.target_key or self.relations[fk.target].primary_key

    @classmethod
    def from_document(cls, doc: Mapping[str, Any]) -> RelationalSchema:
        if not isinstance(doc, Mapping) or not isinstance(doc.get("relations"), list):
            raise SchemaError("schema descriptor needs a 'relations' list")
        relations = []
        for r in doc["relations"]:
            try:
                fks = tuple(
                    ForeignKey(tuple(f["attrs"]), f["target"],
                               tuple(f["target_key"]) if f.get("target_key") else None)
                    for f in r.get("foreign_keys", ())
                )
                relations.append(Relation(r["name"], tuple(r["attributes"]),
                                          tuple(r["primary_key"]), fks))
            except (KeyError, TypeError) as exc:
                raise SchemaError(f"malformed relation entry {r!r}: {exc}") from exc
        return cls(relations)


@dataclass
class RelationalDatabase:
    schema: RelationalSchema
    rows: dict[str, list[dict[str, str]]]

    def __post_init__(self) -> None:
        for name in self.rows:
            if name not in self.schema.relations:
                raise UnknownRelation(name)
        for rel in self.schema:
            self.rows.setdefault(rel.name, [])


def _cell(value: Any) -> str:
    if value is None:
        return ""
    return value if isinstance(value, str) else str(value)


def load_database(schema_path: str | Path, data_path: str | Path | None = None) -> RelationalDatabase:
    """Load a schema descriptor plus rows.

    ``data_path`` is a directory of ``<relation>.csv`` files or a JSON file
    mapping relation names to row lists. Without it, rows may be inlined in
    the descriptor as a ``rows`` list on each relation.
    """
    with open(schema_path, encoding="utf-8") as fh:
        doc = json.load(fh)
    schema = RelationalSchema.from_document(doc)
    rows: dict[str, list[dict[str, str]]] = {}
    for r in doc["relations"]:
        if "rows" in r:
            rows[r["name"]] = [{k: _cell(v) for k, v in row.items()} for row in r["rows"]]

    if data_path is not None:
        data_path = Path(data_path)
        if data_path.is_dir():
            for csv_path in sorted(data_path.glob("*.csv")):
                name = csv_path.stem
                if name not in schema.relations:
                    raise UnknownRelation(name)
                with open(csv_path, encoding="utf-8-sig", newline="") as fh:
                    rows[name] = [{k: _cell(v) for k, v in row.items()}
                                  for row in csv.DictReader(fh)]
        else:
            with open(data_path, encoding="utf-8") as fh:
                data = json.load(fh)
            for name, table in data.items():
                rows[name] = [{k: _cell(v) for k, v in row.items()} for row in table]
    return RelationalDatabase(schema, rows)


class RelationCase(enum.IntEnum):
    CASE1 = 1  # entity
    CASE2 = 2  # weak entity
    CASE3 = 3  # relationship
    CASE4 = 4  # auxiliary table


def fk_significance(fk: ForeignKey, schema: RelationalSchema) -> Significance:
    target = schema.relations.get(fk.target)
    if target is None:
        raise UnknownTarget("<foreign key>", fk.target)
    echoes = {normalize_attr_name(a) for a in target.primary_key}
    echoes.add(normalize_attr_name(target.name))
    if {normalize_attr_name(a) for a in fk.attrs} <= echoes:
        return Significance.INSIGNIFICANT
    return Significance.SIGNIFICANT


def classify_relation(rel: Relation, schema: RelationalSchema) -> RelationCase:
    in_key = rel.fks_in_key()
    if not in_key:
        return RelationCase.CASE1
    if (len(rel.foreign_keys) == 1
            and set(rel.foreign_keys[0].attrs) == set(rel.primary_key)
            and fk_significance(rel.foreign_keys[0], schema) is Significance.INSIGNIFICANT):
        return RelationCase.CASE4
    if len(in_key) >= 2:
        return RelationCase.CASE3
    # one foreign key in the key; also absorbs the degenerate "key is an
    # insignificant FK but other FKs exist" shape, which cannot be folded
    return RelationCase.CASE2


# ---------------------------------------------------------------------------
# Graph construction
# ---------------------------------------------------------------------------

@dataclass
class _Draft:
    id: str
    kind: NodeKind
    node_type: str
    properties: list[PropertyNode]
    provenance: str
    relation: str
    name: str | None = None


def _warn(message: str) -> None:
    warnings.warn(message, DataGraphWarning, stacklevel=3)


class _Builder:
    def __init__(self, db: RelationalDatabase, config: BuildConfig):
        self.db = db
        self.schema = db.schema
        self.config = config
        self.policy = config.weight_policy()
        self.cases = {rel.name: classify_relation(rel, self.schema) for rel in self.schema}
        self.sig = {
            (rel.name, fk.attrs): fk_significance(fk, self.schema)
            for rel in self.schema for fk in rel.foreign_keys
        }
        referenced = {fk.target for rel in self.schema for fk in rel.foreign_keys}
        self.connector_relations = {
            rel.name for rel in self.schema
            if self.cases[rel.name] is RelationCase.CASE3
            and rel.name not in referenced
            and all(self.sig[(rel.name, fk.attrs)] is Significance.INSIGNIFICANT
                    for fk in rel.foreign_keys)
        }
        self._key_index: dict[tuple[str, tuple[str, ...]], dict[tuple[str, ...], int]] = {}
        self.drafts: dict[str, _Draft] = {}
        self.edges: list[Edge] = []
        self._edge_keys: set[tuple[str, str]] = set()

    # -- rows --------------------------------------------------------------

    def check_rows(self) -> None:
        for rel in self.schema:
            expected = set(rel.attributes)
            for i, row in enumerate(self.db.rows[rel.name]):
                if set(row) != expected:
                    extra = sorted(set(row) - expected)
                    missing = sorted(expected - set(row))
                    raise RowError(f"{rel.name} row {i + 1}: attributes do not match the schema "
                                   f"(missing {missing}, unexpected {extra})")
            self.index(rel.name, rel.primary_key, unique=True)

    def index(self, relation: str, attrs: tuple[str, ...], unique: bool = False) -> dict:
        key = (relation, attrs)
        if key not in self._key_index:
            table: dict[tuple[str, ...], int] = {}
            for i, row in enumerate(self.db.rows[relation]):
                values = tuple(row[a] for a in attrs)
                if values in table and unique:
                    raise RowError(f"{relation}: duplicate primary key {values}")
                table.setdefault(values, i)
            self._key_index[key] = table
        return self._key_index[key]

    def node_id(self, relation: str, row: Mapping[str, str]) -> str:
        rel = self.schema[relation]
        return f"{relation}:" + "|".join(row[a] for a in rel.primary_key)

    def lookup(self, rel: Relation, row: Mapping[str, str], fk: ForeignKey) -> dict | None:
        """Target row of ``fk`` for ``row``; ``None`` for null or dangling values."""
        values = tuple(row[a] for a in fk.attrs)
        if any(v == "" for v in values):
            _warn(f"{rel.name} {self.node_id(rel.name, row)}: null foreign key "
                  f"({', '.join(fk.attrs)}), no edge created")
            return None
        pos = self.index(fk.target, self.schema.target_key(fk)).get(values)
        if pos is None:
            if self.config.skip_dangling:
                _warn(str(DanglingReference(rel.name, dict(row), fk.attrs)) + "; skipped")
                return None
            raise DanglingReference(rel.name, dict(row), fk.attrs)
        return self.db.rows[fk.target][pos]

    def resolve(self, relation: str, row: Mapping[str, str], depth: int = 0) -> str | None:
        """Node id standing for ``row``; auxiliary rows resolve to the object they fold into."""
        if self.cases[relation] is not RelationCase.CASE4:
            return self.node_id(relation, row)
        if depth > len(self.schema.relations):
            raise SchemaError(f"cycle of auxiliary tables through {relation!r}")
        rel = self.schema[relation]
        fk = rel.foreign_keys[0]
        target_row = self.lookup(rel, row, fk)
        if target_row is None:
            return None
        return self.resolve(fk.target, target_row, depth + 1)

    # -- construction --------------------------------------------------------

    def leaf_properties(self, rel: Relation, row: Mapping[str, str]) -> list[PropertyNode]:
        skip = rel.fk_attributes
        return [PropertyNode(a, row[a]) for a in rel.attributes
                if a not in skip and row[a] != ""]

    def add_edge(self, source: str, target: str) -> None:
        if source == target:
            _warn(f"{source}: foreign key refers to its own tuple, no edge created")
            return
        if (source, target) in self._edge_keys:
            return
        self._edge_keys.add((source, target))
        self.edges.append(Edge(source, target, Orientation.ORIGINAL, EdgeRole.FOREIGN_KEY,
                               self.policy.weight(EdgeRole.FOREIGN_KEY)))

    def create_nodes(self) -> None:
        for rel in self.schema:
            if self.cases[rel.name] is RelationCase.CASE4:
                continue
            kind = (NodeKind.CONNECTOR if rel.name in self.connector_relations
                    else NodeKind.OBJECT)
            for row in self.db.rows[rel.name]:
                nid = self.node_id(rel.name, row)
                props = self.leaf_properties(rel, row)
                key_desc = ", ".join(f"{a}={row[a]}" for a in rel.primary_key)
                self.drafts[nid] = _Draft(nid, kind, rel.name, props, f"{rel.name}({key_desc})",
                                          rel.name)

    def fold_auxiliary(self) -> None:
        for rel in self.schema:
            if self.cases[rel.name] is not RelationCase.CASE4:
                continue
            for row in self.db.rows[rel.name]:
                children = self.leaf_properties(rel, row)
                if not children:
                    _warn(f"{rel.name}: auxiliary row {self.node_id(rel.name, row)} has no "
                          f"attributes outside its key, nothing to fold")
                    continue
                target = self.resolve(rel.name, row)
                if target is None:
                    continue
                self.drafts[target].properties.append(PropertyNode(rel.name, None, tuple(children)))

    def link(self) -> None:
        for rel in self.schema:
            if self.cases[rel.name] is RelationCase.CASE4:
                continue
            for row in self.db.rows[rel.name]:
                source = self.node_id(rel.name, row)
                for fk in rel.foreign_keys:
                    target_row = self.lookup(rel, row, fk)
                    if target_row is None:
                        continue
                    target = self.resolve(fk.target, target_row)
                    if target is None:
                        continue
                    if self.sig[(rel.name, fk.attrs)] is Significance.INSIGNIFICANT:
                        self.add_edge(source, target)
                        continue
                    cid = f"{source}#{fk.connector_type}"
                    self.drafts[cid] = _Draft(cid, NodeKind.CONNECTOR, fk.connector_type, [],
                                              f"{self.drafts[source].provenance}.{fk.connector_type}",
                                              rel.name)
                    self.add_edge(source, cid)
                    self.add_edge(cid, target)

    def finish_nodes(self) -> list[GraphNode]:
        has_out = {e.source for e in self.edges}
        for d in self.drafts.values():
            if d.kind is NodeKind.CONNECTOR and d.id not in has_out:
                _warn(f"{d.id}: relationship tuple references nothing, kept as an object")
                d.kind = NodeKind.OBJECT
        for d in self.drafts.values():
            if d.kind is NodeKind.OBJECT:
                d.name = choose_object_name(d.properties, self.config.name_attributes)
        if self.config.synthesize_names:
            self.synthesize_names()
        return [GraphNode(d.id, d.kind, d.node_type, d.name, tuple(d.properties), d.provenance)
                for d in self.drafts.values()]

    def synthesize_names(self) -> None:
        """Name unnamed relationship objects after the objects they reference."""
        out: dict[str, list[str]] = {}
        for e in self.edges:
            out.setdefault(e.source, []).append(e.target)
        for d in self.drafts.values():
            if (d.kind is not NodeKind.OBJECT or d.name
                    or self.cases.get(d.relation) is not RelationCase.CASE3
                    or d.node_type != d.relation):
                continue
            parts = []
            for target in out.get(d.id, ()):
                t = self.drafts[target]
                if t.kind is NodeKind.CONNECTOR:
                    names = [self.drafts[x].name for x in out.get(t.id, ())]
                else:
                    names = [t.name]
                parts.extend(n for n in names if n)
            if parts:
                d.name = "/".join(parts)

    def build(self) -> DataGraph:
        self.check_rows()
        self.create_nodes()
        self.fold_auxiliary()
        self.link()
        graph = DataGraph(self.finish_nodes(), self.edges, self.policy)
        return add_opposite_edges(graph)


def build_graph(db: RelationalDatabase, config: BuildConfig | None = None) -> DataGraph:
    """Transform ``db`` into a data graph with opposite edges on every foreign key."""
    return _Builder(db, config or BuildConfig()).build()


def case_tally(schema: RelationalSchema) -> dict[str, RelationCase]:
    return {rel.name: classify_relation(rel, schema) for rel in schema}
