"""The object-connector-property (OCP) data graph.

Nodes are objects (entities) or explicit connectors (relationships); both may
carry nested properties. A direct object-to-object edge is an implicit
connector. Edges are either *original* (created by a transform) or
*opposite* (reverse companions added so that symmetric relationships can be
traversed both ways). Graphs are immutable values: every operation that
"adds" something returns a new graph.
"""

from __future__ import annotations

import enum
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Iterable, Iterator, Mapping, Sequence


class NodeKind(str, enum.Enum):
    OBJECT = "object"
    CONNECTOR = "connector"


class Orientation(str, enum.Enum):
    ORIGINAL = "original"
    OPPOSITE = "opposite"


class EdgeRole(str, enum.Enum):
    HIERARCHICAL = "hierarchical"
    REFERENCE = "reference"
    FOREIGN_KEY = "foreign_key"
    RDF_LINK = "rdf_link"


# Each transform emits roles from exactly one of these families.
ROLE_FAMILIES: tuple[frozenset[EdgeRole], ...] = (
    frozenset({EdgeRole.HIERARCHICAL, EdgeRole.REFERENCE}),
    frozenset({EdgeRole.FOREIGN_KEY}),
    frozenset({EdgeRole.RDF_LINK}),
)


@dataclass(frozen=True, eq=False)
class PropertyNode:
    """A named property; carries a text value, nested properties, or both.

    Child order is kept as given but ignored by ``==``.
    """

    name: str
    value: str | None = None
    children: tuple[PropertyNode, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "children", tuple(self.children))
        if not self.name:
            raise ValueError("property name must be nonempty")
        if self.value is None and not self.children:
            raise ValueError(f"property {self.name!r} has neither a value nor children")

    def sort_key(self) -> tuple:
        return (
            self.name,
            self.value is None,
            self.value or "",
            tuple(sorted(c.sort_key() for c in self.children)),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PropertyNode):
            return NotImplemented
        return self.sort_key() == other.sort_key()

    def __hash__(self) -> int:
        return hash(self.sort_key())

    def walk(self) -> Iterator[PropertyNode]:
        """Yield this property and all nested ones, depth first."""
        yield self
        for child in self.children:
            yield from child.walk()

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children), default=0)

    def get(self, name: str) -> PropertyNode | None:
        return next((c for c in self.children if c.name == name), None)


def properties_key(props: Iterable[PropertyNode]) -> tuple:
    """Order-insensitive comparison key for a property list."""
    return tuple(sorted(p.sort_key() for p in props))


@dataclass(frozen=True, eq=False)
class GraphNode:
    id: str
    kind: NodeKind
    node_type: str
    name: str | None = None
    properties: tuple[PropertyNode, ...] = ()
    provenance: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "properties", tuple(self.properties))
        object.__setattr__(self, "kind", NodeKind(self.kind))

    @property
    def is_object(self) -> bool:
        return self.kind is NodeKind.OBJECT

    @property
    def is_connector(self) -> bool:
        return self.kind is NodeKind.CONNECTOR

    def property(self, name: str) -> PropertyNode | None:
        return next((p for p in self.properties if p.name == name), None)

    def _key(self) -> tuple:
        return (self.id, self.kind.value, self.node_type, self.name,
                properties_key(self.properties), self.provenance)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GraphNode):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def label(self) -> str:
        if self.is_connector:
            return self.node_type
        if self.name:
            return f"{self.name} ({self.node_type})"
        return f"({self.node_type})"


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    orientation: Orientation
    role: EdgeRole
    weight: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "orientation", Orientation(self.orientation))
        object.__setattr__(self, "role", EdgeRole(self.role))
        object.__setattr__(self, "weight", float(self.weight))

    @property
    def is_original(self) -> bool:
        return self.orientation is Orientation.ORIGINAL

    @property
    def is_opposite(self) -> bool:
        return self.orientation is Orientation.OPPOSITE

    def sort_key(self) -> tuple[str, str, str, str, float]:
        return (self.source, self.target, self.orientation.value, self.role.value, self.weight)

    def __str__(self) -> str:
        arrow = "->" if self.is_original else "~>"
        return f"{self.source} {arrow} {self.target} [{self.role.value}]"


@dataclass(frozen=True)
class WeightPolicy:
    """Edge weights per orientation, optionally overridden per role.

    Opposite edges must never be lighter than original ones of the same role.
    """

    original_weight: float = 1.0
    opposite_weight: float = 2.0
    overrides: Mapping[EdgeRole, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        overrides = {EdgeRole(r): (float(o), float(p)) for r, (o, p) in dict(self.overrides).items()}
        object.__setattr__(self, "overrides", MappingProxyType(overrides))
        pairs = [("default", (self.original_weight, self.opposite_weight))]
        pairs += [(r.value, w) for r, w in overrides.items()]
        for role, (orig, opp) in pairs:
            if not (orig > 0 and opp > 0) or math.isinf(orig) or math.isinf(opp):
                raise ValueError(f"weights must be positive and finite ({role}: {orig}, {opp})")
            if opp < orig:
                raise ValueError(
                    f"opposite weight {opp} is lighter than original weight {orig} ({role})"
                )

    def weights(self, role: EdgeRole) -> tuple[float, float]:
        return self.overrides.get(EdgeRole(role), (self.original_weight, self.opposite_weight))

    def weight(self, role: EdgeRole, orientation: Orientation = Orientation.ORIGINAL) -> float:
        orig, opp = self.weights(role)
        return orig if Orientation(orientation) is Orientation.ORIGINAL else opp

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightPolicy):
            return NotImplemented
        return (self.original_weight, self.opposite_weight, dict(self.overrides)) == (
            other.original_weight, other.opposite_weight, dict(other.overrides))

    __hash__ = None  # type: ignore[assignment]


class DataGraph:
    """Immutable directed graph of :class:`GraphNode` and :class:`Edge` values."""

    __slots__ = ("_nodes", "_edges", "_policy", "_out", "_in")

    def __init__(
        self,
        nodes: Iterable[GraphNode] = (),
        edges: Iterable[Edge] = (),
        weight_policy: WeightPolicy | None = None,
    ):
        index: dict[str, GraphNode] = {}
        for node in nodes:
            if node.id in index:
                raise ValueError(f"duplicate node id {node.id!r}")
            index[node.id] = node
        self._nodes = MappingProxyType(index)
        self._edges = tuple(edges)
        self._policy = weight_policy or WeightPolicy()
        self._out: dict[str, tuple[int, ...]] | None = None
        self._in: dict[str, tuple[int, ...]] | None = None

    @property
    def nodes(self) -> Mapping[str, GraphNode]:
        return self._nodes

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self._edges

    @property
    def weight_policy(self) -> WeightPolicy:
        return self._policy

    def node(self, node_id: str) -> GraphNode:
        return self._nodes[node_id]

    def __contains__(self, node_id: object) -> bool:
        return node_id in self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    def _index(self) -> None:
        out: dict[str, list[int]] = defaultdict(list)
        inc: dict[str, list[int]] = defaultdict(list)
        for i, e in enumerate(self._edges):
            out[e.source].append(i)
            inc[e.target].append(i)
        self._out = {k: tuple(v) for k, v in out.items()}
        self._in = {k: tuple(v) for k, v in inc.items()}

    def out_edge_ids(self, node_id: str) -> tuple[int, ...]:
        if self._out is None:
            self._index()
        return self._out.get(node_id, ())  # type: ignore[union-attr]

    def in_edge_ids(self, node_id: str) -> tuple[int, ...]:
        if self._in is None:
            self._index()
        return self._in.get(node_id, ())  # type: ignore[union-attr]

    def out_edges(self, node_id: str) -> list[Edge]:
        return [self._edges[i] for i in self.out_edge_ids(node_id)]

    def in_edges(self, node_id: str) -> list[Edge]:
        return [self._edges[i] for i in self.in_edge_ids(node_id)]

    def objects(self) -> list[GraphNode]:
        return [n for n in self._nodes.values() if n.is_object]

    def connectors(self) -> list[GraphNode]:
        return [n for n in self._nodes.values() if n.is_connector]

    def original_edges(self) -> list[Edge]:
        return [e for e in self._edges if e.is_original]

    def opposite_edges(self) -> list[Edge]:
        return [e for e in self._edges if e.is_opposite]

    def replace(
        self,
        nodes: Iterable[GraphNode] | None = None,
        edges: Iterable[Edge] | None = None,
        weight_policy: WeightPolicy | None = None,
    ) -> DataGraph:
        return DataGraph(
            self._nodes.values() if nodes is None else nodes,
            self._edges if edges is None else edges,
            weight_policy or self._policy,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DataGraph):
            return NotImplemented
        return (
            dict(self._nodes) == dict(other._nodes)
            and Counter(self._edges) == Counter(other._edges)
            and self._policy == other._policy
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return (f"DataGraph(objects={len(self.objects())}, connectors={len(self.connectors())}, "
                f"edges={len(self._edges)})")


# ---------------------------------------------------------------------------
# Opposite edges
# ---------------------------------------------------------------------------

RoleSelector = Callable[[EdgeRole], bool]


def _as_selector(selector: RoleSelector | Iterable[EdgeRole] | None) -> RoleSelector:
    if selector is None:
        return lambda role: True
    if callable(selector):
        return selector
    roles = frozenset(EdgeRole(r) for r in selector)
    return lambda role: role in roles


def mirrored_connectors(graph: DataGraph) -> set[str]:
    """Connectors whose relationship is already stored in the reverse direction.

    A connector ``u -> c -> {v...}`` is mirrored when, for every target ``v``,
    another connector of the same type runs ``v -> c' -> u`` (two ``border``
    nodes between the same pair of countries, for instance).
    """
    shape: dict[str, tuple[str, str, frozenset[str]]] = {}
    for node in graph.connectors():
        ins = [e.source for e in graph.in_edges(node.id) if e.is_original]
        outs = frozenset(e.target for e in graph.out_edges(node.id) if e.is_original)
        if len(ins) == 1 and outs:
            shape[node.id] = (node.node_type, ins[0], outs)
    by_entry: dict[tuple[str, str], list[str]] = defaultdict(list)
    for cid, (ctype, src, _) in shape.items():
        by_entry[(ctype, src)].append(cid)

    mirrored = set()
    for cid, (ctype, src, outs) in shape.items():
        if all(
            any(other != cid and src in shape[other][2] for other in by_entry.get((ctype, v), ()))
            for v in outs
        ):
            mirrored.add(cid)
    return mirrored


def add_opposite_edges(
    graph: DataGraph,
    selector: RoleSelector | Iterable[EdgeRole] | None = None,
) -> DataGraph:
    """Return a graph where every selected original edge can be walked backwards.

    For an original edge ``u -> v`` whose role passes ``selector`` an opposite
    edge ``v -> u`` is added unless an original ``v -> u`` of the same role
    already exists, or the edge belongs to a connector that is mirrored (see
    :func:`mirrored_connectors`). Idempotent.
    """
    accept = _as_selector(selector)
    policy = graph.weight_policy
    originals = {(e.source, e.target, e.role) for e in graph.edges if e.is_original}
    opposites = {(e.source, e.target, e.role) for e in graph.edges if e.is_opposite}
    skip = mirrored_connectors(graph)

    added: list[Edge] = []
    for e in graph.edges:
        if not e.is_original or not accept(e.role):
            continue
        if e.source in skip or e.target in skip:
            continue
        rev = (e.target, e.source, e.role)
        if rev in originals or rev in opposites:
            continue
        opposites.add(rev)
        added.append(Edge(e.target, e.source, Orientation.OPPOSITE, e.role,
                          policy.weight(e.role, Orientation.OPPOSITE)))
    if not added:
        return graph
    return graph.replace(edges=graph.edges + tuple(added))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    subject: str
    invariant: str
    message: str

    def __str__(self) -> str:
        return f"{self.subject}: {self.invariant}: {self.message}"


def _property_problems(prop: PropertyNode, path: str) -> Iterator[str]:
    here = f"{path}/{prop.name}" if path else prop.name
    if not prop.name:
        yield f"{here}: empty property name"
    if prop.value is None and not prop.children:
        yield f"{here}: property without value or children"
    for child in prop.children:
        yield from _property_problems(child, here)


def validate(graph: DataGraph) -> list[Violation]:
    """Check the structural invariants of an OCP graph; an empty list means valid."""
    out: list[Violation] = []
    nodes = graph.nodes

    for node in nodes.values():
        subject = f"node {node.id!r}"
        if not node.node_type:
            out.append(Violation(subject, "node-type", "node type is empty"))
        if node.is_connector and node.name is not None:
            out.append(Violation(subject, "connector-name", "explicit connectors have no name"))
        for prop in node.properties:
            for problem in _property_problems(prop, ""):
                out.append(Violation(subject, "property", problem))

    originals = {(e.source, e.target, e.role) for e in graph.edges if e.is_original}
    original_weight = {}
    for e in graph.edges:
        if e.is_original:
            key = (e.source, e.target, e.role)
            original_weight[key] = min(e.weight, original_weight.get(key, math.inf))

    for e in graph.edges:
        subject = f"edge {e}"
        missing = [n for n in (e.source, e.target) if n not in nodes]
        if missing:
            out.append(Violation(subject, "dangling-endpoint",
                                 f"unknown node(s) {', '.join(map(repr, missing))}"))
        if e.source == e.target:
            out.append(Violation(subject, "self-loop", "edge endpoints coincide"))
        if not e.weight >= 0:
            out.append(Violation(subject, "weight", f"weight {e.weight} is negative or NaN"))
        if e.is_opposite:
            mirror = (e.target, e.source, e.role)
            if mirror not in originals:
                out.append(Violation(subject, "opposite-mirror",
                                     "opposite edge has no original edge in the reverse direction"))
            elif e.weight < original_weight[mirror]:
                out.append(Violation(subject, "opposite-weight",
                                     "opposite edge is lighter than its original"))
        elif not missing and nodes[e.source].is_connector and nodes[e.target].is_connector:
            out.append(Violation(subject, "adjacent-connectors",
                                 "original edge joins two explicit connectors"))

    for node in graph.connectors():
        subject = f"node {node.id!r}"
        ins = [e for e in graph.in_edges(node.id) if e.is_original]
        outs = [e for e in graph.out_edges(node.id) if e.is_original]
        if len(ins) > 1:
            out.append(Violation(subject, "connector-in-degree",
                                 f"explicit connector has {len(ins)} incoming original edges"))
        if not outs:
            out.append(Violation(subject, "connector-out-degree",
                                 "explicit connector has no outgoing original edge"))

    roles = {e.role for e in graph.edges}
    if roles and not any(roles <= fam for fam in ROLE_FAMILIES):
        out.append(Violation("graph", "role-family",
                             "edge roles from different transforms: "
                             + ", ".join(sorted(r.value for r in roles))))
    return out


# ---------------------------------------------------------------------------
# Comparison and summaries
# ---------------------------------------------------------------------------

def node_signature(node: GraphNode) -> tuple:
    """Identity-free description of a node (kind, type, name, properties)."""
    return (node.kind.value, node.node_type, node.name or "", properties_key(node.properties))


@dataclass
class GraphDiff:
    nodes_only_left: Counter
    nodes_only_right: Counter
    edges_only_left: Counter
    edges_only_right: Counter

    @property
    def empty(self) -> bool:
        return not (self.nodes_only_left or self.nodes_only_right
                    or self.edges_only_left or self.edges_only_right)


def diff_graphs(
    left: DataGraph,
    right: DataGraph,
    orientations: Sequence[Orientation] = (Orientation.ORIGINAL,),
) -> GraphDiff:
    """Compare two graphs by node signature, ignoring ids and edge roles.

    Edges are described as ``(source signature, target signature)`` pairs.
    Only edges with one of the given orientations take part.
    """
    def nodes_of(g: DataGraph) -> Counter:
        return Counter(node_signature(n) for n in g.nodes.values())

    def edges_of(g: DataGraph) -> Counter:
        return Counter(
            (node_signature(g.node(e.source)), node_signature(g.node(e.target)))
            for e in g.edges if e.orientation in orientations
        )

    ln, rn = nodes_of(left), nodes_of(right)
    le, re_ = edges_of(left), edges_of(right)
    return GraphDiff(ln - rn, rn - ln, le - re_, re_ - le)


def summarize(graph: DataGraph) -> dict:
    """Counts by node kind, edge orientation and edge role."""
    kinds = Counter(n.kind.value for n in graph.nodes.values())
    orient = Counter(e.orientation.value for e in graph.edges)
    roles = Counter(e.role.value for e in graph.edges)
    return {
        "nodes": len(graph.nodes),
        "objects": kinds.get("object", 0),
        "connectors": kinds.get("connector", 0),
        "edges": len(graph.edges),
        "original": orient.get("original", 0),
        "opposite": orient.get("opposite", 0),
        "roles": {r.value: roles.get(r.value, 0) for r in EdgeRole},
    }


def summary_line(graph: DataGraph) -> str:
    s = summarize(graph)
    return (f"nodes: {s['nodes']} (objects {s['objects']}, connectors {s['connectors']}); "
            f"edges: {s['edges']} (original {s['original']}, opposite {s['opposite']})")
