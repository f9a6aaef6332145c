"""Keyword search over data graphs.

An answer to a set of keywords is a directed subtree whose nodes cover every
keyword and from which no node can be pruned without losing one. Answers are
produced lightest first by a best-first growth of subtrees from the nodes
that match the rarest keyword; equal-weight answers come out in a fixed
order, and answers carrying the same information are reported once.
"""

from __future__ import annotations

import heapq
import json
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import GraphTooLarge, NotASubtree, QueryError
from .model import DataGraph, Edge, GraphNode, Orientation, PropertyNode

DEFAULT_BUDGET = 1_000_000

_TOKEN = re.compile(r"[^\W_]+")


def tokens(text: str) -> list[str]:
    return [t.lower() for t in _TOKEN.findall(text)]


@dataclass(frozen=True)
class Query:
    keywords: tuple[str, ...]

    def __post_init__(self) -> None:
        cleaned = []
        for kw in self.keywords:
            if not isinstance(kw, str) or not kw.strip():
                raise QueryError("keywords must be nonempty strings")
            if not tokens(kw):
                raise QueryError(f"keyword {kw!r} has no letters or digits")
            if kw.strip() not in cleaned:
                cleaned.append(kw.strip())
        if not cleaned:
            raise QueryError("a query needs at least one keyword")
        object.__setattr__(self, "keywords", tuple(cleaned))

    @classmethod
    def of(cls, keywords: str | Iterable[str]) -> Query:
        """Build from an iterable or from a comma separated string."""
        if isinstance(keywords, str):
            keywords = keywords.split(",")
        return cls(tuple(keywords))


# ---------------------------------------------------------------------------
# Matching
# ---------------------------------------------------------------------------

def _fields(node: GraphNode) -> Iterator[str]:
    yield node.node_type
    if node.name:
        yield node.name

    def walk(props: Iterable[PropertyNode]) -> Iterator[str]:
        for p in props:
            yield p.name
            if p.value is not None:
                yield p.value
            yield from walk(p.children)
    yield from walk(node.properties)


def _contains(haystack: Sequence[str], needle: Sequence[str]) -> bool:
    n = len(needle)
    return any(list(haystack[i:i + n]) == list(needle) for i in range(len(haystack) - n + 1))


def node_matches(node: GraphNode, keyword: str) -> bool:
    """Case-insensitive whole-token match.

    A multi-word keyword must occur as consecutive tokens of one field, so
    "paper a" matches a node named "Paper A" and not one named "Paper B".
    """
    needle = tokens(keyword)
    if not needle:
        return False
    return any(_contains(tokens(f), needle) for f in _fields(node))


def keyword_matches(graph: DataGraph, query: Query) -> dict[str, frozenset[str]]:
    return {
        kw: frozenset(nid for nid, node in graph.nodes.items() if node_matches(node, kw))
        for kw in query.keywords
    }


# ---------------------------------------------------------------------------
# Answers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DedupConfig:
    mode: str = "types"
    inverse_types: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.mode not in ("edges", "types"):
            raise ValueError(f"dedup mode must be 'edges' or 'types', got {self.mode!r}")
        sym: dict[str, str] = {}
        for a, b in dict(self.inverse_types).items():
            for x, y in ((a, b), (b, a)):
                if sym.get(x, y) != y:
                    raise ValueError(f"connector type {x!r} has two inverses: {sym[x]!r} and {y!r}")
                sym[x] = y
        object.__setattr__(self, "inverse_types", sym)

    def canonical_type(self, node_type: str) -> str:
        inverse = self.inverse_types.get(node_type)
        return min(node_type, inverse) if inverse is not None else node_type


@dataclass(frozen=True)
class AnswerTree:
    root: str
    edges: tuple[Edge, ...]
    cover: Mapping[str, frozenset[str]]
    total_weight: float

    @property
    def nodes(self) -> list[str]:
        seen = [self.root]
        seen.extend(e.target for e in self.edges)
        return seen

    def __len__(self) -> int:
        return len(self.edges) + 1

    def uses_opposite(self) -> bool:
        return any(e.is_opposite for e in self.edges)


def _check_tree(root: str, edges: Sequence[Edge], graph: DataGraph) -> None:
    if root not in graph:
        raise NotASubtree(f"root {root!r} is not a graph node")
    present = set(graph.edges)
    parent: dict[str, str] = {}
    for e in edges:
        if e not in present:
            raise NotASubtree(f"edge {e} is not in the graph")
        if e.target == root:
            raise NotASubtree(f"edge {e} enters the root")
        if e.target in parent:
            raise NotASubtree(f"node {e.target!r} has two parents in the tree")
        parent[e.target] = e.source
    for node in parent:
        hops, cur = 0, node
        while cur != root:
            if cur not in parent or hops > len(parent):
                raise NotASubtree(f"node {node!r} is not reachable from root {root!r}")
            cur = parent[cur]
            hops += 1


def _covers(nodes: set[str], matches: Mapping[str, frozenset[str]]) -> bool:
    return all(nodes & m for m in matches.values())


def _nonredundant(root: str, edges: Sequence[Edge], matches: Mapping[str, frozenset[str]]) -> bool:
    nodes = {root} | {e.target for e in edges}
    if not _covers(nodes, matches):
        return False
    if not edges:
        return True
    children: dict[str, list[str]] = {}
    for e in edges:
        children.setdefault(e.source, []).append(e.target)
    for n in nodes:
        if n != root and n not in children and _covers(nodes - {n}, matches):
            return False
    if len(children.get(root, ())) == 1 and _covers(nodes - {root}, matches):
        return False
    return True


def is_nonredundant(
    tree: AnswerTree | tuple[str, Sequence[Edge]],
    query: Query,
    graph: DataGraph,
) -> bool:
    """True iff the tree covers the query and no leaf (nor a one-child root) is superfluous."""
    root, edges = (tree.root, tree.edges) if isinstance(tree, AnswerTree) else tree
    edges = list(edges)
    _check_tree(root, edges, graph)
    return _nonredundant(root, edges, keyword_matches(graph, query))


CanonicalKey = tuple[tuple[str, ...], ...]


def canonical_form(
    tree: AnswerTree | tuple[str, Sequence[Edge]],
    dedup: DedupConfig,
    graph: DataGraph,
) -> CanonicalKey:
    """Direction-free key of an answer; equal keys mean the answers say the same thing."""
    root, edges = (tree.root, tree.edges) if isinstance(tree, AnswerTree) else tree

    def render(node_id: str) -> str:
        node = graph.node(node_id)
        if node.is_object or dedup.mode == "edges":
            return f"id:{node_id}"
        return f"type:{dedup.canonical_type(node.node_type)}"

    if not edges:
        return ((render(root),),)
    return tuple(sorted(tuple(sorted((render(e.source), render(e.target)))) for e in edges))


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def original_only(graph: DataGraph) -> DataGraph:
    """The same graph without its opposite edges."""
    return graph.replace(edges=graph.original_edges())


def _tie_key(graph: DataGraph, root: str, edge_ids: Iterable[int]) -> tuple:
    return (sorted(graph.edges[i].sort_key() + (i,) for i in edge_ids), root)


def enumerate_answers(
    graph: DataGraph,
    query: Query,
    limit: int | None = None,
    dedup: DedupConfig | None = None,
    budget: int = DEFAULT_BUDGET,
) -> Iterator[AnswerTree]:
    """Yield non-redundant answers by nondecreasing total weight.

    Every rooted subtree containing a node of the rarest keyword is reachable
    by repeatedly attaching a child below some tree node or a new parent above
    the root, so best-first growth from those nodes visits all answers. A
    covering tree is never grown further: anything larger that contains it is
    redundant. Answers of equal weight are collected, ordered by their sorted
    edges, and then filtered through the duplicate keys.
    """
    dedup = dedup or DedupConfig()
    if limit is not None and limit <= 0:
        return
    matches = keyword_matches(graph, query)
    if any(not m for m in matches.values()):
        return
    seeds = sorted(min(matches.values(), key=lambda m: (len(m), sorted(m))))
    edges = graph.edges

    heap: list[tuple[float, int, str, frozenset[int], frozenset[str]]] = []
    seen: set = set()
    counter = 0

    def push(weight: float, root: str, eids: frozenset[int], nodes: frozenset[str]) -> None:
        nonlocal counter
        key = eids if eids else ("node", root)
        if key in seen:
            return
        seen.add(key)
        counter += 1
        if counter > budget:
            raise GraphTooLarge(budget)
        heapq.heappush(heap, (weight, counter, root, eids, nodes))

    for s in seeds:
        push(0.0, s, frozenset(), frozenset((s,)))

    emitted: set[CanonicalKey] = set()
    level: float | None = None
    pending: list[tuple[tuple, AnswerTree]] = []
    produced = 0

    def flush() -> Iterator[AnswerTree]:
        nonlocal produced
        pending.sort(key=lambda item: item[0])
        for _, tree in pending:
            key = canonical_form(tree, dedup, graph)
            if key in emitted:
                continue
            emitted.add(key)
            produced += 1
            yield tree
            if limit is not None and produced >= limit:
                return
        pending.clear()

    while heap:
        weight, _, root, eids, nodes = heapq.heappop(heap)
        if level is not None and weight > level and pending:
            yield from flush()
            if limit is not None and produced >= limit:
                return
        level = weight
        tree_edges = [edges[i] for i in sorted(eids)]
        if _covers(set(nodes), matches):
            if _nonredundant(root, tree_edges, matches):
                ordered = tuple(sorted(tree_edges, key=Edge.sort_key))
                cover = {kw: frozenset(nodes & m) for kw, m in matches.items()}
                pending.append((_tie_key(graph, root, eids),
                                AnswerTree(root, ordered, cover, weight)))
            continue
        weights = [e.weight for e in tree_edges]
        for n in nodes:
            for i in graph.out_edge_ids(n):
                e = edges[i]
                if e.target not in nodes:
                    push(math.fsum(weights + [e.weight]), root, eids | {i}, nodes | {e.target})
        for i in graph.in_edge_ids(root):
            e = edges[i]
            if e.source not in nodes:
                push(math.fsum(weights + [e.weight]), e.source, eids | {i}, nodes | {e.source})
    if pending:
        yield from flush()


def top_answers(
    graph: DataGraph,
    query: Query,
    limit: int | None = None,
    dedup: DedupConfig | None = None,
    budget: int = DEFAULT_BUDGET,
) -> list[AnswerTree]:
    return list(enumerate_answers(graph, query, limit, dedup, budget))


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def answer_record(tree: AnswerTree, rank: int, graph: DataGraph) -> dict:
    nodes = []
    for nid in tree.nodes:
        node = graph.node(nid)
        entry = {"id": nid, "type": node.node_type}
        if node.name is not None:
            entry["name"] = node.name
        nodes.append(entry)
    return {
        "rank": rank,
        "total_weight": tree.total_weight,
        "root": tree.root,
        "nodes": nodes,
        "edges": [{"from": e.source, "to": e.target, "orientation": e.orientation.value}
                  for e in tree.edges],
        "matches": {kw: sorted(ids) for kw, ids in tree.cover.items()},
    }


def answers_to_jsonl(answers: Iterable[AnswerTree], graph: DataGraph) -> str:
    return "".join(json.dumps(answer_record(t, rank, graph), ensure_ascii=False) + "\n"
                   for rank, t in enumerate(answers, 1))


def describe(tree: AnswerTree, graph: DataGraph) -> str:
    """One-line human rendering, e.g. ``Dnepr (river) -> Russia (country)``."""
    if not tree.edges:
        return graph.node(tree.root).label()
    arrow = {Orientation.ORIGINAL: "->", Orientation.OPPOSITE: "~>"}
    return "; ".join(f"{graph.node(e.source).label()} {arrow[e.orientation]} "
                     f"{graph.node(e.target).label()}" for e in tree.edges)
