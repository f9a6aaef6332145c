"""RDF triples to data graph.

All triples sharing a subject are gathered into one node. Literal objects
become properties; a subject that is mentioned by exactly one other triple
and carries only literal (or already nested) content is folded into the
referring node as a nested property. Remaining IRI links become edges.
"""

from __future__ import annotations

import re
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .config import BuildConfig
from .errors import EmptyIri, NTriplesSyntaxError
from .model import (DataGraph, Edge, EdgeRole, GraphNode, NodeKind, Orientation,
                    PropertyNode, add_opposite_edges)


@dataclass(frozen=True, order=True)
class Literal:
    text: str


@dataclass(frozen=True, order=True)
class Triple:
    subject: str
    predicate: str
    object: str | Literal

    def __post_init__(self) -> None:
        if not self.subject or not self.predicate:
            raise EmptyIri(f"empty subject or predicate in {self!r}")
        if isinstance(self.object, str) and not self.object:
            raise EmptyIri(f"empty object IRI in {self!r}")

    @property
    def literal_object(self) -> bool:
        return isinstance(self.object, Literal)

    def sort_key(self) -> tuple:
        obj = self.object
        return (self.subject, self.predicate, isinstance(obj, Literal),
                obj.text if isinstance(obj, Literal) else obj)


# ---------------------------------------------------------------------------
# N-Triples style input
# ---------------------------------------------------------------------------

_IRI = r"<([^<>\s]*)>"
_BNODE = r"(_:[A-Za-z0-9_][\w.\-]*)"
_LIT = r'"((?:[^"\\]|\\.)*)"(?:@[A-Za-z]+(?:-[A-Za-z0-9]+)*|\^\^<[^<>\s]*>)?'
_LINE = re.compile(
    rf"\s*(?:{_IRI}|{_BNODE})\s+{_IRI}\s+(?:{_IRI}|{_BNODE}|{_LIT})\s*\.\s*(?:#.*)?\Z"
)
_ESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}
_ESCAPE = re.compile(r"\\(?:u([0-9A-Fa-f]{4})|U([0-9A-Fa-f]{8})|(.))")


def _unescape(text: str) -> str:
    def sub(m: re.Match) -> str:
        if m.group(1) or m.group(2):
            return chr(int(m.group(1) or m.group(2), 16))
        ch = m.group(3)
        if ch not in _ESCAPES:
            raise ValueError(f"unknown escape \\{ch}")
        return _ESCAPES[ch]
    return _ESCAPE.sub(sub, text)


def parse_ntriples(text: str) -> list[Triple]:
    """Parse one triple per line; every bad line is reported, not just the first."""
    triples = []
    problems: list[tuple[int, str]] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        m = _LINE.match(line)
        if not m:
            problems.append((lineno, "not a triple"))
            continue
        s_iri, s_bnode, pred, o_iri, o_bnode, o_lit = m.groups()
        subject = s_iri if s_iri is not None else s_bnode
        try:
            if o_lit is not None:
                obj: str | Literal = Literal(_unescape(o_lit))
            else:
                obj = o_iri if o_iri is not None else o_bnode
            triples.append(Triple(subject, pred, obj))
        except (ValueError, EmptyIri) as exc:
            problems.append((lineno, str(exc)))
    if problems:
        raise NTriplesSyntaxError(problems)
    return triples


# ---------------------------------------------------------------------------
# Labels
# ---------------------------------------------------------------------------

_CAMEL = re.compile(r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])")


def label_of(iri: str) -> str:
    """Readable label for an IRI.

    >>> label_of("http://www.w3.org/2000/10/swap/pim/contact#fullName")
    'full name'
    >>> label_of("http://x.org/onto/has_capital_city")
    'has capital city'
    """
    if not iri or not iri.strip():
        raise EmptyIri("cannot label an empty IRI")
    local = iri
    if "#" in iri and iri.rsplit("#", 1)[1]:
        local = iri.rsplit("#", 1)[1]
    else:
        segments = [s for s in re.split(r"[/#]", iri) if s]
        if segments:
            local = segments[-1]
    if local.startswith("_:"):
        local = local[2:]
    words = []
    for chunk in re.split(r"[_\-\s]+", local):
        words.extend(w for w in _CAMEL.split(chunk) if w)
    label = " ".join(w.lower() for w in words)
    return label or local.lower() or iri


# ---------------------------------------------------------------------------
# Folding
# ---------------------------------------------------------------------------

def fold_triples(triples: Iterable[Triple], config: BuildConfig | None = None) -> DataGraph:
    config = config or BuildConfig()
    policy = config.weight_policy()
    type_preds = set(config.type_predicates)
    name_preds = list(config.name_predicates)

    unique = sorted(set(triples), key=Triple.sort_key)
    by_subject: dict[str, list[Triple]] = defaultdict(list)
    for t in unique:
        by_subject[t.subject].append(t)

    def is_type(t: Triple) -> bool:
        return t.predicate in type_preds and not t.literal_object

    # incoming structural references (type triples excluded)
    incoming: Counter[str] = Counter()
    referrer: dict[str, str] = {}
    for t in unique:
        if not t.literal_object and not is_type(t):
            incoming[t.object] += 1  # type: ignore[index]
            referrer[t.object] = t.subject  # type: ignore[index]

    # a subject folds when exactly one other triple names it and everything it
    # says is a literal or something already folded
    folded: set[str] = set()
    changed = True
    while changed:
        changed = False
        for s, ts in by_subject.items():
            if s in folded or incoming[s] != 1:
                continue
            if referrer[s] == s or any(is_type(t) for t in ts):
                continue
            if all(t.literal_object or t.object in folded for t in ts):
                folded.add(s)
                changed = True

    def content(s: str) -> tuple[PropertyNode, ...]:
        props = []
        for t in by_subject[s]:
            if is_type(t):
                continue
            if isinstance(t.object, Literal):
                props.append(PropertyNode(label_of(t.predicate), t.object.text))
            elif t.object in folded:
                props.append(PropertyNode(label_of(t.predicate), None, content(t.object)))
        return tuple(props)

    nodes: list[GraphNode] = []
    edges: set[tuple[str, str]] = set()
    mentioned: set[str] = set()
    for s, ts in by_subject.items():
        if s in folded:
            continue
        types = sorted({label_of(t.object) for t in ts if is_type(t)})  # type: ignore[arg-type]
        props = list(content(s))
        for t in ts:
            if t.literal_object or is_type(t) or t.object in folded:
                continue
            if t.object == s:
                props.append(PropertyNode(label_of(t.predicate), label_of(s)))
                continue
            edges.add((s, t.object))  # type: ignore[arg-type]
            mentioned.add(t.object)  # type: ignore[arg-type]
        name = None
        for pred in name_preds:
            name = next((t.object.text for t in ts
                         if t.predicate == pred and isinstance(t.object, Literal)
                         and t.object.text.strip()), None)
            if name is not None:
                break
        nodes.append(GraphNode(s, NodeKind.OBJECT, ", ".join(types) or "resource", name,
                               tuple(props), s))
    for iri in sorted(mentioned - set(by_subject)):
        nodes.append(GraphNode(iri, NodeKind.OBJECT, "resource", label_of(iri), (), iri))

    weight = policy.weight(EdgeRole.RDF_LINK)
    graph = DataGraph(
        nodes,
        [Edge(s, o, Orientation.ORIGINAL, EdgeRole.RDF_LINK, weight) for s, o in sorted(edges)],
        policy,
    )
    return add_opposite_edges(graph, {EdgeRole.RDF_LINK})


def transform_rdf(text: str, config: BuildConfig | None = None) -> DataGraph:
    return fold_triples(parse_ntriples(text), config)


def literals_of(triples: Sequence[Triple]) -> Counter[str]:
    """Multiset of literal texts over distinct triples; used by conservation checks."""
    return Counter(t.object.text for t in set(triples) if isinstance(t.object, Literal))
