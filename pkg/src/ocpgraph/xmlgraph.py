"""XML document (with DTD) to data graph.

The transform runs in two stages. First the DTD is analysed and each element
type is classified as an object, a connector or a property; the verdict for
a type applies to all of its elements. Then the document is walked and every
non-property element becomes a node:

* plain attributes and property children become (nested) properties;
* object children are linked by *hierarchical* edges;
* connector children, and IDREF/IDREFS attributes, produce *reference*
  edges. A significantly named reference attribute gets its own explicit
  connector typed after the attribute.

Only reference edges receive opposite companions.
"""

from __future__ import annotations

import copy
import enum
import json
import re
import warnings
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .config import BuildConfig
from .dtd import AttrKind, Dtd, ElementDecl, parse_dtd
from .errors import (ConflictingRules, DanglingIdRef, DataGraphWarning, DuplicateId, NameClash,
                     TargetIsProperty, UnclassifiedType, XmlTransformError)
from .model import (DataGraph, Edge, EdgeRole, GraphNode, NodeKind, Orientation,
                    PropertyNode, add_opposite_edges)
from .naming import Significance, choose_object_name


def _warn(message: str) -> None:
    warnings.warn(message, DataGraphWarning, stacklevel=3)


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------

@dataclass
class XmlElement:
    element_type: str
    attributes: dict[str, str] = field(default_factory=dict)
    children: list[XmlElement] = field(default_factory=list)
    pcdata: str = ""
    index: int = 0
    path: str = ""

    def iter(self) -> Iterator[XmlElement]:
        """Pre-order (document order) traversal."""
        yield self
        for child in self.children:
            yield from child.iter()


@dataclass
class XmlDocument:
    root: XmlElement
    doctype: str | None = None
    internal_subset: str | None = None

    def elements(self) -> Iterator[XmlElement]:
        return self.root.iter()


_DOCTYPE = re.compile(
    r"<!DOCTYPE\s+([^\s\[>]+)(?:\s+(?:SYSTEM|PUBLIC)(?:\s+(?:\"[^\"]*\"|'[^']*'))+)?\s*(?:\[(.*?)\]\s*)?>",
    re.DOTALL,
)


def _convert(node: ET.Element, counter: list[int], path: str) -> XmlElement:
    tag = node.tag
    if isinstance(tag, str) and tag.startswith("{"):
        _warn(f"namespaced element {tag} kept with its expanded name")
    el = XmlElement(str(tag), dict(node.attrib), index=counter[0], path=path)
    counter[0] += 1
    parts = [node.text or ""]
    seen: dict[str, int] = {}
    for child in node:
        if not isinstance(child.tag, str):  # comments / processing instructions
            parts.append(child.tail or "")
            continue
        seen[child.tag] = seen.get(child.tag, 0) + 1
        el.children.append(_convert(child, counter, f"{path}/{child.tag}[{seen[child.tag]}]"))
        parts.append(child.tail or "")
    el.pcdata = "".join(parts)
    return el


def parse_xml(text: str) -> XmlDocument:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        line, col = exc.position
        raise XmlTransformError(f"XML not well-formed: {exc} (line {line}, column {col})") from exc
    m = _DOCTYPE.search(text)
    doc = XmlDocument(_convert(root, [0], f"/{root.tag}[1]"))
    if m:
        doc.doctype = m.group(1)
        doc.internal_subset = m.group(2)
    return doc


def reconcile(dtd: Dtd, doc: XmlDocument) -> Dtd:
    """Copy of ``dtd`` extended with whatever the document uses but the DTD does not declare.

    Undeclared element types get an all-plain declaration built from what the
    document shows; undeclared attributes are taken as plain.
    """
    dtd = copy.deepcopy(dtd)
    for el in doc.elements():
        decl = dtd.decls.get(el.element_type)
        if decl is None:
            dtd.warn(f"element type {el.element_type!r} is not declared; treated as all-plain")
            decl = dtd.decls[el.element_type] = ElementDecl(el.element_type, declared=False)
        for attr in el.attributes:
            if decl.attr_kind(attr) is None:
                dtd.warn(f"attribute {el.element_type}/{attr} is not declared; treated as plain")
                decl.attributes.append((attr, AttrKind.PLAIN))
        for child in el.children:
            if child.element_type not in decl.child_types and not decl.any_content:
                if decl.declared:
                    dtd.warn(f"<{child.element_type}> inside <{el.element_type}> is not allowed "
                             f"by the DTD; accepted as a child type")
                decl.child_types = decl.child_types + (child.element_type,)
        if el.pcdata.strip() and not decl.has_pcdata:
            if decl.declared:
                dtd.warn(f"<{el.element_type}> has character data not allowed by the DTD")
            decl.has_pcdata = True
    return dtd


# ---------------------------------------------------------------------------
# Stage 0: significance of reference attributes
# ---------------------------------------------------------------------------

class SignificanceSource(str, enum.Enum):
    AUTO_SAFE = "auto-safe"
    AUTO_SCAN = "auto-scan"
    HUMAN_OVERRIDE = "override"


@dataclass(frozen=True)
class SignificanceEntry:
    verdict: Significance
    source: SignificanceSource
    needs_confirmation: bool = False

    @property
    def significant(self) -> bool:
        return self.verdict is Significance.SIGNIFICANT


SignificanceTable = dict[tuple[str, str], SignificanceEntry]


def load_overrides(path: str | Path) -> dict[tuple[str, str], Significance]:
    """Read ``[{"element", "attribute", "verdict"}]`` from a JSON file."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return parse_overrides(data)


def parse_overrides(data: Iterable[Mapping[str, str]]) -> dict[tuple[str, str], Significance]:
    out = {}
    for item in data:
        try:
            out[(item["element"], item["attribute"])] = Significance(item["verdict"])
        except (KeyError, ValueError, TypeError) as exc:
            raise XmlTransformError(f"bad significance override {item!r}: {exc}") from exc
    return out


def ref_ids(value: str, kind: AttrKind) -> list[str]:
    """Ids referenced by an attribute value; IDREFS values are sets (first occurrence kept)."""
    if kind is AttrKind.IDREF:
        v = value.strip()
        return [v] if v else []
    return list(dict.fromkeys(value.split()))


def build_id_index(dtd: Dtd, doc: XmlDocument) -> dict[str, XmlElement]:
    index: dict[str, XmlElement] = {}
    for el in doc.elements():
        decl = dtd.decls.get(el.element_type)
        id_attr = decl.id_attribute if decl else None
        if id_attr is None or id_attr not in el.attributes:
            continue
        value = el.attributes[id_attr].strip()
        if value in index:
            raise DuplicateId(f"id {value!r} used by <{index[value].element_type}> and "
                              f"<{el.element_type}>")
        index[value] = el
    return index


def _resolve(ids: list[str], index: Mapping[str, XmlElement], el: XmlElement, attr: str,
             skip_dangling: bool) -> list[XmlElement]:
    out = []
    for ref in ids:
        target = index.get(ref)
        if target is None:
            if not skip_dangling:
                raise DanglingIdRef(el.element_type, attr, ref)
            _warn(f"{el.path}: {attr} refers to unknown id {ref!r}; skipped")
            continue
        out.append(target)
    return out


def ref_attr_significance(
    dtd: Dtd,
    doc: XmlDocument,
    overrides: Mapping[tuple[str, str], Significance] | None = None,
    dangling: str = "fail",
) -> SignificanceTable:
    """Decide for each reference attribute whether its name is significant.

    An attribute named unlike every element type is safely significant. When
    an element type of that name exists, the document is scanned: the
    attribute is insignificant only if every id it carries points to an
    element of that type. Scanned verdicts ask for human confirmation;
    ``overrides`` (the confirmations) always win.
    """
    overrides = dict(overrides or {})
    index = build_id_index(dtd, doc)
    by_type: dict[str, list[XmlElement]] = {}
    for el in doc.elements():
        by_type.setdefault(el.element_type, []).append(el)

    table: SignificanceTable = {}
    for etype, decl in dtd.decls.items():
        for attr, kind in decl.attributes:
            if not kind.is_reference:
                continue
            key = (etype, attr)
            if key in overrides:
                table[key] = SignificanceEntry(overrides.pop(key), SignificanceSource.HUMAN_OVERRIDE)
                continue
            if attr not in dtd.decls:
                table[key] = SignificanceEntry(Significance.SIGNIFICANT, SignificanceSource.AUTO_SAFE)
                continue
            echoes = True
            for el in by_type.get(etype, ()):
                if attr not in el.attributes:
                    continue
                targets = _resolve(ref_ids(el.attributes[attr], kind), index, el, attr,
                                   dangling == "skip")
                if any(t.element_type != attr for t in targets):
                    echoes = False
            verdict = Significance.INSIGNIFICANT if echoes else Significance.SIGNIFICANT
            table[key] = SignificanceEntry(verdict, SignificanceSource.AUTO_SCAN, True)
    for element, attr in overrides:
        dtd.warn(f"override for {element}/{attr} ignored: not a reference attribute")
    return table


def significance_report(table: SignificanceTable) -> str:
    lines = ["# reference attribute significance"]
    width = max((len(f"{e}/{a}") for e, a in table), default=0)
    pending = 0
    for (element, attr), entry in sorted(table.items()):
        mark = ""
        if entry.needs_confirmation:
            mark = "  NEEDS CONFIRMATION"
            pending += entry.verdict is Significance.INSIGNIFICANT
        lines.append(f"{element + '/' + attr:<{width}}  {entry.verdict.value:<13}  "
                     f"{entry.source.value}{mark}")
    lines.append(f"insignificant verdicts awaiting confirmation: {pending}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Stage 1: element type classification
# ---------------------------------------------------------------------------

class ElementClass(str, enum.Enum):
    OBJECT = "object"
    CONNECTOR = "connector"
    PROPERTY = "property"


def classify_element_types(dtd: Dtd, sig: SignificanceTable) -> dict[str, ElementClass]:
    """Classify every declared element type as object, connector or property."""
    info = {}
    for etype, decl in dtd.decls.items():
        refs = decl.reference_attributes
        try:
            verdicts = [sig[(etype, a)].significant for a in refs]
        except KeyError as exc:
            raise UnclassifiedType(f"no significance verdict for {etype}/{exc.args[0][1]}") from exc
        info[etype] = (
            dtd.children_of(etype),
            decl.id_attribute is not None,
            bool(refs),
            any(verdicts),
            decl.plain_only,
        )

    result: dict[str, ElementClass] = {}

    def is_property(t: str) -> bool:
        # undeclared child types count as all-plain leaves
        return result.get(t) is ElementClass.PROPERTY or t not in info

    # base rules
    for etype, (children, has_id, has_refs, any_sig, plain_only) in info.items():
        rule1 = not children and plain_only
        rule2 = has_id or any_sig
        rule3 = not children and not has_id and has_refs and not any_sig
        if rule2 and rule3:
            raise ConflictingRules(f"{etype}: object and connector base rules both apply")
        if rule1:
            result[etype] = ElementClass.PROPERTY
        elif rule2:
            result[etype] = ElementClass.OBJECT
        elif rule3:
            result[etype] = ElementClass.CONNECTOR

    # recursive property rule, to fixpoint
    changed = True
    while changed:
        changed = False
        for etype, (children, _, _, _, plain_only) in info.items():
            if etype not in result and plain_only and all(is_property(c) for c in children):
                result[etype] = ElementClass.PROPERTY
                changed = True

    # generalized connector rule, then the rest are objects
    for etype, (children, has_id, has_refs, any_sig, _) in info.items():
        if etype in result:
            continue
        if not has_id and has_refs and not any_sig and all(is_property(c) for c in children):
            result[etype] = ElementClass.CONNECTOR
        else:
            result[etype] = ElementClass.OBJECT
    return result


# ---------------------------------------------------------------------------
# Stage 2: graph construction
# ---------------------------------------------------------------------------

def pcdata_lift(element: XmlElement, attribute: str = "text") -> XmlElement:
    """Move mixed character data into a synthetic plain attribute.

    Only applies when the element also has attributes or sub-elements; a
    text-only element is returned unchanged (it becomes a leaf property).
    """
    text = element.pcdata.strip()
    if not text or not (element.attributes or element.children):
        return element
    if attribute in element.attributes:
        raise NameClash(f"<{element.element_type}> already has an attribute {attribute!r}; "
                        f"choose another name for character data")
    lifted = copy.copy(element)
    lifted.attributes = {**element.attributes, attribute: text}
    lifted.pcdata = ""
    return lifted


def node_id(el: XmlElement) -> str:
    return f"{el.element_type}#{el.index}"


class _XmlBuilder:
    def __init__(self, doc: XmlDocument, dtd: Dtd, classes: Mapping[str, ElementClass],
                 sig: SignificanceTable, config: BuildConfig):
        self.doc = doc
        self.dtd = dtd
        self.classes = classes
        self.sig = sig
        self.config = config
        self.policy = config.weight_policy()
        self.index = build_id_index(dtd, doc)
        self.nodes: dict[str, dict] = {}
        self.edges: list[Edge] = []
        self._edge_keys: set[tuple[str, str, EdgeRole]] = set()
        self.dropped: str | None = None

    def cls(self, el: XmlElement) -> ElementClass:
        try:
            klass = self.classes[el.element_type]
        except KeyError:
            raise UnclassifiedType(f"element type {el.element_type!r} has no classification") from None
        # the document itself is always represented, even when all of it is properties
        if klass is ElementClass.PROPERTY and el is self.doc.root:
            return ElementClass.OBJECT
        return klass

    def plain(self, el: XmlElement, attr: str) -> bool:
        kind = self.dtd.decls[el.element_type].attr_kind(attr) if el.element_type in self.dtd.decls else None
        return kind is None or kind is AttrKind.PLAIN

    def property_tree(self, el: XmlElement) -> PropertyNode:
        el = pcdata_lift(el, self.config.pcdata_attribute)
        if not el.attributes and not el.children:
            return PropertyNode(el.element_type, el.pcdata.strip())
        children = [PropertyNode(a, v) for a, v in el.attributes.items() if self.plain(el, a)]
        children.extend(self.property_tree(c) for c in el.children)
        if not children:
            return PropertyNode(el.element_type, el.pcdata.strip())
        return PropertyNode(el.element_type, None, tuple(children))

    def is_container(self, root: XmlElement) -> bool:
        return (self.config.drop_container_root
                and self.cls(root) is ElementClass.OBJECT
                and not root.attributes
                and not root.pcdata.strip()
                and bool(root.children)
                and all(self.cls(c) is ElementClass.OBJECT for c in root.children))

    def add_edge(self, source: str, target: str, role: EdgeRole) -> None:
        if source == target:
            _warn(f"{source}: reference to itself, no edge created")
            return
        key = (source, target, role)
        if key in self._edge_keys:
            return
        self._edge_keys.add(key)
        self.edges.append(Edge(source, target, Orientation.ORIGINAL, role, self.policy.weight(role)))

    def visit(self, el: XmlElement) -> None:
        klass = self.cls(el)
        if klass is ElementClass.PROPERTY:
            return
        nid = node_id(el)
        lifted = pcdata_lift(el, self.config.pcdata_attribute)
        decl = self.dtd.decls[el.element_type]
        props = [PropertyNode(a, v) for a, v in lifted.attributes.items() if self.plain(el, a)]
        for child in el.children:
            child_class = self.cls(child)
            if child_class is ElementClass.PROPERTY:
                props.append(self.property_tree(child))
            elif child_class is ElementClass.OBJECT:
                self.add_edge(nid, node_id(child), EdgeRole.HIERARCHICAL)
            else:
                self.add_edge(nid, node_id(child), EdgeRole.REFERENCE)
        kind = NodeKind.OBJECT if klass is ElementClass.OBJECT else NodeKind.CONNECTOR
        self.nodes[nid] = {"kind": kind, "type": el.element_type, "props": props, "path": el.path}

        for attr in decl.reference_attributes:
            if attr not in el.attributes:
                continue
            kind_ = decl.attr_kind(attr)
            assert kind_ is not None
            targets = _resolve(ref_ids(el.attributes[attr], kind_), self.index, el, attr,
                               self.config.skip_dangling)
            target_ids = []
            for t in targets:
                if self.cls(t) is ElementClass.PROPERTY:
                    raise TargetIsProperty(f"{el.path}: {attr} refers to <{t.element_type}> "
                                           f"which is classified as a property")
                if node_id(t) == self.dropped:
                    _warn(f"{el.path}: {attr} refers to the document container; skipped")
                    continue
                target_ids.append(node_id(t))
            if not target_ids:
                continue
            if not self.sig[(el.element_type, attr)].significant:
                for t in target_ids:
                    self.add_edge(nid, t, EdgeRole.REFERENCE)
                continue
            cid = f"{nid}/{attr}"
            self.nodes[cid] = {"kind": NodeKind.CONNECTOR, "type": attr, "props": [],
                               "path": f"{el.path}/@{attr}"}
            self.add_edge(nid, cid, EdgeRole.REFERENCE)
            for t in target_ids:
                self.add_edge(cid, t, EdgeRole.REFERENCE)

    def build(self) -> DataGraph:
        root = self.doc.root
        if self.is_container(root):
            self.dropped = node_id(root)
        for el in self.doc.elements():
            if node_id(el) != self.dropped:
                self.visit(el)
        if self.dropped:
            self.edges = [e for e in self.edges if e.source != self.dropped]

        has_out = {e.source for e in self.edges}
        nodes = []
        for nid, d in self.nodes.items():
            kind = d["kind"]
            if kind is NodeKind.CONNECTOR and nid not in has_out:
                _warn(f"{d['path']}: connector element references nothing; kept as an object")
                kind = NodeKind.OBJECT
            name = (choose_object_name(d["props"], self.config.name_attributes)
                    if kind is NodeKind.OBJECT else None)
            nodes.append(GraphNode(nid, kind, d["type"], name, tuple(d["props"]), d["path"]))
        graph = DataGraph(nodes, self.edges, self.policy)
        return add_opposite_edges(graph, {EdgeRole.REFERENCE})


def build_graph(
    doc: XmlDocument,
    dtd: Dtd,
    classes: Mapping[str, ElementClass],
    sig: SignificanceTable,
    config: BuildConfig | None = None,
) -> DataGraph:
    return _XmlBuilder(doc, dtd, classes, sig, config or BuildConfig()).build()


@dataclass
class XmlBuild:
    graph: DataGraph
    dtd: Dtd
    significance: SignificanceTable
    classes: dict[str, ElementClass]

    def report(self) -> str:
        return significance_report(self.significance)


def transform_xml(
    xml_text: str,
    dtd_text: str | None = None,
    config: BuildConfig | None = None,
    overrides: Mapping[tuple[str, str], Significance] | None = None,
) -> XmlBuild:
    """Full pipeline: parse, decide significance, classify, construct.

    Without ``dtd_text`` the document's internal subset is used.
    """
    config = config or BuildConfig()
    doc = parse_xml(xml_text)
    if dtd_text is None:
        if doc.internal_subset is None:
            raise XmlTransformError("no DTD given and the document has no internal subset")
        dtd_text = doc.internal_subset
    dtd = reconcile(parse_dtd(dtd_text, root=doc.doctype), doc)
    sig = ref_attr_significance(dtd, doc, overrides, config.dangling)
    classes = classify_element_types(dtd, sig)
    graph = build_graph(doc, dtd, classes, sig, config)
    return XmlBuild(graph, dtd, sig, classes)
