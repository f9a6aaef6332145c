"""A small DTD reader: element content models and attribute kinds.

Only what the XML transform needs is kept: for each element type the set of
child element types mentioned in its content model, whether it admits
character data, and its attributes classified as plain, ID, IDREF or IDREFS.
Entity and notation declarations are skipped with a warning; parameter
entities are not expanded.
"""

from __future__ import annotations

import bisect
import enum
import logging
import re
from dataclasses import dataclass, field

from .errors import DtdSyntaxError, DuplicateIdAttr

log = logging.getLogger(__name__)


class AttrKind(str, enum.Enum):
    PLAIN = "plain"
    ID = "id"
    IDREF = "idref"
    IDREFS = "idrefs"

    @property
    def is_reference(self) -> bool:
        return self in (AttrKind.IDREF, AttrKind.IDREFS)


@dataclass
class ElementDecl:
    element_type: str
    child_types: tuple[str, ...] = ()
    has_pcdata: bool = False
    attributes: list[tuple[str, AttrKind]] = field(default_factory=list)
    any_content: bool = False
    # False for declarations synthesized from ATTLISTs or from the document
    declared: bool = True

    def attr_kind(self, name: str) -> AttrKind | None:
        return next((k for a, k in self.attributes if a == name), None)

    @property
    def id_attribute(self) -> str | None:
        return next((a for a, k in self.attributes if k is AttrKind.ID), None)

    @property
    def reference_attributes(self) -> list[str]:
        return [a for a, k in self.attributes if k.is_reference]

    @property
    def plain_only(self) -> bool:
        return all(k is AttrKind.PLAIN for _, k in self.attributes)


@dataclass
class Dtd:
    decls: dict[str, ElementDecl] = field(default_factory=dict)
    root: str | None = None
    warnings: list[str] = field(default_factory=list)

    def __contains__(self, element_type: str) -> bool:
        return element_type in self.decls

    def __getitem__(self, element_type: str) -> ElementDecl:
        return self.decls[element_type]

    def children_of(self, element_type: str) -> tuple[str, ...]:
        decl = self.decls[element_type]
        if decl.any_content:
            return tuple(t for t in self.decls if t != element_type)
        return decl.child_types

    def warn(self, message: str) -> None:
        self.warnings.append(message)
        log.warning(message)


_NAME = re.compile(r"[^\W\d][\w.\-:]*\Z")
_TOKEN = re.compile(r"""
    \s*(?:
      (?P<str>"[^"]*"|'[^']*')
    | (?P<pe>%[^;\s]+;)
    | (?P<hash>\#[A-Za-z]+)
    | (?P<punct>[()|,?*+])
    | (?P<name>[^\s()|,?*+"'%#]+)
    )""", re.VERBOSE)

_PLAIN_TYPES = {"CDATA", "ENTITY", "ENTITIES", "NMTOKEN", "NMTOKENS"}
_REF_TYPES = {"ID": AttrKind.ID, "IDREF": AttrKind.IDREF, "IDREFS": AttrKind.IDREFS}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.newlines = [i for i, ch in enumerate(text) if ch == "\n"]
        self.dtd = Dtd()
        self.pending_attrs: dict[str, list[tuple[str, AttrKind]]] = {}

    def where(self, pos: int) -> tuple[int, int]:
        line = bisect.bisect_left(self.newlines, pos)
        start = self.newlines[line - 1] + 1 if line else 0
        return line + 1, pos - start + 1

    def error(self, message: str, pos: int) -> DtdSyntaxError:
        return DtdSyntaxError(message, *self.where(pos))

    def tokens(self, body: str, offset: int) -> list[tuple[str, str, int]]:
        out = []
        pos = 0
        while pos < len(body):
            if body[pos:].strip() == "":
                break
            m = _TOKEN.match(body, pos)
            if not m or m.end() == pos:
                raise self.error(f"unexpected character {body[pos]!r}", offset + pos)
            kind = m.lastgroup
            assert kind is not None
            value = m.group(kind)
            out.append((kind, value, offset + m.start(kind)))
            pos = m.end()
        return out

    def declaration_end(self, start: int) -> int:
        quote = None
        for i in range(start, len(self.text)):
            ch = self.text[i]
            if quote:
                if ch == quote:
                    quote = None
            elif ch in "\"'":
                quote = ch
            elif ch == ">":
                return i
        raise self.error("unterminated declaration", start)

    def parse(self) -> Dtd:
        text = self.text
        pos = 0
        while pos < len(text):
            if text[pos].isspace():
                pos += 1
                continue
            if text.startswith("<!--", pos):
                end = text.find("-->", pos + 4)
                if end < 0:
                    raise self.error("unterminated comment", pos)
                pos = end + 3
            elif text.startswith("<?", pos):
                end = text.find("?>", pos + 2)
                if end < 0:
                    raise self.error("unterminated processing instruction", pos)
                pos = end + 2
            elif text.startswith("<![", pos):
                end = text.find("]]>", pos)
                if end < 0:
                    raise self.error("unterminated conditional section", pos)
                self.dtd.warn("line %d: conditional section skipped" % self.where(pos)[0])
                pos = end + 3
            elif text[pos] == "%":
                m = re.compile(r"%[^;\s]+;").match(text, pos)
                if not m:
                    raise self.error("malformed parameter-entity reference", pos)
                self.dtd.warn(f"line {self.where(pos)[0]}: parameter entity {m.group()} not expanded")
                pos = m.end()
            elif text.startswith("<!", pos):
                m = re.compile(r"<!([A-Z]+)").match(text, pos)
                if not m:
                    raise self.error("malformed markup declaration", pos)
                end = self.declaration_end(m.end())
                keyword = m.group(1)
                body_start = m.end()
                body = text[body_start:end]
                if keyword == "ELEMENT":
                    self.element(body, body_start)
                elif keyword == "ATTLIST":
                    self.attlist(body, body_start)
                elif keyword in ("ENTITY", "NOTATION"):
                    self.dtd.warn(f"line {self.where(pos)[0]}: {keyword} declaration ignored")
                else:
                    raise self.error(f"unknown declaration <!{keyword}", pos)
                pos = end + 1
            else:
                raise self.error(f"unexpected text {text[pos:pos + 20]!r}", pos)
        self.finish()
        return self.dtd

    def name(self, token: tuple[str, str, int], what: str) -> str:
        kind, value, pos = token
        if kind != "name" or not _NAME.match(value):
            raise self.error(f"expected {what}, found {value!r}", pos)
        return value

    def element(self, body: str, offset: int) -> None:
        toks = self.tokens(body, offset)
        if not toks:
            raise self.error("ELEMENT declaration without a name", offset)
        name = self.name(toks[0], "element name")
        rest = toks[1:]
        if not rest:
            raise self.error(f"ELEMENT {name} has no content specification", offset)
        decl = ElementDecl(name)
        if len(rest) == 1 and rest[0][1] in ("EMPTY", "ANY"):
            decl.any_content = rest[0][1] == "ANY"
        else:
            decl.child_types, decl.has_pcdata = self.content_model(rest, name)
        if name in self.dtd.decls:
            raise self.error(f"element type {name!r} declared twice", offset)
        self.dtd.decls[name] = decl

    def content_model(self, toks, element: str) -> tuple[tuple[str, ...], bool]:
        if toks[0][1] != "(":
            raise self.error(f"content model of {element} must start with '('", toks[0][2])
        depth = 0
        children: list[str] = []
        pcdata = False
        closed_at = None
        for i, (kind, value, pos) in enumerate(toks):
            if closed_at is not None:
                if kind == "punct" and value in "?*+" and i == closed_at + 1:
                    continue
                raise self.error(f"unexpected {value!r} after content model", pos)
            if value == "(":
                depth += 1
            elif value == ")":
                depth -= 1
                if depth < 0:
                    raise self.error("unbalanced ')'", pos)
                if depth == 0:
                    closed_at = i
            elif kind == "hash":
                if value != "#PCDATA":
                    raise self.error(f"unexpected {value} in content model", pos)
                pcdata = True
            elif kind == "pe":
                self.dtd.warn(f"line {self.where(pos)[0]}: parameter entity {value} in "
                              f"content model of {element} not expanded")
            elif kind == "name":
                child = self.name((kind, value, pos), "element name")
                if child not in children:
                    children.append(child)
            elif kind == "punct":
                continue
            else:
                raise self.error(f"unexpected {value!r} in content model", pos)
        if depth != 0:
            raise self.error(f"unbalanced '(' in content model of {element}", toks[0][2])
        return tuple(children), pcdata

    def attlist(self, body: str, offset: int) -> None:
        toks = self.tokens(body, offset)
        if not toks:
            raise self.error("ATTLIST declaration without an element name", offset)
        element = self.name(toks[0], "element name")
        attrs = self.pending_attrs.setdefault(element, [])
        i = 1
        while i < len(toks):
            attr = self.name(toks[i], "attribute name")
            i += 1
            if i >= len(toks):
                raise self.error(f"attribute {attr} has no type", toks[i - 1][2])
            kind, value, pos = toks[i]
            if value == "(" or value == "NOTATION":
                if value == "NOTATION":
                    i += 1
                close = next((j for j in range(i, len(toks)) if toks[j][1] == ")"), None)
                if close is None or toks[i][1] != "(":
                    raise self.error(f"malformed enumerated type for {attr}", pos)
                attr_kind = AttrKind.PLAIN
                i = close + 1
            elif value in _PLAIN_TYPES:
                attr_kind = AttrKind.PLAIN
                i += 1
            elif value in _REF_TYPES:
                attr_kind = _REF_TYPES[value]
                i += 1
            else:
                raise self.error(f"unknown attribute type {value!r} for {attr}", pos)
            if i >= len(toks):
                raise self.error(f"attribute {attr} has no default declaration", pos)
            kind, value, pos = toks[i]
            if kind == "hash":
                if value not in ("#REQUIRED", "#IMPLIED", "#FIXED"):
                    raise self.error(f"unknown default {value}", pos)
                i += 1
                if value == "#FIXED":
                    if i >= len(toks) or toks[i][0] != "str":
                        raise self.error(f"#FIXED without a value for {attr}", pos)
                    i += 1
            elif kind == "str":
                i += 1
            else:
                raise self.error(f"expected default declaration for {attr}, found {value!r}", pos)

            if any(a == attr for a, _ in attrs):
                self.dtd.warn(f"attribute {element}/{attr} declared more than once; first wins")
                continue
            if attr_kind is AttrKind.ID:
                first = next((a for a, k in attrs if k is AttrKind.ID), None)
                if first is not None:
                    raise DuplicateIdAttr(element, first, attr)
            attrs.append((attr, attr_kind))

    def finish(self) -> None:
        for element, attrs in self.pending_attrs.items():
            decl = self.dtd.decls.get(element)
            if decl is None:
                self.dtd.warn(f"ATTLIST for undeclared element type {element!r}")
                decl = self.dtd.decls[element] = ElementDecl(element, declared=False)
            decl.attributes = attrs
        for decl in list(self.dtd.decls.values()):
            for child in decl.child_types:
                if child not in self.dtd.decls:
                    self.dtd.warn(f"element type {child!r} (child of {decl.element_type!r}) "
                                  f"is not declared")


def parse_dtd(text: str, root: str | None = None) -> Dtd:
    """Parse a DTD (external file or internal subset text)."""
    dtd = _Parser(text).parse()
    dtd.root = root
    return dtd
