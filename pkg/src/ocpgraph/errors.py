"""Exception and warning types shared by the transforms, the search engine and the CLI."""

from __future__ import annotations


class OcpGraphError(Exception):
    """Base class for every error raised by this package."""


class DataGraphWarning(UserWarning):
    """Recoverable data problem (skipped reference, undeclared attribute, ...)."""


# -- graph documents ---------------------------------------------------------

class GraphFormatError(OcpGraphError, ValueError):
    """A graph document is malformed or violates the document schema."""


# -- relational input --------------------------------------------------------

class RdbError(OcpGraphError):
    pass


class SchemaError(RdbError, ValueError):
    pass


class UnknownTarget(SchemaError):
    def __init__(self, relation: str, target: str):
        self.relation = relation
        self.target = target
        super().__init__(
            f"relation {relation!r} has a foreign key to unknown relation {target!r}"
        )


class UnknownRelation(RdbError, ValueError):
    def __init__(self, relation: str):
        self.relation = relation
        super().__init__(f"rows given for undeclared relation {relation!r}")


class RowError(RdbError, ValueError):
    """A row does not fit its relation (wrong attributes, duplicate key)."""


class DanglingReference(RdbError, LookupError):
    def __init__(self, relation: str, row: dict, fk_attrs: tuple[str, ...]):
        self.relation = relation
        self.row = row
        self.fk_attrs = fk_attrs
        values = ", ".join(f"{a}={row.get(a)!r}" for a in fk_attrs)
        super().__init__(
            f"{relation}: foreign key ({', '.join(fk_attrs)}) with {values} "
            f"matches no target row"
        )


# -- XML / DTD input ---------------------------------------------------------

class XmlTransformError(OcpGraphError):
    pass


class DtdSyntaxError(XmlTransformError, ValueError):
    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class DuplicateIdAttr(XmlTransformError, ValueError):
    def __init__(self, element: str, first: str, second: str):
        self.element = element
        super().__init__(
            f"element type {element!r} declares two ID attributes: {first!r} and {second!r}"
        )


class DuplicateId(XmlTransformError, ValueError):
    pass


class DanglingIdRef(XmlTransformError, LookupError):
    def __init__(self, element: str, attribute: str, ref: str):
        self.element = element
        self.attribute = attribute
        self.ref = ref
        super().__init__(
            f"<{element}> attribute {attribute!r} refers to unknown id {ref!r}"
        )


class NameClash(XmlTransformError, ValueError):
    pass


class UnclassifiedType(XmlTransformError, LookupError):
    pass


class TargetIsProperty(XmlTransformError, ValueError):
    pass


class ConflictingRules(XmlTransformError, AssertionError):
    pass


# -- RDF input ---------------------------------------------------------------

class RdfError(OcpGraphError):
    pass


class EmptyIri(RdfError, ValueError):
    pass


class NTriplesSyntaxError(RdfError, ValueError):
    def __init__(self, problems: list[tuple[int, str]]):
        self.problems = problems
        lines = "; ".join(f"line {n}: {msg}" for n, msg in problems[:10])
        more = f" (+{len(problems) - 10} more)" if len(problems) > 10 else ""
        super().__init__(f"{len(problems)} unparseable line(s): {lines}{more}")


# -- search ------------------------------------------------------------------

class SearchError(OcpGraphError):
    pass


class QueryError(SearchError, ValueError):
    pass


class NotASubtree(SearchError, ValueError):
    pass


class GraphTooLarge(SearchError):
    def __init__(self, budget: int):
        self.budget = budget
        super().__init__(f"search frontier exceeded the budget of {budget} partial trees")
