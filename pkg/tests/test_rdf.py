import pytest

from ocpgraph.config import RDF_TYPE, RDFS_LABEL, BuildConfig
from ocpgraph.errors import EmptyIri, NTriplesSyntaxError
from ocpgraph.model import EdgeRole, PropertyNode, validate
from ocpgraph.rdf import Literal, Triple, fold_triples, label_of, parse_ntriples

X = "http://x.org/"


def t(s, p, o):
    return Triple(X + s, X + p, o if isinstance(o, Literal) else X + o)


class TestLabels:
    @pytest.mark.parametrize("iri, label", [
        ("http://www.w3.org/2000/10/swap/pim/contact#fullName", "full name"),
        ("http://x.org/name", "name"),
        ("http://x.org/onto/hasCapitalCity", "has capital city"),
        ("http://x.org/onto/has_capital_city", "has capital city"),
        ("http://x.org/onto/", "onto"),
        ("http://x.org/a#", "a"),
        ("http://x.org/HTTPServer", "http server"),
        ("_:b0", "b0"),
        ("urn:isbn:123", "urn:isbn:123"),
    ])
    def test_label(self, iri, label):
        assert label_of(iri) == label

    def test_empty(self):
        with pytest.raises(EmptyIri):
            label_of("")
        with pytest.raises(EmptyIri):
            Triple("", X + "p", X + "o")


class TestParser:
    def test_forms(self):
        text = "\n".join([
            "# comment",
            f"<{X}s> <{X}p> <{X}o> .",
            f'<{X}s> <{X}q> "a \\"quoted\\" \\u00e9" .',
            f'_:b1 <{X}q> "hello"@en .',
            f'<{X}s> <{X}r> "3"^^<http://www.w3.org/2001/XMLSchema#int> . # trailing',
            "",
            f"<{X}s> <{X}p> _:b1 .",
        ])
        triples = parse_ntriples(text)
        assert triples[0] == Triple(X + "s", X + "p", X + "o")
        assert triples[1].object == Literal('a "quoted" é')
        assert triples[2] == Triple("_:b1", X + "q", Literal("hello"))
        assert triples[3].object == Literal("3")
        assert triples[4].object == "_:b1"

    def test_reports_every_bad_line(self):
        text = f"<{X}s> <{X}p> .\n<{X}s> <{X}p> <{X}o> .\nnonsense\n<{X}s> <{X}p> \"\\q\" ."
        with pytest.raises(NTriplesSyntaxError) as info:
            parse_ntriples(text)
        assert [line for line, _ in info.value.problems] == [1, 3, 4]


class TestFold:
    def test_chain_nests(self):
        g = fold_triples([t("s1", "p1", "s2"), t("s2", "p2", Literal("lit"))])
        (node,) = g.nodes.values()
        assert node.id == X + "s1"
        assert node.properties == (PropertyNode("p1", None, (PropertyNode("p2", "lit"),)),)
        assert not g.edges

    def test_empty(self):
        g = fold_triples([])
        assert not g.nodes and not g.edges

    def test_shared_subject_stays(self):
        g = fold_triples([t("a", "knows", "s"), t("b", "knows", "s"), t("s", "age", Literal("3"))])
        assert len(g.nodes) == 3
        assert len(g.original_edges()) == 2 and len(g.opposite_edges()) == 2
        assert {e.role for e in g.edges} == {EdgeRole.RDF_LINK}
        assert validate(g) == []

    def test_two_level_nesting(self):
        g = fold_triples([t("a", "address", "addr"), t("addr", "geo", "pt"),
                          t("pt", "lat", Literal("1")), t("pt", "long", Literal("2"))])
        (node,) = g.nodes.values()
        assert node.properties == (PropertyNode("address", None, (
            PropertyNode("geo", None, (PropertyNode("lat", "1"), PropertyNode("long", "2"))),)),)

    def test_types_and_names(self):
        g = fold_triples([
            Triple(X + "f", RDF_TYPE, X + "Country"),
            Triple(X + "f", RDF_TYPE, X + "EuropeanUnionMember"),
            Triple(X + "f", RDFS_LABEL, Literal("France")),
            Triple(X + "p", RDFS_LABEL, Literal("Paris")),
            Triple(X + "p", X + "capitalOf", X + "f"),
        ])
        f = g.node(X + "f")
        assert f.node_type == "country, european union member" and f.name == "France"
        assert f.property("label").value == "France"
        assert g.node(X + "p").node_type == "resource"
        assert X + "Country" not in g.nodes

    def test_typed_subject_is_not_folded(self):
        g = fold_triples([t("a", "p", "b"), Triple(X + "b", RDF_TYPE, X + "Thing"), t("b", "q", Literal("v"))])
        assert len(g.nodes) == 2

    def test_unknown_object_becomes_bare_node(self):
        g = fold_triples([t("a", "p", "b"), t("c", "p", "b"), t("a", "name", Literal("A"))])
        assert g.node(X + "b").name == "b" and not g.node(X + "b").properties

    def test_self_loop_becomes_property(self):
        g = fold_triples([t("a", "sameAs", "a")])
        assert g.node(X + "a").property("same as").value == "a"
        assert not g.edges

    def test_cycle_stays_linked(self):
        g = fold_triples([t("a", "p", "b"), t("b", "p", "a")])
        assert len(g.nodes) == 2 and len(g.original_edges()) == 2 and not g.opposite_edges()

    def test_duplicates_collapse(self):
        triples = [t("a", "p", Literal("x"))] * 3
        (node,) = fold_triples(triples).nodes.values()
        assert len(node.properties) == 1

    def test_configurable_predicates(self):
        cfg = BuildConfig(type_predicates=(X + "kind",), name_predicates=(X + "title",))
        g = fold_triples([t("a", "kind", "Book"), t("a", "title", Literal("Dune"))], cfg)
        assert g.node(X + "a").node_type == "book" and g.node(X + "a").name == "Dune"
