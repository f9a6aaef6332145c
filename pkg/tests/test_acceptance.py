"""Acceptance criteria, one test each, each reporting a PASS/FAIL line.

Run alone with ``pytest -m acceptance -s``; the lines are also repeated in
the terminal summary of any run that includes this module.
"""

from __future__ import annotations

from contextlib import contextmanager

import pytest

import test_properties
import test_search
from conftest import FIXTURES, ACCEPTANCE_RESULTS
from graphs import citations, mondial_snippet, single_border, two_borders
from ocpgraph.dtd import parse_dtd
from ocpgraph.model import EdgeRole, NodeKind, Orientation, PropertyNode, diff_graphs, validate
from ocpgraph.rdb import build_graph as build_rdb, load_database
from ocpgraph.rdf import fold_triples, parse_ntriples
from ocpgraph.search import (DedupConfig, Query, canonical_form, enumerate_answers, original_only,
                             top_answers)
from ocpgraph.xmlgraph import (ElementClass, classify_element_types, load_overrides, parse_xml,
                               ref_attr_significance, transform_xml)

pytestmark = pytest.mark.acceptance


@contextmanager
def criterion(number: int, title: str):
    try:
        yield
    except BaseException:
        line = f"FAIL criterion {number}: {title}"
        print(line)
        ACCEPTANCE_RESULTS.append(line)
        raise
    line = f"PASS criterion {number}: {title}"
    print(line)
    ACCEPTANCE_RESULTS.append(line)


def mondial_rdb():
    d = FIXTURES / "mondial_rdb"
    return build_rdb(load_database(d / "schema.json", d / "data"))


def mondial_xml():
    d = FIXTURES / "mondial_xml"
    return transform_xml((d / "mondial.xml").read_text(), (d / "mondial.dtd").read_text(),
                         None, load_overrides(d / "overrides.json"))


def school_xml(name: str):
    d = FIXTURES / "school"
    return transform_xml((d / f"{name}.xml").read_text(), (d / "school.dtd").read_text()).graph


def original_degree(graph, node_id):
    ins = [e for e in graph.in_edges(node_id) if e.is_original]
    outs = [e for e in graph.out_edges(node_id) if e.is_original]
    return len(ins), len(outs)


def test_criterion_1_mondial_rdb():
    with criterion(1, "Mondial RDB: 5 objects, 2 connectors, 6+6 edges, France economy and name"):
        g = mondial_rdb()
        assert validate(g) == []
        assert len(g.objects()) == 5
        conns = sorted(g.connectors(), key=lambda n: n.node_type)
        assert [c.node_type for c in conns] == ["river1", "river2"]
        for c in conns:
            assert c.properties == ()
            assert original_degree(g, c.id) == (1, 1)
        assert len(g.original_edges()) == 6 and len(g.opposite_edges()) == 6
        france = g.node("country:F")
        assert france.name == "France"
        assert france.property("economy") == PropertyNode(
            "economy", None, (PropertyNode("gdp", "$37,728"), PropertyNode("inflation", "1.7%")))
        originals = {(g.node(e.source).label(), g.node(e.target).label()) for e in g.original_edges()}
        assert originals == {
            ("Rhône Alpes (province)", "France (country)"),
            ("(confluence)", "river1"), ("river1", "Rhône (river)"),
            ("(confluence)", "river2"), ("river2", "Saône (river)"),
            ("(confluence)", "Rhône Alpes (province)"),
        }
        reverse = {(e.target, e.source) for e in g.opposite_edges()}
        assert reverse == {(e.source, e.target) for e in g.original_edges()}


def test_criterion_2_mondial_xml():
    with criterion(2, "Mondial XML differs from RDB in exactly the two stated ways"):
        rdb, xml = mondial_rdb(), mondial_xml().graph
        assert validate(xml) == []
        d = diff_graphs(rdb, xml)
        assert set(d.nodes_only_left) == {("connector", "river1", "", ()), ("connector", "river2", "", ())}
        assert dict(d.nodes_only_right) == {("connector", "rivers", "", ()): 1}

        def short(edges):
            return {(s[1] if not s[2] else s[2], t[1] if not t[2] else t[2]) for s, t in edges}
        assert short(d.edges_only_left) == {
            ("Rhône Alpes", "France"),
            ("confluence", "river1"), ("river1", "Rhône"),
            ("confluence", "river2"), ("river2", "Saône"),
        }
        assert short(d.edges_only_right) == {
            ("France", "Rhône Alpes"),
            ("confluence", "rivers"), ("rivers", "Rhône"), ("rivers", "Saône"),
        }
        (rivers,) = xml.connectors()
        assert original_degree(xml, rivers.id) == (1, 2)

        reverse = {(e.target, e.source, e.role) for e in xml.opposite_edges()}
        for e in xml.original_edges():
            mirrored = (e.source, e.target, e.role) in reverse
            if e.role is EdgeRole.HIERARCHICAL:
                assert not mirrored
            else:
                assert e.role is EdgeRole.REFERENCE and mirrored


def test_criterion_3_dtd_classification():
    with criterion(3, "Mondial DTD classification, stable under reversed declarations"):
        d = FIXTURES / "mondial_xml"
        doc = parse_xml((d / "mondial.xml").read_text())
        overrides = load_overrides(d / "overrides.json")
        text = (d / "mondial.dtd").read_text()

        def classify(dtd_text):
            dtd = parse_dtd(dtd_text)
            return classify_element_types(dtd, ref_attr_significance(dtd, doc, overrides))

        classes = classify(text)
        objects = {t for t, c in classes.items() if c is ElementClass.OBJECT}
        properties = {t for t, c in classes.items() if c is ElementClass.PROPERTY}
        # the document element is an object as well
        assert objects == {"mondial", "country", "province", "river", "confluence"}
        assert {"economy", "gdp", "inflation"} <= properties
        leaves = {t for t, decl in parse_dtd(text).decls.items()
                  if not parse_dtd(text).children_of(t) and decl.plain_only}
        assert leaves <= properties
        assert properties == {"economy", "gdp", "inflation"} | leaves
        assert not any(c is ElementClass.CONNECTOR for c in classes.values())

        decls = [chunk for chunk in text.replace("\r", "").split("\n<!") if chunk.strip()]
        reversed_text = "\n".join(("<!" + c if not c.startswith("<!") else c) for c in reversed(decls))
        assert parse_dtd(reversed_text).decls.keys() == parse_dtd(text).decls.keys()
        assert list(parse_dtd(reversed_text).decls) != list(parse_dtd(text).decls)
        assert classify(reversed_text) == classes


def test_criterion_4_dedup_counts():
    with criterion(4, "dedup counts 1 / 2 and 1 / 1"):
        q = Query.of("Russia,Ukraine")
        assert len(top_answers(single_border(), q, dedup=DedupConfig("edges"))) == 1
        assert len(top_answers(two_borders(), q, dedup=DedupConfig("edges"))) == 2
        assert len(top_answers(two_borders(), q, dedup=DedupConfig("types"))) == 1
        papers = Query.of("Paper A,Paper B")
        assert len(top_answers(citations(), papers,
                               dedup=DedupConfig("types", {"cite": "cited_by"}))) == 1


def _first(graph, keywords):
    return next(enumerate_answers(graph, Query.of(keywords)))


def test_criterion_5_answer_sizes():
    with criterion(5, "student/lecturer answer sizes 3, 5, 3, 4, 4"):
        d = FIXTURES / "school"
        ternary = build_rdb(load_database(d / "ternary.json"))
        binary = build_rdb(load_database(d / "binary.json"))
        student_lecturer = Query.of("Student,Lecturer")

        t = next(enumerate_answers(ternary, student_lecturer))
        assert len(t) == 3 and not t.uses_opposite()
        assert ternary.node(t.root).node_type == "enrolled"

        answers = top_answers(binary, student_lecturer)
        assert answers and all(a.uses_opposite() for a in answers)
        b = answers[0]
        assert len(b) == 5
        assert {e.orientation for e in b.edges} == {Orientation.ORIGINAL, Orientation.OPPOSITE}

        base = school_xml("base")
        x = next(enumerate_answers(base, student_lecturer))
        assert len(x) == 3 and not x.uses_opposite()
        assert {base.node(n).name for n in x.nodes} >= {"Smith", "Ullman"}

        course = school_xml("course_lecturer")
        jv = _first(course, "Jones,Vardi")
        assert len(jv) == 4 and not jv.uses_opposite()
        assert course.node(jv.root).name == "DB"

        sections = school_xml("sections")
        us = _first(sections, "Ullman,Smith")
        assert len(us) == 4 and not us.uses_opposite()
        assert sections.node(us.root).node_type == "section"


def test_criterion_6_opposite_edges_needed():
    with criterion(6, "Dnepr/Don needs opposite edges; (b) first, (c) and (d) present"):
        g = mondial_snippet()
        q = Query.of("Dnepr,Don")
        assert top_answers(original_only(g), q) == []

        def edge(s, t):
            return next(e for e in g.edges if e.source == s and e.target == t)
        tree_b = ("russia", [edge("russia", "dnepr"), edge("russia", "don")])
        tree_c = ("russia", [edge("russia", "dnepr"), edge("russia", "located_a"), edge("located_a", "don")])
        tree_d = ("ukraine", [edge("ukraine", "dnepr"), edge("ukraine", "border9"),
                              edge("border9", "russia"), edge("russia", "don")])
        for mode in ("edges", "types"):
            dedup = DedupConfig(mode)
            answers = top_answers(g, q, dedup=dedup)
            keys = [canonical_form(a, dedup, g) for a in answers]
            # (b) shares its undirected edges with the cheaper Dnepr -> Russia ~> Don,
            # which is what gets reported for that key
            assert keys[0] == canonical_form(tree_b, dedup, g)
            assert len(answers[0]) == 3
            assert canonical_form(tree_c, dedup, g) in keys
            assert canonical_form(tree_d, dedup, g) in keys
            assert answers[0].total_weight == min(a.total_weight for a in answers)


def test_criterion_7_oracle_equivalence():
    with criterion(7, "enumeration equals brute force on 200 random graphs"):
        test_search.test_enumeration_matches_brute_force()


def test_criterion_8_invariant_suites():
    with criterion(8, "transform outputs valid, round-trip, idempotent opposites (500 each)"):
        test_properties.test_rdb_graphs_are_valid()
        test_properties.test_xml_graphs_are_valid()
        test_properties.test_rdf_graphs_are_valid()


def test_criterion_9_rdf_sketch():
    with criterion(9, "RDF chain folds to one node; literal conservation and order independence"):
        triples = parse_ntriples(
            '<http://x.org/s1> <http://x.org/p1> <http://x.org/s2> .\n'
            '<http://x.org/s2> <http://x.org/p2> "lit" .\n')
        g = fold_triples(triples)
        (node,) = g.nodes.values()
        assert node.kind is NodeKind.OBJECT and not g.edges
        assert node.properties == (PropertyNode("p1", None, (PropertyNode("p2", "lit"),)),)
        test_properties.test_rdf_literal_conservation_and_order()
