import math

import pytest

from graphs import MONDIAL_SNIPPET_OPPOSITES, citations, conn, mondial_snippet, obj, plain, single_border, two_borders
from ocpgraph.model import (DataGraph, Edge, EdgeRole, GraphNode, NodeKind, Orientation, PropertyNode,
                            WeightPolicy, add_opposite_edges, diff_graphs, mirrored_connectors,
                            summarize, summary_line, validate)

ORIG, OPP = Orientation.ORIGINAL, Orientation.OPPOSITE
REF, FK = EdgeRole.REFERENCE, EdgeRole.FOREIGN_KEY


def invariants(graph):
    return {v.invariant for v in validate(graph)}


class TestPropertyNode:
    def test_needs_value_or_children(self):
        with pytest.raises(ValueError):
            PropertyNode("gdp")
        with pytest.raises(ValueError):
            PropertyNode("", "1")

    def test_equality_ignores_child_order(self):
        a = PropertyNode("economy", None, (PropertyNode("gdp", "1"), PropertyNode("inflation", "2")))
        b = PropertyNode("economy", None, (PropertyNode("inflation", "2"), PropertyNode("gdp", "1")))
        assert a == b and hash(a) == hash(b)
        assert a != PropertyNode("economy", None, (PropertyNode("gdp", "1"),))

    def test_walk_depth_get(self):
        p = PropertyNode("a", None, (PropertyNode("b", None, (PropertyNode("c", "x"),)),))
        assert [q.name for q in p.walk()] == ["a", "b", "c"]
        assert p.depth() == 3
        assert p.get("b").get("c").value == "x"
        assert p.get("zzz") is None

    def test_value_and_children_together(self):
        p = PropertyNode("note", "hello", (PropertyNode("date", "2020"),))
        assert p.value == "hello" and len(p.children) == 1


class TestGraphNode:
    def test_labels(self):
        assert obj("f", "country", "France").label() == "France (country)"
        assert obj("c", "confluence").label() == "(confluence)"
        assert conn("b", "border").label() == "border"

    def test_equality_ignores_property_order(self):
        a = GraphNode("x", NodeKind.OBJECT, "t", None, (PropertyNode("a", "1"), PropertyNode("b", "2")))
        b = GraphNode("x", NodeKind.OBJECT, "t", None, (PropertyNode("b", "2"), PropertyNode("a", "1")))
        assert a == b


class TestWeightPolicy:
    def test_defaults(self):
        p = WeightPolicy()
        assert p.weight(REF) == 1.0 and p.weight(REF, OPP) == 2.0

    @pytest.mark.parametrize("orig,opp", [(0, 1), (-1, 2), (2, 1), (1, math.inf), (math.nan, 1)])
    def test_rejects(self, orig, opp):
        with pytest.raises(ValueError):
            WeightPolicy(orig, opp)

    def test_override_per_role(self):
        p = WeightPolicy(overrides={FK: (3.0, 5.0)})
        assert p.weights(FK) == (3.0, 5.0)
        assert p.weights(REF) == (1.0, 2.0)


class TestDataGraph:
    def test_duplicate_ids(self):
        with pytest.raises(ValueError):
            DataGraph([obj("a", "t"), obj("a", "u")])

    def test_indexes(self):
        g = single_border()
        assert {e.target for e in g.out_edges("border")} == {"russia", "ukraine"}
        assert len(g.objects()) == 2 and len(g.connectors()) == 1

    def test_equality_ignores_edge_order(self):
        g = single_border()
        assert g == g.replace(edges=reversed(g.edges))
        assert g != g.replace(edges=g.edges[1:])


class TestOppositeEdges:
    def test_mondial_snippet_dashed_edges(self):
        g = mondial_snippet()
        assert {(e.source, e.target) for e in g.opposite_edges()} == MONDIAL_SNIPPET_OPPOSITES
        assert all(e.weight == 2.0 for e in g.opposite_edges())

    def test_twin_connectors_get_no_opposites(self):
        assert mirrored_connectors(two_borders()) == {"border9", "border10"}
        assert not two_borders().opposite_edges()

    def test_single_connector_gets_opposites(self):
        g = single_border()
        assert {(e.source, e.target) for e in g.opposite_edges()} == {("russia", "border"), ("border", "ukraine")}

    def test_different_types_are_not_twins(self):
        g = add_opposite_edges(citations())
        assert len(g.opposite_edges()) == 4

    def test_existing_reverse_original_suppresses(self):
        g = plain([obj("a", "t"), obj("b", "t")], [("a", "b"), ("b", "a")])
        assert add_opposite_edges(g) is g

    def test_idempotent(self):
        g = mondial_snippet()
        assert add_opposite_edges(g) is g

    def test_selector(self):
        g = DataGraph([obj("a", "t"), obj("b", "t"), obj("c", "t")],
                      [Edge("a", "b", ORIG, EdgeRole.HIERARCHICAL, 1.0), Edge("a", "c", ORIG, REF, 1.0)])
        h = add_opposite_edges(g, {REF})
        assert [(e.source, e.target) for e in h.opposite_edges()] == [("c", "a")]
        assert add_opposite_edges(g, lambda role: False) is g


class TestValidate:
    def test_fixtures_are_valid(self):
        for g in (mondial_snippet(), single_border(), two_borders(), citations()):
            assert validate(g) == []

    def test_connector_with_two_incoming(self):
        g = plain([obj("a", "t"), obj("b", "t"), obj("c", "t"), conn("x", "r")],
                  [("a", "x"), ("b", "x"), ("x", "c")])
        assert invariants(g) == {"connector-in-degree"}

    def test_connector_without_outgoing(self):
        g = plain([obj("a", "t"), conn("x", "r")], [("a", "x")])
        assert invariants(g) == {"connector-out-degree"}

    def test_root_connector_allowed(self):
        g = plain([obj("a", "t"), obj("b", "t"), conn("x", "r")], [("x", "a"), ("x", "b")])
        assert validate(g) == []

    def test_adjacent_connectors(self):
        g = plain([obj("a", "t"), conn("x", "r"), conn("y", "s"), obj("b", "t")],
                  [("a", "x"), ("x", "y"), ("y", "b")])
        assert "adjacent-connectors" in invariants(g)

    def test_named_connector(self):
        g = DataGraph([GraphNode("x", NodeKind.CONNECTOR, "r", "oops"), obj("a", "t")],
                      [Edge("x", "a", ORIG, REF, 1.0)])
        assert invariants(g) == {"connector-name"}

    def test_edge_problems(self):
        g = DataGraph([obj("a", "t"), obj("b", "t")], [
            Edge("a", "zzz", ORIG, REF, 1.0),
            Edge("a", "a", ORIG, REF, 1.0),
            Edge("a", "b", OPP, REF, 2.0),
            Edge("b", "a", ORIG, REF, 1.0),
        ])
        assert invariants(g) == {"dangling-endpoint", "self-loop"}
        g = DataGraph([obj("a", "t"), obj("b", "t")], [Edge("b", "a", OPP, REF, 2.0)])
        assert invariants(g) == {"opposite-mirror"}
        g = DataGraph([obj("a", "t"), obj("b", "t")],
                      [Edge("a", "b", ORIG, REF, 3.0), Edge("b", "a", OPP, REF, 2.0)])
        assert invariants(g) == {"opposite-weight"}

    def test_mixed_role_families(self):
        g = DataGraph([obj("a", "t"), obj("b", "t"), obj("c", "t")],
                      [Edge("a", "b", ORIG, REF, 1.0), Edge("a", "c", ORIG, FK, 1.0)])
        assert invariants(g) == {"role-family"}

    def test_empty_graph(self):
        assert validate(DataGraph()) == []


def test_summary_line():
    assert summary_line(mondial_snippet()) == (
        "nodes: 8 (objects 4, connectors 4); edges: 20 (original 12, opposite 8)")
    assert summarize(DataGraph())["edges"] == 0


def test_diff_ignores_ids():
    a = plain([obj("1", "t", "A"), obj("2", "t", "B")], [("1", "2")])
    b = plain([obj("x", "t", "A"), obj("y", "t", "B")], [("x", "y")])
    assert diff_graphs(a, b).empty
    c = plain([obj("x", "t", "A"), obj("y", "t", "B")], [("y", "x")])
    d = diff_graphs(a, c)
    assert sum(d.edges_only_left.values()) == 1 and sum(d.edges_only_right.values()) == 1
