"""Graphviz DOT rendering.

Objects are plain boxes labelled ``name (type)``, explicit connectors are
rounded boxes labelled with their type, and opposite edges are dashed.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import DataGraph, Edge, GraphNode, PropertyNode


@dataclass(frozen=True)
class DotOptions:
    graph_name: str = "datagraph"
    show_properties: bool = False
    show_weights: bool = False
    rankdir: str | None = None


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def _property_lines(prop: PropertyNode, depth: int) -> list[str]:
    pad = "    " * depth
    head = f"{pad}{prop.name}" + (f" : {prop.value}" if prop.value is not None else "")
    lines = [head]
    for child in prop.children:
        lines.extend(_property_lines(child, depth + 1))
    return lines


def _node_label(node: GraphNode, options: DotOptions) -> str:
    label = node.label()
    if options.show_properties and node.properties:
        lines = [label]
        for prop in node.properties:
            lines.extend(_property_lines(prop, 1))
        # left-justified multi-line label
        return "\\l".join(_quote(line)[1:-1] for line in lines) + "\\l"
    return _quote(label)[1:-1]


def to_dot(graph: DataGraph, options: DotOptions | None = None) -> str:
    options = options or DotOptions()
    out = [f"digraph {_quote(options.graph_name)} {{"]
    if options.rankdir:
        out.append(f"  rankdir={options.rankdir};")
    out.append("  node [shape=box];")
    for node_id in sorted(graph.nodes):
        node = graph.node(node_id)
        attrs = ["shape=box"]
        if node.is_connector:
            attrs.append('style="rounded"')
        attrs.append(f'label="{_node_label(node, options)}"')
        out.append(f"  {_quote(node_id)} [{', '.join(attrs)}];")
    for edge in sorted(graph.edges, key=Edge.sort_key):
        attrs = []
        if edge.is_opposite:
            attrs.append("style=dashed")
        if options.show_weights:
            attrs.append(f'label="{edge.weight:g}"')
        suffix = f" [{', '.join(attrs)}]" if attrs else ""
        out.append(f"  {_quote(edge.source)} -> {_quote(edge.target)}{suffix};")
    out.append("}")
    return "\n".join(out) + "\n"
