"""Object-connector-property data graphs built from relational, XML and RDF sources."""

from .config import BuildConfig
from .model import (DataGraph, Edge, EdgeRole, GraphNode, NodeKind, Orientation, PropertyNode,
                    WeightPolicy, add_opposite_edges, validate)
from .search import DedupConfig, Query, enumerate_answers

__version__ = "0.1.0"

__all__ = [
    "BuildConfig",
    "DataGraph",
    "DedupConfig",
    "Edge",
    "EdgeRole",
    "GraphNode",
    "NodeKind",
    "Orientation",
    "PropertyNode",
    "Query",
    "WeightPolicy",
    "add_opposite_edges",
    "enumerate_answers",
    "validate",
]
