"""Command line: build graphs from sources, query them, inspect them.

Exit status: 0 success, 2 the graph fails validation, 3 unreadable or
invalid input, 4 the search budget was exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from collections import Counter
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .config import BuildConfig
from .dot import DotOptions, to_dot
from .errors import DataGraphWarning, GraphTooLarge, OcpGraphError
from .model import DataGraph, EdgeRole, summarize, summary_line, validate
from .rdb import build_graph as build_rdb_graph, case_tally, load_database
from .rdf import transform_rdf
from .search import DedupConfig, Query, answers_to_jsonl, enumerate_answers
from .serialization import deserialize, serialize
from .xmlgraph import XmlBuild, load_overrides, transform_xml

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INPUT = 3
EXIT_BUDGET = 4


class InputError(Exception):
    """Bad command line input (reported with exit status 3)."""


def _err(message: str) -> None:
    print(message, file=sys.stderr)


def _parse_inverse(pairs: Sequence[str] | None) -> dict[str, str] | None:
    if not pairs:
        return None
    out = {}
    for pair in pairs:
        a, sep, b = pair.partition("=")
        if not sep or not a.strip() or not b.strip():
            raise InputError(f"--inverse expects TYPE=INVERSE, got {pair!r}")
        out[a.strip()] = b.strip()
    return out


def _config(args: argparse.Namespace) -> BuildConfig:
    try:
        base = BuildConfig.load(args.config) if args.config else BuildConfig()
        return base.with_updates(
            original_weight=getattr(args, "original_weight", None),
            opposite_weight=getattr(args, "opposite_weight", None),
            synthesize_names=getattr(args, "synthesize_names", None),
            dangling=getattr(args, "dangling", None),
            overrides=getattr(args, "overrides", None),
            dedup=getattr(args, "dedup", None),
            inverse=_parse_inverse(getattr(args, "inverse", None)),
            budget=getattr(args, "budget", None),
        )
    except OSError as exc:
        raise InputError(f"cannot read config {args.config}: {exc.strerror or exc}") from exc
    except (ValueError, TypeError) as exc:
        raise InputError(f"bad configuration: {exc}") from exc


def _read_text(path: str, what: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {what} {path}: {exc.strerror or exc}") from exc


def _write(path: str | None, data: str | bytes) -> None:
    if path in (None, "-"):
        if isinstance(data, bytes):
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
        else:
            sys.stdout.write(data)
        return
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(path, mode, **({} if isinstance(data, bytes) else {"encoding": "utf-8"})) as fh:
        fh.write(data)


def _load_graph(path: str) -> DataGraph:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read graph {path}: {exc.strerror or exc}") from exc
    return deserialize(data)


def _report_violations(graph: DataGraph) -> bool:
    problems = validate(graph)
    for v in problems:
        _err(f"violation: {v}")
    return not problems


def _finish_build(graph: DataGraph, args: argparse.Namespace, caught: list, extra: Sequence[str] = ()) -> int:
    for w in caught:
        _err(f"warning: {w.message}")
    if not _report_violations(graph):
        return EXIT_INVALID
    _write(args.out, serialize(graph))
    _err(summary_line(graph))
    for line in extra:
        _err(line)
    _err(f"warnings: {len(caught)}")
    return EXIT_OK


def _capture(fn: Callable[[], object]) -> tuple[object, list]:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DataGraphWarning)
        result = fn()
    return result, [w for w in caught if issubclass(w.category, DataGraphWarning)]


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_build_rdb(args: argparse.Namespace) -> int:
    config = _config(args)
    if not Path(args.schema).is_file():
        raise InputError(f"schema file not found: {args.schema}")
    if args.data and not Path(args.data).exists():
        raise InputError(f"data path not found: {args.data}")
    try:
        db = load_database(args.schema, args.data)
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.schema}: not valid JSON: {exc}") from exc
    graph, caught = _capture(lambda: build_rdb_graph(db, config))
    tally = case_tally(db.schema)
    cases = " ".join(f"{name}={int(case)}" for name, case in sorted(tally.items()))
    return _finish_build(graph, args, caught, [f"cases: {cases}"])  # type: ignore[arg-type]


def cmd_build_xml(args: argparse.Namespace) -> int:
    config = _config(args)
    doc = _read_text(args.doc, "document")
    dtd = _read_text(args.dtd, "DTD") if args.dtd else None
    overrides = None
    if config.overrides:
        try:
            overrides = load_overrides(config.overrides)
        except OSError as exc:
            raise InputError(f"cannot read overrides {config.overrides}: {exc.strerror or exc}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"{config.overrides}: not valid JSON: {exc}") from exc
    result, caught = _capture(lambda: transform_xml(doc, dtd, config, overrides))
    assert isinstance(result, XmlBuild)
    for message in result.dtd.warnings:
        _err(f"warning: {message}")
    report_path = args.report
    if report_path is None and args.out not in (None, "-"):
        report_path = f"{args.out}.report.txt"
    if report_path:
        _write(report_path, result.report())
    pending = sum(e.needs_confirmation for e in result.significance.values())
    status = _finish_build(result.graph, args, caught,
                           [f"auto-scanned verdicts needing confirmation: {pending}"])
    if result.dtd.warnings:
        _err(f"DTD warnings: {len(result.dtd.warnings)}")
    return status


def cmd_build_rdf(args: argparse.Namespace) -> int:
    config = _config(args)
    text = _read_text(args.triples, "triples")
    graph, caught = _capture(lambda: transform_rdf(text, config))
    return _finish_build(graph, args, caught)  # type: ignore[arg-type]


def cmd_query(args: argparse.Namespace) -> int:
    config = _config(args)
    graph = _load_graph(args.graph)
    if not _report_violations(graph):
        return EXIT_INVALID
    try:
        query = Query.of(args.keywords)
    except OcpGraphError as exc:
        raise InputError(str(exc)) from exc
    if args.top is not None and args.top < 0:
        raise InputError("--top must be nonnegative")
    dedup = DedupConfig(config.dedup, config.inverse)
    answers = list(enumerate_answers(graph, query, args.top, dedup, config.budget))
    _write(args.out, answers_to_jsonl(answers, graph))
    _err(f"answers: {len(answers)}")
    return EXIT_OK


def cmd_export_dot(args: argparse.Namespace) -> int:
    graph = _load_graph(args.graph)
    options = DotOptions(show_properties=args.properties, show_weights=args.weights)
    _write(args.out, to_dot(graph, options))
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    graph = _load_graph(args.graph)
    problems = validate(graph)
    for v in problems:
        print(v)
    _err(f"violations: {len(problems)}")
    return EXIT_INVALID if problems else EXIT_OK


def _histogram(degrees: Counter) -> str:
    if not degrees:
        return "(none)"
    return " ".join(f"{d}:{n}" for d, n in sorted(degrees.items()))


def stats_text(graph: DataGraph) -> str:
    s = summarize(graph)
    rows = [("nodes", s["nodes"]), ("  objects", s["objects"]), ("  connectors", s["connectors"]),
            ("edges", s["edges"]), ("  original", s["original"]), ("  opposite", s["opposite"])]
    rows.extend((f"  {role.value}", s["roles"][role.value]) for role in EdgeRole)
    lines = [f"{label:<16}{value}" for label, value in rows]
    outs = Counter(len(graph.out_edge_ids(n)) for n in graph.nodes)
    ins = Counter(len(graph.in_edge_ids(n)) for n in graph.nodes)
    lines.append(f"{'out-degree':<16}{_histogram(outs)}")
    lines.append(f"{'in-degree':<16}{_histogram(ins)}")
    return "\n".join(lines) + "\n"


def cmd_stats(args: argparse.Namespace) -> int:
    _write(args.out, stats_text(_load_graph(args.graph)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, weights: bool = True) -> None:
    p.add_argument("--out", default="-", help="output file (default: standard output)")
    p.add_argument("--config", help="JSON configuration file; flags take precedence")
    if weights:
        p.add_argument("--original-weight", type=float)
        p.add_argument("--opposite-weight", type=float)


def _add_build(p: argparse.ArgumentParser) -> None:
    _add_common(p)
    p.add_argument("--synthesize-names", action="store_const", const=True,
                   help="name unnamed objects after the objects they refer to")
    p.add_argument("--dangling", choices=("fail", "skip"),
                   help="what to do with references to missing rows or ids")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ocpgraph", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-rdb", help="relational schema + rows to graph")
    p.add_argument("--schema", required=True)
    p.add_argument("--data", help="directory of <relation>.csv files or a JSON file")
    _add_build(p)
    p.set_defaults(func=cmd_build_rdb)

    p = sub.add_parser("build-xml", help="XML document + DTD to graph")
    p.add_argument("--doc", required=True)
    p.add_argument("--dtd", help="DTD file (default: the document's internal subset)")
    p.add_argument("--overrides", help="JSON significance overrides")
    p.add_argument("--report", help="significance report path (default: <out>.report.txt)")
    _add_build(p)
    p.set_defaults(func=cmd_build_xml)

    p = sub.add_parser("build-rdf", help="N-Triples to graph")
    p.add_argument("--triples", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_build_rdf)

    p = sub.add_parser("query", help="keyword search, answers as JSON lines")
    p.add_argument("graph")
    p.add_argument("-k", "--keywords", required=True, help="comma separated keywords")
    p.add_argument("--top", type=int, help="stop after this many answers")
    p.add_argument("--dedup", choices=("edges", "types"))
    p.add_argument("--inverse", action="append", metavar="TYPE=INVERSE",
                   help="declare inverse connector types (repeatable)")
    p.add_argument("--budget", type=int, help="maximum number of partial trees explored")
    _add_common(p, weights=False)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("export-dot", help="Graphviz rendering")
    p.add_argument("graph")
    p.add_argument("--properties", action="store_true", help="show properties in node labels")
    p.add_argument("--weights", action="store_true", help="label edges with their weights")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_export_dot)

    p = sub.add_parser("validate", help="check model invariants")
    p.add_argument("graph")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stats", help="counts and degree histograms")
    p.add_argument("graph")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GraphTooLarge as exc:
        _err(f"error: {exc}")
        return EXIT_BUDGET
    except (InputError, OcpGraphError, OSError, ValueError) as exc:
        _err(f"error: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
