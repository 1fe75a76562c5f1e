"""JSON documents for graphs and codes, plus the bundled fixtures."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .codegen import LinearCode, NoiseBlock
from .gf import Matrix, check_modulus
from .graph import Edge, GraphError, StorageGraph, validate

FORMAT_VERSION = "1"

GRAPH_FIXTURES = {
    "F1": "f1_fig1.graph.json",
    "F2": "f2_fig3.graph.json",
    "F3": "f3_fig4.graph.json",
    "F4": "f4_fig6.graph.json",
}
CODE_FIXTURES = {
    "fig3": "fig3.code.json",
    "fig5": "fig5.code.json",
    "fig6": "fig6.code.json",
}


class DocumentError(ValueError):
    """Malformed graph or code document."""


def _dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _loads(text: str, what: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{what}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise DocumentError(f"{what}: top level must be an object")
    if doc.get("format_version") != FORMAT_VERSION:
        raise DocumentError(f"{what}: unsupported format_version {doc.get('format_version')!r}")
    return doc


def graph_to_doc(g: StorageGraph) -> dict:
    nodes = []
    for n in g.nodes:
        entry = {"id": n}
        if n in g.names:
            entry["name"] = g.names[n]
        nodes.append(entry)
    return {
        "format_version": FORMAT_VERSION,
        "K": g.K,
        "D": g.D,
        "nodes": nodes,
        "edges": [{"u": e.u, "v": e.v, "sources": sorted(e.label)} for e in g.edges],
    }


def graph_from_doc(doc: dict, check: bool = True) -> StorageGraph:
    try:
        nodes = [int(n["id"]) for n in doc["nodes"]]
        names = {int(n["id"]): n["name"] for n in doc["nodes"] if "name" in n}
        edges = []
        for i, e in enumerate(doc["edges"]):
            try:
                edges.append(Edge(int(e["u"]), int(e["v"]), frozenset(int(k) for k in e["sources"])))
            except (KeyError, TypeError, ValueError) as exc:
                raise DocumentError(f"edge {i}: malformed entry {e!r}") from exc
        g = StorageGraph(int(doc["K"]), int(doc["D"]), tuple(nodes), tuple(edges), names)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DocumentError):
            raise
        raise DocumentError(f"graph document: missing or malformed field ({exc})") from exc
    if check:
        validate(g)
    return g


def dumps_graph(g: StorageGraph) -> str:
    return _dumps(graph_to_doc(g))


def loads_graph(text: str, check: bool = True) -> StorageGraph:
    return graph_from_doc(_loads(text, "graph document"), check)


def code_to_doc(code: LinearCode) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "q": code.q,
        "K": code.K,
        "s": code.s,
        "ell": code.ell,
        "t": code.t,
        "nodes": [{"id": n, "A": code.A[n].to_rows(), "B": code.B[n].to_rows()} for n in code.nodes],
        "noise_block_map": [{"start": b.start, "stop": b.stop, "owner": b.owner} for b in code.noise_blocks],
    }


def code_from_doc(doc: dict) -> LinearCode:
    try:
        q = check_modulus(int(doc["q"]))
        K, s, ell, t = (int(doc[k]) for k in ("K", "s", "ell", "t"))
        A, B = {}, {}
        for entry in doc["nodes"]:
            n = int(entry["id"])
            for key, width, store in (("A", K * s, A), ("B", t, B)):
                rows = entry[key]
                if len(rows) != ell or any(len(r) != width for r in rows):
                    raise DocumentError(f"node {n}: {key} must be {ell}x{width}")
                if any(not 0 <= int(x) < q for r in rows for x in r):
                    raise DocumentError(f"node {n}: {key} entries must lie in [0, {q})")
                store[n] = Matrix.from_rows(rows, q, width)
        blocks = tuple(NoiseBlock(int(b["start"]), int(b["stop"]), str(b["owner"]))
                       for b in doc.get("noise_block_map", []))
        return LinearCode(q, K, s, ell, t, A, B, blocks)
    except DocumentError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"code document: missing or malformed field ({exc})") from exc


def dumps_code(code: LinearCode) -> str:
    return _dumps(code_to_doc(code))


def loads_code(text: str) -> LinearCode:
    return code_from_doc(_loads(text, "code document"))


def _data(name: str) -> str:
    return resources.files("gsc").joinpath("data", name).read_text(encoding="utf-8")


def fixture_graph(name: str) -> StorageGraph:
    if name not in GRAPH_FIXTURES:
        raise KeyError(f"unknown graph fixture {name!r}; expected one of {sorted(GRAPH_FIXTURES)}")
    return loads_graph(_data(GRAPH_FIXTURES[name]))


def fixture_code_file(name: str) -> LinearCode:
    if name not in CODE_FIXTURES:
        raise KeyError(f"unknown code fixture {name!r}; expected one of {sorted(CODE_FIXTURES)}")
    return loads_code(_data(CODE_FIXTURES[name]))


def load_schema(name: str) -> dict:
    """JSON schema for ``graph``, ``code``, ``error`` or a CLI report (``analyze`` ... ``verify``)."""
    text = resources.files("gsc").joinpath("schemas", f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def fixture_text(name: str) -> str:
    table = {**GRAPH_FIXTURES, **CODE_FIXTURES}
    return _data(table[name])


def read_graph(path: str) -> StorageGraph:
    """Load a graph from a path, or ``fixture:F1`` .. ``fixture:F4``."""
    if path.startswith("fixture:"):
        return fixture_graph(path.split(":", 1)[1])
    return loads_graph(Path(path).read_text(encoding="utf-8"))


def read_code(path: str) -> LinearCode:
    """Load a code from a path, or ``fixture:fig3`` / ``fig5`` / ``fig6``."""
    if path.startswith("fixture:"):
        return fixture_code_file(path.split(":", 1)[1])
    return loads_code(Path(path).read_text(encoding="utf-8"))


__all__ = [
    "DocumentError", "GraphError", "dumps_graph", "loads_graph", "dumps_code", "loads_code",
    "fixture_graph", "fixture_code_file", "read_graph", "read_code", "load_schema",
]
