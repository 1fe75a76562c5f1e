"""Command-line front end: ``gsc analyze | classify | construct | verify``.

Exit codes
  0  success (exact verdict / verification passed)
  1  verification failed
  2  unreadable or invalid input, or code/graph dimension mismatch
  3  classify: graph outside every characterized class (or unconstrained)
  4  construct: precondition refused
  5  construct: retry budget exhausted
  6  verify: exhaustive enumeration cap exceeded
  7  verify: rank and exhaustive modes disagree
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import classify as cl
from . import codegen
from .gf import FieldError
from .graph import (
    GraphError,
    StorageGraph,
    characteristic_graph,
    common_sources,
    degenerate_nodes,
    format_sources,
    internal_qualified_edges,
    nondegenerate_subgraph,
    qualified_components,
    unqualified_components,
)
from .io import DocumentError, dumps_code, read_code, read_graph
from .verify import (
    CodeDimensionError,
    EnumerationCapError,
    ModeDisagreementError,
    Outcome,
    verify_code,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NOT_IN_CLASS = 0, 1, 2, 3
EXIT_REFUSED, EXIT_FAILED, EXIT_ENUM_CAP, EXIT_DISAGREE = 4, 5, 6, 7


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str, witness=None):
        super().__init__(message)
        self.code = code
        self.kind = kind
        self.witness = witness


def _frac(x) -> str | None:
    if x is None:
        return None
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _nodes(g: StorageGraph, ns) -> str:
    return "[" + ",".join(g.name(n) for n in ns) + "]"


def witness_json(w) -> dict | None:
    if isinstance(w, cl.InternalEdgeWitness):
        return {"type": "internal_edge", "component": w.component + 1, "k": w.k,
                "edge": [w.edge.u, w.edge.v], "edge_index": w.edge_index, "path": list(w.path)}
    if isinstance(w, cl.NodeWitness):
        return {"type": "node", "condition": w.condition, "node": w.node,
                "common_sources": sorted(w.common)}
    if isinstance(w, cl.EdgeWitness):
        return {"type": "edge", "condition": w.condition, "edge": [w.edge.u, w.edge.v],
                "edge_index": w.edge_index, "sources": sorted(w.edge.label), "union": sorted(w.union)}
    return None


def _load_graph(path: str) -> StorageGraph:
    try:
        return read_graph(path)
    except OSError as exc:
        raise CliError(EXIT_INPUT, "input_error", f"{path}: {exc.strerror or exc}") from exc
    except (DocumentError, GraphError, KeyError) as exc:
        raise CliError(EXIT_INPUT, "invalid_graph", f"{path}: {exc}") from exc


# -- analyze ------------------------------------------------------------------

def analyze(g: StorageGraph) -> dict:
    gt = nondegenerate_subgraph(g)
    comps = qualified_components(gt)
    internal = []
    for m, block in enumerate(comps):
        sub = gt.induced(block)
        for k in range(1, g.K + 1):
            for e in internal_qualified_edges(characteristic_graph(sub, k)):
                internal.append({"component": m + 1, "k": k, "edge": [e.u, e.v],
                                 "edge_index": g.edge_index(e.u, e.v)})
    deg = degenerate_nodes(g)
    return {
        "command": "analyze",
        "K": g.K,
        "D": g.D,
        "nodes": [{"id": n, "name": g.name(n), "common_sources": sorted(common_sources(g, n)),
                   "degenerate": n in deg} for n in g.nodes],
        "degenerate_nodes": sorted(deg),
        "nondegenerate_nodes": list(gt.nodes),
        "qualified_components": [list(b) for b in comps],
        "unqualified_components": [list(b) for b in unqualified_components(gt)],
        "internal_edges": internal,
    }


def render_analyze(g: StorageGraph, rep: dict) -> str:
    nq = len(g.qualified_edges)
    lines = [f"graph: K={g.K} D={g.D} N={g.N} edges={len(g.edges)} ({nq} qualified)", "common sources:"]
    for n in rep["nodes"]:
        flag = "  (degenerate)" if n["degenerate"] else ""
        lines.append(f"  {n['name']:<6} {format_sources(n['common_sources'])}{flag}")
    deg = rep["degenerate_nodes"]
    lines.append(f"degenerate nodes ({len(deg)}): {_nodes(g, deg) if deg else 'none'}")
    lines.append(f"non-degenerate subgraph: {len(rep['nondegenerate_nodes'])} nodes")
    qc, uc = rep["qualified_components"], rep["unqualified_components"]
    lines.append(f"  qualified components ({len(qc)}): " + " ".join(_nodes(g, b) for b in qc))
    lines.append(f"  unqualified components ({len(uc)}): " + " ".join(_nodes(g, b) for b in uc))
    lines.append("internal qualified edges:")
    for k in range(1, g.K + 1):
        found = [e for e in rep["internal_edges"] if e["k"] == k]
        desc = ", ".join(f"{{{g.name(e['edge'][0])},{g.name(e['edge'][1])}}} in Q{e['component']}"
                         for e in found)
        lines.append(f"  k={k}: {desc or 'none'}")
    return "\n".join(lines)


def cmd_analyze(args) -> tuple[int, dict, str]:
    g = _load_graph(args.graph)
    rep = analyze(g)
    return EXIT_OK, rep, render_analyze(g, rep)


# -- classify -----------------------------------------------------------------

def cmd_classify(args) -> tuple[int, dict, str]:
    g = _load_graph(args.graph)
    v = cl.classify(g)
    text = cl.describe(g, v)
    rep = {
        "command": "classify",
        "verdict": v.kind.value,
        "D": g.D,
        "capacity": _frac(v.capacity),
        "bound": _frac(v.bound),
        "witness": witness_json(v.witness),
        "reason": v.reason,
        "summary": text,
    }
    code = EXIT_OK if v.exact or v.kind is cl.VerdictKind.STRICTLY_LESS_THAN else EXIT_NOT_IN_CLASS
    return code, rep, text


# -- construct ----------------------------------------------------------------

SCHEMES = {
    "d1": lambda g, a: codegen.construct_d1(g),
    "general": lambda g, a: codegen.construct_general(g, a.seed, a.q),
    "2overD": lambda g, a: codegen.construct_2overD(g, a.seed, a.q),
}


def cmd_construct(args) -> tuple[int, dict, str]:
    g = _load_graph(args.graph)
    try:
        code = SCHEMES[args.scheme](g, args)
    except codegen.ConstructionRefused as exc:
        raise CliError(EXIT_REFUSED, "construction_refused", str(exc), exc.witness) from exc
    except codegen.ConstructionFailed as exc:
        raise CliError(EXIT_FAILED, "construction_failed",
                       f"{exc} (q={exc.q}, attempts={exc.attempts})") from exc
    except FieldError as exc:
        raise CliError(EXIT_INPUT, "invalid_field", str(exc)) from exc
    Path(args.output).write_text(dumps_code(code), encoding="utf-8")
    rep = {
        "command": "construct",
        "scheme": args.scheme,
        "q": code.q,
        "rate": _frac(code.rate),
        "s": code.s,
        "ell": code.ell,
        "t": code.t,
        "attempts": code.attempts,
        "output": args.output,
    }
    text = (f"wrote {args.output}: scheme={args.scheme} rate={rep['rate']} q={code.q} "
            f"s={code.s} ell={code.ell} t={code.t} retries={code.attempts - 1}")
    return EXIT_OK, rep, text


# -- verify -------------------------------------------------------------------

def _o(o: Outcome) -> str:
    return {"pass": "pass", "fail": "FAIL", "not_required": "-"}[o.value]


def cmd_verify(args) -> tuple[int, dict, str]:
    g = _load_graph(args.graph)
    try:
        code = read_code(args.code)
    except OSError as exc:
        raise CliError(EXIT_INPUT, "input_error", f"{args.code}: {exc.strerror or exc}") from exc
    except (DocumentError, FieldError, KeyError, ValueError) as exc:
        raise CliError(EXIT_INPUT, "invalid_code", f"{args.code}: {exc}") from exc
    try:
        report = verify_code(code, g, args.mode)
    except CodeDimensionError as exc:
        raise CliError(EXIT_INPUT, "dimension_mismatch", str(exc)) from exc
    except EnumerationCapError as exc:
        raise CliError(EXIT_ENUM_CAP, "enumeration_cap", f"{exc}; raise GSC_ENUM_CAP or use --mode rank") from exc
    except ModeDisagreementError as exc:
        raise CliError(EXIT_DISAGREE, "mode_disagreement", str(exc)) from exc

    edges = []
    lines = [f"{'edge':<12} {'label':<10} {'correct':<8} {'secure':<7} {'worlds':>8}  witness"]
    for r in report.edges:
        e = r.edge
        edges.append({
            "edge_index": r.edge_index, "u": e.u, "v": e.v, "sources": sorted(e.label),
            "correctness": r.correctness.value, "security": r.security.value,
            "worlds": r.worlds, "undecodable": r.undecodable, "leaking": r.leaking,
        })
        wit = []
        if r.undecodable is not None:
            wit.append(f"cannot decode W{r.undecodable}")
        if r.leaking is not None:
            wit.append(f"leaks W{r.leaking}")
        pair = f"{{{g.name(e.u)},{g.name(e.v)}}}"
        worlds = "" if r.worlds is None else str(r.worlds)
        lines.append(f"{pair:<12} {format_sources(e.label):<10} {_o(r.correctness):<8} "
                     f"{_o(r.security):<7} {worlds:>8}  {'; '.join(wit)}".rstrip())
    n_fail = len(report.failures)
    lines.append(f"overall: {'PASS' if report.passed else 'FAIL'} "
                 f"({len(report.edges) - n_fail}/{len(report.edges)} edges, mode={args.mode}, rate={_frac(code.rate)})")
    rep = {
        "command": "verify",
        "mode": args.mode,
        "passed": report.passed,
        "rate": _frac(code.rate),
        "edges": edges,
        "counts": {"edges": len(report.edges), "passed": len(report.edges) - n_fail, "failed": n_fail},
        "worlds": report.worlds,
    }
    return (EXIT_OK if report.passed else EXIT_FAIL), rep, "\n".join(lines)


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="emit machine-readable JSON")
    p = argparse.ArgumentParser(prog="gsc", parents=[common],
                                description="Secure storage over graphs: analysis, capacity, codes.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="structural report for a graph")
    a.add_argument("graph", help="graph JSON file or fixture:F1..F4")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("classify", parents=[common], help="extremal capacity verdict")
    c.add_argument("graph")
    c.set_defaults(func=cmd_classify)

    k = sub.add_parser("construct", parents=[common], help="build a capacity-achieving code")
    k.add_argument("graph")
    k.add_argument("--scheme", choices=sorted(SCHEMES), required=True)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--q", type=int, default=None, help="prime field size override")
    k.add_argument("-o", "--output", required=True)
    k.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", parents=[common], help="check a code against a graph")
    v.add_argument("graph")
    v.add_argument("code", help="code JSON file or fixture:fig3|fig5|fig6")
    v.add_argument("--mode", choices=["rank", "exhaustive", "both"], default="both")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    as_json = getattr(args, "json", False)
    try:
        code, rep, text = args.func(args)
    except CliError as exc:
        if as_json:
            print(json.dumps({"command": args.command, "error": exc.kind, "message": str(exc),
                              "witness": witness_json(exc.witness)}, indent=2))
        else:
            print(f"error: {exc}", file=sys.stderr)
        return exc.code
    print(json.dumps(rep, indent=2) if as_json else text)
    return code


if __name__ == "__main__":
    sys.exit(main())
