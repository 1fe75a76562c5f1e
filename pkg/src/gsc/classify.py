"""Extremal-capacity classification of storage graphs.

The decision cascade certifies the highest extremal capacity it can: 2/D
when every node's common sources cover its edges, 1/D (1 when D = 1) when
no qualified component of the non-degenerate subgraph has an internal
qualified edge in any characteristic graph, and a strict bound below 1/D
with an explicit witness when one does.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .graph import (
    Edge,
    StorageGraph,
    characteristic_graph,
    common_sources,
    format_sources,
    internal_qualified_edges,
    nondegenerate_subgraph,
    qualified_components,
    unqualified_path,
)


class VerdictKind(enum.Enum):
    EXACTLY_ONE = "exactly_one"
    EXACTLY_ONE_OVER_D = "exactly_one_over_d"
    EXACTLY_TWO_OVER_D = "exactly_two_over_d"
    STRICTLY_LESS_THAN = "strictly_less_than"
    NOT_IN_CHARACTERIZED_CLASS = "not_in_characterized_class"
    UNCONSTRAINED = "unconstrained"


@dataclass(frozen=True)
class NodeWitness:
    """Node violating the common-source size condition."""
    node: int
    common: frozenset
    condition: int = 1


@dataclass(frozen=True)
class EdgeWitness:
    """Edge whose endpoints' common sources do not cover its label."""
    edge: Edge
    edge_index: int
    union: frozenset
    condition: int = 2


@dataclass(frozen=True)
class InternalEdgeWitness:
    """Qualified edge of ``G^[k]`` restricted to a qualified component, joined by an unqualified path."""
    component: int  # 0-based, components ordered by smallest node id
    k: int
    edge: Edge
    edge_index: int
    path: tuple[int, ...]


@dataclass(frozen=True)
class CapacityVerdict:
    kind: VerdictKind
    D: int
    witness: object = None
    reason: str | None = None

    def __post_init__(self):
        if self.kind is VerdictKind.STRICTLY_LESS_THAN and self.witness is None:
            raise ValueError("a strict bound needs a witness")
        if self.kind is VerdictKind.EXACTLY_ONE and self.D != 1:
            raise ValueError("EXACTLY_ONE only applies when D = 1")

    @property
    def capacity(self) -> Fraction | None:
        if self.kind is VerdictKind.EXACTLY_ONE:
            return Fraction(1)
        if self.kind is VerdictKind.EXACTLY_ONE_OVER_D:
            return Fraction(1, self.D)
        if self.kind is VerdictKind.EXACTLY_TWO_OVER_D:
            return Fraction(2, self.D)
        return None

    @property
    def bound(self) -> Fraction | None:
        if self.kind is VerdictKind.STRICTLY_LESS_THAN:
            return Fraction(1, self.D)
        return None

    @property
    def exact(self) -> bool:
        return self.capacity is not None


def check_cover_condition(g: StorageGraph) -> tuple[bool, NodeWitness | EdgeWitness | None]:
    """Common-source cover test for capacity 2/D.

    Every node needs at least D/2 common sources, and every edge label must
    equal the union of its endpoints' common sources.
    """
    common = {n: common_sources(g, n) for n in g.nodes}
    for n in g.nodes:
        if 2 * len(common[n]) < g.D:
            return False, NodeWitness(n, common[n])
    for i, e in enumerate(g.edges):
        union = common[e.u] | common[e.v]
        if union != e.label:
            return False, EdgeWitness(e, i, frozenset(union))
    return True, None


def component_subgraphs(g: StorageGraph) -> list[StorageGraph]:
    """Qualified components of the non-degenerate subgraph, as induced subgraphs."""
    gt = nondegenerate_subgraph(g)
    return [gt.induced(block) for block in qualified_components(gt)]


def find_internal_edge(g: StorageGraph) -> InternalEdgeWitness | None:
    for m, q in enumerate(component_subgraphs(g)):
        for k in range(1, g.K + 1):
            gk = characteristic_graph(q, k)
            internal = internal_qualified_edges(gk)
            if internal:
                e = internal[0]
                path = tuple(unqualified_path(gk, e.u, e.v))
                return InternalEdgeWitness(m, k, e, g.edge_index(e.u, e.v), path)
    return None


def check_one_over_d_condition(g: StorageGraph) -> tuple[bool, bool, InternalEdgeWitness | None]:
    """``(applicable, holds, witness)`` for the 1/D characterization.

    Applicable when the non-degenerate subgraph is non-empty and none of its
    nodes has a common source; holds when no internal qualified edge exists.
    """
    gt = nondegenerate_subgraph(g)
    if not gt.nodes:
        return False, False, None
    if any(common_sources(g, n) for n in gt.nodes):
        return False, False, None
    w = find_internal_edge(g)
    return True, w is None, w


def classify(g: StorageGraph) -> CapacityVerdict:
    if not g.qualified_edges:
        return CapacityVerdict(VerdictKind.UNCONSTRAINED, g.D,
                               reason="no qualified edge; every node may store pure noise")
    covered, _ = check_cover_condition(g)
    if covered:
        return CapacityVerdict(VerdictKind.EXACTLY_TWO_OVER_D, g.D)
    if not nondegenerate_subgraph(g).nodes:
        return CapacityVerdict(
            VerdictKind.NOT_IN_CHARACTERIZED_CLASS, g.D,
            reason="all nodes degenerate but the common-source cover condition fails")
    applicable, holds, w = check_one_over_d_condition(g)
    if applicable and holds:
        kind = VerdictKind.EXACTLY_ONE if g.D == 1 else VerdictKind.EXACTLY_ONE_OVER_D
        return CapacityVerdict(kind, g.D)
    if applicable:
        return CapacityVerdict(VerdictKind.STRICTLY_LESS_THAN, g.D, witness=w)
    node = next(n for n in nondegenerate_subgraph(g).nodes if common_sources(g, n))
    return CapacityVerdict(
        VerdictKind.NOT_IN_CHARACTERIZED_CLASS, g.D, witness=NodeWitness(node, common_sources(g, node)),
        reason=f"non-degenerate node {g.name(node)} has common sources "
               f"{format_sources(common_sources(g, node))}")


def _frac(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def describe_witness(g: StorageGraph, w) -> str:
    if isinstance(w, InternalEdgeWitness):
        return (f"G^[{w.k}] internal edge {{{g.name(w.edge.u)},{g.name(w.edge.v)}}}"
                f" (unqualified path {'-'.join(g.name(n) for n in w.path)})")
    if isinstance(w, NodeWitness):
        return (f"node {g.name(w.node)} has {len(w.common)} common sources "
                f"{format_sources(w.common)} < D/2")
    if isinstance(w, EdgeWitness):
        return (f"edge {{{g.name(w.edge.u)},{g.name(w.edge.v)}}} label {format_sources(w.edge.label)}"
                f" != common-source union {format_sources(w.union)}")
    return ""


def describe(g: StorageGraph, v: CapacityVerdict) -> str:
    if v.kind is VerdictKind.EXACTLY_TWO_OVER_D:
        return f"capacity = {_frac(v.capacity)} (2/D class: common sources cover every edge)"
    if v.kind is VerdictKind.EXACTLY_ONE:
        return "capacity = 1 (D=1 class: no internal qualified edge)"
    if v.kind is VerdictKind.EXACTLY_ONE_OVER_D:
        return f"capacity = {_frac(v.capacity)} (1/D class: no internal qualified edge)"
    if v.kind is VerdictKind.STRICTLY_LESS_THAN:
        return f"capacity < {_frac(v.bound)}, witness {describe_witness(g, v.witness)}"
    if v.kind is VerdictKind.UNCONSTRAINED:
        return f"unconstrained: {v.reason}"
    return f"not in a characterized class: {v.reason}"
