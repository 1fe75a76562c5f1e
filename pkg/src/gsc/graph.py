"""Constraint graphs for secure storage and their structural analyses.

A :class:`StorageGraph` has ``K`` sources and labels every edge with either
``D`` of them (a *qualified* edge: the endpoint pair must decode exactly
those sources) or none (an *unqualified* edge: the pair must learn nothing).
Node ids are ints; source indices are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import networkx as nx

SourceSet = frozenset  # of 1-based source indices


class GraphError(ValueError):
    """Base class for invalid graphs."""

    def __init__(self, message: str, edge_index: int | None = None):
        super().__init__(message)
        self.edge_index = edge_index


class LabelSizeError(GraphError):
    pass


class SelfLoopError(GraphError):
    pass


class DuplicateEdgeError(GraphError):
    pass


class IsolatedNodeError(GraphError):
    pass


class SourceRangeError(GraphError):
    pass


class ParameterError(GraphError):
    pass


class UnknownNodeError(GraphError, KeyError):
    pass


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    label: frozenset = frozenset()

    @property
    def qualified(self) -> bool:
        return bool(self.label)

    @property
    def ends(self) -> frozenset:
        return frozenset((self.u, self.v))

    def other(self, n: int) -> int:
        return self.v if n == self.u else self.u


@dataclass(frozen=True)
class StorageGraph:
    K: int
    D: int
    nodes: tuple[int, ...]
    edges: tuple[Edge, ...]
    names: dict = field(default_factory=dict, compare=False, hash=False)

    @classmethod
    def build(cls, K: int, D: int, edges: Iterable, nodes: Iterable[int] | None = None,
              names: dict | None = None) -> StorageGraph:
        """Convenience constructor from ``(u, v, sources)`` triples."""
        es = tuple(e if isinstance(e, Edge) else Edge(e[0], e[1], frozenset(e[2])) for e in edges)
        if nodes is None:
            nodes = sorted({n for e in es for n in (e.u, e.v)})
        return cls(K, D, tuple(nodes), es, dict(names or {}))

    def name(self, n: int) -> str:
        return self.names.get(n, f"V{n}")

    @property
    def N(self) -> int:
        return len(self.nodes)

    @cached_property
    def _incident(self) -> dict[int, list[Edge]]:
        inc: dict[int, list[Edge]] = {n: [] for n in self.nodes}
        for e in self.edges:
            inc.setdefault(e.u, []).append(e)
            inc.setdefault(e.v, []).append(e)
        return inc

    def incident(self, n: int) -> list[Edge]:
        if n not in self._incident:
            raise UnknownNodeError(f"unknown node {n}")
        return self._incident[n]

    def edge_index(self, u: int, v: int) -> int:
        key = frozenset((u, v))
        for i, e in enumerate(self.edges):
            if e.ends == key:
                return i
        raise KeyError(f"no edge {{{u},{v}}}")

    @property
    def qualified_edges(self) -> list[Edge]:
        return [e for e in self.edges if e.qualified]

    def induced(self, keep: Iterable[int]) -> StorageGraph:
        keep = set(keep)
        return StorageGraph(
            self.K, self.D,
            tuple(n for n in self.nodes if n in keep),
            tuple(e for e in self.edges if e.u in keep and e.v in keep),
            self.names,
        )

    def relabel(self, D: int, labels: Iterable[frozenset]) -> StorageGraph:
        return StorageGraph(
            self.K, D, self.nodes,
            tuple(Edge(e.u, e.v, lab) for e, lab in zip(self.edges, labels)),
            self.names,
        )


@dataclass(frozen=True)
class NodePartition:
    """Disjoint node blocks, each sorted, blocks ordered by smallest node id."""

    blocks: tuple[tuple[int, ...], ...]

    @classmethod
    def from_sets(cls, sets: Iterable[Iterable[int]]) -> NodePartition:
        return cls(tuple(sorted(tuple(sorted(s)) for s in sets)))

    def block_of(self, n: int) -> int:
        """0-based index of the block containing ``n``."""
        for i, b in enumerate(self.blocks):
            if n in b:
                return i
        raise UnknownNodeError(f"node {n} not in partition")

    @property
    def covered(self) -> frozenset:
        return frozenset(n for b in self.blocks for n in b)

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)


def validate(g: StorageGraph) -> None:
    if not 1 <= g.D <= g.K:
        raise ParameterError(f"need 1 <= D <= K, got D={g.D}, K={g.K}")
    known = set(g.nodes)
    if len(known) != len(g.nodes):
        raise ParameterError("duplicate node ids")
    seen: dict[frozenset, int] = {}
    for i, e in enumerate(g.edges):
        if e.u not in known or e.v not in known:
            raise UnknownNodeError(f"edge {i} references unknown node", i)
        if e.u == e.v:
            raise SelfLoopError(f"edge {i} is a self-loop on {g.name(e.u)}", i)
        if e.ends in seen:
            raise DuplicateEdgeError(
                f"edge {i} duplicates edge {seen[e.ends]} ({g.name(e.u)},{g.name(e.v)})", i)
        seen[e.ends] = i
        bad = [k for k in e.label if not 1 <= k <= g.K]
        if bad:
            raise SourceRangeError(f"edge {i} has source index {bad[0]} outside [1, {g.K}]", i)
        if len(e.label) not in (0, g.D):
            raise LabelSizeError(
                f"edge {i} label has {len(e.label)} sources, expected {g.D} or 0", i)
    touched = {n for e in g.edges for n in (e.u, e.v)}
    for n in g.nodes:
        if n not in touched:
            raise IsolatedNodeError(f"node {g.name(n)} is isolated")


def common_sources(g: StorageGraph, v: int) -> frozenset:
    inc = g.incident(v)
    if not inc:
        return frozenset()
    out = inc[0].label
    for e in inc[1:]:
        out = out & e.label
    return frozenset(out)


def degenerate_nodes(g: StorageGraph) -> frozenset:
    return frozenset(n for n in g.nodes if len({e.label for e in g.incident(n)}) <= 1)


def nondegenerate_subgraph(g: StorageGraph) -> StorageGraph:
    deg = degenerate_nodes(g)
    return g.induced(n for n in g.nodes if n not in deg)


def characteristic_graph(g: StorageGraph, k: int) -> StorageGraph:
    if not 1 <= k <= g.K:
        raise SourceRangeError(f"source {k} outside [1, {g.K}]")
    return g.relabel(1, (frozenset({k}) if k in e.label else frozenset() for e in g.edges))


def _components(g: StorageGraph, qualified: bool) -> NodePartition:
    h = nx.Graph()
    h.add_nodes_from(g.nodes)
    h.add_edges_from((e.u, e.v) for e in g.edges if e.qualified == qualified)
    return NodePartition.from_sets(nx.connected_components(h))


def qualified_components(g: StorageGraph) -> NodePartition:
    return _components(g, qualified=True)


def unqualified_components(g: StorageGraph) -> NodePartition:
    return _components(g, qualified=False)


def internal_qualified_edges(g: StorageGraph) -> list[Edge]:
    """Qualified edges whose endpoints share an unqualified component.

    Meant for characteristic graphs, but any labelling works: an edge counts
    as qualified when its label is non-empty.
    """
    parts = unqualified_components(g)
    return [e for e in g.edges if e.qualified and parts.block_of(e.u) == parts.block_of(e.v)]


def unqualified_path(g: StorageGraph, u: int, v: int) -> list[int]:
    """Node sequence of a shortest unqualified path from ``u`` to ``v``."""
    h = nx.Graph()
    h.add_nodes_from(g.nodes)
    h.add_edges_from((e.u, e.v) for e in g.edges if not e.qualified)
    return nx.shortest_path(h, u, v)


def format_sources(s: Iterable[int]) -> str:
    return "{" + ",".join(str(k) for k in sorted(s)) + "}"
