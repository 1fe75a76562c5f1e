"""Random graph / code generators shared by the property and acceptance suites."""

from __future__ import annotations

import itertools

import numpy as np

from gsc.classify import VerdictKind, check_cover_condition, classify
from gsc.codegen import LinearCode, NoiseBlock
from gsc.gf import Matrix
from gsc.graph import GraphError, StorageGraph, validate


def make_graph(K: int, D: int, edges, names=None) -> StorageGraph:
    g = StorageGraph.build(K, D, [(u, v, frozenset(lab)) for u, v, lab in edges], names=names)
    validate(g)
    return g


def _relabel_nodes(edges):
    """Map the touched node ids onto 1..N so no node is isolated."""
    used = sorted({n for u, v, _ in edges for n in (u, v)})
    ids = {n: i + 1 for i, n in enumerate(used)}
    return [(ids[u], ids[v], lab) for u, v, lab in edges]


def random_graph(rng: np.random.Generator, n_max=6, K_max=3, D_max=2, p_edge=0.5,
                 p_unqualified=0.35) -> StorageGraph:
    while True:
        K = int(rng.integers(1, K_max + 1))
        D = int(rng.integers(1, min(D_max, K) + 1))
        N = int(rng.integers(2, n_max + 1))
        subsets = list(itertools.combinations(range(1, K + 1), D))
        edges = []
        for u, v in itertools.combinations(range(1, N + 1), 2):
            if rng.random() < p_edge:
                lab = () if rng.random() < p_unqualified else subsets[rng.integers(len(subsets))]
                edges.append((u, v, lab))
        if not edges:
            continue
        try:
            return make_graph(K, D, _relabel_nodes(edges))
        except GraphError:
            continue


def one_over_d_graph(rng: np.random.Generator, n_max=8, K_max=3, D_max=2) -> StorageGraph:
    """Random graph classified as capacity exactly 1/D (filtered)."""
    while True:
        g = random_graph(rng, n_max, K_max, D_max, p_edge=float(rng.uniform(0.2, 0.6)))
        if classify(g).kind in (VerdictKind.EXACTLY_ONE, VerdictKind.EXACTLY_ONE_OVER_D):
            return g


def cover_graph(rng: np.random.Generator, n_max=8, K_max=3, D_max=2) -> StorageGraph:
    """Random graph satisfying the common-source cover condition.

    Each node gets a planted source set of size >= D/2; edges are allowed only
    where the two planted sets cover exactly D sources, and the result is
    filtered through the actual condition check.
    """
    while True:
        K = int(rng.integers(1, K_max + 1))
        D = int(rng.integers(1, min(D_max, K) + 1))
        N = int(rng.integers(2, n_max + 1))
        lo = (D + 1) // 2
        planted = {}
        for n in range(1, N + 1):
            size = int(rng.integers(lo, D + 1))
            planted[n] = frozenset(int(x) for x in rng.choice(np.arange(1, K + 1), size, replace=False))
        edges = []
        for u, v in itertools.combinations(range(1, N + 1), 2):
            lab = planted[u] | planted[v]
            if len(lab) == D and rng.random() < 0.6:
                edges.append((u, v, tuple(sorted(lab))))
        if not edges:
            continue
        g = make_graph(K, D, _relabel_nodes(edges))
        if check_cover_condition(g)[0]:
            return g


def random_code(rng: np.random.Generator, g: StorageGraph, q: int, s: int, ell: int, t: int,
                density: float = 0.6) -> LinearCode:
    """Sparse uniformly random linear code for ``g``."""
    def mat(cols):
        vals = rng.integers(1, q, (ell, cols)) * (rng.random((ell, cols)) < density)
        return Matrix.from_rows(vals.tolist(), q, cols)

    A = {n: mat(g.K * s) for n in g.nodes}
    B = {n: mat(t) for n in g.nodes}
    return LinearCode(q, g.K, s, ell, t, A, B, (NoiseBlock(0, t, "all"),) if t else ())


def a_entries(code: LinearCode):
    """Every (node, row, col) position of the source matrices."""
    return [(n, i, j) for n in code.nodes for i in range(code.ell) for j in range(code.K * code.s)]


def on_desired_column(code: LinearCode, g: StorageGraph, n: int, j: int) -> bool:
    """True if column ``j`` of node ``n`` feeds a desired source of some incident qualified edge."""
    k = j // code.s + 1
    return any(e.qualified and k in e.label for e in g.incident(n))
