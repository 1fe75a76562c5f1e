"""Linear secure-storage code constructions over prime fields.

A :class:`LinearCode` stores, for every node ``n``, ``V_n = A_n w + B_n z``
where ``w`` stacks ``s`` uniform symbols per source (source ``k`` occupies
columns ``(k-1)*s .. k*s-1``) and ``z`` is ``t`` uniform noise symbols.

Three constructions are provided:

* :func:`construct_d1` (D = 1, rate 1): node coefficient for ``W_k`` is the
  1-based index of its unqualified component in the characteristic graph.
* :func:`construct_general` (rate 1/D): the same layout with random
  ``D x 1`` coefficient vectors, redrawn until every qualified edge's
  difference matrix is invertible.
* :func:`construct_2overD` (rate 2/D): noiseless random combinations of
  each node's common sources.

Every qualified component of the non-degenerate subgraph shares one noise
vector; independent per-source noises would sum to the same distribution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classify import check_cover_condition, check_one_over_d_condition, component_subgraphs, find_internal_edge
from .gf import Matrix, check_modulus, det, next_prime_above, vstack
from .graph import (
    StorageGraph,
    characteristic_graph,
    common_sources,
    degenerate_nodes,
    unqualified_components,
)

RETRY_BUDGET = 64


class ConstructionError(Exception):
    pass


class ConstructionRefused(ConstructionError):
    """The graph does not meet the construction's precondition."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class ConstructionFailed(ConstructionError):
    """No valid draw within the retry budget."""

    def __init__(self, message: str, q: int, attempts: int):
        super().__init__(message)
        self.q = q
        self.attempts = attempts


@dataclass(frozen=True)
class NoiseBlock:
    start: int
    stop: int
    owner: str  # "Q<m>" for a qualified component (1-based), node name for a degenerate node


@dataclass(frozen=True)
class LinearCode:
    q: int
    K: int
    s: int
    ell: int
    t: int
    A: dict  # node id -> Matrix (ell x K*s)
    B: dict  # node id -> Matrix (ell x t)
    noise_blocks: tuple[NoiseBlock, ...] = ()
    attempts: int = field(default=1, compare=False)

    def __post_init__(self):
        for n, a in self.A.items():
            if a.shape != (self.ell, self.K * self.s) or a.q != self.q:
                raise ValueError(f"node {n}: A has shape {a.shape} over F_{a.q}")
        for n, b in self.B.items():
            if b.shape != (self.ell, self.t) or b.q != self.q:
                raise ValueError(f"node {n}: B has shape {b.shape} over F_{b.q}")
        if set(self.A) != set(self.B):
            raise ValueError("A and B cover different nodes")

    @property
    def rate(self):
        from fractions import Fraction
        return Fraction(self.s, self.ell)

    @property
    def nodes(self) -> tuple[int, ...]:
        return tuple(sorted(self.A))

    def source_columns(self, k: int) -> range:
        return range((k - 1) * self.s, k * self.s)

    def with_entry(self, which: str, node: int, i: int, j: int, value: int) -> LinearCode:
        mats = dict(getattr(self, which))
        mats[node] = mats[node].replace(i, j, value)
        kw = {"A": self.A, "B": self.B, which: mats}
        return LinearCode(self.q, self.K, self.s, self.ell, self.t, kw["A"], kw["B"],
                          self.noise_blocks, self.attempts)


def _rng(seed: int) -> np.random.Generator:
    # Philox is counter-based: streams are reproducible from the seed alone
    return np.random.Generator(np.random.Philox(seed))


def _component_layout(g: StorageGraph, ell: int):
    """Shared structure of the D=1 and 1/D constructions.

    Returns ``(components, blocks, t)``: the qualified components of the
    non-degenerate subgraph, the noise blocks, and the noise width.
    Degenerate nodes with no common source get their own fresh noise block.
    """
    comps = component_subgraphs(g)
    blocks = [NoiseBlock(m * ell, (m + 1) * ell, f"Q{m + 1}") for m in range(len(comps))]
    t = len(comps) * ell
    for n in sorted(degenerate_nodes(g)):
        if not common_sources(g, n):
            blocks.append(NoiseBlock(t, t + ell, g.name(n)))
            t += ell
    return comps, tuple(blocks), t


def unqualified_blocks(g: StorageGraph) -> list[list[tuple[int, ...]]]:
    """Per component m, per source k: unqualified components of ``Q_m^[k]`` (ordered)."""
    return [[unqualified_components(characteristic_graph(q, k)).blocks for k in range(1, g.K + 1)]
            for q in component_subgraphs(g)]


def assemble_aligned(g: StorageGraph, q: int, ell: int, coeffs) -> LinearCode:
    """Build a 1/D-layout code from explicit coefficient vectors.

    ``coeffs[m][k-1][u]`` is the length-``ell`` coefficient of ``W_k`` for
    every node in the ``u``-th unqualified component of ``Q_m^[k]``.
    """
    comps, blocks, t = _component_layout(g, ell)
    ublocks = unqualified_blocks(g)
    K = g.K
    A: dict = {}
    B: dict = {}
    for m, comp in enumerate(comps):
        for n in comp.nodes:
            cols = [[0] * K for _ in range(ell)]
            for k in range(1, K + 1):
                u = next(i for i, b in enumerate(ublocks[m][k - 1]) if n in b)
                h = coeffs[m][k - 1][u]
                for r in range(ell):
                    cols[r][k - 1] = int(h[r]) % q
            A[n] = Matrix.from_rows(cols, q, K)
            noise = [[0] * t for _ in range(ell)]
            for r in range(ell):
                noise[r][m * ell + r] = 1
            B[n] = Matrix.from_rows(noise, q, t)
    fresh = {b.owner: b for b in blocks[len(comps):]}
    for n in sorted(degenerate_nodes(g)):
        c = sorted(common_sources(g, n))
        a = [[0] * K for _ in range(ell)]
        z = [[0] * t for _ in range(ell)]
        if c:
            # stores its common sources in plain; |C| = D = ell here
            for r, k in enumerate(c[:ell]):
                a[r][k - 1] = 1
        else:
            blk = fresh[g.name(n)]
            for r in range(ell):
                z[r][blk.start + r] = 1
        A[n] = Matrix.from_rows(a, q, K)
        B[n] = Matrix.from_rows(z, q, t)
    return LinearCode(q, K, 1, ell, t, A, B, blocks)


def difference_matrices(code: LinearCode, g: StorageGraph):
    """``(edge, H)`` for every qualified edge between non-degenerate nodes of the 1/D layout.

    ``H`` is ``A_i - A_j`` restricted to the desired source columns.
    """
    deg = degenerate_nodes(g)
    for e in g.qualified_edges:
        if e.u in deg or e.v in deg:
            continue
        cols = [c for k in sorted(e.label) for c in code.source_columns(k)]
        yield e, (code.A[e.u] - code.A[e.v]).columns(cols)


def construct_d1(g: StorageGraph) -> LinearCode:
    if g.D != 1:
        raise ConstructionRefused(f"the explicit scheme needs D = 1, got D = {g.D}")
    w = find_internal_edge(g)
    if w is not None:
        raise ConstructionRefused(
            f"G^[{w.k}] has internal qualified edge {{{g.name(w.edge.u)},{g.name(w.edge.v)}}}", w)
    ublocks = unqualified_blocks(g)
    max_u = max((len(b) for per_k in ublocks for b in per_k), default=1)
    q = next_prime_above(max(1, max_u))
    coeffs = [[[(u + 1,) for u in range(len(b))] for b in per_k] for per_k in ublocks]
    return assemble_aligned(g, q, 1, coeffs)


def construct_general(g: StorageGraph, seed: int = 0, q_override: int | None = None,
                      retries: int = RETRY_BUDGET) -> LinearCode:
    applicable, holds, w = check_one_over_d_condition(g)
    if not applicable:
        raise ConstructionRefused(
            "the 1/D scheme needs a non-empty non-degenerate subgraph whose nodes have no common source")
    if not holds:
        raise ConstructionRefused(
            f"G^[{w.k}] has internal qualified edge {{{g.name(w.edge.u)},{g.name(w.edge.v)}}}", w)
    D = g.D
    q = check_modulus(q_override) if q_override else next_prime_above(D * len(g.qualified_edges))
    rng = _rng(seed)
    ublocks = unqualified_blocks(g)
    for attempt in range(1, retries + 1):
        coeffs = [[[tuple(int(x) for x in rng.integers(0, q, D)) for _ in b] for b in per_k]
                  for per_k in ublocks]
        code = assemble_aligned(g, q, D, coeffs)
        if all(det(h).value for _, h in difference_matrices(code, g)):
            return LinearCode(code.q, code.K, code.s, code.ell, code.t, code.A, code.B,
                              code.noise_blocks, attempt)
    raise ConstructionFailed(f"no invertible draw over F_{q} in {retries} attempts", q, retries)


def stacked_desired(code: LinearCode, g: StorageGraph, e) -> Matrix:
    cols = [c for k in sorted(e.label) for c in code.source_columns(k)]
    return vstack(code.A[e.u], code.A[e.v]).columns(cols)


def construct_2overD(g: StorageGraph, seed: int = 0, q_override: int | None = None,
                     retries: int = RETRY_BUDGET) -> LinearCode:
    holds, w = check_cover_condition(g)
    if not holds:
        where = g.name(w.node) if hasattr(w, "node") else f"{{{g.name(w.edge.u)},{g.name(w.edge.v)}}}"
        raise ConstructionRefused(f"common-source cover condition {w.condition} fails at {where}", w)
    D, K, s = g.D, g.K, 2
    q = check_modulus(q_override) if q_override else next_prime_above(2 * D * len(g.edges))
    rng = _rng(seed)
    common = {n: sorted(common_sources(g, n)) for n in g.nodes}
    for attempt in range(1, retries + 1):
        A = {}
        for n in g.nodes:
            h = rng.integers(0, q, (D, s * len(common[n])))
            rows = [[0] * (K * s) for _ in range(D)]
            for j, k in enumerate(common[n]):
                for r in range(D):
                    for x in range(s):
                        rows[r][(k - 1) * s + x] = int(h[r, j * s + x])
            A[n] = Matrix.from_rows(rows, q, K * s)
        B = {n: Matrix.zeros(D, 0, q) for n in g.nodes}
        code = LinearCode(q, K, s, D, 0, A, B, (), attempt)
        if all(det(stacked_desired(code, g, e)).value for e in g.edges):
            return code
    raise ConstructionFailed(f"no invertible draw over F_{q} in {retries} attempts", q, retries)


# Hand-built reference codes, keyed by fixture name.

def _fig3() -> LinearCode:
    q = 5
    src = {1: (1, 1), 2: (2, 1), 3: (2, 2), 4: (1, 1), 5: (3, 1), 6: (3, 2)}
    A = {n: Matrix.from_rows([c], q) for n, c in src.items()}
    B = {n: Matrix.from_rows([[1]], q) for n in src}
    return LinearCode(q, 2, 1, 1, 1, A, B, (NoiseBlock(0, 1, "Q1"),))


def _fig5() -> LinearCode:
    q = 3
    # per node: coefficient vectors of W1, W2, W3
    src = {
        1: ((1, 1), (0, 2), (2, 1)),
        2: ((2, 2), (1, 1), (0, 1)),
        3: ((2, 2), (2, 1), (0, 2)),
        4: ((0, 1), (1, 1), (2, 1)),
        5: ((0, 1), (1, 1), (2, 1)),
        6: ((1, 1), (2, 1), (0, 1)),
        7: ((0, 1), (0, 2), (0, 2)),
        8: ((2, 2), (1, 1), (0, 1)),
    }
    A = {n: Matrix.from_rows([[h[r] for h in hs] for r in range(2)], q) for n, hs in src.items()}
    B = {n: Matrix.identity(2, q) for n in src}
    return LinearCode(q, 3, 1, 2, 2, A, B, (NoiseBlock(0, 2, "Q1"),))


def _fig6() -> LinearCode:
    q = 3
    src = {1: (1, 0, 0), 2: (1, 0, 1), 3: (0, 1, 0), 4: (1, 1, 0), 5: (1, 2, 0), 6: (0, 0, 1)}
    A = {n: Matrix.from_rows([c], q) for n, c in src.items()}
    B = {n: Matrix.zeros(1, 0, q) for n in src}
    return LinearCode(q, 3, 1, 1, 0, A, B)


FIXTURE_CODES = {"fig3": _fig3, "fig5": _fig5, "fig6": _fig6}


def fixture_code(name: str) -> LinearCode:
    try:
        return FIXTURE_CODES[name]()
    except KeyError:
        raise KeyError(f"unknown fixture code {name!r}; expected one of {sorted(FIXTURE_CODES)}") from None
