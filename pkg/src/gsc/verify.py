"""Exact verification of linear codes against a storage graph.

Two independent routes decide each edge:

``rank``
    Correctness holds iff every desired-symbol selector lies in the row space
    of ``[A_i; A_j | B_i; B_j]``; security holds iff the undesired source
    columns lie in the column space of the noise columns.

``exhaustive``
    Enumerate every (source, noise) world, count the joint outcomes of
    ``(V_i, V_j, W)`` with integers, and test that the desired sources are a
    function of the pair and that the counts factorize (zero conditional
    mutual information).

Neither route uses floating point or tolerances.
"""

from __future__ import annotations

import enum
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .codegen import LinearCode
from .gf import Matrix, hstack, rank, solve_left, vstack
from .graph import Edge, StorageGraph, common_sources

DEFAULT_ENUM_CAP = 2**24
CHUNK = 1 << 16


class VerificationError(Exception):
    pass


class CodeDimensionError(VerificationError, ValueError):
    pass


class EnumerationCapError(VerificationError):
    def __init__(self, required: int, cap: int):
        super().__init__(f"exhaustive check needs {required} worlds, cap is {cap}")
        self.required = required
        self.cap = cap


class ModeDisagreementError(VerificationError, AssertionError):
    pass


class Outcome(enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    NOT_REQUIRED = "not_required"


@dataclass
class EdgeReport:
    edge_index: int
    edge: Edge
    correctness: Outcome
    security: Outcome
    mode: str
    undecodable: int | None = None  # first desired source that cannot be recovered
    leaking: int | None = None  # first undesired source that leaks
    worlds: int | None = None
    decoder: Matrix | None = None

    @property
    def passed(self) -> bool:
        return self.correctness is not Outcome.FAIL and self.security is Outcome.PASS

    def outcome(self) -> tuple[Outcome, Outcome]:
        return self.correctness, self.security


@dataclass
class VerificationReport:
    mode: str
    edges: list[EdgeReport] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.edges)

    @property
    def failures(self) -> list[EdgeReport]:
        return [r for r in self.edges if not r.passed]

    @property
    def worlds(self) -> int:
        return sum(r.worlds or 0 for r in self.edges)


def enum_cap_from_env() -> int:
    raw = os.environ.get("GSC_ENUM_CAP")
    return int(raw) if raw else DEFAULT_ENUM_CAP


def check_dimensions(code: LinearCode, g: StorageGraph) -> None:
    if code.K != g.K:
        raise CodeDimensionError(f"code has K={code.K}, graph has K={g.K}")
    if set(code.nodes) != set(g.nodes):
        missing = sorted(set(g.nodes) - set(code.nodes))
        extra = sorted(set(code.nodes) - set(g.nodes))
        raise CodeDimensionError(f"node mismatch: missing {missing}, unexpected {extra}")


def _desired_columns(code: LinearCode, label) -> tuple[list[int], list[int]]:
    want = [c for k in sorted(label) for c in code.source_columns(k)]
    rest = [c for c in range(code.K * code.s) if c not in set(want)]
    return want, rest


def check_edge_rank(code: LinearCode, g: StorageGraph, e: Edge) -> EdgeReport:
    check_dimensions(code, g)
    m = vstack(code.A[e.u], code.A[e.v])
    mz = vstack(code.B[e.u], code.B[e.v])
    full = hstack(m, mz)
    report = EdgeReport(g.edge_index(e.u, e.v), e, Outcome.NOT_REQUIRED, Outcome.PASS, "rank")

    if e.label:
        report.correctness = Outcome.PASS
        for k in sorted(e.label):
            sel = _selector(code, code.source_columns(k))
            if rank(vstack(full, sel)) != rank(full):
                report.correctness = Outcome.FAIL
                report.undecodable = k
                break
        if report.correctness is Outcome.PASS:
            want, _ = _desired_columns(code, e.label)
            report.decoder = solve_left(full, _selector(code, want))

    rz = rank(mz) if code.t else 0
    for k in range(1, code.K + 1):
        if k in e.label:
            continue
        cols = m.columns(code.source_columns(k))
        joined = hstack(cols, mz) if code.t else cols
        if rank(joined) != rz:
            report.security = Outcome.FAIL
            report.leaking = k
            break
    return report


def _selector(code: LinearCode, cols) -> Matrix:
    width = code.K * code.s + code.t
    rows = []
    for c in cols:
        r = [0] * width
        r[c] = 1
        rows.append(r)
    return Matrix.from_rows(rows, code.q, width)


# -- exhaustive route ---------------------------------------------------------

def _digits(idx: np.ndarray, q: int, n: int) -> np.ndarray:
    out = np.empty((idx.size, n), dtype=np.int64)
    x = idx.copy()
    for j in range(n - 1, -1, -1):
        out[:, j] = x % q
        x //= q
    return out


_KEY_LIMIT = 1 << 62


def _keys(rows: np.ndarray) -> np.ndarray:
    """Injective int64 key per row (mixed radix, compacted if it would overflow)."""
    key = np.zeros(len(rows), dtype=np.int64)
    size = 1
    for j in range(rows.shape[1]):
        col = rows[:, j]
        radix = int(col.max()) + 1 if col.size else 1
        if size * radix >= _KEY_LIMIT:
            uniq, key = np.unique(key, return_inverse=True)
            key = key.reshape(-1).astype(np.int64)
            size = len(uniq)
        key = key * radix + col
        size *= radix
    return key


def _sum_by(gid: np.ndarray, n: int, counts: np.ndarray) -> np.ndarray:
    """Integer group sums of ``counts`` by group id."""
    order = np.argsort(gid, kind="stable")
    g = gid[order]
    starts = np.flatnonzero(np.concatenate(([True], g[1:] != g[:-1])))
    out = np.zeros(n, dtype=np.int64)
    if g.size:
        out[g[starts]] = np.add.reduceat(counts[order], starts)
    return out


def _collapse(rows: np.ndarray, counts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Merge duplicate rows, summing their counts."""
    _, first, inv = np.unique(_keys(rows), return_index=True, return_inverse=True)
    inv = inv.reshape(-1)
    return rows[first], _sum_by(inv, len(first), counts)


def joint_counts(code: LinearCode, nodes: list[int], noise_cols: list[int],
                 enum_cap: int | None = None) -> tuple[np.ndarray, np.ndarray, int]:
    """Integer histogram of ``(V_nodes..., W)`` over all worlds.

    Only the noise columns in ``noise_cols`` are enumerated; the others do not
    enter any of the listed nodes and would scale every count by the same
    factor. Returns ``(rows, counts, worlds)``; each row is the stored symbols
    of ``nodes`` followed by all ``K*s`` source symbols.
    """
    cap = enum_cap_from_env() if enum_cap is None else enum_cap
    q = code.q
    nw = code.K * code.s
    n = nw + len(noise_cols)
    worlds = q**n
    if worlds > cap:
        raise EnumerationCapError(worlds, cap)
    gen = np.array(
        [list(code.A[v].row(r)) + [code.B[v][r, c] for c in noise_cols]
         for v in nodes for r in range(code.ell)],
        dtype=np.int64,
    ).reshape(len(nodes) * code.ell, n)
    rows, counts = [], []
    for start in range(0, worlds, CHUNK):
        x = _digits(np.arange(start, min(worlds, start + CHUNK), dtype=np.int64), q, n)
        obs = np.concatenate([(x @ gen.T) % q, x[:, :nw]], axis=1)
        r, c = _collapse(obs, np.ones(len(obs), dtype=np.int64))
        rows.append(r)
        counts.append(c)
    if len(rows) == 1:
        return rows[0], counts[0], worlds
    r, c = _collapse(np.concatenate(rows), np.concatenate(counts))
    return r, c, worlds


def _group_ids(rows: np.ndarray, cols: list[int]) -> tuple[np.ndarray, int]:
    if not cols:
        return np.zeros(len(rows), dtype=np.int64), 1
    uniq, inv = np.unique(_keys(rows[:, cols]), return_inverse=True)
    return inv.reshape(-1), len(uniq)


def _marginal(gid: np.ndarray, n: int, counts: np.ndarray) -> np.ndarray:
    return _sum_by(gid, n, counts)


def factorizes(rows: np.ndarray, counts: np.ndarray, x: list[int], y: list[int], z: list[int]) -> bool:
    """True iff ``N(x,y,z) N(z) == N(x,z) N(y,z)`` on every cell, absent cells included.

    This is exactly ``I(X; Y | Z) = 0`` for the empirical distribution.
    """
    zid, nz = _group_ids(rows, z)
    xz, nxz = _group_ids(rows, x + z)
    yz, nyz = _group_ids(rows, y + z)
    n_z = _marginal(zid, nz, counts)
    n_xz = _marginal(xz, nxz, counts)
    n_yz = _marginal(yz, nyz, counts)
    # present cells; rows are already unique in (x, y, z) up to other columns
    xyz, nxyz = _group_ids(rows, x + y + z)
    n_xyz = _marginal(xyz, nxyz, counts)
    first = np.zeros(nxyz, dtype=np.int64)
    first[xyz] = np.arange(len(rows))
    if np.any(n_xyz * n_z[zid[first]] != n_xz[xz[first]] * n_yz[yz[first]]):
        return False
    # absent cells: every (x, z) group must meet every y seen with that z
    cells_per_xz = np.bincount(xz[first], minlength=nxz)
    ys_per_z = np.bincount(zid[_first_of(yz, nyz)], minlength=nz)
    z_of_xz = np.zeros(nxz, dtype=np.int64)
    z_of_xz[xz] = zid
    return bool(np.all(cells_per_xz == ys_per_z[z_of_xz]))


def _first_of(gid: np.ndarray, n: int) -> np.ndarray:
    first = np.zeros(n, dtype=np.int64)
    first[gid[::-1]] = np.arange(len(gid))[::-1]
    return first


def determines(rows: np.ndarray, x: list[int], y: list[int]) -> bool:
    """True iff the ``y`` columns are a function of the ``x`` columns over all present rows."""
    _, nx_ = _group_ids(rows, x)
    _, nxy = _group_ids(rows, x + y)
    return nx_ == nxy


def _used_noise(code: LinearCode, nodes) -> list[int]:
    return [c for c in range(code.t)
            if any(code.B[v][r, c] for v in nodes for r in range(code.ell))]


def check_edge_exhaustive(code: LinearCode, g: StorageGraph, e: Edge,
                          enum_cap: int | None = None) -> EdgeReport:
    check_dimensions(code, g)
    nodes = [e.u, e.v]
    rows, counts, worlds = joint_counts(code, nodes, _used_noise(code, nodes), enum_cap)
    nv = 2 * code.ell
    vcols = list(range(nv))

    def wcols(ks):
        return [nv + c for k in ks for c in code.source_columns(k)]

    report = EdgeReport(g.edge_index(e.u, e.v), e, Outcome.NOT_REQUIRED, Outcome.PASS,
                        "exhaustive", worlds=worlds)
    desired = sorted(e.label)
    rest = [k for k in range(1, code.K + 1) if k not in e.label]
    if desired:
        report.correctness = Outcome.PASS
        if not determines(rows, vcols, wcols(desired)):
            report.correctness = Outcome.FAIL
            report.undecodable = next(k for k in desired if not determines(rows, vcols, wcols([k])))
    if rest and not factorizes(rows, counts, vcols, wcols(rest), wcols(desired)):
        report.security = Outcome.FAIL
        # witness: first source that leaks given every other source
        report.leaking = next(
            (k for k in rest
             if not factorizes(rows, counts, vcols, wcols([k]),
                               wcols([j for j in range(1, code.K + 1) if j != k]))),
            None)
    return report


def check_node_independence(code: LinearCode, g: StorageGraph, n: int,
                            enum_cap: int | None = None) -> tuple[bool, bool]:
    """Whether node ``n`` is independent of its non-common sources.

    Returns ``(conditional, unconditional)``: the first conditions on the
    common sources, the second does not.
    """
    rows, counts, _ = joint_counts(code, [n], _used_noise(code, [n]), enum_cap)
    nv = code.ell
    common = sorted(common_sources(g, n))
    other = [k for k in range(1, code.K + 1) if k not in common]

    def wcols(ks):
        return [nv + c for k in ks for c in code.source_columns(k)]

    vcols = list(range(nv))
    if not other:
        return True, True
    return (factorizes(rows, counts, vcols, wcols(other), wcols(common)),
            factorizes(rows, counts, vcols, wcols(other), []))


def decode_worlds(code: LinearCode, e: Edge, decoder: Matrix) -> bool:
    """Apply ``decoder`` to ``[V_i; V_j]`` in every world; True iff it returns the desired symbols."""
    q = code.q
    n = code.K * code.s + code.t
    worlds = q**n
    if worlds > enum_cap_from_env():
        raise EnumerationCapError(worlds, enum_cap_from_env())
    gen = np.array(hstack(vstack(code.A[e.u], code.A[e.v]),
                          vstack(code.B[e.u], code.B[e.v])).to_rows(), dtype=np.int64)
    r = np.array(decoder.to_rows(), dtype=np.int64).reshape(decoder.rows, decoder.cols)
    want, _ = _desired_columns(code, e.label)
    for start in range(0, worlds, CHUNK):
        x = _digits(np.arange(start, min(worlds, start + CHUNK), dtype=np.int64), q, n)
        v = (x @ gen.T) % q
        if np.any((v @ r.T) % q != x[:, want]):
            return False
    return True


def verify_code(code: LinearCode, g: StorageGraph, mode: str = "both",
                enum_cap: int | None = None) -> VerificationReport:
    if mode not in ("rank", "exhaustive", "both"):
        raise ValueError(f"unknown mode {mode!r}")
    check_dimensions(code, g)
    t0 = time.perf_counter()
    report = VerificationReport(mode)
    for e in g.edges:
        if mode == "rank":
            report.edges.append(check_edge_rank(code, g, e))
            continue
        ex = check_edge_exhaustive(code, g, e, enum_cap)
        if mode == "both":
            rk = check_edge_rank(code, g, e)
            if rk.outcome() != ex.outcome():
                raise ModeDisagreementError(
                    f"edge {{{g.name(e.u)},{g.name(e.v)}}}: rank says {rk.outcome()}, "
                    f"exhaustive says {ex.outcome()}")
            ex.mode = "both"
            ex.decoder = rk.decoder
            ex.undecodable = ex.undecodable if ex.undecodable is not None else rk.undecodable
            ex.leaking = ex.leaking if ex.leaking is not None else rk.leaking
        report.edges.append(ex)
    report.elapsed = time.perf_counter() - t0
    return report
