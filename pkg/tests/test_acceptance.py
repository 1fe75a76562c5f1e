"""End-to-end acceptance suite, one test per criterion.

Each test records a one-line verdict that the conftest hook prints in the
terminal summary, so ``pytest tests/test_acceptance.py`` ends with a
criterion-by-criterion PASS/FAIL table.
"""

import time
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from conftest import record
from gsc.classify import InternalEdgeWitness, VerdictKind, classify
from gsc.codegen import (
    RETRY_BUDGET,
    ConstructionFailed,
    ConstructionRefused,
    LinearCode,
    construct_2overD,
    construct_d1,
    construct_general,
    fixture_code,
)
from gsc.gf import Matrix, is_prime, next_prime_above
from gsc.graph import common_sources, nondegenerate_subgraph, qualified_components
from gsc.io import fixture_graph
from gsc.verify import (
    EnumerationCapError,
    check_edge_exhaustive,
    check_edge_rank,
    verify_code,
)
from helpers import a_entries, cover_graph, on_desired_column, one_over_d_graph, random_code, random_graph

FIXTURE_PAIRS = [("fig3", "F2", 125), ("fig5", "F1", 243), ("fig6", "F4", 27)]
# Largest per-edge enumeration used for randomly generated constructions.
CORPUS_WORLDS = 2**16


def test_criterion_1_fixture_classification():
    t0 = time.perf_counter()
    v = {name: classify(fixture_graph(name)) for name in ("F1", "F2", "F3", "F4")}
    elapsed = time.perf_counter() - t0
    w = v["F3"].witness
    checks = [
        v["F1"].kind is VerdictKind.EXACTLY_ONE_OVER_D and v["F1"].capacity == Fraction(1, 2),
        v["F2"].kind is VerdictKind.EXACTLY_ONE and v["F2"].capacity == 1,
        v["F3"].kind is VerdictKind.STRICTLY_LESS_THAN and v["F3"].bound == 1,
        isinstance(w, InternalEdgeWitness) and w.k == 1 and w.edge.ends == {2, 3},
        v["F4"].kind is VerdictKind.EXACTLY_TWO_OVER_D and v["F4"].capacity == 1 == Fraction(2, 2),
        elapsed < 1.0,
    ]
    ok = all(checks)
    record(1, ok, f"F1=1/2 F2=1 F3<1 witness {{V2,V3}} in G^[1] F4=1 ({elapsed:.3f}s)")
    assert ok, checks


def test_criterion_2_fixture_codes_verify():
    t0 = time.perf_counter()
    sizes = {}
    ok = True
    for code, graph, worlds in FIXTURE_PAIRS:
        report = verify_code(fixture_code(code), fixture_graph(graph), "both")
        sizes[code] = sorted({r.worlds for r in report.edges})
        ok &= report.passed and sizes[code] == [worlds]
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 1.0
    record(2, ok, f"worlds per edge {sizes} ({elapsed:.3f}s)")
    assert ok


def test_criterion_3_d1_reproduces_reference_code():
    g = fixture_graph("F2")
    c = construct_d1(g)
    report = verify_code(c, g, "both")
    ok = c == fixture_code("fig3") and report.passed and c.rate == 1
    record(3, ok, f"construct_d1(F2) == fig3 code, q={c.q}, both modes pass")
    assert ok


def test_criterion_4_general_on_f1():
    g = fixture_graph("F1")
    c = construct_general(g, seed=0)
    report = verify_code(c, g, "both")
    first = c.q == 17 and c.attempts <= RETRY_BUDGET and report.passed and c.rate == Fraction(1, 2)
    successes, attempts = 0, []
    for seed in range(100):
        try:
            code = construct_general(g, seed=seed)
        except ConstructionFailed:
            continue
        successes += verify_code(code, g, "rank").passed
        attempts.append(code.attempts)
    ok = first and successes >= 99
    record(4, ok, f"q=17, seed 0 verified in both modes ({report.elapsed:.1f}s); "
                  f"{successes}/100 seeds succeed, mean attempts {np.mean(attempts):.2f}")
    assert ok


def _smallest_working_q(build, start: int = 5):
    """First prime >= start at which ``build(q)`` succeeds; returns (q, code)."""
    q = start if is_prime(start) else next_prime_above(start)
    while True:
        try:
            return q, build(q)
        except ConstructionFailed:
            q = next_prime_above(q)


def test_criterion_5_two_over_d():
    g = fixture_graph("F4")
    c = construct_2overD(g, seed=0)
    default_ok = (c.s, c.t, c.rate) == (2, 0, 1) and verify_code(c, g, "rank").passed
    # q=37 needs 37^6 worlds per edge exhaustively, beyond the enumeration cap
    with pytest.raises(EnumerationCapError):
        check_edge_exhaustive(c, g, g.edges[0])
    q, small = _smallest_working_q(lambda q: construct_2overD(g, seed=0, q_override=q))
    both_ok = (small.s, small.t, small.rate) == (2, 0, 1) and verify_code(small, g, "both").passed
    try:
        construct_2overD(fixture_graph("F1"))
        refused = False
    except ConstructionRefused as exc:
        refused = exc.witness.node == 1
    ok = default_ok and both_ok and refused
    record(5, ok, f"F4: q={c.q} rank pass, q={q} both modes pass, s=2 t=0 rate 1; F1 refused at V1")
    assert ok


def _equivalence_pair(rng):
    g = random_graph(rng, n_max=5, K_max=3, D_max=2)
    q = int(rng.choice([2, 3, 5]))
    s = int(rng.integers(1, 3))
    if g.K * s > 8:
        s = 1
    ell = int(rng.integers(1, 3))
    # keep q^(Ks + t) within 5^7 for the largest field
    top = 8 if q < 5 else 7
    t = int(rng.integers(0, max(0, top - g.K * s) + 1))
    if rng.random() < 0.3 and g.K * s + 2 * ell <= top:
        # a structured code: every node shares one noise block, which often yields passing edges
        A = random_code(rng, g, q, s, ell, 0).A
        B = {n: Matrix.identity(ell, q) for n in g.nodes}
        c = LinearCode(q, g.K, s, ell, ell, A, B)
    else:
        c = random_code(rng, g, q, s, ell, t, density=float(rng.uniform(0.3, 0.9)))
    return g, c


def test_criterion_6_oracle_equivalence():
    rng = np.random.default_rng(20240601)
    t0 = time.perf_counter()
    pairs = edges = mismatches = 0
    outcomes = Counter()
    while pairs < 1000:
        g, c = _equivalence_pair(rng)
        assert c.K * c.s + c.t <= 8 and c.ell <= 2 and c.q in (2, 3, 5)
        for e in g.edges:
            rk, ex = check_edge_rank(c, g, e), check_edge_exhaustive(c, g, e)
            mismatches += rk.outcome() != ex.outcome()
            outcomes[tuple(o.value for o in rk.outcome())] += 1
            edges += 1
        pairs += 1
    elapsed = time.perf_counter() - t0
    passing = outcomes[("pass", "pass")] + outcomes[("not_required", "pass")]
    ok = mismatches == 0 and elapsed < 60 and passing > 0 and edges - passing > 0
    record(6, ok, f"{pairs} pairs, {edges} edges, {mismatches} disagreements, "
                  f"{passing} passing / {edges - passing} failing edges ({elapsed:.1f}s)")
    assert ok, (mismatches, elapsed, outcomes)


def _max_exponent(c, g) -> int:
    worst = 0
    for e in g.edges:
        used = {j for n in (e.u, e.v) for r in c.B[n].to_rows() for j, x in enumerate(r) if x}
        worst = max(worst, c.K * c.s + len(used))
    return worst


def _corpus_code(g, build):
    """Default-q code plus the largest-q code whose exhaustive check stays within CORPUS_WORLDS."""
    default = build(None)
    e = _max_exponent(default, g)
    if default.q ** e <= CORPUS_WORLDS:
        return default, default
    q = 2
    while next_prime_above(q) ** e <= CORPUS_WORLDS:
        q = next_prime_above(q)
    while True:
        try:
            return default, build(q)
        except ConstructionFailed:
            q = next_prime_above(q)


@pytest.fixture(scope="module")
def corpus():
    rng = np.random.default_rng(7)
    one = [one_over_d_graph(rng, n_max=8, K_max=3, D_max=2) for _ in range(200)]
    two = [cover_graph(rng, n_max=8, K_max=3, D_max=2) for _ in range(200)]
    built = []
    for i, g in enumerate(one):
        d, s = _corpus_code(g, lambda q, g=g, i=i: construct_general(g, seed=i, q_override=q))
        built.append(("general", g, d, s))
    for i, g in enumerate(two):
        d, s = _corpus_code(g, lambda q, g=g, i=i: construct_2overD(g, seed=i, q_override=q))
        built.append(("2overD", g, d, s))
    return built


def test_criterion_7_construction_soundness(corpus):
    t0 = time.perf_counter()
    failures = []
    qs = Counter()
    for scheme, g, default, small in corpus:
        want = Fraction(1, g.D) if scheme == "general" else Fraction(2, g.D)
        if not verify_code(default, g, "rank").passed or default.rate != want:
            failures.append((scheme, g, "default-q rank"))
        if not verify_code(small, g, "both").passed or small.rate != want:
            failures.append((scheme, g, "both modes"))
        qs[(scheme, small.q)] += 1
    elapsed = time.perf_counter() - t0
    n1 = sum(s == "general" for s, *_ in corpus)
    n2 = len(corpus) - n1
    ok = not failures and n1 >= 200 and n2 >= 200
    record(7, ok, f"{n1} 1/D graphs + {n2} 2/D graphs, {len(failures)} failures; "
                  f"exhaustive fields {dict(sorted(qs.items()))} ({elapsed:.1f}s)")
    assert ok, failures[:3]


def test_criterion_8_structural_invariants(corpus):
    violations = []
    for scheme, g, default, small in corpus:
        for c in {id(default): default, id(small): small}.values():
            if scheme == "general":
                gt = nondegenerate_subgraph(g)
                for block in qualified_components(gt):
                    if len({c.B[n] for n in block}) != 1:
                        violations.append(("noise alignment", g))
                    for e in gt.induced(block).edges:
                        if not e.qualified and (c.A[e.u] != c.A[e.v] or c.B[e.u] != c.B[e.v]):
                            violations.append(("coded-symbol alignment", g))
                cols = [{j for r in c.B[b[0]].to_rows() for j, x in enumerate(r) if x}
                        for b in qualified_components(gt)]
                if sum(map(len, cols)) != len(set().union(set(), *cols)):
                    violations.append(("disjoint noise blocks", g))
            else:
                if c.t != 0:
                    violations.append(("noise-free", g))
                for n in g.nodes:
                    allowed = {j for k in common_sources(g, n) for j in c.source_columns(k)}
                    rows = c.A[n].to_rows()
                    if any(x for r in rows for j, x in enumerate(r) if j not in allowed):
                        violations.append(("common sources only", g))
    ok = not violations
    record(8, ok, f"{2 * len(corpus)} codes checked, {len(violations)} violations")
    assert ok, violations[:3]


def test_criterion_9_mutation_detection():
    rng = np.random.default_rng(99)
    per = {}
    total = detected = 0
    for code_name, graph_name, _ in FIXTURE_PAIRS:
        code, g = fixture_code(code_name), fixture_graph(graph_name)
        positions = [p for p in a_entries(code) if on_desired_column(code, g, p[0], p[2])]
        hits = n = 0
        for _ in range(50):
            node, i, j = positions[rng.integers(len(positions))]
            old = code.A[node][i, j]
            new = int(rng.choice([v for v in range(code.q) if v != old]))
            mutant = code.with_entry("A", node, i, j, new)
            # mode "both" raises if rank and exhaustive ever disagree on an edge
            report = verify_code(mutant, g, "both")
            hits += not report.passed
            n += 1
        per[code_name] = (hits, n)
        total += n
        detected += hits
    rate = detected / total
    ok = rate >= 0.9
    detail = ", ".join(f"{k} {h}/{n}" for k, (h, n) in per.items())
    record(9, ok, f"{detected}/{total} = {rate:.1%} mutations detected by both modes ({detail})")
    assert ok
