"""Acceptance suite.

One test per criterion; each prints a single ``criterion N: PASS|FAIL`` line
with a short detail string.  The slow ones (J(9,4) and J(8,4) searches) take
a few minutes on one core.
"""
import time
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb

import pytest

from jeqp.constructions import available_constructions, construction
from jeqp.core import GraphParams, eigenvalue, johnson
from jeqp.eigenfn import (Kind, VertexFunction, classify_form, cross_edge_audit,
                          difference_census, is_eigenfunction, pairs_lower_bound,
                          partial_difference, reconstruct, standard_form)
from jeqp.partitions import QuotientMatrix, admissible_matrices, antipodal_closed, verify_equitable
from jeqp.search import (SearchSpec, Status, check_f3_differences, check_large_block,
                         classify_balanced, enumerate_partitions)

import oracles

pytestmark = pytest.mark.slow


def report(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")


def expected_matrix(i, w):
    """Quotient matrices of the four constructions, written out independently."""
    if i == 1:
        return QuotientMatrix(w * w - 3 * w + 2, 3 * w - 2, w, w * w - w)
    if i in (2, 3):
        return QuotientMatrix(w * w - 2 * w, 2 * w, 2 * w - 2, w * w - 2 * w + 2)
    return QuotientMatrix(w * w - 3 * w, 3 * w, w - 2, w * w - w + 2)


def construction_set():
    return [(i, w) for w in range(3, 9) for i in available_constructions(w)]


@lru_cache(maxsize=None)
def built(i, w):
    return construction(i, w)


@lru_cache(maxsize=None)
def balanced4():
    return classify_balanced(4)


def partition_function(p):
    m = verify_equitable(p)
    return m, VertexFunction.of_partition(p, m)


# -- 1 ----------------------------------------------------------------------

def test_criterion_1_construction_matrices(capsys):
    johnson.cache_clear()
    built.cache_clear()
    t0 = time.perf_counter()
    wrong = []
    for i, w in construction_set():
        if verify_equitable(built(i, w)) != expected_matrix(i, w):
            wrong.append((i, w))
    secs = time.perf_counter() - t0
    ok = not wrong and secs < 10.0
    report(capsys, 1, ok, f"{len(construction_set())} partitions, mismatches {wrong}, {secs:.2f}s")
    assert not wrong
    assert secs < 10.0


# -- 2 ----------------------------------------------------------------------

def test_criterion_2_j94_empty(capsys):
    P = GraphParams(9, 4)
    t0 = time.perf_counter()
    rows = []
    for m in admissible_matrices(P):
        out = enumerate_partitions(SearchSpec(P, m, budget_secs=3600.0))
        rows.append((m.b, out.status, len(out.partitions), out.nodes))
    secs = time.perf_counter() - t0
    ok = all(s is Status.COMPLETE and k == 0 for _, s, k, _ in rows) and secs < 3600.0
    detail = ", ".join(f"b={b}:{s.value}/{k}" for b, s, k, _ in rows)
    report(capsys, 2, ok, f"{detail}; {secs:.1f}s")
    assert ok


# -- 3 ----------------------------------------------------------------------

def audit_new_class(p):
    """Names of the audits a partition fails."""
    failed = []
    m, f = partition_function(p)
    if antipodal_closed(p) is not True:
        failed.append("antipodal")
    if not cross_edge_audit(p).equal:
        failed.append("cross-edge identity")
    lam1 = eigenvalue(GraphParams(p.params.n - 2, p.params.w - 1), 1)
    for i, j in combinations(range(1, p.params.n + 1), 2):
        d = partial_difference(f, i, j)
        if not d.is_zero() and is_eigenfunction(d, lam1) is not True:
            failed.append(f"difference ({i},{j}) eigenfunction")
            break
    census = difference_census(p)
    if not census.routed and not census.consistent:
        failed.append("difference census")
    if not check_f3_differences(p):
        failed.append("F3 differences imply the parity construction")
    return failed


def test_criterion_3_w4_classification(capsys):
    rep = balanced4()
    realized = set(rep.realized_b)
    problems = []
    lines = []
    for row in rep.rows:
        for p, match in zip(row.outcome.partitions, row.matches):
            if match:
                lines.append(f"b={row.matrix.b} C{match}")
                continue
            failed = audit_new_class(p)
            lines.append(f"b={row.matrix.b} new{'' if not failed else ' failing ' + '/'.join(failed)}")
            if failed:
                problems.append((row.matrix.b, p.membership_string(), failed))
    ok = rep.status is Status.COMPLETE and realized <= {8, 10, 12} and not problems
    report(capsys, 3, ok, f"status {rep.status.value}, b {sorted(realized)}, classes: " + "; ".join(lines))
    assert rep.status is Status.COMPLETE
    assert realized <= {8, 10, 12}
    assert not problems, problems


# -- 4 ----------------------------------------------------------------------

def test_criterion_4_differences_are_eigenfunctions(capsys):
    bad = []
    count = 0
    for i, w in construction_set():
        _, f = partition_function(built(i, w))
        lam1 = eigenvalue(GraphParams(2 * w - 2, w - 1), 1)
        for j1, j2 in combinations(range(1, 2 * w + 1), 2):
            d = partial_difference(f, j1, j2)
            count += 1
            if d.is_zero():
                continue
            if is_eigenfunction(d, lam1) is not True:
                bad.append((i, w, j1, j2))
    report(capsys, 4, not bad, f"{count} differences, failures {bad[:5]}")
    assert not bad


# -- 5 ----------------------------------------------------------------------

def test_criterion_5_cross_edge_identity(capsys):
    parts = [(f"C{i}(w={w})", built(i, w)) for i, w in construction_set()]
    for row in balanced4().rows:
        parts += [(f"J(8,4) b={row.matrix.b} #{k}", p) for k, p in enumerate(row.outcome.partitions)]
    bad = []
    for name, p in parts:
        m = verify_equitable(p)
        audit = cross_edge_audit(p)
        brute = oracles.cross_edges(p.params.n, p.params.w, p.in_c1.tolist())
        expect = Fraction(m.b * m.c, m.b + m.c) * comb(p.params.n, p.params.w)
        if not (audit.equal and brute == expect):
            bad.append(name)
    report(capsys, 5, not bad, f"{len(parts)} partitions, failures {bad}")
    assert not bad


# -- 6 ----------------------------------------------------------------------

def canonical_witness(kind, n):
    if kind is Kind.F3:
        return (1,)
    if kind is Kind.F4:
        return tuple(range(1, n // 2 + 1))
    return (1, 2)


def roundtrip_cases():
    for n, w in [(8, 4), (6, 3), (4, 2)]:
        for kind in (Kind.F1, Kind.F2, Kind.F3, Kind.F4):
            if kind is Kind.F4 and w != 2:
                continue   # F4 only lives on J(n, 2)
            yield GraphParams(n, w), kind
    for n in (6, 8):
        yield GraphParams(n, 2), Kind.F4


def test_criterion_6_classifier(capsys):
    bad = []
    notes = []
    checked = 0
    for P, kind in roundtrip_cases():
        wit = canonical_witness(kind, P.n)
        base = standard_form(kind, P, wit)
        if is_eigenfunction(base, eigenvalue(P, 1)) is not True:
            bad.append((P.n, P.w, kind.value, "not an eigenfunction"))
        for scale in (1, -3, 5):
            f = base.scaled(scale)
            form = classify_form(f)
            checked += 1
            if reconstruct(form, P) != f:
                bad.append((P.n, P.w, kind.value, scale, "no round trip"))
                continue
            if kind is Kind.F4 and P.w == 2 and P.n == 4:
                # on J(4,2) the F4 function on {1,2} is the F2 function on (1,2)
                same = standard_form(Kind.F2, P, (1, 2)) == base
                if not (same and form.kind is Kind.F2 and form.witness == (1, 2)
                        and form.scale == scale):
                    bad.append((4, 2, "F4", scale, form))
                else:
                    notes.append("J(4,2) F4 = F2")
                continue
            if (form.kind, form.witness, form.scale) != (kind, wit, scale):
                bad.append((P.n, P.w, kind.value, scale, form))
    others = []
    kinds = set()
    for i, w in construction_set():
        _, f = partition_function(built(i, w))
        for j1, j2 in combinations(range(1, 2 * w + 1), 2):
            k = classify_form(partial_difference(f, j1, j2)).kind
            kinds.add(k.value)
            if k not in (Kind.ZERO, Kind.F1, Kind.F2, Kind.F3):
                others.append((i, w, j1, j2, k.value))
    ok = not bad and not others
    report(capsys, 6, ok, f"{checked} round trips, difference kinds {sorted(kinds)}, "
                          f"{sorted(set(notes))}, failures {bad + others}")
    assert not bad
    assert not others


# -- 7 ----------------------------------------------------------------------

def test_criterion_7_pairs_bound(capsys):
    quoted = {(14, 8): 48, (14, 6): 60, (16, 10): 60}
    got = {k: pairs_lower_bound(*k) for k in quoted}
    violations = [(N, s) for N in range(2, 17) for s in range(1, N)
                  if pairs_lower_bound(N, s) > oracles.min_pair_sum(N, s)]
    ok = got == quoted and not violations
    report(capsys, 7, ok, f"values {got}, bound violations {violations}")
    assert got == quoted
    assert not violations


# -- 8 ----------------------------------------------------------------------

def test_criterion_8_structural_checks(capsys):
    t0 = time.perf_counter()
    failures = []
    for w in range(4, 7):
        for i in available_constructions(w):
            p = built(i, w)
            if not check_f3_differences(p):
                failures.append(f"F3 check C{i}(w={w})")
            if w >= 5 and not check_large_block(p):
                failures.append(f"large-block check C{i}(w={w})")
    secs = time.perf_counter() - t0
    ok = not failures and secs < 300.0
    report(capsys, 8, ok, f"failures {failures}, {secs:.1f}s")
    assert secs < 300.0
    assert not failures


# -- 9 ----------------------------------------------------------------------

def test_criterion_9_search_matches_bruteforce(capsys):
    P = GraphParams(6, 3)
    brute = oracles.all_equitable_2partitions(6, 3)
    bad = []
    total = 0
    for m in admissible_matrices(P):
        out = enumerate_partitions(SearchSpec(P, m, symmetry=False, keep_labeled=True))
        expect = brute.get((m.a, m.b, m.c, m.d), set())
        total += len(expect)
        if out.status is not Status.COMPLETE or set(out.labeled) != expect:
            bad.append(m.b)
    report(capsys, 9, not bad, f"{total} labelled partitions over {len(admissible_matrices(P))} matrices, "
                               f"mismatched b {bad}")
    assert not bad
