import pytest

from jeqp.canon import canonical_form, equivalent
from jeqp.constructions import construction, construction1, construction2, construction3, construction4
from jeqp.core import GraphParams, ParameterError
from jeqp.partitions import QuotientMatrix, TwoPartition, admissible_matrices, verify_equitable
from jeqp.search import (SearchSpec, Status, audit_constructions, check_f3_differences,
                         check_large_block, classify_balanced, dedupe_classes,
                         default_budget_secs, enumerate_partitions, single_coordinate_differences)

import oracles

J63 = GraphParams(6, 3)


def run(params, matrix, **kw):
    return enumerate_partitions(SearchSpec(params, matrix, **kw))


def test_j63_construction1_class():
    out = run(J63, QuotientMatrix(2, 7, 3, 6))
    assert out.status is Status.COMPLETE
    assert any(equivalent(p, construction1(3)) for p in out.partitions)


def test_j63_construction4_class():
    out = run(J63, QuotientMatrix(0, 9, 1, 8))
    assert out.status is Status.COMPLETE
    assert [canonical_form(construction4(3)).membership] == [p.membership_string() for p in out.partitions]


@pytest.mark.parametrize("b", range(5, 10))
def test_j63_labeled_solutions_match_bruteforce(b):
    m = QuotientMatrix.from_b(J63, b)
    brute = oracles.all_equitable_2partitions(6, 3).get((m.a, m.b, m.c, m.d), set())
    out = run(J63, m, symmetry=False, keep_labeled=True)
    assert out.status is Status.COMPLETE
    assert set(out.labeled) == brute
    assert out.solutions == len(brute)


def test_non_second_eigenvalue_matrix_matches_bruteforce():
    m = QuotientMatrix(3, 6, 6, 3)   # a - c = -3, the last eigenvalue of J(6,3)
    brute = oracles.all_equitable_2partitions(6, 3)[(3, 6, 6, 3)]
    out = run(J63, m, symmetry=False, keep_labeled=True)
    assert set(out.labeled) == brute


def test_symmetry_and_threads_do_not_change_classes():
    for m in admissible_matrices(J63):
        ref = [p.membership_string() for p in run(J63, m).partitions]
        off = [p.membership_string() for p in run(J63, m, symmetry=False).partitions]
        par = [p.membership_string() for p in run(J63, m, threads=2, split_depth=3).partitions]
        assert ref == off == par
        assert ref == sorted(ref)


def test_class_counts_j63():
    counts = {m.b: len(run(J63, m).partitions) for m in admissible_matrices(J63)}
    assert counts == {5: 2, 6: 3, 7: 2, 8: 1, 9: 1}


def test_emitted_partitions_are_sound():
    for m in admissible_matrices(J63):
        for p in run(J63, m).partitions:
            assert verify_equitable(p) in (m, m.swapped())


def test_infeasible_cell_size_is_certified():
    P = GraphParams(9, 4)
    out = run(P, QuotientMatrix.from_b(P, 9))
    assert out.status is Status.COMPLETE and out.partitions == [] and out.nodes == 0
    assert "not an integer" in out.note


def test_non_eigenvalue_matrix_is_empty():
    out = run(J63, QuotientMatrix(4, 5, 4, 5))   # a - c = 0 is not an eigenvalue
    assert out.status is Status.COMPLETE and out.partitions == []
    assert "not an eigenvalue" in out.note


def test_budget_exhaustion_is_reported():
    P = GraphParams(8, 4)
    out = run(P, QuotientMatrix.from_b(P, 10), budget_nodes=50)
    assert out.status is Status.BUDGET_EXHAUSTED
    out = run(P, QuotientMatrix.from_b(P, 10), budget_secs=0.0)
    assert out.status is Status.BUDGET_EXHAUSTED
    out = run(P, QuotientMatrix.from_b(P, 10), budget_nodes=50, threads=2, split_depth=2)
    assert out.status is Status.BUDGET_EXHAUSTED


def test_budget_env(monkeypatch):
    monkeypatch.setenv("JEQP_BUDGET_SECS", "12.5")
    assert default_budget_secs() == 12.5
    monkeypatch.delenv("JEQP_BUDGET_SECS")
    assert default_budget_secs() == 3600.0


def test_search_request_validation():
    with pytest.raises(ParameterError):
        SearchSpec(J63, QuotientMatrix(8, 8, 6, 10))
    with pytest.raises(ParameterError):
        SearchSpec(GraphParams(7, 3), QuotientMatrix.from_b(GraphParams(7, 3), 9), antipodal=True).use_antipodal


def test_without_spectral_equations_same_result():
    for b in (6, 7):
        m = QuotientMatrix.from_b(J63, b)
        a = run(J63, m, spectral=False, symmetry=False, keep_labeled=True)
        b_ = run(J63, m, symmetry=False, keep_labeled=True)
        assert a.labeled == b_.labeled


def test_dedupe_orbit_cap_only_affects_speed():
    out = run(J63, QuotientMatrix.from_b(J63, 6), symmetry=False, keep_labeled=True)
    parts = [TwoPartition.from_string(J63, s) for s in out.labeled]
    full, _ = dedupe_classes(parts)
    capped, _ = dedupe_classes(parts, orbit_cap=0)
    assert [p.membership_string() for p in full] == [p.membership_string() for p in capped]


def test_j84_construction4_matrix():
    P = GraphParams(8, 4)
    out = run(P, QuotientMatrix.from_b(P, 12))
    assert out.status is Status.COMPLETE
    assert len(out.partitions) == 1 and equivalent(out.partitions[0], construction4(4))


# -- structural checks ----------------------------------------------------------

def brute_f3_pairs(p):
    """Pairs (i, j) whose difference is +-(b+c) times (2 x_k - 1) for some k."""
    from itertools import combinations
    n, w = p.params.n, p.params.w
    m = verify_equitable(p)
    sups = oracles.colex_supports(n, w)
    val = {s: (m.b if inside else -m.c) for s, inside in zip(sups, p.in_c1)}
    pairs = []
    for i, j in combinations(range(1, n + 1), 2):
        rest = [x for x in range(1, n + 1) if x not in (i, j)]
        diffs = {s: val[tuple(sorted(s + (i,)))] - val[tuple(sorted(s + (j,)))]
                 for s in combinations(rest, w - 1)}
        for k in rest:
            signs = {d * (1 if k in s else -1) for s, d in diffs.items()}
            if len(signs) == 1 and abs(next(iter(signs))) == m.b + m.c:
                pairs.append((i, j))
                break
    return pairs


@pytest.mark.parametrize("i,w", [(1, 4), (2, 4), (4, 4), (1, 5), (3, 5)])
def test_single_coordinate_differences_bruteforce(i, w):
    p = construction(i, w)
    assert single_coordinate_differences(p) == brute_f3_pairs(p)


def test_f3_check_on_constructions():
    assert check_f3_differences(construction2(4)) is True
    assert check_f3_differences(construction4(4)) is True   # no F3 differences
    # Constructions 1 and 3 have F3 differences but are not the parity construction
    assert single_coordinate_differences(construction1(4)) == [(1, 4), (1, 5)]
    assert check_f3_differences(construction1(4)) is False
    assert check_f3_differences(construction3(5)) is False


def test_large_block_check():
    for i in (1, 2, 3, 4):
        assert check_large_block(construction(i, 5)) is True
    with pytest.raises(ParameterError):
        check_large_block(construction2(4))


def test_structural_checks_need_second_eigenvalue():
    from jeqp.constructions import coordinate_partition
    with pytest.raises(ParameterError):
        check_f3_differences(coordinate_partition(GraphParams(8, 4), 1))


def test_audit_mode_w7():
    report = classify_balanced(7)
    assert report.mode == "audit" and report.rows == []
    assert set(report.construction_checks) == {1, 2, 3, 4}
    for rec in report.construction_checks.values():
        assert rec["matrix_ok"] and rec["antipodal"]


def test_audit_constructions_fields():
    rec = audit_constructions(4)
    assert rec[2]["matrix"] == "[[8,8],[6,10]]" and rec[2]["block_sizes"] == [6, 2]
    with pytest.raises(ParameterError):
        classify_balanced(3)
