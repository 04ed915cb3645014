from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmstein.combinatorics import (
    ALL_CLASSES,
    Motif,
    MotifClass,
    build,
    check_motif,
    class_counts,
    double_falling,
    enumerate_motifs,
    falling,
    parse_degrees,
    relation,
    success_probability,
)
from cmstein.errors import DegenerateN, OddTotal


def test_falling_examples():
    assert falling(5, 2) == 20
    assert falling(2, 3) == 0
    assert falling(0, 1) == 0


def test_double_falling_examples():
    assert double_falling(7, 3) == 105
    assert double_falling(5, 1) == 5
    assert double_falling(23, 2) == 483
    assert double_falling(3, 3) == 0


@given(st.integers(-5, 60), st.integers(0, 5))
def test_factorial_recurrences(m, r):
    assert falling(m, r + 1) == falling(m, r) * (m - r) or falling(m, r + 1) == 0
    if falling(m, r) and m - r >= 1:
        assert falling(m, r + 1) == falling(m, r) * (m - r)
    if double_falling(m, r) and m - 2 * r >= 1:
        assert double_falling(m, r + 1) == double_falling(m, r) * (m - 2 * r)


def test_build_layout():
    ds = build([1, 1, 2])
    assert ds.N == 4
    assert ds.count(1) == 2 and ds.count(2) == 1
    assert ds.vertex_of[1:] == (0, 1, 2, 2)
    assert build([3, 3]).n_k == {3: 2}
    with pytest.raises(OddTotal):
        build([1, 1, 1])


def test_parse_degrees_skips_comments():
    ds = parse_degrees("# header\n1 1\n\n2\n")
    assert ds.degrees == (1, 1, 2)


def test_enumerate_small():
    ds = build([1, 1, 2])
    assert [m.edges for m in enumerate_motifs(ds, MotifClass.EDGE)] == [((1, 2),)]
    stars = {m.edges for m in enumerate_motifs(ds, MotifClass.TWOSTAR)}
    assert stars == {((1, 3), (2, 4)), ((1, 4), (2, 3))}
    assert enumerate_motifs(ds, MotifClass.DOUBLEEDGE) == []


def test_class_count_examples():
    assert class_counts(build([1, 1, 2])) == (1, 2, 1, 0)
    assert class_counts(build([1, 1, 1, 1])) == (6, 0, 0, 0)
    assert class_counts(build([3, 3])) == (0, 0, 6, 18)


degree_lists = st.lists(st.integers(0, 5), min_size=1, max_size=14).filter(lambda d: sum(d) % 2 == 0)


@settings(max_examples=60, deadline=None)
@given(degree_lists)
def test_class_counts_match_enumeration(degs):
    ds = build(degs)
    listed = []
    for kind in ALL_CLASSES:
        motifs = enumerate_motifs(ds, kind)
        assert len(set(motifs)) == len(motifs)
        for m in motifs:
            check_motif(ds, m)
        listed.append(len(motifs))
    assert class_counts(ds) == tuple(listed)


def test_success_probability():
    assert success_probability(build([1, 1, 2]), MotifClass.EDGE) == Fraction(1, 3)
    assert success_probability(build([1, 1, 2]), MotifClass.TWOSTAR) == Fraction(1, 3)
    assert success_probability(build([2] * 12), MotifClass.DOUBLEEDGE) == Fraction(1, 483)
    with pytest.raises(DegenerateN):
        success_probability(build([2]), MotifClass.DOUBLEEDGE)


def test_relation_examples():
    ds = build([1, 1, 1, 1, 2])
    stars = enumerate_motifs(ds, MotifClass.TWOSTAR)
    a = next(s for s in stars if s.vertices(ds) >= {0, 1})
    b = next(s for s in stars if 2 in s.vertices(ds) and 0 not in s.vertices(ds))
    r = relation(ds, a, b)
    assert r.shares_vertex and r.shares_half_edge

    ds = build([1, 1, 1, 1])
    r = relation(ds, Motif.make(MotifClass.EDGE, [(1, 2)]), Motif.make(MotifClass.EDGE, [(3, 4)]))
    assert not (r.shares_vertex or r.shares_half_edge or r.shares_common_edge or r.equal)

    ds = build([3, 3])
    a = Motif.make(MotifClass.DOUBLEEDGE, [(1, 4), (2, 5)])
    b = Motif.make(MotifClass.DOUBLEEDGE, [(1, 4), (3, 6)])
    assert relation(ds, a, b).shares_common_edge


@settings(max_examples=30, deadline=None)
@given(degree_lists)
def test_relation_flags_nest(degs):
    ds = build(degs)
    motifs = [m for k in ALL_CLASSES for m in enumerate_motifs(ds, k)][:40]
    for a in motifs:
        for b in motifs:
            r = relation(ds, a, b)
            assert not r.shares_common_edge or r.shares_half_edge
            assert not r.shares_half_edge or r.shares_vertex


@pytest.mark.parametrize("degs", [(1, 1, 1, 1, 2, 2), (1, 1, 1, 1, 2, 3, 3), (1, 1, 1, 1, 1, 1, 2, 2)])
def test_cardinality_neighbourhoods(degs):
    ds = build(degs)
    n1 = ds.count(1)
    edges = enumerate_motifs(ds, MotifClass.EDGE)
    loops = enumerate_motifs(ds, MotifClass.SELFLOOP)
    for a in edges:
        touching = [b for b in edges if b != a and relation(ds, a, b).shares_vertex]
        assert len(touching) <= 2 * n1
    for a in enumerate_motifs(ds, MotifClass.TWOSTAR):
        assert sum(relation(ds, a, b).shares_vertex for b in loops) == 1


def test_check_motif_rejects_bad_star():
    ds = build([1, 1, 2])
    with pytest.raises(ValueError):
        check_motif(ds, Motif.make(MotifClass.TWOSTAR, [(1, 2), (3, 4)]))
