import numpy as np
import pytest

from cmstein.combinatorics import ALL_CLASSES, Motif, MotifClass, build, enumerate_motifs
from cmstein.errors import PreconditionViolated
from cmstein.matchings import Matching, contains
from cmstein.oracle import enumerate_matchings, iter_matchings
from cmstein.switching import (
    TRACE_HEADER,
    couple,
    identity_indices,
    index_grid,
    index_ranges,
    switch,
    switch_step,
    traces_to_csv,
    unswitch,
)


def _motifs(ds):
    return [m for k in ALL_CLASSES for m in enumerate_motifs(ds, k)]


def test_switch_step_examples():
    g = Matching.from_pairs([(1, 2), (3, 4)])
    edge = Motif.make(MotifClass.EDGE, [(1, 2)])
    assert switch_step(g, edge, 1, 1) == g
    assert switch_step(g, edge, 1, 2).pairs() == [(1, 3), (2, 4)]
    with pytest.raises(PreconditionViolated):
        switch_step(g, edge, 1, 4)
    with pytest.raises(PreconditionViolated):
        switch_step(Matching.from_pairs([(1, 3), (2, 4)]), edge, 1, 1)


def test_switch_requires_motif():
    g = Matching.from_pairs([(1, 2), (3, 4)])
    star = Motif.make(MotifClass.TWOSTAR, [(1, 3), (2, 4)])
    with pytest.raises(PreconditionViolated):
        switch(g, star, (1, 1))


def test_twostar_grid_covers_all_matchings():
    ds = build([1, 1, 2])
    star = Motif.make(MotifClass.TWOSTAR, [(1, 3), (4, 2)])
    g = Matching.from_pairs([(1, 3), (2, 4)])
    assert index_ranges(ds.N, star) == (1, 3)
    outs = {switch(g, star, b).mate for b in index_grid(ds.N, star)}
    assert outs == {m.mate for m in enumerate_matchings(4)}


@pytest.mark.parametrize("degs", [(1, 1, 2), (1, 1, 1, 1, 2), (3, 3), (2, 2, 1, 1), (1, 1, 3, 3)])
def test_identity_and_round_trip(degs):
    ds = build(degs)
    for alpha in _motifs(ds):
        ident = identity_indices(ds.N, alpha)
        for g in iter_matchings(ds.N, alpha.edges):
            assert switch(g, alpha, ident) == g
            assert unswitch(g, alpha) == (g, ident)
            for b in index_grid(ds.N, alpha):
                out = switch(g, alpha, b)
                assert unswitch(out, alpha) == (g, b)


@pytest.mark.parametrize("degs", [(1, 1, 1, 1, 2), (2, 2, 1, 1), (3, 3), (1, 1, 1, 1, 2, 2)])
def test_bijection(degs):
    ds = build(degs)
    every = {m.mate for m in enumerate_matchings(ds.N)}
    for alpha in _motifs(ds):
        images = [switch(g, alpha, b).mate for g in iter_matchings(ds.N, alpha.edges) for b in index_grid(ds.N, alpha)]
        assert len(images) == len(every) and set(images) == every


def test_unswitch_is_total():
    ds = build([2, 1, 1])
    loop = Motif.make(MotifClass.SELFLOOP, [(1, 2)])
    for g_out in enumerate_matchings(ds.N):
        g, b = unswitch(g_out, loop)
        assert contains(g, loop)
        assert switch(g, loop, b) == g_out


def test_couple_paths():
    rng = np.random.default_rng(2)
    ds = build([1, 1, 2])
    edge = Motif.make(MotifClass.EDGE, [(1, 2)])
    without = Matching.from_pairs([(1, 3), (2, 4)])
    smp = couple(without, edge, rng)
    assert smp.coupled == without and smp.indices is None
    with_edge = Matching.from_pairs([(1, 2), (3, 4)])
    smp = couple(with_edge, edge, rng)
    assert smp.indices is not None and smp.coupled == switch(with_edge, edge, smp.indices)


def test_trace_csv():
    rng = np.random.default_rng(4)
    ds = build([1, 1, 2])
    edge = Motif.make(MotifClass.EDGE, [(1, 2)])
    g = Matching.from_pairs([(1, 2), (3, 4)])
    samples = [couple(g, edge, rng) for _ in range(5)]
    lines = traces_to_csv(samples).splitlines()
    assert lines[0] == ",".join(TRACE_HEADER)
    assert len(lines) == 6
    assert all(line.startswith("edge:1-2,") for line in lines[1:])
