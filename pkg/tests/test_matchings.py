import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmstein.combinatorics import ALL_CLASSES, Motif, MotifClass, build, enumerate_motifs
from cmstein.bounds import moment_parameters
from cmstein.errors import AttemptsExhausted, EmptyModel
from cmstein.matchings import (
    BatchCensus,
    Matching,
    MotifStatistics,
    census,
    contains,
    normalize,
    sample_pairs_batch,
    sample_simple,
    sample_uniform,
)
from cmstein.oracle import enumerate_matchings


def test_sampler_uniform_on_three_matchings():
    rng = np.random.default_rng(5)
    ds = build([1, 1, 2])
    draws = 300_000
    tally = Counter(sample_uniform(ds, rng).mate for _ in range(draws))
    assert len(tally) == 3
    se = math.sqrt((1 / 3) * (2 / 3) / draws)
    for count in tally.values():
        assert abs(count / draws - 1 / 3) < 4 * se


def test_sampler_degenerate_cases():
    rng = np.random.default_rng(0)
    assert sample_uniform(build([2]), rng).pairs() == [(1, 2)]
    with pytest.raises(EmptyModel):
        sample_uniform(build([0, 0]), rng)


def test_contains_examples():
    g = Matching.from_pairs([(1, 2), (3, 4)])
    assert contains(g, Motif.make(MotifClass.EDGE, [(1, 2)]))
    assert not contains(g, Motif.make(MotifClass.TWOSTAR, [(1, 3), (4, 2)]))


def test_census_examples():
    ds = build([1, 1, 2])
    s = census(Matching.from_pairs([(1, 2), (3, 4)]), ds)
    assert s.as_tuple() == (1, 0, 1, 0) and not s.simple
    s = census(Matching.from_pairs([(1, 3), (2, 4)]), ds)
    assert s.as_tuple() == (0, 1, 0, 0) and s.simple
    triple = census(Matching.from_pairs([(1, 4), (2, 5), (3, 6)]), build([3, 3]))
    assert triple.m_doubles == 3


def _indicator_census(g, ds):
    return tuple(sum(contains(g, a) for a in enumerate_motifs(ds, k)) for k in ALL_CLASSES)


@pytest.mark.parametrize("degs", [(1, 1, 2), (3, 3), (1, 1, 1, 1, 2), (2, 2, 1, 1), (1, 1, 2, 2, 2), (4, 2, 1, 1, 2)])
def test_census_equals_indicator_sums(degs):
    ds = build(degs)
    for g in enumerate_matchings(ds.N):
        assert census(g, ds).as_tuple() == _indicator_census(g, ds)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 6), min_size=2, max_size=40).filter(lambda d: sum(d) % 2 == 0 and sum(d) > 0),
       st.integers(0, 2**32 - 1))
def test_batch_census_matches_scalar(degs, seed):
    ds = build(degs)
    pairs = sample_pairs_batch(ds, np.random.default_rng(seed), 40)
    batch = BatchCensus(ds)(pairs)
    for row, p in zip(batch, pairs):
        g = Matching.from_pairs((p + 1).tolist(), ds.N)
        assert tuple(row) == census(g, ds).as_tuple()


def test_batch_census_against_indicators_at_moderate_n():
    ds = build([1] * 12 + [2] * 6 + [3] * 4)
    pairs = sample_pairs_batch(ds, np.random.default_rng(3), 200)
    batch = BatchCensus(ds)(pairs)
    for row, p in zip(batch[:50], pairs[:50]):
        g = Matching.from_pairs((p + 1).tolist(), ds.N)
        assert tuple(row) == _indicator_census(g, ds)


def test_normalize_examples():
    ds = build([1, 1, 1, 1])
    assert normalize(MotifStatistics(2, 0, 0, 0), ds)[0] == pytest.approx(0.0, abs=1e-15)
    ds = build([1, 1, 2])
    assert normalize(MotifStatistics(0, 1, 0, 0), ds)[1] == pytest.approx((1 - 2 / 3) / math.sqrt(3))
    assert normalize(MotifStatistics(0, 0, 0, 0), ds)[0] == pytest.approx(-(1 / 3) / math.sqrt(3))


def test_sample_simple():
    rng = np.random.default_rng(1)
    ds = build([1, 1, 2])
    draws = [sample_simple(ds, rng).mate for _ in range(4000)]
    tally = Counter(draws)
    assert len(tally) == 2
    assert all(abs(c / 4000 - 0.5) < 4 * math.sqrt(0.25 / 4000) for c in tally.values())
    with pytest.raises(AttemptsExhausted) as err:
        sample_simple(build([3, 3]), rng, max_attempts=50)
    assert err.value.attempts == 50
    assert len({sample_simple(build([1, 1, 1, 1]), rng).mate for _ in range(200)}) == 3


def test_serialization_round_trip():
    g = Matching.from_pairs([(1, 4), (2, 3), (5, 6)])
    text = g.dumps()
    assert text.splitlines()[0] == "6"
    assert Matching.loads(text) == g
    with pytest.raises(ValueError):
        Matching((0, 2, 1, 3)).validate()


def test_poisson_means_by_simulation():
    ds = build([1] * 6 + [2] * 4 + [3] * 4 + [4] * 2)
    mp = moment_parameters(ds)
    counts = BatchCensus(ds)(sample_pairs_batch(ds, np.random.default_rng(9), 100_000))
    for col, target in ((2, mp.lambda_s), (3, mp.lambda_m)):
        x = counts[:, col]
        assert abs(x.mean() - target) < 4 * x.std() / math.sqrt(len(x))


def test_batch_rows_are_matchings():
    ds = build([2, 3, 1, 2])
    pairs = sample_pairs_batch(ds, np.random.default_rng(0), 10)
    for p in pairs:
        assert sorted(p.ravel().tolist()) == list(range(ds.N))
