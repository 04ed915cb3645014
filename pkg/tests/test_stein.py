import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from cmstein.errors import BudgetExceeded
from cmstein.stein import (
    PROBE_HEADER,
    CallableTest,
    CallableWeight,
    NormalPoissonParams,
    PgfWeight,
    TrigTest,
    _kernel_1d,
    dictionary,
    difference_bound,
    generator_residual,
    interpolate,
    poisson_unimodal_tv,
    probe_csv,
    smoothness_probe,
    solve,
    solve_batch,
    transition,
    truncation,
    weight_transition_mean,
)

D1 = NormalPoissonParams([[1.0]], [1.0])
D2 = NormalPoissonParams(np.eye(2), [0.5, 2.0])


def test_transition_example():
    assert transition([1], [0], 0.5, [1.0]) == pytest.approx(0.5 * math.exp(-0.5), rel=1e-12)
    assert transition([2], [2], 0.0, [3.0]) == 1.0
    assert transition([2], [1], 0.0, [3.0]) == 0.0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 6), st.floats(0.0, 1.0), st.floats(0.05, 6.0))
def test_transition_matches_convolution(y, s, lam):
    zs = np.arange(40)
    thin = stats.binom.pmf(np.arange(y + 1), y, 1 - s)
    imm = stats.poisson.pmf(zs, lam * s) if s > 0 else (zs == 0).astype(float)
    want = np.convolve(thin, imm)[:40]
    got = np.array([transition([y], [z], s, [lam]) for z in zs])
    assert np.allclose(got, want, atol=1e-13)
    ker = _kernel_1d(y, 39, np.array([s]), lam)[0]
    assert np.allclose(ker, got, atol=1e-13)


@pytest.mark.parametrize("y,lam", [(0, 0.3), (3, 1.0), (5, 7.7)])
def test_transition_normalised(y, lam):
    cut, _ = truncation([y], [lam])
    for s in (0.1, 0.5, 0.9, 1.0):
        assert _kernel_1d(y, cut[0], np.array([s]), lam).sum() == pytest.approx(1.0, abs=1e-10)


def test_semigroup():
    lam, y = 1.7, 3
    s1, s2 = 0.3, 0.55
    s = 1 - (1 - s1) * (1 - s2)
    zmax = 60
    a = _kernel_1d(y, zmax, np.array([s1]), lam)[0]
    composed = sum(a[m] * _kernel_1d(m, zmax, np.array([s2]), lam)[0] for m in range(zmax + 1))
    direct = _kernel_1d(y, zmax, np.array([s]), lam)[0]
    assert np.allclose(composed, direct, atol=1e-12)


@pytest.mark.parametrize("w", [0.0, 0.4, -0.7, 0.6 * np.exp(2.0j), np.exp(0.9j)])
def test_pgf_closed_form_matches_series(w):
    weight = PgfWeight(w)
    s = np.linspace(0, 1, 11)
    for y, lam in (([0], [1.0]), ([2, 1], [0.5, 2.0])):
        assert np.allclose(weight.transition_mean(y, s, lam), weight_transition_mean(weight, y, s, lam), atol=1e-9)


def test_interpolate_endpoints():
    h = dictionary(1, 1)[2]
    x, y = [0.4], [2]
    assert interpolate(h, x, y, 0.0, D1) == pytest.approx(float(h(np.array(x), np.array(y))), abs=1e-12)
    assert interpolate(h, x, y, 1.0, D1) == pytest.approx(h.reference(D1), abs=1e-9)
    assert interpolate(h, [-2.0], [0], 1.0, D1) == pytest.approx(h.reference(D1), abs=1e-9)
    with pytest.raises(ValueError):
        interpolate(h, x, y, 1.5, D1)


def test_hermite_route_matches_closed_form():
    params = NormalPoissonParams([[0.8, 0.3], [0.3, 0.5]], [1.2])
    trig = TrigTest([0.6, -0.5], 0.4, "cos", PgfWeight(0.5))

    def fn(x, y):
        return np.cos(x @ np.array([0.6, -0.5]) + 0.4) * 0.5 ** y.sum(axis=-1)

    generic = CallableTest(fn, "generic")
    for s in (0.0, 0.3, 0.9, 1.0):
        a = interpolate(trig, [0.2, -1.0], [1], s, params)
        b = interpolate(generic, [0.2, -1.0], [1], s, params)
        assert a == pytest.approx(b, abs=1e-9)
    assert generic.reference(params) == pytest.approx(trig.reference(params), abs=1e-9)


def test_solution_degenerate_cases():
    hs = dictionary(1, 1)
    assert solve(hs[11], [0.3], [1], D1) == 0.0  # constant h
    x_only = hs[10]
    assert solve(x_only, [0.5], [0], D1, 1e-10) == pytest.approx(solve(x_only, [0.5], [3], D1, 1e-10), abs=1e-12)
    y_only = hs[4]
    f = solve_batch(y_only, [[-1.0], [0.0], [2.0]], [1], D1, 1e-10)
    assert np.ptp(f) < 1e-12


@pytest.mark.parametrize("params", [D1, D2, NormalPoissonParams([[0.0]], [1.0])], ids=["d1", "d2", "singular"])
def test_generator_residual(params):
    hs = dictionary(params.d, params.r)
    for h in (hs[0], hs[3], hs[9]):
        for x, y in (((0.5,) * params.d, (1,) * params.r), ((-1.0,) * params.d, (0,) * params.r)):
            assert generator_residual(h, x, y, params) <= 5e-3


def test_callable_weight_reference():
    w = CallableWeight(lambda y: 1.0 / (1.0 + np.asarray(y).sum(axis=-1)), "inv")
    h = TrigTest([0.0], 0.0, "cos", w)
    # E 1/(1+N) = (1 - e^{-lam}) / lam for N ~ Po(lam)
    assert h.reference(D1) == pytest.approx(1 - math.exp(-1.0), abs=1e-12)


@pytest.mark.parametrize("lam,want", [(1.0, 0.7357588823), (0.5, 1.2130613195), (2.3, 0.5303693),
                                      (7.7, 0.28838), (0.3, 1.48164)])
def test_poisson_tv(lam, want):
    assert poisson_unimodal_tv(lam) == pytest.approx(want, abs=5e-6)


def test_difference_bounds():
    h = dictionary(2, 2)[2]
    uniform = difference_bound("djk_uniform", [4.0, 4.0], (), h)
    assert uniform == pytest.approx((2 + 2 * math.log(4 * math.e)) / (4 * math.e))
    assert uniform == pytest.approx(0.622874, abs=1e-6)
    at_zero = dictionary(1, 1)[1]
    assert difference_bound("dj", [1.0], (0,), at_zero) == pytest.approx((1 - math.exp(-1)) / 2)
    assert difference_bound("dj", [1.0], (0,), dictionary(1, 1)[11]) == 0.0
    assert difference_bound("lip", [1.0], (), dictionary(1, 1)[4]) == 0.0
    with pytest.raises(ValueError):
        difference_bound("bogus", [1.0], (), h)


def test_probe_small_and_csv():
    rows = smoothness_probe(D1, dictionary(1, 1, 4), [((0.0,), (1,))], third=False)
    assert rows and all(r.measured <= r.bound + 1e-3 for r in rows)
    lines = probe_csv(rows).splitlines()
    assert lines[0] == ",".join(PROBE_HEADER)
    assert len(lines) == len(rows) + 1


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded):
        truncation([0], [5000.0])


def test_param_validation():
    with pytest.raises(ValueError):
        NormalPoissonParams([[1.0]], [0.0])
    with pytest.raises(ValueError):
        NormalPoissonParams([[1.0, 2.0], [2.0, 1.0]], [1.0])
    with pytest.raises(ValueError):
        TrigTest([1.0, 1.0], 0.0, "sin", PgfWeight(1.0))
    with pytest.raises(ValueError):
        PgfWeight(1.5)
