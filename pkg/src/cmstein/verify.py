"""Verification suites behind ``cmstein verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np

from .bounds import (
    common_edge_destruction,
    covariance,
    disjoint_destruction,
    moment_parameters,
    error_bounds,
)
from .combinatorics import (
    ALL_CLASSES,
    MotifClass,
    build,
    class_counts,
    double_factorial,
    enumerate_motifs,
    relation,
    success_probability,
)
from .oracle import (
    _all_matchings,
    all_pair_moments,
    exact_coupling_law,
    exact_law,
    exact_pair_moments,
    iter_matchings,
    local_count_check,
    uniform_simple_check,
)
from .stein import (
    NormalPoissonParams,
    dictionary,
    generator_residual,
    poisson_unimodal_tv,
    smoothness_probe,
)
from .switching import index_grid, switch

COUPLING_SUITE = [(1, 1, 2), (1, 1, 1, 1), (1, 1, 1, 1, 2), (2, 2, 1, 1), (3, 3), (2, 1, 1)]
COUPLING_EXTRA = [(1, 1, 1, 1, 2, 2), (1, 1, 3, 3), (2, 2, 2, 2), (1, 1, 1, 1, 1, 1, 2)]

FORMULA_SUITE = [
    (1, 1, 2), (1, 1, 1, 1), (1, 1, 1, 1, 2), (2, 2, 1, 1), (1, 1, 1, 1, 1, 1),
    (1, 1, 2, 2), (1, 1, 1, 1, 2, 2), (1, 1, 3, 3), (1, 2, 2, 3), (1, 1, 1, 1, 1, 1, 2, 2),
    (1, 1, 1, 1, 1, 1, 1, 1, 2), (1, 3, 3, 3), (2, 2, 2, 2), (1, 1, 1, 1, 1, 1, 1, 1, 1, 1),
    (1, 1, 1, 1, 2, 2, 2), (4, 2, 1, 1),
]

RESIDUAL_BUDGET = 5e-3
PROBE_BUDGET = 1e-3
TV_LAMBDAS = (0.3, 0.5, 1.0, 2.3, 7.7)


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'}  {self.name}" + (f"  ({self.detail})" if self.detail else "")


def _motifs(ds):
    return [m for k in ALL_CLASSES for m in enumerate_motifs(ds, k)]


# ---------------------------------------------------------------- coupling


def check_bijection(ds) -> Check:
    """(g, b) -> switch(g, alpha, b) hits every matching exactly once."""
    total = double_factorial(ds.N - 1)
    for alpha in _motifs(ds):
        cells = 0
        seen = set()
        for g in iter_matchings(ds.N, alpha.edges):
            for b in index_grid(ds.N, alpha):
                seen.add(switch(g, alpha, b).mate)
                cells += 1
        if cells != total or len(seen) != total:
            return Check(f"bijection {ds.degrees}", False,
                         f"{alpha.label()}: {cells} cells, {len(seen)} images, {total} matchings")
    return Check(f"bijection {ds.degrees}", True)


def check_coupling_law(ds) -> Check:
    every = set(_all_matchings(ds.N))
    uniform = Fraction(1, len(every))
    for alpha in _motifs(ds):
        law = exact_coupling_law(ds, alpha)
        cond = law.conditional_given_present()
        if set(cond) != every or any(p != uniform for p in cond.values()):
            return Check(f"coupling law {ds.degrees}", False, alpha.label())
        p = success_probability(ds, alpha.kind)
        joint = law.present_and_equal()
        if any(v != p * uniform for v in joint.values()):
            return Check(f"coupling law {ds.degrees}", False, f"joint mass at {alpha.label()}")
    return Check(f"coupling law {ds.degrees}", True)


def check_symmetry(ds) -> Check:
    moments = all_pair_moments(ds)
    for (a, b), m in moments.items():
        if m.signed_change != m.covariance or m.signed_change != moments[(b, a)].signed_change:
            return Check(f"symmetry {ds.degrees}", False, f"{a.label()} / {b.label()}")
        if a == b and m.created != success_probability(ds, a.kind) ** 2:
            return Check(f"symmetry {ds.degrees}", False, f"self term at {a.label()}")
    return Check(f"symmetry {ds.degrees}", True, f"{len(moments)} pairs")


def check_local_counts(ds) -> Check:
    trees = [m for k in (MotifClass.EDGE, MotifClass.TWOSTAR) for m in enumerate_motifs(ds, k)]
    for alpha in trees:
        res = local_count_check(ds, alpha)
        if not res.ok:
            return Check(f"local counts {ds.degrees}", False,
                         f"{alpha.label()}: created {res.max_created}, destroyed {res.max_destroyed}")
    return Check(f"local counts {ds.degrees}", True)


def check_destruction(ds) -> Check:
    """Closed-form destruction moments against grid enumeration."""
    motifs = _motifs(ds)
    tested = 0
    for a in motifs:
        for b in motifs:
            rel = relation(ds, a, b)
            if not rel.shares_half_edge:
                got = exact_pair_moments(ds, a, b).destroyed
                want = disjoint_destruction(ds.N, a.kind.e, b.kind.e)
            elif (a != b and a.kind is b.kind is MotifClass.DOUBLEEDGE
                  and rel.shares_common_edge and len(a.half_edges & b.half_edges) == 2):
                got = exact_pair_moments(ds, a, b).destroyed
                want = common_edge_destruction(ds.N)
            else:
                continue
            tested += 1
            if got != want:
                return Check(f"destruction {ds.degrees}", False, f"{a.label()} / {b.label()}: {got} != {want}")
    return Check(f"destruction {ds.degrees}", True, f"{tested} pairs")


def coupling_checks(profile: str = "small") -> Iterator[Check]:
    suite = COUPLING_SUITE + (COUPLING_EXTRA if profile == "full" else [])
    for degs in suite:
        ds = build(degs)
        yield check_bijection(ds)
        yield check_coupling_law(ds)
        yield check_symmetry(ds)
        yield check_local_counts(ds)
        yield check_destruction(ds)


# ---------------------------------------------------------------- formulas


def check_class_counts(ds) -> Check:
    counts = class_counts(ds)
    listed = tuple(len(enumerate_motifs(ds, k)) for k in ALL_CLASSES)
    return Check(f"class counts {ds.degrees}", counts == listed, f"{counts} vs {listed}")


def check_covariance(ds, tol: float = 1e-10) -> Check:
    law = exact_law(ds)
    exact = np.array([[float(v) for v in row] for row in law.covariance()])
    err = float(np.abs(exact - covariance(ds)).max())
    return Check(f"covariance {ds.degrees}", err <= tol, f"max error {err:.2e}")


def check_poisson_means(ds) -> Check:
    law = exact_law(ds)
    mp = moment_parameters(ds)
    counts = class_counts(ds)
    ok = law.mean(2) == counts[2] * success_probability(ds, MotifClass.SELFLOOP)
    ok = ok and abs(float(law.mean(2)) - mp.lambda_s) < 1e-12
    if ds.N >= 4:
        ok = ok and law.mean(3) == counts[3] * success_probability(ds, MotifClass.DOUBLEEDGE)
        ok = ok and abs(float(law.mean(3)) - mp.lambda_m) < 1e-12
    return Check(f"poisson means {ds.degrees}", ok)


def check_uniform_simple(ds) -> Check:
    rep = uniform_simple_check(ds)
    return Check(f"uniform simple graphs {ds.degrees}", rep.ok, f"{len(rep.graphs)} graphs")


def check_simplicity_bound(ds) -> Check:
    rep = error_bounds(ds)
    law = exact_law(ds)
    gap = abs(float(law.p_simple) - math.exp(-rep.moments.lambda_s - rep.moments.lambda_m))
    return Check(f"simplicity bound {ds.degrees}", gap <= rep.bound_b, f"{gap:.4g} <= {rep.bound_b:.4g}")


def formula_checks(profile: str = "small") -> Iterator[Check]:
    for degs in FORMULA_SUITE:
        ds = build(degs)
        yield check_class_counts(ds)
        yield check_covariance(ds)
        yield check_poisson_means(ds)
        yield check_uniform_simple(ds)
        if ds.N > 7:
            yield check_simplicity_bound(ds)
    for lam in TV_LAMBDAS:
        try:
            poisson_unimodal_tv(lam)
            yield Check(f"poisson unimodality {lam}", True)
        except ArithmeticError as exc:
            yield Check(f"poisson unimodality {lam}", False, str(exc))


# ------------------------------------------------------------------- stein


def stein_configurations(profile: str = "small") -> list[tuple[str, NormalPoissonParams]]:
    v = np.array([0.6, 0.8])
    out = [("d1 identity", NormalPoissonParams([[1.0]], [1.0]))]
    if profile == "full":
        out += [
            ("d1 singular", NormalPoissonParams([[0.0]], [1.0])),
            ("d2 identity", NormalPoissonParams(np.eye(2), [0.5, 2.0])),
            ("d2 rank-1", NormalPoissonParams(np.outer(v, v), [0.5, 2.0])),
        ]
    return out


def stein_grid(d: int) -> list[tuple[tuple[float, ...], tuple[int, ...]]]:
    """Nine (x, y) probe points: x in {-1, 0, 1} along a fixed ray, y in {0, 1, 2}."""
    pts = []
    for x in (-1.0, 0.0, 1.0):
        for y in (0, 1, 2):
            if d == 1:
                pts.append(((x,), (y,)))
            else:
                pts.append(((x, -x / 2), (y, (y + 1) % 3)))
    return pts


def residual_checks(profile: str = "small", size: int = 12) -> Iterator[Check]:
    for name, params in stein_configurations(profile):
        worst = 0.0
        for h in dictionary(params.d, params.r, size):
            for x, y in stein_grid(params.d):
                worst = max(worst, generator_residual(h, x, y, params))
        yield Check(f"generator residual {name}", worst <= RESIDUAL_BUDGET, f"max {worst:.2e}")


def probe_checks(profile: str = "small", size: int = 12) -> Iterator[Check]:
    for name, params in stein_configurations(profile):
        rows = smoothness_probe(params, dictionary(params.d, params.r, size), stein_grid(params.d))
        bad = [r for r in rows if r.measured > r.bound + PROBE_BUDGET]
        worst = min(r.margin for r in rows)
        detail = f"{len(rows)} probes, min margin {worst:.2e}"
        if bad:
            detail += f", first violation {bad[0].h_id} {bad[0].quantity}"
        yield Check(f"smoothness {name}", not bad, detail)


def stein_checks(profile: str = "small") -> Iterator[Check]:
    yield from residual_checks(profile)
    yield from probe_checks(profile)


SUITES: dict[str, Callable[[str], Iterator[Check]]] = {
    "coupling": coupling_checks,
    "formulas": formula_checks,
    "stein": stein_checks,
}
