"""Exhaustive small-N oracle: exact laws of the census and of the coupling.

Everything here is exact rational arithmetic.  Integer tallies are kept over
a common denominator and converted to ``Fraction`` at the end.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

from .combinatorics import (
    ALL_CLASSES,
    MULTI_CLASSES,
    TREE_CLASSES,
    DegreeSequence,
    Motif,
    MotifClass,
    double_factorial,
    enumerate_motifs,
    relation,
    success_probability,
)
from .errors import TooLarge
from .matchings import Matching, census, contains
from .switching import index_grid, index_ranges, switch

MAX_N = 16
MAX_CELLS = 10_000_000


def _check_size(N: int, cap: int = MAX_N) -> None:
    if N % 2:
        raise ValueError(f"N = {N} is odd")
    if N > cap:
        raise TooLarge(f"N = {N} exceeds the oracle cap {cap}")


def _pairings(free: tuple[int, ...]) -> Iterator[list[tuple[int, int]]]:
    if not free:
        yield []
        return
    s = free[0]
    for i in range(1, len(free)):
        rest = free[1:i] + free[i + 1:]
        for tail in _pairings(rest):
            yield [(s, free[i])] + tail


def _mate_from_pairs(N: int, pairs) -> tuple[int, ...]:
    mate = [0] * (N + 1)
    for s, t in pairs:
        mate[s], mate[t] = t, s
    return tuple(mate)


def iter_matchings(N: int, fixed: Sequence[tuple[int, int]] = ()) -> Iterator[Matching]:
    """All matchings of 1..N containing the pairs in ``fixed``, lowest-free-first."""
    _check_size(N)
    used = {s for p in fixed for s in p}
    free = tuple(s for s in range(1, N + 1) if s not in used)
    for pairs in _pairings(free):
        yield Matching(_mate_from_pairs(N, list(fixed) + pairs))


@lru_cache(maxsize=8)
def _all_matchings(N: int) -> tuple[Matching, ...]:
    return tuple(iter_matchings(N))


def enumerate_matchings(N: int) -> list[Matching]:
    _check_size(N)
    return list(_all_matchings(N))


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


# ------------------------------------------------------------------- laws


@dataclass
class ExactLaw:
    n: int
    N: int
    support: dict[tuple[int, int, int, int], Fraction]

    def mean(self, idx: int) -> Fraction:
        return sum((p * k[idx] for k, p in self.support.items()), Fraction(0))

    def expect(self, fn) -> Fraction:
        return sum((p * fn(k) for k, p in self.support.items()), Fraction(0))

    @property
    def p_simple(self) -> Fraction:
        return sum((p for k, p in self.support.items() if k[2] + k[3] == 0), Fraction(0))

    def covariance(self) -> list[list[Fraction]]:
        """Covariance matrix of (W_edge, W_twostar): Cov(Z_edge, Z_twostar) / n."""
        m = [self.mean(0), self.mean(1)]
        out = [[Fraction(0)] * 2 for _ in range(2)]
        for j in range(2):
            for k in range(2):
                cov = self.expect(lambda s: (s[j] - m[j]) * (s[k] - m[k]))
                out[j][k] = cov / self.n
        return out

    def conditional_on_simple(self) -> dict[tuple[int, int], Fraction]:
        ps = self.p_simple
        if ps == 0:
            return {}
        out: dict[tuple[int, int], Fraction] = defaultdict(Fraction)
        for k, p in self.support.items():
            if k[2] + k[3] == 0:
                out[(k[0], k[1])] += p / ps
        return dict(out)

    def to_dict(self) -> dict:
        cov = self.covariance()
        return {
            "n": self.n,
            "N": self.N,
            "support": [
                {"z_edge": k[0], "z_twostar": k[1], "s_loops": k[2], "m_doubles": k[3], "p": _frac(p)}
                for k, p in sorted(self.support.items())
            ],
            "mean_z_edge": _frac(self.mean(0)),
            "mean_z_twostar": _frac(self.mean(1)),
            "mean_s_loops": _frac(self.mean(2)),
            "mean_m_doubles": _frac(self.mean(3)),
            "sigma11": _frac(cov[0][0]),
            "sigma12": _frac(cov[0][1]),
            "sigma22": _frac(cov[1][1]),
            "p_simple": _frac(self.p_simple),
            "conditional_on_simple": [
                {"z_edge": k[0], "z_twostar": k[1], "p": _frac(p)}
                for k, p in sorted(self.conditional_on_simple().items())
            ],
        }


def exact_law(ds: DegreeSequence) -> ExactLaw:
    _check_size(ds.N)
    counts: dict[tuple, int] = defaultdict(int)
    total = 0
    for g in _all_matchings(ds.N):
        counts[census(g, ds).as_tuple()] += 1
        total += 1
    return ExactLaw(ds.n, ds.N, {k: Fraction(c, total) for k, c in counts.items()})


def induced_graph(g: Matching, ds: DegreeSequence) -> tuple[tuple[int, int], ...]:
    """Sorted vertex-pair multiset of the multigraph a matching induces."""
    vof = ds.vertex_of
    return tuple(sorted(tuple(sorted((vof[s], vof[t]))) for s, t in g.pairs()))


@dataclass(frozen=True)
class SimpleGraphReport:
    ok: bool
    expected: Fraction
    graphs: dict

    def __bool__(self) -> bool:
        return self.ok


def uniform_simple_check(ds: DegreeSequence) -> SimpleGraphReport:
    """Each simple graph should carry probability prod d_i! / (N-1)!!."""
    _check_size(ds.N, 12)
    total = double_factorial(ds.N - 1)
    tally: dict[tuple, int] = defaultdict(int)
    for g in _all_matchings(ds.N):
        if census(g, ds).simple:
            tally[induced_graph(g, ds)] += 1
    expected = Fraction(math.prod(math.factorial(d) for d in ds.degrees), total)
    graphs = {k: Fraction(c, total) for k, c in tally.items()}
    return SimpleGraphReport(all(p == expected for p in graphs.values()), expected, graphs)


# --------------------------------------------------------------- coupling


@dataclass
class CouplingGrid:
    """All cells (g, coupled, weight) of the coupling for one motif.

    Weights are integers over the common denominator ``denom``.
    """

    alpha: Motif
    denom: int
    cells: list[tuple[Matching, Matching, int]] = field(default_factory=list)

    def expect(self, fn) -> Fraction:
        acc = 0
        for g, gc, w in self.cells:
            v = fn(g, gc)
            if v:
                acc += w * v
        return Fraction(acc, self.denom)


def coupling_grid(ds: DegreeSequence, alpha: Motif) -> CouplingGrid:
    _check_size(ds.N)
    ranges = index_ranges(ds.N, alpha)
    grid_size = math.prod(ranges)
    total = double_factorial(ds.N - 1)
    if total * grid_size > MAX_CELLS:
        raise TooLarge(f"{total} x {grid_size} cells exceed {MAX_CELLS}")
    out = CouplingGrid(alpha, total * grid_size)
    for g in _all_matchings(ds.N):
        if contains(g, alpha):
            for b in index_grid(ds.N, alpha):
                out.cells.append((g, switch(g, alpha, b), 1))
        else:
            out.cells.append((g, g, grid_size))
    return out


@dataclass(frozen=True)
class CouplingLaw:
    alpha: Motif
    joint: dict[tuple[Matching, Matching], Fraction]

    def conditional_given_present(self) -> dict[Matching, Fraction]:
        """Law of the coupled matching given that alpha is realised."""
        out: dict[Matching, Fraction] = defaultdict(Fraction)
        mass = Fraction(0)
        for (g, gc), p in self.joint.items():
            if contains(g, self.alpha):
                out[gc] += p
                mass += p
        return {k: v / mass for k, v in out.items()}

    def present_and_equal(self) -> dict[Matching, Fraction]:
        """P(coupled = g', alpha realised in the base) for every g'."""
        out: dict[Matching, Fraction] = defaultdict(Fraction)
        for (g, gc), p in self.joint.items():
            if contains(g, self.alpha):
                out[gc] += p
        return dict(out)


def exact_coupling_law(ds: DegreeSequence, alpha: Motif) -> CouplingLaw:
    grid = coupling_grid(ds, alpha)
    joint: dict = defaultdict(int)
    for g, gc, w in grid.cells:
        joint[(g, gc)] += w
    return CouplingLaw(alpha, {k: Fraction(v, grid.denom) for k, v in joint.items()})


@dataclass(frozen=True)
class PairMoments:
    destroyed: Fraction  # E[I_a I_b (1 - J_ba)]
    created: Fraction  # E[I_a J_ba]
    covariance: Fraction  # Cov(I_a, I_b)
    abs_change: Fraction  # E[I_a |I_b - J_ba|]
    signed_change: Fraction  # E[I_a (I_b - J_ba)]


def _pair_moments(grid: CouplingGrid, ds: DegreeSequence, beta: Motif) -> PairMoments:
    alpha = grid.alpha
    acc = [0, 0, 0, 0]
    joint = 0
    for g, gc, w in grid.cells:
        if not contains(g, alpha):
            continue
        ib = contains(g, beta)
        jb = contains(gc, beta)
        if ib and not jb:
            acc[0] += w
        if jb:
            acc[1] += w
        if ib != jb:
            acc[2] += w
        acc[3] += w * (int(ib) - int(jb))
        if ib:
            joint += w
    d = grid.denom
    cov = Fraction(joint, d) - success_probability(ds, alpha.kind) * success_probability(ds, beta.kind)
    return PairMoments(
        destroyed=Fraction(acc[0], d),
        created=Fraction(acc[1], d),
        covariance=cov,
        abs_change=Fraction(acc[2], d),
        signed_change=Fraction(acc[3], d),
    )


def exact_pair_moments(ds: DegreeSequence, alpha: Motif, beta: Motif) -> PairMoments:
    return _pair_moments(coupling_grid(ds, alpha), ds, beta)


def all_pair_moments(ds: DegreeSequence, classes=ALL_CLASSES) -> dict[tuple[Motif, Motif], PairMoments]:
    motifs = [m for k in classes for m in enumerate_motifs(ds, k)]
    out = {}
    for alpha in motifs:
        grid = coupling_grid(ds, alpha)
        for beta in motifs:
            out[(alpha, beta)] = _pair_moments(grid, ds, beta)
    return out


@dataclass(frozen=True)
class LocalCountCheck:
    """Worst per-cell counts of created intersecting and destroyed disjoint trees."""

    alpha: Motif
    max_created: int
    max_destroyed: int

    @property
    def ok(self) -> bool:
        v, e = self.alpha.kind.v, self.alpha.kind.e
        return self.max_created <= v and self.max_destroyed <= e


def local_count_check(ds: DegreeSequence, alpha: Motif) -> LocalCountCheck:
    trees = [m for k in TREE_CLASSES for m in enumerate_motifs(ds, k)]
    touching = [b for b in trees if b != alpha and relation(ds, alpha, b).shares_vertex]
    apart = [b for b in trees if not relation(ds, alpha, b).shares_vertex]
    worst_c = worst_d = 0
    for g, gc, _ in coupling_grid(ds, alpha).cells:
        worst_c = max(worst_c, sum(contains(gc, b) for b in touching))
        worst_d = max(worst_d, sum(contains(g, b) and not contains(gc, b) for b in apart))
    return LocalCountCheck(alpha, worst_c, worst_d)


# ------------------------------------------------------------ moment sums


@dataclass(frozen=True)
class MomentSums:
    """Exact left-hand sides of the five moment bounds.

    ``tree_variance`` is the sum over class pairs of the standard deviation of
    the conditional expectation given (W_edge, W_twostar);
    ``tree_variance_unconditional`` drops the conditioning.  Square roots are
    floats, all other fields are exact.
    """

    tree_variance: float | None
    tree_variance_unconditional: float | None
    tree_products: Fraction
    cross_tree_multi: Fraction
    cross_multi_tree: Fraction
    multi: Fraction

    def to_dict(self) -> dict:
        def v(x):
            return _frac(x) if isinstance(x, Fraction) else x

        return {k: v(x) for k, x in self.__dict__.items()}


def _tree_variance(ds: DegreeSequence, grids: dict[Motif, CouplingGrid], classes) -> tuple[float, float]:
    """Variance terms over class pairs (j, k) of the isolated trees.

    With X = sum_a I_a Y_a and Y_a = sum_{b in class k}(I_b - J_ba), the
    switch indices are independent across a, so given g the conditional
    variance of X is the sum of the per-motif conditional variances.
    """
    matchings = _all_matchings(ds.N)
    total = len(matchings)
    index = {g: i for i, g in enumerate(matchings)}
    keys = [census(g, ds).as_tuple()[:2] for g in matchings]
    cond_sd = uncond_sd = 0.0
    for kj in classes:
        alphas = [a for a in grids if a.kind is kj]
        for kk in classes:
            betas = [b for b in enumerate_motifs(ds, kk)]
            # first and second conditional moments of Y_a given g, as exact sums
            mean_g = [Fraction(0)] * total
            var_g = [Fraction(0)] * total
            for alpha in alphas:
                grid = grids[alpha]
                size = math.prod(index_ranges(ds.N, alpha))
                s1: dict[int, int] = defaultdict(int)
                s2: dict[int, int] = defaultdict(int)
                for g, gc, _ in grid.cells:
                    if not contains(g, alpha):
                        continue
                    y = sum(contains(g, b) - contains(gc, b) for b in betas)
                    i = index[g]
                    s1[i] += y
                    s2[i] += y * y
                for i in s1.keys() | s2.keys():
                    m = Fraction(s1[i], size)
                    mean_g[i] += m
                    var_g[i] += Fraction(s2[i], size) - m * m
            ex = sum(mean_g, Fraction(0)) / total
            ex2 = sum((m * m + v for m, v in zip(mean_g, var_g)), Fraction(0)) / total
            uncond_sd += math.sqrt(float(ex2 - ex * ex))
            by_key: dict[tuple, list[Fraction]] = defaultdict(list)
            for i, m in enumerate(mean_g):
                by_key[keys[i]].append(m)
            second = Fraction(0)
            for vals in by_key.values():
                avg = sum(vals, Fraction(0)) / len(vals)
                second += avg * avg * len(vals)
            cond_sd += math.sqrt(float(second / total - ex * ex))
    return cond_sd, uncond_sd


def lhs_moment_sums(ds: DegreeSequence) -> MomentSums:
    _check_size(ds.N, 10)
    trees = [m for k in TREE_CLASSES for m in enumerate_motifs(ds, k)]
    multis = [m for k in MULTI_CLASSES for m in enumerate_motifs(ds, k)]
    grids = {a: coupling_grid(ds, a) for a in trees + multis}

    products = Fraction(0)
    for alpha in trees:
        def sq(g, gc):
            if not contains(g, alpha):
                return 0
            c = sum(contains(g, b) != contains(gc, b) for b in trees)
            return c * c
        products += grids[alpha].expect(sq)

    def abs_sum(alphas, betas, skip_self=False):
        acc = Fraction(0)
        for alpha in alphas:
            others = [b for b in betas if not (skip_self and b == alpha)]
            acc += grids[alpha].expect(
                lambda g, gc: contains(g, alpha) and sum(contains(g, b) != contains(gc, b) for b in others)
            )
        return acc

    cross_tm = abs_sum(trees, multis)
    cross_mt = abs_sum(multis, trees)
    multi = sum((success_probability(ds, a.kind) ** 2 for a in multis), Fraction(0))
    multi += abs_sum(multis, multis, skip_self=True)

    if ds.N <= 8:
        cond, uncond = _tree_variance(ds, {a: grids[a] for a in trees}, TREE_CLASSES)
    else:
        cond = uncond = None
    return MomentSums(cond, uncond, products, cross_tm, cross_mt, multi)
