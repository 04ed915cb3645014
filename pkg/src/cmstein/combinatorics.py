"""Degree sequences, half-edge layout, factorials and the four motif classes."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterator, Sequence

from .errors import DegenerateN, OddTotal


def falling(m: int, r: int) -> int:
    """(m)_r = m(m-1)...(m-r+1), zero whenever r > m."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    if r > m:
        return 0
    out = 1
    for i in range(r):
        out *= m - i
    return out


def double_falling(m: int, r: int) -> int:
    """((m))_r = m(m-2)...(m-2(r-1)); zero once a factor would drop below one."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    if r == 0:
        return 1
    if m - 2 * (r - 1) < 1:
        return 0
    out = 1
    for i in range(r):
        out *= m - 2 * i
    return out


def double_factorial(m: int) -> int:
    """m!! for m >= -1, with (-1)!! = 0!! = 1."""
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


@dataclass(frozen=True)
class DegreeSequence:
    degrees: tuple[int, ...]
    N: int
    # vertex_of[s] is the 0-based vertex carrying half-edge s; index 0 is unused.
    vertex_of: tuple[int, ...]
    # first[i] is the smallest half-edge of vertex i (meaningless when degree 0).
    first: tuple[int, ...]
    n_k: dict

    @property
    def n(self) -> int:
        return len(self.degrees)

    def count(self, k: int) -> int:
        return self.n_k.get(k, 0)

    def half_edges(self, i: int) -> range:
        return range(self.first[i], self.first[i] + self.degrees[i])

    def __hash__(self) -> int:
        return hash(self.degrees)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, DegreeSequence) and self.degrees == other.degrees


def build(degrees: Sequence[int]) -> DegreeSequence:
    degrees = tuple(int(d) for d in degrees)
    if not degrees:
        raise ValueError("degree sequence must be nonempty")
    if any(d < 0 for d in degrees):
        raise ValueError("degrees must be nonnegative")
    total = sum(degrees)
    if total % 2:
        raise OddTotal(f"sum of degrees {total} is odd")
    vertex_of = [0]
    first = []
    for i, d in enumerate(degrees):
        first.append(len(vertex_of))
        vertex_of.extend([i] * d)
    return DegreeSequence(
        degrees=degrees,
        N=total,
        vertex_of=tuple(vertex_of),
        first=tuple(first),
        n_k=dict(sorted(Counter(degrees).items())),
    )


def parse_degrees(text: str) -> DegreeSequence:
    """Read whitespace-separated degrees; lines starting with '#' are comments."""
    values: list[int] = []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        values.extend(int(tok) for tok in stripped.split())
    return build(values)


class MotifClass(enum.Enum):
    EDGE = ("edge", 1, 2)
    TWOSTAR = ("twostar", 2, 3)
    SELFLOOP = ("selfloop", 1, 1)
    DOUBLEEDGE = ("doubleedge", 2, 2)

    def __init__(self, label: str, e: int, v: int):
        self.label = label
        self.e = e
        self.v = v

    @property
    def is_tree(self) -> bool:
        return self in (MotifClass.EDGE, MotifClass.TWOSTAR)


TREE_CLASSES = (MotifClass.EDGE, MotifClass.TWOSTAR)
MULTI_CLASSES = (MotifClass.SELFLOOP, MotifClass.DOUBLEEDGE)
ALL_CLASSES = TREE_CLASSES + MULTI_CLASSES


def _canonical(pairs: Sequence[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    return tuple(sorted((min(p), max(p)) for p in pairs))


@dataclass(frozen=True)
class Motif:
    kind: MotifClass
    edges: tuple[tuple[int, int], ...]

    @classmethod
    def make(cls, kind: MotifClass, pairs: Sequence[tuple[int, int]]) -> "Motif":
        edges = _canonical(pairs)
        if len(edges) != kind.e:
            raise ValueError(f"{kind.label} needs {kind.e} pairs")
        flat = [s for p in edges for s in p]
        if len(set(flat)) != len(flat):
            raise ValueError("motif half-edges must be distinct")
        return cls(kind, edges)

    @property
    def half_edges(self) -> frozenset[int]:
        return frozenset(s for p in self.edges for s in p)

    def vertices(self, ds: DegreeSequence) -> frozenset[int]:
        return frozenset(ds.vertex_of[s] for s in self.half_edges)

    def label(self) -> str:
        body = ";".join(f"{a}-{b}" for a, b in self.edges)
        return f"{self.kind.label}:{body}"


def _iter_edges(ds: DegreeSequence) -> Iterator[Motif]:
    leaves = [ds.first[i] for i, d in enumerate(ds.degrees) if d == 1]
    for a, b in combinations(leaves, 2):
        yield Motif(MotifClass.EDGE, ((a, b),))


def _iter_twostars(ds: DegreeSequence) -> Iterator[Motif]:
    leaves = [ds.first[i] for i, d in enumerate(ds.degrees) if d == 1]
    centres = [ds.first[i] for i, d in enumerate(ds.degrees) if d == 2]
    for a, b in combinations(leaves, 2):
        for c in centres:
            for pairs in (((a, c), (b, c + 1)), ((a, c + 1), (b, c))):
                yield Motif(MotifClass.TWOSTAR, _canonical(pairs))


def _iter_loops(ds: DegreeSequence) -> Iterator[Motif]:
    for i in range(ds.n):
        for a, b in combinations(ds.half_edges(i), 2):
            yield Motif(MotifClass.SELFLOOP, ((a, b),))


def _iter_doubles(ds: DegreeSequence) -> Iterator[Motif]:
    heavy = [i for i, d in enumerate(ds.degrees) if d >= 2]
    local = {i: list(combinations(ds.half_edges(i), 2)) for i in heavy}
    for i, j in combinations(heavy, 2):
        for a, b in local[i]:
            for c, d in local[j]:
                # i < j so every half-edge of i precedes every half-edge of j
                yield Motif(MotifClass.DOUBLEEDGE, ((a, c), (b, d)))
                yield Motif(MotifClass.DOUBLEEDGE, ((a, d), (b, c)))


_ITERATORS = {
    MotifClass.EDGE: _iter_edges,
    MotifClass.TWOSTAR: _iter_twostars,
    MotifClass.SELFLOOP: _iter_loops,
    MotifClass.DOUBLEEDGE: _iter_doubles,
}


def iter_motifs(ds: DegreeSequence, kind: MotifClass) -> Iterator[Motif]:
    return _ITERATORS[kind](ds)


def enumerate_motifs(ds: DegreeSequence, kind: MotifClass) -> list[Motif]:
    return list(iter_motifs(ds, kind))


def class_counts(ds: DegreeSequence) -> tuple[int, int, int, int]:
    n1, n2 = ds.count(1), ds.count(2)
    pair_sums = [falling(d, 2) for d in ds.degrees]
    total = sum(pair_sums)
    square = sum(x * x for x in pair_sums)
    return (
        falling(n1, 2) // 2,
        falling(n1, 2) * n2,
        total // 2,
        # sum over i<j of (d_i)_2 (d_j)_2, halved
        (total * total - square) // 4,
    )


def success_probability(ds: DegreeSequence, kind: MotifClass) -> Fraction:
    denom = double_falling(ds.N - 1, kind.e)
    if denom <= 0:
        raise DegenerateN(f"((N-1))_{kind.e} = {denom} for N = {ds.N}")
    return Fraction(1, denom)


@dataclass(frozen=True)
class Relation:
    shares_vertex: bool
    shares_half_edge: bool
    shares_common_edge: bool
    equal: bool


def relation(ds: DegreeSequence, alpha: Motif, beta: Motif) -> Relation:
    return Relation(
        shares_vertex=bool(alpha.vertices(ds) & beta.vertices(ds)),
        shares_half_edge=bool(alpha.half_edges & beta.half_edges),
        shares_common_edge=bool(set(alpha.edges) & set(beta.edges)),
        equal=alpha == beta,
    )


def check_motif(ds: DegreeSequence, motif: Motif) -> None:
    """Raise ValueError unless the motif satisfies its class constraints."""
    edges = motif.edges
    if list(edges) != sorted(edges) or any(a >= b for a, b in edges):
        raise ValueError("motif pairs are not in canonical order")
    flat = [s for p in edges for s in p]
    if len(set(flat)) != len(flat) or min(flat) < 1 or max(flat) > ds.N:
        raise ValueError("motif half-edges are repeated or out of range")
    deg = ds.degrees
    vof = ds.vertex_of
    kind = motif.kind
    if kind is MotifClass.EDGE:
        (a, b), = edges
        ok = vof[a] != vof[b] and deg[vof[a]] == 1 and deg[vof[b]] == 1
    elif kind is MotifClass.TWOSTAR:
        centres = set()
        ok = True
        for a, b in edges:
            u, v = sorted((vof[a], vof[b]), key=lambda w: deg[w])
            ok = ok and deg[u] == 1 and deg[v] == 2
            centres.add(v)
        ok = ok and len(centres) == 1
    elif kind is MotifClass.SELFLOOP:
        (a, b), = edges
        ok = vof[a] == vof[b]
    else:
        (a, b), (c, d) = edges
        ok = vof[a] == vof[c] and vof[b] == vof[d] and vof[a] != vof[b]
    if not ok:
        raise ValueError(f"invalid {kind.label} motif {edges}")
