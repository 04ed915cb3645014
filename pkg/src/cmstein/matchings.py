"""Perfect matchings of half-edges: sampling, motif indicators and the census."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .combinatorics import (
    DegreeSequence,
    Motif,
    MotifClass,
    class_counts,
    success_probability,
)
from .errors import AttemptsExhausted, EmptyModel

DEFAULT_MAX_ATTEMPTS = 1_000_000


@dataclass(frozen=True)
class Matching:
    """Fixed-point-free involution on half-edges 1..N.

    ``mate[s]`` is the partner of ``s``; ``mate[0]`` is a placeholder.
    """

    mate: tuple[int, ...]

    @property
    def N(self) -> int:
        return len(self.mate) - 1

    def partner(self, s: int) -> int:
        return self.mate[s]

    def pairs(self) -> list[tuple[int, int]]:
        return [(s, t) for s, t in enumerate(self.mate) if 0 < s < t]

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[int]], N: int | None = None) -> "Matching":
        pairs = [tuple(p) for p in pairs]
        if N is None:
            N = 2 * len(pairs)
        mate = [0] * (N + 1)
        for s, t in pairs:
            if s == t or mate[s] or mate[t]:
                raise ValueError(f"pair ({s}, {t}) overlaps or is degenerate")
            mate[s], mate[t] = t, s
        out = cls(tuple(mate))
        out.validate()
        return out

    def validate(self) -> None:
        m = self.mate
        for s in range(1, len(m)):
            t = m[s]
            if not 1 <= t < len(m) or t == s or m[t] != s:
                raise ValueError(f"not a fixed-point-free involution at {s}")

    def dumps(self) -> str:
        lines = [str(self.N)] + [f"{s} {t}" for s, t in self.pairs()]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Matching":
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        N = int(rows[0][0])
        return cls.from_pairs(((int(a), int(b)) for a, b in rows[1:]), N)


def sample_uniform(ds: DegreeSequence, rng: np.random.Generator) -> Matching:
    """Pair the smallest unmatched half-edge with a uniform unmatched one, repeatedly."""
    if ds.N == 0:
        raise EmptyModel("no half-edges to match")
    free = list(range(1, ds.N + 1))
    mate = [0] * (ds.N + 1)
    while free:
        s = free.pop(0)
        t = free.pop(int(rng.integers(len(free))))
        mate[s], mate[t] = t, s
    return Matching(tuple(mate))


def contains(g: Matching, alpha: Motif) -> bool:
    mate = g.mate
    return all(mate[a] == b for a, b in alpha.edges)


@dataclass(frozen=True)
class MotifStatistics:
    z_edge: int
    z_twostar: int
    s_loops: int
    m_doubles: int

    @property
    def simple(self) -> bool:
        return self.s_loops + self.m_doubles == 0

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.z_edge, self.z_twostar, self.s_loops, self.m_doubles)


def census(g: Matching, ds: DegreeSequence) -> MotifStatistics:
    deg = ds.degrees
    vof = ds.vertex_of
    mate = g.mate
    z_edge = loops = 0
    multiplicity: dict[tuple[int, int], int] = {}
    for s in range(1, ds.N + 1):
        t = mate[s]
        if t < s:
            continue
        u, v = vof[s], vof[t]
        if u == v:
            loops += 1
            continue
        if deg[u] == 1 and deg[v] == 1:
            z_edge += 1
        key = (u, v) if u < v else (v, u)
        multiplicity[key] = multiplicity.get(key, 0) + 1
    z_twostar = 0
    for i, d in enumerate(deg):
        if d == 2:
            a = ds.first[i]
            if deg[vof[mate[a]]] == 1 and deg[vof[mate[a + 1]]] == 1:
                z_twostar += 1
    doubles = sum(x * (x - 1) // 2 for x in multiplicity.values())
    return MotifStatistics(z_edge, z_twostar, loops, doubles)


def tree_means(ds: DegreeSequence) -> tuple[float, float]:
    """Unconditional means of the isolated-edge and isolated-2-star counts."""
    g11, g12, _, _ = class_counts(ds)
    m_edge = float(g11 * success_probability(ds, MotifClass.EDGE)) if g11 else 0.0
    m_star = float(g12 * success_probability(ds, MotifClass.TWOSTAR)) if g12 else 0.0
    return m_edge, m_star


def normalize(stats: MotifStatistics, ds: DegreeSequence) -> tuple[float, float]:
    m_edge, m_star = tree_means(ds)
    root = math.sqrt(ds.n)
    return (stats.z_edge - m_edge) / root, (stats.z_twostar - m_star) / root


def sample_simple(
    ds: DegreeSequence,
    rng: np.random.Generator,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> Matching:
    if max_attempts < 1:
        raise ValueError("max_attempts must be at least 1")
    for _ in range(max_attempts):
        g = sample_uniform(ds, rng)
        if census(g, ds).simple:
            return g
    raise AttemptsExhausted(max_attempts)


# Vectorised batch path used by the Monte Carlo experiments.  Rows are
# independent uniform matchings; half-edges are 0-based here.


def sample_pairs_batch(ds: DegreeSequence, rng: np.random.Generator, size: int) -> np.ndarray:
    """Return an array (size, N/2, 2) of uniformly random pairings.

    Each row folds a uniform random permutation into consecutive pairs, which
    is uniform over matchings just like the sequential sampler.
    """
    if ds.N == 0:
        raise EmptyModel("no half-edges to match")
    base = np.broadcast_to(np.arange(ds.N, dtype=np.int32), (size, ds.N))
    perm = rng.permuted(base, axis=1)
    return perm.reshape(size, ds.N // 2, 2)


class BatchCensus:
    """Precomputed lookup tables for counting motifs over many matchings."""

    def __init__(self, ds: DegreeSequence):
        self.ds = ds
        self.vertex = np.asarray(ds.vertex_of[1:], dtype=np.int64)
        self.degree = np.asarray(ds.degrees, dtype=np.int64)
        self.leaf = self.degree[self.vertex] == 1
        centres = [ds.first[i] - 1 for i, d in enumerate(ds.degrees) if d == 2]
        self.centre = np.asarray(centres, dtype=np.int64)

    def __call__(self, pairs: np.ndarray) -> np.ndarray:
        """Census of each row; returns int array (size, 4)."""
        size, half, _ = pairs.shape
        n = self.ds.n
        a = pairs[:, :, 0].astype(np.int64)
        b = pairs[:, :, 1].astype(np.int64)
        u = self.vertex[a]
        v = self.vertex[b]
        loop = u == v
        z_edge = (self.leaf[a] & self.leaf[b]).sum(axis=1)
        loops = loop.sum(axis=1)

        if self.centre.size:
            mate = np.empty((size, self.ds.N), dtype=np.int64)
            np.put_along_axis(mate, a, b, axis=1)
            np.put_along_axis(mate, b, a, axis=1)
            first = self.leaf[mate[:, self.centre]]
            second = self.leaf[mate[:, self.centre + 1]]
            z_star = (first & second).sum(axis=1)
        else:
            z_star = np.zeros(size, dtype=np.int64)

        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        key = lo * n + hi
        # loops get distinct negative keys so they never form runs
        key = np.where(loop, -1 - np.arange(half)[None, :], key)
        key.sort(axis=1)
        idx = np.broadcast_to(np.arange(half), key.shape)
        starts = np.ones(key.shape, dtype=bool)
        starts[:, 1:] = key[:, 1:] != key[:, :-1]
        run_start = np.maximum.accumulate(np.where(starts, idx, 0), axis=1)
        doubles = (idx - run_start).sum(axis=1)
        return np.stack([z_edge, z_star, loops, doubles], axis=1)
