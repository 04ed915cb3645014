"""Switching maps along the edges of a motif and the coupled configuration."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator, Sequence

import numpy as np

from .combinatorics import Motif
from .errors import PreconditionViolated
from .matchings import Matching, contains


def stage_size(N: int, e: int, stage: int) -> int:
    """Number of admissible indices at stage ``stage`` (1-based)."""
    return N - 2 * (e - stage) - 1


def index_ranges(N: int, alpha: Motif) -> tuple[int, ...]:
    e = alpha.kind.e
    return tuple(stage_size(N, e, stage) for stage in range(1, e + 1))


def index_grid(N: int, alpha: Motif) -> Iterator[tuple[int, ...]]:
    return product(*(range(1, m + 1) for m in index_ranges(N, alpha)))


def _excluded(alpha: Motif, stage: int) -> list[int]:
    edges = alpha.edges
    out = [edges[stage - 1][0]]
    for a, b in edges[stage:]:
        out.extend((a, b))
    return sorted(out)


def _select(excluded: Sequence[int], b: int) -> int:
    """b-th smallest element of {1..N} minus ``excluded`` (sorted)."""
    t = b
    for x in excluded:
        if x <= t:
            t += 1
        else:
            break
    return t


def _rank(excluded: Sequence[int], t: int) -> int:
    return t - sum(1 for x in excluded if x < t)


def _require_edges(g: Matching, alpha: Motif, start: int) -> None:
    for a, b in alpha.edges[start - 1:]:
        if g.mate[a] != b:
            raise PreconditionViolated(f"pair ({a}, {b}) of the motif is not in g")


def switch_step(g: Matching, alpha: Motif, stage: int, b: int) -> Matching:
    e = alpha.kind.e
    if not 1 <= stage <= e:
        raise PreconditionViolated(f"stage {stage} outside 1..{e}")
    size = stage_size(g.N, e, stage)
    if not 1 <= b <= size:
        raise PreconditionViolated(f"index {b} outside 1..{size}")
    _require_edges(g, alpha, stage)
    lo, hi = alpha.edges[stage - 1]
    t1 = _select(_excluded(alpha, stage), b)
    if t1 == hi:
        return g
    mate = list(g.mate)
    t2 = mate[t1]
    mate[lo], mate[t1] = t1, lo
    mate[hi], mate[t2] = t2, hi
    return Matching(tuple(mate))


def switch(g: Matching, alpha: Motif, b: Sequence[int]) -> Matching:
    if len(b) != alpha.kind.e:
        raise PreconditionViolated("one index per motif edge is required")
    if not contains(g, alpha):
        raise PreconditionViolated("the motif is not realised in g")
    for stage, idx in enumerate(b, start=1):
        g = switch_step(g, alpha, stage, idx)
    return g


def unswitch(g_out: Matching, alpha: Motif) -> tuple[Matching, tuple[int, ...]]:
    """Inverse of ``switch``: recover the pre-image matching and the indices."""
    e = alpha.kind.e
    mate = list(g_out.mate)
    indices = [0] * e
    for stage in range(e, 0, -1):
        lo, hi = alpha.edges[stage - 1]
        t1, t2 = mate[lo], mate[hi]
        indices[stage - 1] = _rank(_excluded(alpha, stage), t1)
        if t1 != hi:
            mate[lo], mate[hi] = hi, lo
            mate[t1], mate[t2] = t2, t1
    return Matching(tuple(mate)), tuple(indices)


def identity_indices(N: int, alpha: Motif) -> tuple[int, ...]:
    """Indices for which ``switch`` leaves every matching in the domain fixed."""
    return tuple(
        _rank(_excluded(alpha, stage), hi)
        for stage, (_, hi) in enumerate(alpha.edges, start=1)
    )


@dataclass(frozen=True)
class CouplingSample:
    base: Matching
    coupled: Matching
    alpha: Motif
    indices: tuple[int, ...] | None


def couple(g: Matching, alpha: Motif, rng: np.random.Generator) -> CouplingSample:
    # Indices are only drawn when the motif is present; they are independent
    # of g, so skipping the draw otherwise leaves the joint law unchanged.
    if not contains(g, alpha):
        return CouplingSample(g, g, alpha, None)
    b = tuple(int(rng.integers(1, m + 1)) for m in index_ranges(g.N, alpha))
    return CouplingSample(g, switch(g, alpha, b), alpha, b)


def coupled_indicators(sample: CouplingSample, betas: Iterable[Motif]) -> list[bool]:
    return [contains(sample.coupled, beta) for beta in betas]


def changed_pairs(sample: CouplingSample) -> list[tuple[int, int]]:
    before = set(sample.base.pairs())
    return [p for p in sample.coupled.pairs() if p not in before]


TRACE_HEADER = ("alpha", "b", "changed_pairs")


def trace_rows(samples: Iterable[CouplingSample]) -> Iterator[tuple[str, str, str]]:
    for smp in samples:
        b = "" if smp.indices is None else " ".join(map(str, smp.indices))
        changed = " ".join(f"{s}-{t}" for s, t in changed_pairs(smp))
        yield smp.alpha.label(), b, changed


def traces_to_csv(samples: Iterable[CouplingSample]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    writer.writerows(trace_rows(samples))
    return buf.getvalue()
