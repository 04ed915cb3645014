"""Monte Carlo discrepancy studies against the closed-form bounds."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Optional

import numpy as np

from .bounds import PreconditionFailed, TheoryReport, error_bounds
from .combinatorics import (
    DegreeSequence,
    Motif,
    MotifClass,
    build,
    class_counts,
    parse_degrees,
    success_probability,
)
from .errors import AttemptsExhausted, ConfigError
from .matchings import BatchCensus, sample_pairs_batch, sample_uniform, tree_means
from .stein import NormalPoissonParams, PgfWeight, TrigTest, dictionary
from .switching import couple

CHUNK = 50_000
MAX_REJECTION = 1000


# ------------------------------------------------------------------ config


def _pairs(text: str, cast) -> list[tuple[int, object]]:
    out = []
    for item in text.split(","):
        if not item.strip():
            continue
        k, _, v = item.partition(":")
        if not _:
            raise ConfigError(f"expected degree:value, got {item!r}")
        out.append((int(k), cast(v)))
    return out


def degree_source(spec: str, seed: int = 0, base: Path | None = None) -> DegreeSequence:
    """Build degrees from ``file:PATH``, ``regular:n,d``, ``profile:k:count,...``
    or ``pmf:k:p,...;n=SIZE``.

    A pmf sample with odd total gets one extra half-edge on its last vertex.
    """
    kind, _, body = spec.partition(":")
    try:
        if kind == "file":
            path = Path(body)
            if base is not None and not path.is_absolute():
                path = base / path
            return parse_degrees(path.read_text())
        if kind == "regular":
            n, d = (int(t) for t in body.split(","))
            return build([d] * n)
        if kind == "profile":
            degs: list[int] = []
            for k, c in _pairs(body, int):
                degs.extend([k] * c)
            return build(degs)
        if kind == "pmf":
            law, _, size = body.partition(";")
            if not size.startswith("n="):
                raise ConfigError("pmf source needs ';n=SIZE'")
            table = _pairs(law, float)
            ks = np.array([k for k, _ in table])
            ps = np.array([p for _, p in table])
            if abs(ps.sum() - 1) > 1e-9:
                raise ConfigError("pmf probabilities must sum to one")
            rng = np.random.default_rng(seed)
            degs = [int(v) for v in rng.choice(ks, size=int(size[2:]), p=ps)]
            if sum(degs) % 2:
                degs[-1] += 1
            return build(degs)
    except (ValueError, OSError) as exc:
        raise ConfigError(f"bad degree source {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown degree source kind {kind!r}")


@dataclass
class ExperimentConfig:
    source: str
    reps: int = 100_000
    seed: int = 0
    threads: int = 1
    dict_size: int = 12
    out: Optional[str] = None
    conditional: bool = True
    conditional_reps: Optional[int] = None
    scales: tuple[int, ...] = ()
    scale_reps: int = 20_000

    def __post_init__(self):
        if self.reps < 1:
            raise ConfigError("reps must be at least 1")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        if self.dict_size < 1:
            raise ConfigError("dict_size must be at least 1")


_BOOL = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def parse_config(text: str) -> ExperimentConfig:
    """Flat ``key = value`` lines; '#' starts a comment."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise ConfigError(f"line {lineno}: expected key = value")
        raw[key.strip()] = value.strip()
    if "source" not in raw:
        raise ConfigError("config needs a 'source' entry")
    kw: dict = {"source": raw.pop("source")}
    try:
        for key in ("reps", "seed", "threads", "dict_size", "conditional_reps", "scale_reps"):
            if key in raw:
                kw[key] = int(raw.pop(key))
        if "out" in raw:
            kw["out"] = raw.pop("out")
        if "conditional" in raw:
            kw["conditional"] = _BOOL[raw.pop("conditional").lower()]
        if "scales" in raw:
            kw["scales"] = tuple(int(t) for t in raw.pop("scales").split(",") if t.strip())
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    if raw:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(raw))}")
    return ExperimentConfig(**kw)


# ---------------------------------------------------------------- sampling


def _streams(seed: int, count: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(count)]


def _chunk_sizes(total: int) -> list[int]:
    full, rest = divmod(total, CHUNK)
    return [CHUNK] * full + ([rest] if rest else [])


def _run_chunks(fn, sizes, seed, threads):
    """Apply fn(size, rng) per chunk; results come back in chunk order."""
    jobs = list(zip(sizes, _streams(seed, len(sizes))))
    if threads == 1:
        return [fn(size, rng) for size, rng in jobs]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def _features(ds: DegreeSequence, counts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    means = np.array(tree_means(ds))
    w = (counts[:, :2] - means) / math.sqrt(ds.n)
    return w, counts[:, 2:]


# ------------------------------------------------------------------ report


@dataclass
class MemberResult:
    h_id: str
    label: str
    empirical: float
    reference: float
    std_error: float

    @property
    def discrepancy(self) -> float:
        return abs(self.empirical - self.reference)

    def to_dict(self) -> dict:
        return {
            "h_id": self.h_id,
            "label": self.label,
            "empirical": self.empirical,
            "reference": self.reference,
            "discrepancy": self.discrepancy,
            "std_error": self.std_error,
        }


@dataclass
class Verdict:
    status: str  # PASS | FAIL | SKIPPED
    bound: Optional[float] = None
    reason: str = ""
    worst_member: Optional[str] = None

    def to_dict(self) -> dict:
        return {"status": self.status, "bound": self.bound, "reason": self.reason, "worst_member": self.worst_member}


def _verdict(members: list[MemberResult], bound, z: float = 3.0) -> Verdict:
    if isinstance(bound, PreconditionFailed) or bound is None:
        reason = bound.reason if isinstance(bound, PreconditionFailed) else "bound unavailable"
        return Verdict("SKIPPED", None, reason)
    worst = max(members, key=lambda m: m.discrepancy - bound - z * m.std_error)
    ok = all(m.discrepancy <= bound + z * m.std_error for m in members)
    return Verdict("PASS" if ok else "FAIL", bound, "", worst.h_id)


@dataclass
class DiscrepancyReport:
    source: str
    n: int
    N: int
    reps: int
    seed: int
    dict_size: int
    theory: TheoryReport
    members: list[MemberResult]
    joint: Verdict
    simplicity: dict
    conditional: Optional[dict] = None
    trace: list[tuple] = field(default_factory=list)

    @property
    def dictionary_max(self) -> float:
        return max(m.discrepancy for m in self.members)

    def verdicts(self) -> list[Verdict]:
        out = [self.joint, self.simplicity["verdict"]]
        if self.conditional:
            out += [self.conditional["bound_c"], self.conditional["bound_c2"]]
        return out

    def exit_code(self) -> int:
        states = [v.status for v in self.verdicts()]
        if "FAIL" in states:
            return 1
        if all(s == "SKIPPED" for s in states):
            return 2
        return 0

    def to_dict(self) -> dict:
        simp = dict(self.simplicity)
        simp["verdict"] = simp["verdict"].to_dict()
        cond = None
        if self.conditional is not None:
            cond = dict(self.conditional)
            cond["members"] = [m.to_dict() for m in cond["members"]]
            cond["bound_c"] = cond["bound_c"].to_dict()
            cond["bound_c2"] = cond["bound_c2"].to_dict()
        return {
            "source": self.source,
            "n": self.n,
            "N": self.N,
            "reps": self.reps,
            "seed": self.seed,
            "dict_size": self.dict_size,
            "theory": self.theory.to_dict(),
            "members": [m.to_dict() for m in self.members],
            "dictionary_max": self.dictionary_max,
            "joint": self.joint.to_dict(),
            "simplicity": simp,
            "conditional": cond,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def trace_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("chunk", "h_id", "reps", "mean"))
        writer.writerows((c, h, r, repr(m)) for c, h, r, m in self.trace)
        return buf.getvalue()


def _reference_params(theory: TheoryReport) -> Optional[NormalPoissonParams]:
    lam = [theory.moments.lambda_s, theory.moments.lambda_m]
    if min(lam) <= 0:
        return None
    sigma = np.asarray(theory.sigma, dtype=float)
    sigma = (sigma + sigma.T) / 2
    vals, vecs = np.linalg.eigh(sigma)
    sigma = (vecs * np.clip(vals, 0, None)) @ vecs.T
    return NormalPoissonParams(sigma, lam)


def _aggregate(per_chunk: list[tuple[int, np.ndarray, np.ndarray]]) -> tuple[int, np.ndarray, np.ndarray]:
    """Combine per-chunk (count, sums, sums of squares) with compensated sums."""
    count = sum(c for c, _, _ in per_chunk)
    k = per_chunk[0][1].size
    sums = np.array([math.fsum(s[i] for _, s, _ in per_chunk) for i in range(k)])
    sq = np.array([math.fsum(q[i] for _, _, q in per_chunk) for i in range(k)])
    return count, sums, sq


def _moments_to_members(tests, refs, count, sums, sq) -> list[MemberResult]:
    out = []
    for i, h in enumerate(tests):
        mean = sums[i] / count
        var = max(sq[i] / count - mean * mean, 0.0)
        se = math.sqrt(var / max(count - 1, 1)) if count > 1 else math.inf
        out.append(MemberResult(h.label, _describe(h), float(mean), float(refs[i]), se))
    return out


def _describe(h: TrigTest) -> str:
    a = ",".join(f"{v:.4g}" for v in h.a)
    return f"{h.trig}(({a}).x{h.b:+g})*{h.weight.label}"


def mc_discrepancy(
    ds: DegreeSequence,
    reps: int,
    seed: int = 0,
    threads: int = 1,
    dict_size: int = 12,
    conditional: bool = True,
    conditional_reps: Optional[int] = None,
    source: str = "",
) -> DiscrepancyReport:
    theory = error_bounds(ds)
    tests = dictionary(2, 2, dict_size)
    params = _reference_params(theory)
    if params is None:
        raise ConfigError("both Poisson means must be positive for the joint reference")
    refs = [h.reference(params) for h in tests]
    counter = BatchCensus(ds)

    def chunk(size, rng):
        counts = counter(sample_pairs_batch(ds, rng, size))
        w, y = _features(ds, counts)
        vals = np.stack([h(w, y) for h in tests])
        simple = ((counts[:, 2] + counts[:, 3]) == 0).astype(float)
        vals = np.vstack([vals, simple[None, :]])
        return size, vals.sum(axis=1), (vals * vals).sum(axis=1)

    per_chunk = _run_chunks(chunk, _chunk_sizes(reps), seed, threads)
    count, sums, sq = _aggregate(per_chunk)
    members = _moments_to_members(tests, refs, count, sums[:-1], sq[:-1])
    trace = [
        (i, h.label, c, float(s[j] / c))
        for i, (c, s, _) in enumerate(per_chunk)
        for j, h in enumerate(tests)
    ]

    p_hat = sums[-1] / count
    p_se = math.sqrt(max(p_hat * (1 - p_hat), 0.0) / max(count - 1, 1))
    target = math.exp(-theory.moments.lambda_s - theory.moments.lambda_m)
    simplicity = {
        "p_simple_hat": float(p_hat),
        "std_error": p_se,
        "poisson_target": target,
        "discrepancy": float(abs(p_hat - target)),
        "verdict": _verdict([MemberResult("p_simple", "1{simple}", float(p_hat), target, p_se)], theory.bound_b),
    }

    cond = None
    if conditional:
        cond = _conditional(ds, theory, tests, conditional_reps or reps, seed, threads, counter)

    return DiscrepancyReport(
        source=source, n=ds.n, N=ds.N, reps=reps, seed=seed, dict_size=dict_size,
        theory=theory, members=members, joint=_verdict(members, theory.bound_a),
        simplicity=simplicity, conditional=cond, trace=trace,
    )


def _conditional(ds, theory, tests, reps, seed, threads, counter) -> dict:
    """Rejection sampling: draw uniform matchings until ``reps`` simple ones."""
    one = PgfWeight(1.0, "1")
    x_tests = [TrigTest(h.a, h.b, h.trig, one, label=h.label) for h in tests]
    sigma = np.asarray(theory.sigma, dtype=float)
    refs = [math.exp(-float(h.a @ sigma @ h.a) / 2) * float(h._trig(h.b)) for h in x_tests]

    def chunk(quota, rng):
        kept: list[np.ndarray] = []
        have = attempts = 0
        while have < quota:
            counts = counter(sample_pairs_batch(ds, rng, CHUNK))
            attempts += CHUNK
            good = counts[(counts[:, 2] + counts[:, 3]) == 0]
            kept.append(good[: quota - have])
            have += len(kept[-1])
            if have == 0 and attempts >= MAX_REJECTION * max(quota, 1):
                raise AttemptsExhausted(attempts)
        w, _ = _features(ds, np.concatenate(kept))
        vals = np.stack([h(w, np.zeros_like(w)) for h in x_tests])
        return quota, vals.sum(axis=1), (vals * vals).sum(axis=1), attempts

    # a separate seed branch keeps the conditional draws independent of the joint ones
    try:
        results = _run_chunks(chunk, _chunk_sizes(reps), [seed, 1], threads)
    except AttemptsExhausted as exc:
        skipped = Verdict("SKIPPED", None, str(exc))
        return {"accepted": 0, "attempts": exc.attempts, "members": [], "dictionary_max": None,
                "bound_c": skipped, "bound_c2": skipped}
    count, sums, sq = _aggregate([r[:3] for r in results])
    members = _moments_to_members(x_tests, refs, count, sums, sq)
    return {
        "accepted": count,
        "attempts": sum(r[3] for r in results),
        "members": members,
        "dictionary_max": max(m.discrepancy for m in members),
        "bound_c": _verdict(members, theory.bound_c),
        "bound_c2": _verdict(members, theory.bound_c2),
    }


# ----------------------------------------------------------- scaling study


def scaling_rows(cfg: ExperimentConfig, base: DegreeSequence) -> list[dict]:
    """Bound and empirical dictionary maximum for the source repeated k times."""
    rows = []
    for k in cfg.scales:
        ds = build(list(base.degrees) * k)
        rep = mc_discrepancy(ds, cfg.scale_reps, cfg.seed, cfg.threads, cfg.dict_size, conditional=False)
        bound = rep.theory.bound_a
        rows.append({
            "n": ds.n,
            "bound_a": None if isinstance(bound, PreconditionFailed) else bound,
            "empirical_max": rep.dictionary_max,
        })
    return rows


def scaling_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("n", "bound_a", "empirical_max"))
    for r in rows:
        writer.writerow((r["n"], "" if r["bound_a"] is None else repr(r["bound_a"]), repr(r["empirical_max"])))
    return buf.getvalue()


def run_experiment(cfg: ExperimentConfig, base: Path | None = None) -> tuple[DiscrepancyReport, list[dict]]:
    ds = degree_source(cfg.source, cfg.seed, base)
    report = mc_discrepancy(
        ds, cfg.reps, cfg.seed, cfg.threads, cfg.dict_size,
        cfg.conditional, cfg.conditional_reps, source=cfg.source,
    )
    return report, scaling_rows(cfg, ds)


# ------------------------------------------- loop/double-edge moment sum


def _present_multis(g, ds: DegreeSequence) -> set:
    """Every self-loop and double-edge motif realised in g."""
    vof = ds.vertex_of
    out = set()
    parallel: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for s, t in g.pairs():
        u, v = vof[s], vof[t]
        if u == v:
            out.add(Motif.make(MotifClass.SELFLOOP, [(s, t)]))
        else:
            parallel.setdefault((min(u, v), max(u, v)), []).append((s, t))
    for pairs in parallel.values():
        for p, q in combinations(pairs, 2):
            out.add(Motif.make(MotifClass.DOUBLEEDGE, [p, q]))
    return out


def multi_moment_mc(ds: DegreeSequence, reps: int, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo estimate and standard error of the loop/double-edge moment sum.

    Estimates sum_a p_a^2 + sum_a sum_{b != a} E[I_a |I_b - J_ba|] over the
    self-loop and double-edge motifs, one switch per realised motif per draw.
    """
    counts = class_counts(ds)
    base = counts[2] * float(success_probability(ds, MotifClass.SELFLOOP)) ** 2
    if counts[3]:
        base += counts[3] * float(success_probability(ds, MotifClass.DOUBLEEDGE)) ** 2
    rng = np.random.default_rng(seed)
    vals = np.empty(reps)
    for i in range(reps):
        g = sample_uniform(ds, rng)
        present = _present_multis(g, ds)
        total = 0
        for alpha in present:
            after = _present_multis(couple(g, alpha, rng).coupled, ds)
            total += len((present ^ after) - {alpha})
        vals[i] = total
    return base + float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(reps))
