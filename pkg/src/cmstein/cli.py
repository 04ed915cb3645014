"""Command-line entry point.

Exit codes: 0 pass, 1 failure, 2 precondition or skip only, 3 usage.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .bounds import PreconditionFailed, error_bounds
from .combinatorics import DegreeSequence, parse_degrees
from .errors import CMSteinError, ConfigError, TooLarge
from .experiment import (
    degree_source,
    parse_config,
    run_experiment,
    scaling_csv,
    _chunk_sizes,
    _features,
    _streams,
)
from .matchings import BatchCensus, sample_pairs_batch
from .oracle import exact_law
from .verify import SUITES

EXIT_PASS, EXIT_FAIL, EXIT_SKIP, EXIT_USAGE = 0, 1, 2, 3
SOURCE_KINDS = ("file:", "regular:", "profile:", "pmf:")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load(spec: str, seed: int = 0) -> DegreeSequence:
    if spec.startswith(SOURCE_KINDS):
        return degree_source(spec, seed)
    try:
        return parse_degrees(Path(spec).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read degree file {spec!r}: {exc}") from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_bounds(args) -> int:
    report = error_bounds(_load(args.degrees, args.seed))
    _emit(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", args.out)
    fields = (report.bound_a, report.bound_b, report.bound_c, report.bound_c2)
    return EXIT_SKIP if all(isinstance(f, PreconditionFailed) for f in fields) else EXIT_PASS


def cmd_sample(args) -> int:
    ds = _load(args.degrees, args.seed)
    counter = BatchCensus(ds)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("rep", "z_edge", "z_twostar", "s_loops", "m_doubles", "simple", "w_edge", "w_twostar"))
    rep = 0
    sizes = _chunk_sizes(args.reps)
    for size, rng in zip(sizes, _streams(args.seed, len(sizes))):
        counts = counter(sample_pairs_batch(ds, rng, size))
        w, _ = _features(ds, counts)
        for row, (we, ws) in zip(counts, w):
            simple = int(row[2] + row[3] == 0)
            writer.writerow((rep, *map(int, row), simple, repr(float(we)), repr(float(ws))))
            rep += 1
    _emit(buf.getvalue(), args.out)
    return EXIT_PASS


def cmd_enumerate(args) -> int:
    law = exact_law(_load(args.degrees, args.seed))
    _emit(json.dumps(law.to_dict(), indent=2) + "\n", args.out)
    return EXIT_PASS


def cmd_verify(args) -> int:
    failed = 0
    for check in SUITES[args.suite](args.profile):
        print(check.line(), flush=True)
        failed += not check.ok
    print(f"{args.suite}: {'FAIL' if failed else 'PASS'} ({failed} failing)")
    return EXIT_FAIL if failed else EXIT_PASS


def cmd_experiment(args) -> int:
    path = Path(args.config)
    try:
        cfg = parse_config(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {args.config!r}: {exc}") from exc
    for key in ("seed", "reps", "threads", "dict_size", "out"):
        value = getattr(args, key)
        if value is not None:
            setattr(cfg, key, value)
    cfg.__post_init__()
    report, scaling = run_experiment(cfg, base=path.parent)
    if args.format == "csv":
        main_text = _members_csv(report)
    else:
        main_text = report.to_json()
    _emit(main_text, cfg.out)
    if cfg.out:
        stem = Path(cfg.out)
        stem.with_suffix(".trace.csv").write_text(report.trace_csv())
        stem.with_suffix(".plot.csv").write_text(scaling_csv(scaling))
    for v, name in zip(report.verdicts(), ("joint", "simplicity", "conditional-c", "conditional-c2")):
        print(f"{v.status:7s} {name}" + (f"  ({v.reason})" if v.reason else ""), file=sys.stderr)
    return report.exit_code()


def _members_csv(report) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("h_id", "empirical", "reference", "discrepancy", "std_error", "bound"))
    bound = report.joint.bound
    for m in report.members:
        writer.writerow((m.h_id, repr(m.empirical), repr(m.reference), repr(m.discrepancy),
                         repr(m.std_error), "" if bound is None else repr(bound)))
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--reps", type=int, default=None)
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--dict-size", dest="dict_size", type=int, default=None)
    common.add_argument("--out", default=None)
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = _Parser(prog="cmstein", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bounds", parents=[common], help="closed-form constants and bounds as JSON")
    p.add_argument("degrees", help="degree file or source such as profile:1:10,2:5")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sample", parents=[common], help="census CSV of uniform matchings")
    p.add_argument("degrees")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("enumerate", parents=[common], help="exact law by exhaustive enumeration")
    p.add_argument("degrees")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--profile", choices=("small", "full"), default="small")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("experiment", parents=[common], help="Monte Carlo discrepancy study")
    p.add_argument("config")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("bounds", "sample", "enumerate"):
        args.seed = 0 if args.seed is None else args.seed
    if args.command == "sample":
        args.reps = 1000 if args.reps is None else args.reps
        if args.reps < 1:
            parser.error("--reps must be at least 1")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"cmstein: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TooLarge as exc:
        print(f"cmstein: {exc}", file=sys.stderr)
        return EXIT_SKIP
    except CMSteinError as exc:
        print(f"cmstein: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SKIP


if __name__ == "__main__":
    sys.exit(main())
