"""Command-line surface: build, query, verify, and bench subcommands.

Texts are read from files either as raw bytes (one symbol per byte) or as
whitespace-separated integer codes, selected with ``--format``.  Exit codes:
0 success, 1 verification failure, 2 usage or parameter error, 3 I/O or
corrupt-index error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from .bench import DEFAULT_SIGMAS, render_figures, run_bench, write_csv
from .engine import build_index
from .errors import (
    EmptyQuery,
    EmptyText,
    EntryTooLong,
    IndexFormatError,
    KOutOfRange,
    RadiusOutOfRange,
    ReservedSymbolInInput,
    SentinelInQuery,
)
from .storage import load_index, save_index
from .verify import brute_force_query, walk_invariants

_USAGE_ERRORS = (
    EmptyQuery,
    EmptyText,
    EntryTooLong,
    KOutOfRange,
    RadiusOutOfRange,
    ReservedSymbolInInput,
    SentinelInQuery,
    ValueError,
)


def read_symbols(path, fmt: str) -> tuple[int, ...]:
    data = Path(path).read_bytes()
    if fmt == "bytes":
        return tuple(data)
    return tuple(int(token) for token in data.split())


def parse_pattern(args) -> tuple[int, ...]:
    if args.pattern_file is not None:
        return read_symbols(args.pattern_file, args.format)
    if args.format == "bytes":
        return tuple(args.pattern.encode("utf-8"))
    return tuple(int(token) for token in args.pattern.split())


def parse_int_list(value: str) -> tuple[int, ...]:
    try:
        items = tuple(int(token) for token in value.replace(",", " ").split())
    except ValueError:
        raise ValueError(f"expected a comma-separated integer list, got {value!r}")
    if not items:
        raise ValueError("empty integer list")
    return items


def _load(args):
    text = read_symbols(args.text, args.format) if args.text else None
    return load_index(args.index, text=text)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_build(args) -> int:
    text = read_symbols(args.text, args.format)
    index = build_index(
        text,
        args.k,
        sigma=args.sigma,
        mode=args.mode,
        tau=args.tau,
        seed=args.seed,
        cluster_cap=args.cluster_cap,
        keep_members=args.audit,
    )
    if args.audit:
        violations = walk_invariants(index.tree, audit=True)
        if violations:
            for v in violations:
                print(f"invariant violation: {v}", file=sys.stderr)
            return 1
        print("audit: all structural invariants hold")
    sizes = save_index(index, args.out, include_text=not args.no_text)
    for key, value in index.report.summary().items():
        print(f"{key}: {value}")
    for section in ("header", "text", "tree", "inversions", "total"):
        print(f"bytes_{section}: {sizes[section]}")
    print(f"saved: {args.out}")
    return 0


def cmd_query(args) -> int:
    index = _load(args)
    pattern = parse_pattern(args)
    hits = index.query(pattern, args.r)
    if args.json:
        print(json.dumps([[pos, dist] for pos, dist in hits]))
    else:
        for pos, dist in hits:
            print(f"{pos}\t{dist}")
    return 0


def cmd_verify(args) -> int:
    index = _load(args)
    raw = index.padded.symbols[: index.n]
    alphabet = sorted(set(raw))
    rng = random.Random(args.seed)
    failures = 0
    for _ in range(args.trials):
        m = rng.randint(1, 16)
        if rng.random() < 0.7:
            start = rng.randrange(index.n)
            q = list(raw[start : start + m])
            while len(q) < m:
                q.append(rng.choice(alphabet))
            for _ in range(rng.randint(0, index.k)):
                q[rng.randrange(m)] = rng.choice(alphabet)
            q = tuple(q)
        else:
            q = tuple(rng.choice(alphabet) for _ in range(m))
        r = rng.randint(0, index.k)
        got = index.query(q, r)
        want = brute_force_query(index.padded, q, r)
        if got != want:
            failures += 1
            print(f"mismatch: pattern={q} r={r}", file=sys.stderr)
            print(f"  engine:    {got}", file=sys.stderr)
            print(f"  reference: {want}", file=sys.stderr)
    print(f"verify: {args.trials - failures}/{args.trials} trials matched")
    return 1 if failures else 0


def cmd_bench(args) -> int:
    text = read_symbols(args.text, args.format)
    rows = run_bench(
        text,
        ks=parse_int_list(args.k),
        sigmas=parse_int_list(args.sigma),
        queries=args.queries,
        seed=args.seed,
        mode=args.mode,
        tau=args.tau,
    )
    write_csv(rows, args.out)
    print(f"wrote: {args.out}")
    figures_dir = args.figures if args.figures else Path(args.out).parent
    for path in render_figures(rows, figures_dir):
        print(f"wrote: {path}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_format(p) -> None:
    p.add_argument(
        "--format",
        choices=("bytes", "ints"),
        default="bytes",
        help="text/pattern encoding: raw bytes or whitespace-separated integers",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hdx",
        description="Index a text for Hamming-distance-bounded suffix queries.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build an index file from a text")
    b.add_argument("--text", required=True, help="path to the text to index")
    b.add_argument("--k", type=int, required=True, help="mismatch budget")
    b.add_argument("--sigma", type=int, default=None, help="truncation threshold")
    b.add_argument("--mode", choices=("linear", "succinct"), default="linear")
    b.add_argument("--tau", type=int, default=8, help="fingerprint sampling rate")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--cluster-cap", type=int, default=0)
    b.add_argument("--out", required=True, help="output index path")
    b.add_argument(
        "--no-text",
        action="store_true",
        help="omit the text from the file (queries then need --text at load)",
    )
    b.add_argument(
        "--audit",
        action="store_true",
        help="keep leaf members and check all structural invariants after build",
    )
    _add_format(b)
    b.set_defaults(func=cmd_build)

    q = sub.add_parser("query", help="run one query against an index file")
    q.add_argument("--index", required=True)
    pat = q.add_mutually_exclusive_group(required=True)
    pat.add_argument("--pattern", help="pattern string")
    pat.add_argument("--pattern-file", help="read the pattern from a file")
    q.add_argument("--r", type=int, required=True, help="mismatch radius")
    q.add_argument("--json", action="store_true", help="emit a JSON array")
    q.add_argument("--text", help="text path for indexes saved with --no-text")
    _add_format(q)
    q.set_defaults(func=cmd_query)

    v = sub.add_parser("verify", help="compare random queries against a linear scan")
    v.add_argument("--index", required=True)
    v.add_argument("--trials", type=int, default=200)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--text", help="text path for indexes saved with --no-text")
    _add_format(v)
    v.set_defaults(func=cmd_verify)

    be = sub.add_parser("bench", help="sweep k and sigma, write CSV and figures")
    be.add_argument("--text", required=True)
    be.add_argument("--k", default="2", help="comma-separated budgets")
    be.add_argument(
        "--sigma",
        default=",".join(str(s) for s in DEFAULT_SIGMAS),
        help="comma-separated thresholds",
    )
    be.add_argument("--queries", type=int, default=50)
    be.add_argument("--out", default="bench.csv", help="CSV output path")
    be.add_argument("--figures", help="figure directory (default: beside the CSV)")
    be.add_argument("--mode", choices=("linear", "succinct"), default="linear")
    be.add_argument("--tau", type=int, default=8)
    be.add_argument("--seed", type=int, default=0)
    _add_format(be)
    be.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except IndexFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
