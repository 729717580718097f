"""Command-line front end: ``pir check | run | explore | validate | fmt``.

Exit codes: 0 accepted/clean, 1 rejected or runtime error found,
2 inconclusive or bounds hit, 3 parse or usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from pir.checker import Inconclusive, NotTypable, check_config
from pir.config import CheckConfig, ExploreConfig, RunConfig
from pir.derivation import DerivationFormatError, deserialize, serialize, validate
from pir.parser import ParseError, SourceFile, parse, pretty
from pir.semantics import explore, format_trace, format_trace_json, run

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from exc


def _load(path: str) -> SourceFile:
    text = _read(path)
    try:
        return parse(text)
    except ParseError as exc:
        raise UsageError(f"{path}:{exc}") from exc


def _configuration(path: str, sf: SourceFile):
    try:
        c = sf.configuration()
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from exc
    if not c.closed:
        raise UsageError(f"{path}: the process has free variables; only closed configurations can run")
    return c


def cmd_check(args) -> int:
    sf = _load(args.file)
    cfg = CheckConfig(max_index=args.max_index, budget=args.budget)
    try:
        c = sf.configuration()
    except ValueError as exc:
        raise UsageError(f"{args.file}: {exc}") from exc
    result = check_config(sf.env(), c, cfg.max_index, cfg.budget)
    if isinstance(result, Inconclusive):
        print(f"INCONCLUSIVE  {result}")
        return EXIT_INCONCLUSIVE
    if isinstance(result, NotTypable):
        print(f"REJECTED  {result}")
        return EXIT_REJECTED
    print(f"ACCEPTED  derivation with {result.size()} node(s), height {result.height()}")
    if args.derivation:
        text = serialize(result)
        if args.derivation == "-":
            sys.stdout.write(text)
        else:
            Path(args.derivation).write_text(text, encoding="utf-8")
    return EXIT_OK


def cmd_run(args) -> int:
    sf = _load(args.file)
    c = _configuration(args.file, sf)
    cfg = RunConfig(seed=args.seed, steps=args.steps)
    if cfg.steps < 0:
        raise UsageError("--steps must be non-negative")
    result = run(c, seed=cfg.seed, max_steps=cfg.steps)
    fmt = "json" if args.json_trace else args.trace
    print(format_trace_json(result) if fmt == "json" else format_trace(result))
    if result.halt == "error":
        return EXIT_REJECTED
    return EXIT_OK


def cmd_explore(args) -> int:
    sf = _load(args.file)
    c = _configuration(args.file, sf)
    cfg = ExploreConfig(depth=args.depth, unfold=args.unfold, max_states=args.max_states)
    report = explore(c, cfg.depth, cfg.unfold, cfg.max_states)
    print(report.summary())
    if report.errors:
        return EXIT_REJECTED
    return EXIT_INCONCLUSIVE if report.truncated else EXIT_OK


def cmd_validate(args) -> int:
    text = _read(args.derivation_file)
    try:
        d = deserialize(text)
    except DerivationFormatError as exc:
        raise UsageError(f"{args.derivation_file}: {exc}") from exc
    result = validate(d)
    if result:
        print(f"VALID  {d.size()} node(s)")
        return EXIT_OK
    print(f"INVALID  {result}")
    return EXIT_REJECTED


def cmd_fmt(args) -> int:
    sf = _load(args.file)
    sys.stdout.write(pretty(sf))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pir", description="Typecheck, run and explore πR programs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = CheckConfig()
    c = sub.add_parser("check", help="typecheck a configuration")
    c.add_argument("file")
    c.add_argument("--derivation", metavar="OUT", help="write the derivation to OUT ('-' for stdout)")
    c.add_argument("--max-index", type=int, default=d.max_index, help="cap on unique indices")
    c.add_argument("--budget", type=int, default=d.budget, help="cap on judgments visited")
    c.set_defaults(func=cmd_check)

    d = RunConfig()
    r = sub.add_parser("run", help="execute with a seeded random scheduler")
    r.add_argument("file")
    r.add_argument("--seed", type=int, default=d.seed)
    r.add_argument("--steps", type=int, default=d.steps)
    r.add_argument("--trace", choices=("text", "json"), default="text")
    r.add_argument("--json-trace", action="store_true", help="same as --trace json")
    r.set_defaults(func=cmd_run)

    d = ExploreConfig()
    e = sub.add_parser("explore", help="bounded breadth-first state exploration")
    e.add_argument("file")
    e.add_argument("--depth", type=int, default=d.depth)
    e.add_argument("--unfold", type=int, default=d.unfold)
    e.add_argument("--max-states", type=int, default=d.max_states)
    e.set_defaults(func=cmd_explore)

    v = sub.add_parser("validate", help="check a serialized derivation")
    v.add_argument("derivation_file")
    v.set_defaults(func=cmd_validate)

    f = sub.add_parser("fmt", help="pretty-print a .pir file")
    f.add_argument("file")
    f.set_defaults(func=cmd_fmt)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
