"""``psideform`` command line entry point."""
from __future__ import annotations

import argparse
import json
import sys
from typing import Iterator, List, Optional

from ..algebra import AlgebraError
from ..forms import GradingError
from ..registry import FixtureError, fixture_loader, fixture_names
from ..vdata import VDataError
from .commands import CommandError, CommandResult, InvariantBreach, run_statement
from .document import build_environment
from .parser import ParseError, Statement, tokenize
from .printer import print_environment

EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_BREACH = 0, 1, 2, 3

MODULE_ERRORS = (CommandError, AlgebraError, GradingError, VDataError, FixtureError, ValueError, ZeroDivisionError)


def format_text(res: CommandResult) -> str:
    out = [f"> {res.command}"]
    out += [f"  {line}" for line in res.lines]
    out.append(f"RESULT {res.result}")
    return "\n".join(out)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def iter_results(text: str) -> Iterator[CommandResult]:
    """Run the commands of a document in order; raises on parse or module errors."""
    env = build_environment(text, fixture_loader)
    for st in env.commands:
        try:
            yield run_statement(env, st)
        except (ParseError, InvariantBreach):
            raise
        except MODULE_ERRORS as exc:
            raise CommandError(f"line {st.line}: {' '.join(st.text.split())}: {exc}") from None


def run_text(text: str) -> List[CommandResult]:
    return list(iter_results(text))


def _exit_for(results: List[CommandResult]) -> int:
    return EXIT_FALSE if any(r.verdict is False for r in results) else EXIT_OK


def _fixture_doc(name: str) -> str:
    return f"fixture {name}\n"


def build_parser() -> argparse.ArgumentParser:
    # --format is accepted before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default=argparse.SUPPRESS)
    ap = argparse.ArgumentParser(prog="psideform", parents=[common],
                                 description="Exact computations for calibrated deformation problems.")
    sub = ap.add_subparsers(dest="action", required=True)
    p = sub.add_parser("run", parents=[common], help="run the commands of a document")
    p.add_argument("file", help="document path, or - for stdin")
    p = sub.add_parser("print", parents=[common], help="print a document in canonical form")
    p.add_argument("file")
    p = sub.add_parser("fixture", parents=[common], help="load a fixture and run its manifest")
    p.add_argument("name")
    sub.add_parser("list-fixtures", parents=[common], help="list bundled fixtures")
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    out = sys.stdout
    fmt = getattr(args, "format", "text")
    if args.action == "list-fixtures":
        for n in fixture_names():
            out.write(n + "\n")
        return EXIT_OK
    try:
        if args.action == "print":
            out.write(print_environment(build_environment(_read(args.file), fixture_loader)))
            return EXIT_OK
        text = _fixture_doc(args.name) if args.action == "fixture" else _read(args.file)
    except (ParseError, OSError, FixtureError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    results: List[CommandResult] = []
    code, error = EXIT_OK, None
    try:
        for res in iter_results(text):
            results.append(res)
            if fmt == "text":
                out.write(format_text(res) + "\n")
        code = _exit_for(results)
    except InvariantBreach as exc:
        code, error = EXIT_BREACH, f"internal invariant breach: {exc}"
    except (ParseError,) + MODULE_ERRORS as exc:
        code, error = EXIT_USAGE, str(exc)
    if fmt == "json":
        doc = {"results": [r.as_json() for r in results]}
        if error:
            doc["error"] = error
        out.write(json.dumps(doc, indent=2) + "\n")
    if error:
        prefix = "" if code == EXIT_BREACH else "error: "
        sys.stderr.write(prefix + error + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
