"""Command-line interface: check, infer, whatif, serve.

Exit codes: 0 success, 1 semantic errors (validation failures, rejected
interventions), 2 syntax/usage errors. Reports go to stdout, diagnostics
to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .engine import DERIVED_PREDICATES, InvalidModelError, infer
from .explain import explain, render_proof_tree, render_report
from .model import OrgModel, Severity, validate_model
from .scenario import ScenarioParseError, parse_scenario
from .whatif import (
    UnknownTargetError,
    WouldInvalidateError,
    apply_intervention,
    diff_inferences,
    parse_intervention,
    render_diff,
)

EXIT_OK = 0
EXIT_SEMANTIC = 1
EXIT_SYNTAX = 2


def _load_model(path: str, verbose: bool = False) -> OrgModel:
    text = Path(path).read_text("utf-8")
    model = parse_scenario(text)
    if verbose:
        entity_count = sum(len(table) for table in model._tables().values())
        print(f"{path}: {entity_count} entities, {len(model.relations)} relations",
              file=sys.stderr)
    return model


def _print_parse_error(exc: ScenarioParseError) -> None:
    for issue in exc.issues:
        print(str(issue), file=sys.stderr)


def cmd_check(args: argparse.Namespace) -> int:
    try:
        model = _load_model(args.file, args.verbose)
    except ScenarioParseError as exc:
        _print_parse_error(exc)
        return EXIT_SYNTAX
    violations = validate_model(model)
    for v in violations:
        print(str(v))
    if any(v.severity is Severity.ERROR for v in violations):
        return EXIT_SEMANTIC
    return EXIT_OK


def cmd_infer(args: argparse.Namespace) -> int:
    if args.explain is not None and args.explain not in DERIVED_PREDICATES:
        print(f"unknown predicate {args.explain!r}; expected one of: "
              + ", ".join(DERIVED_PREDICATES), file=sys.stderr)
        return EXIT_SYNTAX
    try:
        model = _load_model(args.file, args.verbose)
    except ScenarioParseError as exc:
        _print_parse_error(exc)
        return EXIT_SYNTAX
    try:
        result = infer(model)
    except InvalidModelError as exc:
        for v in exc.violations:
            print(str(v), file=sys.stderr)
        return EXIT_SEMANTIC
    sys.stdout.write(render_report(result, args.report))
    if args.explain is not None:
        for f in result.facts_for(args.explain):
            print()
            print(render_proof_tree(explain(result, f)))
    return EXIT_OK


def cmd_whatif(args: argparse.Namespace) -> int:
    try:
        model = _load_model(args.file, args.verbose)
        intervention = parse_intervention(Path(args.apply).read_text("utf-8"))
    except ScenarioParseError as exc:
        _print_parse_error(exc)
        return EXIT_SYNTAX
    try:
        before = infer(model)
        varied = apply_intervention(model, intervention)
        after = infer(varied)
    except InvalidModelError as exc:
        for v in exc.violations:
            print(str(v), file=sys.stderr)
        return EXIT_SEMANTIC
    except UnknownTargetError as exc:
        print(f"UnknownTarget: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC
    except WouldInvalidateError as exc:
        print("WouldInvalidate:", file=sys.stderr)
        for v in exc.violations:
            print(f"  {v}", file=sys.stderr)
        return EXIT_SEMANTIC
    sys.stdout.write(render_diff(diff_inferences(before, after), args.report))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app, default_address, parse_address

    try:
        host, port = parse_address(args.addr) if args.addr else default_address()
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_SYNTAX
    store_dir = Path(args.store) if args.store else None
    if store_dir is not None:
        try:
            store_dir.mkdir(parents=True, exist_ok=True)
            probe = store_dir / ".write-probe"
            probe.write_text("")
            probe.unlink()
        except OSError as exc:
            print(f"store directory not writable: {exc}", file=sys.stderr)
            return EXIT_SEMANTIC
    app = create_app(store_dir)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except SystemExit:
        print(f"failed to bind {host}:{port}", file=sys.stderr)
        return EXIT_SEMANTIC
    except OSError as exc:
        print(f"failed to bind {host}:{port}: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orgrisk",
        description="Infer coordination needs and cooperation risks from an "
                    "organizational scenario.",
    )
    parser.add_argument("--verbose", action="store_true",
                        help="extra diagnostics on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="validate a scenario file")
    p_check.add_argument("file")
    p_check.set_defaults(func=cmd_check)

    p_infer = sub.add_parser("infer", help="run inference and print the risk report")
    p_infer.add_argument("file")
    p_infer.add_argument("--report", choices=("text", "structured"), default="text")
    p_infer.add_argument("--explain", metavar="PREDICATE", default=None,
                         help="append proof trees for all facts of this predicate")
    p_infer.set_defaults(func=cmd_infer)

    p_whatif = sub.add_parser("whatif", help="apply an intervention and print the diff")
    p_whatif.add_argument("file")
    p_whatif.add_argument("--apply", required=True, metavar="INTERVENTION_FILE")
    p_whatif.add_argument("--report", choices=("text", "structured"), default="text")
    p_whatif.set_defaults(func=cmd_whatif)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--addr", default=None, metavar="HOST:PORT",
                         help="listen address (default: ORGRISK_ADDR or loopback)")
    p_serve.add_argument("--store", default=None, metavar="DIR",
                         help="directory for persistent session logs")
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_SYNTAX if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"cannot read {exc.filename}", file=sys.stderr)
        return EXIT_SYNTAX


if __name__ == "__main__":
    sys.exit(main())
