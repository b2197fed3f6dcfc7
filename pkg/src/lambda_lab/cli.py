"""Command-line front door.

    lambda-lab check FILE...        validate the rule arrows in .lam files
    lambda-lab reduce TERM          batch-reduce a term, printing the trace
    lambda-lab redexes TERM         list the reducible applications
    lambda-lab fmt FILE...          canonical formatting for .lam files
    lambda-lab serve                host the wire protocol (and the web UI)

Exit codes are stable: 0 success/all-valid, 1 invalid derivation or rule
refusal, 2 parse/config error, 3 step limit.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from .derivation import (
    Derivation,
    NormalFormReached,
    StepLimitReached,
    Strategy,
    StuckOnCapture,
    build_environment,
    normalize,
    validate_derivation,
)
from .syntax import (
    ConfigError,
    DEFAULT_CONFIG,
    DEFAULT_CONFIG_PATH,
    ParseError,
    SyntaxConfig,
    load_config,
    parse_document,
    parse_term,
    print_document,
    print_term,
)
from .terms import Environment
from .workspace import path_str

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PARSE = 2
EXIT_STEP_LIMIT = 3


def _resolve_config(path: Optional[str]) -> SyntaxConfig:
    if path is not None:
        return load_config(path)
    if os.path.exists(DEFAULT_CONFIG_PATH):
        return load_config(DEFAULT_CONFIG_PATH)
    return DEFAULT_CONFIG


def _print_diagnostics(path: str, diagnostics, out) -> None:
    for d in diagnostics:
        print(
            f"{path}:{d.span.start_line}:{d.span.start_col}: {d.severity.value}: {d.message}",
            file=out,
        )


def _diagnostic_json(d) -> dict:
    return {
        "severity": d.severity.value,
        "line": d.span.start_line,
        "col": d.span.start_col,
        "endLine": d.span.end_line,
        "endCol": d.span.end_col,
        "message": d.message,
        "code": d.code,
    }


def _load_env(path: Optional[str], config: SyntaxConfig):
    if path is None:
        return Environment(), []
    with open(path, encoding="utf-8") as fh:
        doc, diags = parse_document(fh.read(), config)
    if any(d for d in diags):
        return None, diags
    env, env_diags = build_environment(doc)
    if env_diags:
        return None, env_diags
    return env, []


def cmd_check(args) -> int:
    config = _resolve_config(args.config)
    report = {"files": []}
    worst = EXIT_OK
    for path in args.files:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            return EXIT_PARSE
        doc, diags = parse_document(text, config)
        env, env_diags = build_environment(doc)
        diags = diags + env_diags
        file_report = {"path": path, "diagnostics": [_diagnostic_json(d) for d in diags], "items": []}
        invalid_here = 0
        step_count = 0
        for i, item in enumerate(doc.items):
            item_id = item.name or f"#{i + 1}"
            deriv = Derivation(item.name, tuple(t for t, _ in item.terms), item.arrows)
            verdicts = validate_derivation(deriv, env)
            step_count += len(verdicts)
            item_json = {"id": item_id, "steps": []}
            for v in verdicts:
                entry = {"index": v.index, "status": "valid" if v.valid else "invalid"}
                if v.reason:
                    entry["reason"] = v.reason
                if v.witness is not None:
                    entry["witness"] = path_str(v.witness)
                item_json["steps"].append(entry)
                if not v.valid:
                    invalid_here += 1
                    if args.format == "text":
                        print(f"{path}: {item_id}: step {v.index + 1} invalid: {v.reason}")
            file_report["items"].append(item_json)
        report["files"].append(file_report)
        if args.format == "text":
            _print_diagnostics(path, diags, sys.stdout)
            status = "OK" if not diags and not invalid_here else "FAILED"
            print(f"{path}: {len(doc.items)} item(s), {step_count} step(s), {status}")
        if diags:
            worst = EXIT_PARSE
        elif invalid_here and worst == EXIT_OK:
            worst = EXIT_INVALID
    if args.format == "json":
        print(json.dumps(report, ensure_ascii=False, indent=2))
    return worst


def cmd_reduce(args) -> int:
    config = _resolve_config(args.config)
    env, env_diags = _load_env(args.env, config)
    if env is None:
        _print_diagnostics(args.env, env_diags, sys.stderr)
        return EXIT_PARSE
    try:
        term = parse_term(args.term, config)
    except ParseError as exc:
        _print_diagnostics("<term>", exc.diagnostics, sys.stderr)
        return EXIT_PARSE
    strategy = Strategy(args.strategy)
    trace, outcome = normalize(term, env, strategy, args.max_steps)
    if args.format == "json":
        print(
            json.dumps(
                {
                    "steps": [print_term(t, config) for t in trace.steps],
                    "rules": [config.rule_spellings(r)[0] for r in trace.rules],
                    "outcome": _outcome_name(outcome),
                    "capturedNames": sorted(outcome.report.captured)
                    if isinstance(outcome, StuckOnCapture)
                    else [],
                },
                ensure_ascii=False,
                indent=2,
            )
        )
    else:
        print(print_term(trace.steps[0], config))
        for rule, step in zip(trace.rules, trace.steps[1:]):
            print(f"{config.arrow_text(rule)} {print_term(step, config)}")
        print(_outcome_line(outcome, len(trace.rules)))
    if isinstance(outcome, StepLimitReached):
        return EXIT_STEP_LIMIT
    if isinstance(outcome, StuckOnCapture):
        return EXIT_INVALID
    return EXIT_OK


def _outcome_name(outcome) -> str:
    if isinstance(outcome, NormalFormReached):
        return "normal-form"
    if isinstance(outcome, StepLimitReached):
        return "step-limit"
    return "stuck"


def _outcome_line(outcome, steps: int) -> str:
    if isinstance(outcome, NormalFormReached):
        return f"NormalForm after {steps} step(s)"
    if isinstance(outcome, StepLimitReached):
        return f"StepLimit after {steps} step(s)"
    names = ", ".join(sorted(outcome.report.captured))
    return f"Stuck after {steps} step(s): capture of {names}"


def cmd_redexes(args) -> int:
    config = _resolve_config(args.config)
    env, env_diags = _load_env(args.env, config)
    if env is None:
        _print_diagnostics(args.env, env_diags, sys.stderr)
        return EXIT_PARSE
    try:
        term = parse_term(args.term, config)
    except ParseError as exc:
        _print_diagnostics("<term>", exc.diagnostics, sys.stderr)
        return EXIT_PARSE
    from .terms import enumerate_redexes, subterm_at

    redexes = enumerate_redexes(term, env)
    if args.format == "json":
        print(
            json.dumps(
                {
                    "redexes": [
                        {
                            "index": i,
                            "kind": info.kind.value,
                            "path": path_str(info.path),
                            "term": print_term(subterm_at(term, info.path), config),
                        }
                        for i, info in enumerate(redexes)
                    ]
                },
                ensure_ascii=False,
                indent=2,
            )
        )
        return EXIT_OK
    if not redexes:
        print("0 redexes")
        return EXIT_OK
    for i, info in enumerate(redexes):
        shown = path_str(info.path) or "[]"
        print(
            f"{i + 1} {info.kind.value} at {shown}: "
            f"{print_term(subterm_at(term, info.path), config)}"
        )
    return EXIT_OK


def cmd_fmt(args) -> int:
    config = _resolve_config(args.config)
    status = EXIT_OK
    for path in args.files:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            return EXIT_PARSE
        doc, diags = parse_document(text, config)
        if diags:
            _print_diagnostics(path, diags, sys.stderr)
            status = EXIT_PARSE
            continue  # never write a partial result
        formatted = print_document(doc, config)
        if args.write:
            if formatted != text:
                with open(path, "w", encoding="utf-8") as fh:
                    fh.write(formatted)
        else:
            sys.stdout.write(formatted)
    return status


def cmd_serve(args) -> int:
    from . import protocol

    try:
        config = _resolve_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    root = args.root
    if root is not None and not os.path.isdir(root):
        print(f"--root {root!r} is not a directory", file=sys.stderr)
        return EXIT_PARSE
    try:
        protocol.serve(args.port, root, config)
    except OSError as exc:
        print(f"cannot serve on port {args.port}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lambda-lab",
        description="Educational untyped lambda calculus workbench",
    )
    parser.add_argument(
        "--config",
        metavar="PATH",
        default=None,
        help=f"syntax config file (default: {DEFAULT_CONFIG_PATH} if present)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate derivation files")
    p.add_argument("files", nargs="+", metavar="FILE")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("reduce", help="reduce a term to normal form")
    p.add_argument("term")
    p.add_argument(
        "--strategy",
        choices=tuple(s.value for s in Strategy),
        default=Strategy.NORMAL_ORDER.value,
    )
    p.add_argument("--max-steps", type=int, default=1000)
    p.add_argument("--env", metavar="FILE", default=None, help=".lam file with named terms")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("redexes", help="list the redexes of a term")
    p.add_argument("term")
    p.add_argument("--env", metavar="FILE", default=None)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_redexes)

    p = sub.add_parser("fmt", help="canonically format derivation files")
    p.add_argument("files", nargs="+", metavar="FILE")
    p.add_argument("--write", action="store_true", help="rewrite files in place")
    p.set_defaults(func=cmd_fmt)

    p = sub.add_parser("serve", help="serve the wire protocol and web UI")
    p.add_argument("--port", type=int, default=8045)
    p.add_argument("--root", metavar="DIR", default=None, help="static UI bundle to host")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
