"""Command-line front end.

Exit codes: 0 success, 1 check errors or remaining holes (or runtime errors
like an unknown hole id), 2 usage errors, 4 solver-infrastructure failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from lqh import __version__
from lqh.checker import CheckConfig, check_program
from lqh.driver import analysis_json, analyze, full_check_json, hole_diagnostics, render_hole_block
from lqh.holes import HoleError, StaleEditError, apply_edit, case_split, fill
from lqh.logic import display_rtype
from lqh.parser import ParseError, parse_program
from lqh.smt import SolverError

EXIT_OK = 0
EXIT_CHECK = 1
EXIT_USAGE = 2
EXIT_SOLVER = 4


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lqh",
        description="Refinement-type checker with typed holes and SMT-assisted proof editing",
    )
    p.add_argument("--version", action="version", version=f"lqh {__version__}")
    p.add_argument("--json", action="store_true", help="emit machine-readable lqh/1 JSON")
    p.add_argument("--solver", metavar="PATH", help="SMT solver command (default: LQH_SOLVER, z3, or the bundled shim)")
    p.add_argument("--fuel", type=int, default=8, metavar="N", help="equation-unfolding budget (default 8)")
    p.add_argument("--smt-timeout-ms", type=int, default=5000, metavar="N", help="per-query solver timeout (default 5000)")
    p.add_argument("--no-auto-unit", action="store_true", help="skip probing proof holes with ()")
    p.add_argument("--dump-smt", metavar="DIR", help="write every solver query to DIR")

    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="check a file; holes are errors")
    c.add_argument("file")

    h = sub.add_parser("holes", help="list holes with simplified goals")
    h.add_argument("file")

    ho = sub.add_parser("hole", help="full report for one hole")
    ho.add_argument("file")
    ho.add_argument("id")

    s = sub.add_parser("split", help="case split a clause-root hole on a variable")
    s.add_argument("file")
    s.add_argument("id")
    s.add_argument("var")
    s.add_argument("--write", action="store_true", help="rewrite the file in place")
    s.add_argument("--auto-unit", action="store_true", help="discharge branches provable by ()")

    f = sub.add_parser("fill", help="fill a hole with an expression and recheck")
    f.add_argument("file")
    f.add_argument("id")
    f.add_argument("expr")
    f.add_argument("--write", action="store_true", help="rewrite the file in place")

    sv = sub.add_parser("serve", help="start the HTTP service")
    sv.add_argument("--port", type=int, default=8645)
    sv.add_argument("--host", default="127.0.0.1")
    return p


def config_from(args: argparse.Namespace) -> CheckConfig:
    return CheckConfig(
        solver=args.solver,
        fuel=args.fuel,
        smt_timeout_ms=args.smt_timeout_ms,
        auto_unit=not args.no_auto_unit,
        dump_smt=args.dump_smt,
    )


def _read_file(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        return _dispatch(args)
    except FileNotFoundError as e:
        print(f"lqh: file not found: {e.filename}", file=sys.stderr)
        return EXIT_CHECK
    except (HoleError, StaleEditError, ParseError) as e:
        if isinstance(e, ParseError):
            for d in e.diagnostics:
                print(d.render(getattr(args, "file", "<input>")), file=sys.stderr)
        else:
            print(f"lqh: {e}", file=sys.stderr)
        return EXIT_CHECK
    except SolverError as e:
        print(f"lqh: solver failure: {e}", file=sys.stderr)
        return EXIT_SOLVER


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "serve":
        from lqh.service import serve

        serve(host=args.host, port=args.port, config=config_from(args))
        return EXIT_OK

    source = _read_file(args.file)
    config = config_from(args)

    if args.command == "check":
        return _cmd_check(args, source, config)
    if args.command == "holes":
        return _cmd_holes(args, source, config)
    if args.command == "hole":
        return _cmd_hole(args, source, config)
    if args.command == "split":
        return _cmd_split(args, source, config)
    if args.command == "fill":
        return _cmd_fill(args, source, config)
    raise AssertionError(args.command)


def _cmd_check(args, source: str, config: CheckConfig) -> int:
    analysis = analyze(source, config)
    if args.json:
        print(json.dumps(full_check_json(analysis, args.file), indent=2))
    else:
        for d in analysis.diagnostics + hole_diagnostics(analysis):
            print(d.render(args.file))
    return EXIT_OK if analysis.ok else EXIT_CHECK


def _cmd_holes(args, source: str, config: CheckConfig) -> int:
    analysis = analyze(source, config)
    if analysis.parse_errors:
        for d in analysis.parse_errors:
            print(d.render(args.file), file=sys.stderr)
        return EXIT_CHECK
    if args.json:
        print(json.dumps(analysis_json(analysis, args.file), indent=2))
        return EXIT_OK
    for goal, _actions in analysis.holes:
        span = goal.capture.span
        print(f"{goal.name}  {span.line}:{span.col}  {display_rtype(goal.simplified)}")
    return EXIT_OK


def _cmd_hole(args, source: str, config: CheckConfig) -> int:
    analysis = analyze(source, config)
    if analysis.parse_errors:
        for d in analysis.parse_errors:
            print(d.render(args.file), file=sys.stderr)
        return EXIT_CHECK
    found = analysis.hole(args.id)
    if found is None:
        print(f"lqh: no hole named {args.id!r}", file=sys.stderr)
        return EXIT_CHECK
    goal, actions = found
    if args.json:
        doc = analysis_json(analysis, args.file)
        doc["holes"] = [h for h in doc["holes"] if h["id"] == args.id]
        print(json.dumps(doc, indent=2))
        return EXIT_OK
    print(render_hole_block(goal, actions))
    binders, facts = goal.display_env()
    print()
    print("Environment:")
    for n, t in binders:
        print(f"  {n} : {t}")
    for f in facts:
        print(f"  {f}")
    print()
    print(f"Raw goal:        {display_rtype(goal.raw)}")
    print(f"Simplified goal: {display_rtype(goal.simplified)}")
    if actions:
        print()
        print("Actions:")
        for a in actions:
            print(f"  [{a.kind}] {a.message.strip()}")
    return EXIT_OK


def _cmd_split(args, source: str, config: CheckConfig) -> int:
    program = parse_program(source)
    result = check_program(program, config)
    edit = case_split(program, result, args.id, args.var, auto_unit=args.auto_unit, config=config)
    new_source = apply_edit(source, edit)
    if args.write:
        Path(args.file).write_text(new_source, encoding="utf-8")
    if args.json:
        print(json.dumps({"schema": "lqh/1", "new_source": new_source,
                          "renumbering": edit.renumbering, "created": edit.created}, indent=2))
    elif not args.write:
        print(new_source, end="")
    return EXIT_OK


def _cmd_fill(args, source: str, config: CheckConfig) -> int:
    program = parse_program(source)
    result = check_program(program, config)
    _edit, new_source, new_result = fill(program, result, args.id, args.expr, config)
    if args.write:
        Path(args.file).write_text(new_source, encoding="utf-8")
    if args.json:
        analysis = analyze(new_source, config)
        doc = analysis_json(analysis, args.file)
        doc["new_source"] = new_source
        print(json.dumps(doc, indent=2))
    elif not args.write:
        print(new_source, end="")
    for d in new_result.diagnostics:
        print(d.render(args.file), file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
