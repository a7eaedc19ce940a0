"""Shared analysis pipeline: parse, check, compute hole reports, shape the
lqh/1 JSON payload.  The CLI and the HTTP service both sit on top of this."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from lqh import diagnostics as diag
from lqh.checker import CheckConfig, CheckResult, check_program
from lqh.diagnostics import Diagnostic
from lqh.holes import (
    EditAction,
    HoleGoal,
    enumerate_actions_for,
    render_hole_block,
)
from lqh.logic import display_rtype
from lqh.parser import ParseError, parse_program
from lqh.smt import POOL, discover_solver
from lqh.syntax import Program

SCHEMA = "lqh/1"


@dataclass
class Analysis:
    source: str
    program: Optional[Program] = None
    check: Optional[CheckResult] = None
    parse_errors: list[Diagnostic] = field(default_factory=list)
    holes: list[tuple[HoleGoal, list[EditAction]]] = field(default_factory=list)

    @property
    def diagnostics(self) -> list[Diagnostic]:
        if self.check is None:
            return self.parse_errors
        return self.parse_errors + self.check.diagnostics

    @property
    def ok(self) -> bool:
        """Accepted and hole free."""
        return (
            not self.parse_errors
            and self.check is not None
            and self.check.accepted
        )

    def hole(self, hole_id: str) -> Optional[tuple[HoleGoal, list[EditAction]]]:
        for goal, actions in self.holes:
            if goal.name == hole_id:
                return goal, actions
        return None


def analyze(source: str, config: Optional[CheckConfig] = None) -> Analysis:
    """Parse and check; on success compute every hole's goal and actions.
    One solver client serves the entire analysis."""
    config = config or CheckConfig()
    try:
        program = parse_program(source)
    except ParseError as e:
        return Analysis(source=source, parse_errors=e.diagnostics)

    client = config.client
    acquired = False
    if client is None:
        client = POOL.acquire(discover_solver(config.solver), config.smt_timeout_ms)
        acquired = True
    try:
        inner = CheckConfig(
            solver=config.solver,
            fuel=config.fuel,
            smt_timeout_ms=config.smt_timeout_ms,
            auto_unit=config.auto_unit,
            dump_smt=config.dump_smt,
            client=client,
        )
        result = check_program(program, inner)
        analysis = Analysis(source=source, program=program, check=result)
        if not result.errors:
            seen = set()
            for cap in result.captures:
                if cap.name in seen:
                    continue
                seen.add(cap.name)
                goal, actions = enumerate_actions_for(program, result, cap.name, inner, client)
                analysis.holes.append((goal, actions))
        return analysis
    finally:
        if acquired:
            POOL.release(client)


def hole_diagnostics(analysis: Analysis) -> list[Diagnostic]:
    """Each hole as a HOLE error whose message is the compiler block."""
    out = []
    for goal, actions in analysis.holes:
        out.append(
            Diagnostic(
                severity=diag.SEV_ERROR,
                code=diag.HOLE,
                span=goal.capture.span,
                message=render_hole_block(goal, actions),
            )
        )
    return out


def span_json(span, filename: str) -> dict:
    return {
        "file": filename,
        "line": span.line,
        "col": span.col,
        "end_line": span.end_line,
        "end_col": span.end_col,
    }


def hole_json(goal: HoleGoal, actions: list[EditAction], filename: str) -> dict:
    binders, facts = goal.display_env()
    return {
        "id": goal.name,
        "span": span_json(goal.capture.span, filename),
        "raw_type": display_rtype(goal.raw),
        "simplified_type": display_rtype(goal.simplified),
        "env": [{"name": n, "type": t} for n, t in binders],
        "facts": facts,
        "actions": [
            {
                "kind": a.kind,
                "message": a.message,
                "edit_preview": a.edit_preview,
                "args": a.variable or a.expr_text,
            }
            for a in actions
        ],
    }


def analysis_json(analysis: Analysis, filename: str = "<input>") -> dict:
    return {
        "schema": SCHEMA,
        "diagnostics": [d.to_json(filename) for d in analysis.diagnostics],
        "holes": [hole_json(g, a, filename) for g, a in analysis.holes],
    }


def full_check_json(analysis: Analysis, filename: str = "<input>") -> dict:
    """The `check` payload: analysis plus one HOLE diagnostic block per
    hole, exactly as the CLI reports them."""
    doc = analysis_json(analysis, filename)
    doc["diagnostics"] += [d.to_json(filename) for d in hole_diagnostics(analysis)]
    return doc
