"""Diagnostics shared by the parser, checker, CLI, and service."""

from __future__ import annotations

from dataclasses import dataclass

from lqh.syntax import Span

SEV_ERROR = "error"
SEV_WARNING = "warning"
SEV_INFO = "info"

# diagnostic codes
PARSE = "PARSE"
DUP_HOLE = "DUP_HOLE"
ARITY = "ARITY"
ALIAS = "ALIAS"
WILDCARD = "WILDCARD"
UNBOUND = "UNBOUND"
SORT = "SORT"
SIGNATURE = "SIGNATURE"
MATCH = "MATCH"
TERMINATION = "TERMINATION"
MUTUAL_RECURSION = "MUTUAL_RECURSION"
VC_INVALID = "VC_INVALID"
VC_UNKNOWN = "VC_UNKNOWN"
HOLE = "HOLE"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    code: str
    span: Span
    message: str

    def render(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.span.line}:{self.span.col}: {self.severity}[{self.code}]: {self.message}"

    def to_json(self, filename: str = "<input>") -> dict:
        return {
            "severity": self.severity,
            "code": self.code,
            "span": {
                "file": filename,
                "line": self.span.line,
                "col": self.span.col,
                "end_line": self.span.end_line,
                "end_col": self.span.end_col,
            },
            "message": self.message,
        }


def error(code: str, span: Span, message: str) -> Diagnostic:
    return Diagnostic(SEV_ERROR, code, span, message)


class DiagnosticError(Exception):
    """Raised by phases that cannot produce a partial result."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(d.message for d in diagnostics) or "error")
