"""Pretty-printer; parse(print(p)) == p modulo spans."""

from __future__ import annotations

from lqh.logic import print_rtype
from lqh.syntax import (
    Clause,
    EApp,
    EBinOp,
    EBool,
    ECons,
    EHint,
    EHole,
    EIf,
    EInt,
    ENil,
    ENot,
    EUnit,
    EVar,
    Expr,
    PatCons,
    PatInt,
    PatNil,
    Pattern,
    PatVar,
    Program,
    TypeAlias,
)

_PREC_HINT = 1
_PREC_IF = 2
_PREC_OR = 3
_PREC_AND = 4
_PREC_CMP = 5
_PREC_CONS = 6
_PREC_ADD = 7
_PREC_MUL = 8
_PREC_APP = 11
_PREC_ATOM = 12


def print_expr(e: Expr) -> str:
    return _pe(e, 0)


def _pe(e: Expr, ctx: int) -> str:
    match e:
        case EInt(value=n):
            return _wrap(str(n), _PREC_ATOM if n >= 0 else _PREC_APP, ctx)
        case EBool(value=b):
            return "true" if b else "false"
        case EUnit():
            return "()"
        case EVar(name=n) | EHole(name=n):
            return n
        case ENil():
            return "[]"
        case ECons():
            return f"({_chain(e)})"
        case EBinOp(op=op, left=l, right=r):
            prec = {
                "||": _PREC_OR,
                "&&": _PREC_AND,
                "==": _PREC_CMP,
                "<=": _PREC_CMP,
                "<": _PREC_CMP,
                ">=": _PREC_CMP,
                ">": _PREC_CMP,
                "+": _PREC_ADD,
                "-": _PREC_ADD,
                "*": _PREC_MUL,
                "mod": _PREC_MUL,
            }[op]
            return _wrap(f"{_pe(l, prec)} {op} {_pe(r, prec + 1)}", prec, ctx)
        case ENot(arg=a):
            return _wrap(f"not {_pe(a, _PREC_APP + 1)}", _PREC_APP, ctx)
        case EApp(fn=f, args=args):
            body = " ".join([f] + [_pe(a, _PREC_ATOM) for a in args])
            return _wrap(body, _PREC_APP, ctx)
        case EIf(cond=c, then=t, els=f):
            return _wrap(
                f"if {_pe(c, _PREC_OR)} then {_pe(t, _PREC_IF)} else {_pe(f, _PREC_IF)}",
                _PREC_IF,
                ctx,
            )
        case EHint(body=b, proof=p):
            return _wrap(f"{_pe(b, _PREC_HINT)} ? {_pe(p, _PREC_HINT + 1)}", _PREC_HINT, ctx)
    raise AssertionError(f"unprintable expression {e!r}")


def _chain(e: Expr) -> str:
    parts = []
    while isinstance(e, ECons):
        parts.append(_pe(e.head, _PREC_CONS + 1))
        e = e.tail
    parts.append(_pe(e, _PREC_CONS))
    return ":".join(parts)


def _wrap(s: str, prec: int, ctx: int) -> str:
    return f"({s})" if prec < ctx else s


def print_pattern(p: Pattern) -> str:
    match p:
        case PatVar(name=n):
            return n
        case PatNil():
            return "[]"
        case PatCons(head=h, tail=t):
            return f"({h}:{t})"
        case PatInt(value=n):
            return str(n)
    raise AssertionError


def print_clause(c: Clause) -> str:
    parts = [c.name] + [print_pattern(p) for p in c.patterns]
    return f"{' '.join(parts)} = {print_expr(c.body)}"


def print_program(p: Program) -> str:
    blocks: list[str] = []
    for item in p.items:
        if isinstance(item, TypeAlias):
            blocks.append(f"type {item.name} = {print_rtype(item.rtype)}")
        else:
            lines = []
            if item.signature is not None:
                lines.append(f"{item.name} :: {print_rtype(item.signature)}")
            lines.extend(print_clause(c) for c in item.clauses)
            blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")
