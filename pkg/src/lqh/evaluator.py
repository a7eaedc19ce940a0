"""Big-step call-by-value interpreter, used as the runtime oracle for
soundness spot checks.  `mod` is Euclidean (result in [0, |divisor|)),
matching the refinement logic."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from lqh import logic
from lqh.logic import Pred
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
    PatVar,
    Program,
)


@dataclass(frozen=True)
class VInt:
    value: int


@dataclass(frozen=True)
class VBool:
    value: bool


@dataclass(frozen=True)
class VUnit:
    pass


@dataclass(frozen=True)
class VList:
    items: tuple["Value", ...]


@dataclass(frozen=True)
class VFun:
    # reference to a named top-level function, possibly partially applied
    name: str
    pending: tuple["Value", ...] = ()


@dataclass(frozen=True)
class VOpaque:
    # stands in for a value of an uninterpreted element sort (from models)
    tag: str


Value = Union[VInt, VBool, VUnit, VList, VFun, VOpaque]

UNIT_VALUE = VUnit()


class EvalError(Exception):
    pass


class HoleReached(EvalError):
    def __init__(self, name: str):
        super().__init__(f"evaluation reached hole {name!r}")
        self.hole = name


def evaluate(program: Program, fn: str, args: list[Value], max_depth: int = 10_000) -> Value:
    """Apply a top-level function to ground argument values."""
    return _apply(program, fn, tuple(args), max_depth)


def _apply(program: Program, fn: str, args: tuple[Value, ...], depth: int) -> Value:
    if depth <= 0:
        raise EvalError("evaluation recursion limit exceeded")
    decl = program.decl(fn)
    if decl is None:
        raise EvalError(f"unknown function {fn!r}")
    if not decl.clauses:
        raise EvalError(f"{fn!r} has no defining clauses")
    arity = len(decl.clauses[0].patterns)
    if len(args) < arity:
        return VFun(fn, args)
    now, rest = args[:arity], args[arity:]
    for clause in decl.clauses:
        bindings = _match_clause(clause, now)
        if bindings is not None:
            result = _eval(program, clause.body, bindings, depth - 1)
            return _apply_value(program, result, rest, depth - 1) if rest else result
    shown = ", ".join(map(_show, now))
    raise EvalError(f"no clause of {fn!r} matches ({shown})")


def _apply_value(program: Program, v: Value, args: tuple[Value, ...], depth: int) -> Value:
    if not args:
        return v
    if not isinstance(v, VFun):
        raise EvalError(f"cannot apply non-function value {_show(v)}")
    return _apply(program, v.name, v.pending + args, depth)


def _match_clause(clause: Clause, args: tuple[Value, ...]) -> Optional[dict[str, Value]]:
    env: dict[str, Value] = {}
    for pat, arg in zip(clause.patterns, args):
        match pat:
            case PatVar(name="_"):
                pass
            case PatVar(name=n):
                env[n] = arg
            case PatNil():
                if not (isinstance(arg, VList) and not arg.items):
                    return None
            case PatCons(head=h, tail=t):
                if not (isinstance(arg, VList) and arg.items):
                    return None
                env[h] = arg.items[0]
                env[t] = VList(arg.items[1:])
            case PatInt(value=n):
                if not (isinstance(arg, VInt) and arg.value == n):
                    return None
    return env


def _eval(program: Program, e: Expr, env: dict[str, Value], depth: int) -> Value:
    if depth <= 0:
        raise EvalError("evaluation recursion limit exceeded")
    match e:
        case EInt(value=n):
            return VInt(n)
        case EBool(value=b):
            return VBool(b)
        case EUnit():
            return UNIT_VALUE
        case EVar(name=n):
            if n in env:
                return env[n]
            if program.decl(n) is not None:
                return _apply(program, n, (), depth - 1)
            raise EvalError(f"unbound variable {n!r}")
        case ENil():
            return VList(())
        case ECons(head=h, tail=t):
            hv = _eval(program, h, env, depth - 1)
            tv = _eval(program, t, env, depth - 1)
            if not isinstance(tv, VList):
                raise EvalError("cons tail is not a list")
            return VList((hv,) + tv.items)
        case ENot(arg=a):
            return VBool(not _as_bool(_eval(program, a, env, depth - 1)))
        case EBinOp(op=op, left=l, right=r):
            return _binop(program, op, l, r, env, depth)
        case EApp(fn=f, args=args):
            vals = tuple(_eval(program, a, env, depth - 1) for a in args)
            if f in env:
                return _apply_value(program, env[f], vals, depth - 1)
            return _apply(program, f, vals, depth - 1)
        case EIf(cond=c, then=t, els=f):
            branch = t if _as_bool(_eval(program, c, env, depth - 1)) else f
            return _eval(program, branch, env, depth - 1)
        case EHint(body=b, proof=p):
            _eval(program, p, env, depth - 1)
            return _eval(program, b, env, depth - 1)
        case EHole(name=n):
            raise HoleReached(n)
    raise AssertionError(f"cannot evaluate {e!r}")


def _binop(program: Program, op: str, l: Expr, r: Expr, env: dict[str, Value], depth: int) -> Value:
    if op == "&&":
        return VBool(
            _as_bool(_eval(program, l, env, depth - 1))
            and _as_bool(_eval(program, r, env, depth - 1))
        )
    if op == "||":
        return VBool(
            _as_bool(_eval(program, l, env, depth - 1))
            or _as_bool(_eval(program, r, env, depth - 1))
        )
    lv = _eval(program, l, env, depth - 1)
    rv = _eval(program, r, env, depth - 1)
    if op == "==":
        return VBool(lv == rv)
    li, ri = _as_int(lv), _as_int(rv)
    if op == "+":
        return VInt(li + ri)
    if op == "-":
        return VInt(li - ri)
    if op == "*":
        return VInt(li * ri)
    if op == "mod":
        if ri == 0:
            raise EvalError("mod by zero")
        return VInt(li % abs(ri))
    cmp = {"<=": li <= ri, "<": li < ri, ">=": li >= ri, ">": li > ri}
    return VBool(cmp[op])


def _as_bool(v: Value) -> bool:
    if not isinstance(v, VBool):
        raise EvalError(f"expected a boolean, got {_show(v)}")
    return v.value


def _as_int(v: Value) -> int:
    if not isinstance(v, VInt):
        raise EvalError(f"expected an integer, got {_show(v)}")
    return v.value


def _show(v: Value) -> str:
    match v:
        case VInt(value=n):
            return str(n)
        case VBool(value=b):
            return "true" if b else "false"
        case VUnit():
            return "()"
        case VList(items=xs):
            return "[" + ",".join(_show(x) for x in xs) + "]"
        case VFun(name=n):
            return f"<{n}>"
        case VOpaque(tag=t):
            return f"<{t}>"
    raise AssertionError


# ---------------------------------------------------------------------------
# Ground predicate evaluation: the independent oracle used to cross-check
# solver verdicts and intrinsic postconditions.


def eval_pred(p: Pred, assignment: dict[str, Value], program: Optional[Program] = None) -> Value:
    match p:
        case logic.PInt(value=n):
            return VInt(n)
        case logic.PBool(value=b):
            return VBool(b)
        case logic.PVar(name=n):
            if n not in assignment:
                raise EvalError(f"unassigned variable {n!r}")
            return assignment[n]
        case logic.PArith(op=op, left=l, right=r):
            li = _as_int(eval_pred(l, assignment, program))
            ri = _as_int(eval_pred(r, assignment, program))
            return VInt(li + ri if op == "+" else li - ri if op == "-" else li * ri)
        case logic.PMod(arg=a, divisor=d):
            return VInt(_as_int(eval_pred(a, assignment, program)) % abs(d))
        case logic.PCmp(op=op, left=l, right=r):
            lv = eval_pred(l, assignment, program)
            rv = eval_pred(r, assignment, program)
            if op == "==":
                return VBool(lv == rv)
            li, ri = _as_int(lv), _as_int(rv)
            return VBool({"<=": li <= ri, "<": li < ri, ">=": li >= ri, ">": li > ri}[op])
        case logic.PNot(arg=a):
            return VBool(not _as_bool(eval_pred(a, assignment, program)))
        case logic.PAnd(left=l, right=r):
            return VBool(
                _as_bool(eval_pred(l, assignment, program))
                and _as_bool(eval_pred(r, assignment, program))
            )
        case logic.POr(left=l, right=r):
            return VBool(
                _as_bool(eval_pred(l, assignment, program))
                or _as_bool(eval_pred(r, assignment, program))
            )
        case logic.PNil():
            return VList(())
        case logic.PCons(head=h, tail=t):
            hv = eval_pred(h, assignment, program)
            tv = eval_pred(t, assignment, program)
            if not isinstance(tv, VList):
                raise EvalError("cons tail is not a list")
            return VList((hv,) + tv.items)
        case logic.PApp(fn="len", args=args) if len(args) == 1:
            arg = eval_pred(args[0], assignment, program)
            if not isinstance(arg, VList):
                raise EvalError("len of a non-list")
            return VInt(len(arg.items))
        case logic.PApp(fn=f, args=args):
            if program is None:
                raise EvalError(f"cannot evaluate application of {f!r} without a program")
            vals = [eval_pred(a, assignment, program) for a in args]
            return evaluate(program, f, vals)
    raise AssertionError(f"cannot evaluate predicate {p!r}")
