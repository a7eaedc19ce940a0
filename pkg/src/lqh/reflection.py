"""Reflected-function and measure equations, plus fuel-bounded unfolding.

Instead of quantified axioms, function definitions become per-clause
equations that are instantiated only at applications whose argument is
constructor-headed (directly or through an environment equality).  The fuel
budget bounds total rewrites, keeping every solver query quantifier free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from lqh import logic
from lqh.logic import (
    Env,
    PApp,
    PArith,
    PCmp,
    PCons,
    PInt,
    PNil,
    PVar,
    Pred,
    RBase,
    RFun,
    RType,
    eq,
    subst,
    subterms,
)
from lqh.syntax import (
    EApp,
    EBinOp,
    EBool,
    ECons,
    EHint,
    EHole,
    EInt,
    ENil,
    ENot,
    EVar,
    Expr,
    PatCons,
    PatInt,
    PatNil,
    PatVar,
    Pattern,
    Program,
)

# pattern shapes guarding an equation
SHAPE_VAR = "var"
SHAPE_NIL = "nil"
SHAPE_CONS = "cons"
SHAPE_INT = "int"


@dataclass(frozen=True)
class Shape:
    kind: str
    names: tuple[str, ...] = ()  # cons binds (head, tail); var binds (name,)
    value: int = 0  # int-literal patterns


@dataclass(frozen=True)
class Equation:
    fn: str
    shapes: tuple[Shape, ...]
    rhs: Pred


@dataclass
class ReflectionTable:
    equations: dict[str, list[Equation]] = field(default_factory=dict)

    def add(self, eq_: Equation) -> None:
        self.equations.setdefault(eq_.fn, []).append(eq_)

    def for_fn(self, fn: str) -> list[Equation]:
        return self.equations.get(fn, [])

    def is_reflected(self, fn: str) -> bool:
        return fn in self.equations


LEN_EQUATIONS = [
    Equation("len", (Shape(SHAPE_NIL),), PInt(0)),
    Equation(
        "len",
        (Shape(SHAPE_CONS, ("h", "t")),),
        PArith("+", PInt(1), PApp("len", (PVar("t"),))),
    ),
]


def _shape_of(p: Pattern) -> Shape:
    match p:
        case PatVar(name=n):
            return Shape(SHAPE_VAR, (n,))
        case PatNil():
            return Shape(SHAPE_NIL)
        case PatCons(head=h, tail=t):
            return Shape(SHAPE_CONS, (h, t))
        case PatInt(value=n):
            return Shape(SHAPE_INT, (), n)
    raise AssertionError


def expr_image(e: Expr) -> Optional[Pred]:
    """The logic-level image of an expression, if it has one.  `e ? p`
    reflects as e; holes, conditionals, and unit have no image."""
    match e:
        case EInt(value=n):
            return PInt(n)
        case EBool(value=b):
            return logic.PBool(b)
        case EVar(name=n):
            return PVar(n)
        case ENil():
            return PNil()
        case ECons(head=h, tail=t):
            hh, tt = expr_image(h), expr_image(t)
            return PCons(hh, tt) if hh is not None and tt is not None else None
        case EBinOp(op="mod", left=l, right=r):
            li = expr_image(l)
            if li is None or not isinstance(r, EInt) or r.value == 0:
                return None
            return logic.PMod(li, r.value)
        case EBinOp(op=op, left=l, right=r):
            li, ri = expr_image(l), expr_image(r)
            if li is None or ri is None:
                return None
            if op in ("+", "-", "*"):
                return PArith(op, li, ri)
            if op in ("==", "<=", "<", ">=", ">"):
                return PCmp(op, li, ri)
            if op == "&&":
                return logic.PAnd(li, ri)
            if op == "||":
                return logic.POr(li, ri)
            return None
        case ENot(arg=a):
            ai = expr_image(a)
            return logic.PNot(ai) if ai is not None else None
        case EApp(fn=f, args=args):
            imgs = [expr_image(a) for a in args]
            if any(i is None for i in imgs):
                return None
            return PApp(f, tuple(imgs))  # type: ignore[arg-type]
        case EHint(body=b):
            return expr_image(b)
        case EHole():
            return None
        case _:
            return None


def _representable_result(t: RType) -> bool:
    return isinstance(t, RBase) and t.sort is not None and not isinstance(t.sort, logic.UnitSort)


def build_reflection_table(program: Program, resolved_sigs: dict[str, RType]) -> ReflectionTable:
    """One defining equation per hole-free clause of every function whose
    result sort is logic-representable.  `len` is always present."""
    table = ReflectionTable()
    for e in LEN_EQUATIONS:
        table.add(e)
    for d in program.decls:
        sig = resolved_sigs.get(d.name)
        if sig is None:
            continue
        result = sig
        while isinstance(result, RFun):
            result = result.cod
        if not _representable_result(result):
            continue
        for clause in d.clauses:
            rhs = expr_image(clause.body)
            if rhs is None:
                continue
            shapes = tuple(_shape_of(p) for p in clause.patterns)
            table.add(Equation(d.name, shapes, rhs))
    return table


# ---------------------------------------------------------------------------
# Matching and rewriting


def _ctor_form(arg: Pred, env: Env) -> Optional[Pred]:
    """Resolve arg to a constructor-headed (or literal) form, possibly via an
    environment equality."""
    if isinstance(arg, (PNil, PCons, PInt)):
        return arg
    if isinstance(arg, PVar):
        for f in env.facts:
            p = f.pred
            if isinstance(p, PCmp) and p.op == "==":
                if p.left == arg and isinstance(p.right, (PNil, PCons, PInt)):
                    return p.right
                if p.right == arg and isinstance(p.left, (PNil, PCons, PInt)):
                    return p.left
    return None


def _match_shape(shape: Shape, arg: Pred, env: Env) -> Optional[dict[str, Pred]]:
    if shape.kind == SHAPE_VAR:
        return {shape.names[0]: arg}
    form = _ctor_form(arg, env)
    if shape.kind == SHAPE_NIL:
        return {} if isinstance(form, PNil) else None
    if shape.kind == SHAPE_CONS:
        if isinstance(form, PCons):
            return {shape.names[0]: form.head, shape.names[1]: form.tail}
        return None
    if shape.kind == SHAPE_INT:
        return {} if isinstance(form, PInt) and form.value == shape.value else None
    raise AssertionError


def match_equation(app: PApp, env: Env, table: ReflectionTable) -> Optional[Pred]:
    """The right-hand side app rewrites to, if some equation applies."""
    for eq_ in table.for_fn(app.fn):
        if len(eq_.shapes) != len(app.args):
            continue
        bindings: dict[str, Pred] = {}
        ok = True
        for shape, arg in zip(eq_.shapes, app.args):
            m = _match_shape(shape, arg, env)
            if m is None:
                ok = False
                break
            bindings.update(m)
        if ok:
            return subst(eq_.rhs, bindings)
    return None


def _rewrite_first(p: Pred, env: Env, table: ReflectionTable) -> Optional[Pred]:
    """Rewrite the leftmost-outermost reducible application, or None."""
    if isinstance(p, PApp):
        rhs = match_equation(p, env, table)
        if rhs is not None:
            return rhs
    match p:
        case PArith(op=op, left=l, right=r):
            nl = _rewrite_first(l, env, table)
            if nl is not None:
                return PArith(op, nl, r)
            nr = _rewrite_first(r, env, table)
            return PArith(op, l, nr) if nr is not None else None
        case logic.PMod(arg=a, divisor=d):
            na = _rewrite_first(a, env, table)
            return logic.PMod(na, d) if na is not None else None
        case PCmp(op=op, left=l, right=r):
            nl = _rewrite_first(l, env, table)
            if nl is not None:
                return PCmp(op, nl, r)
            nr = _rewrite_first(r, env, table)
            return PCmp(op, l, nr) if nr is not None else None
        case logic.PNot(arg=a):
            na = _rewrite_first(a, env, table)
            return logic.PNot(na) if na is not None else None
        case logic.PAnd(left=l, right=r):
            nl = _rewrite_first(l, env, table)
            if nl is not None:
                return logic.PAnd(nl, r)
            nr = _rewrite_first(r, env, table)
            return logic.PAnd(l, nr) if nr is not None else None
        case logic.POr(left=l, right=r):
            nl = _rewrite_first(l, env, table)
            if nl is not None:
                return logic.POr(nl, r)
            nr = _rewrite_first(r, env, table)
            return logic.POr(l, nr) if nr is not None else None
        case PCons(head=h, tail=t):
            nh = _rewrite_first(h, env, table)
            if nh is not None:
                return PCons(nh, t)
            nt = _rewrite_first(t, env, table)
            return PCons(h, nt) if nt is not None else None
        case PApp(fn=f, args=args):
            for i, a in enumerate(args):
                na = _rewrite_first(a, env, table)
                if na is not None:
                    return PApp(f, args[:i] + (na,) + args[i + 1 :])
            return None
        case _:
            return None


def unfold(p: Pred, env: Env, table: ReflectionTable, fuel: int) -> Pred:
    """Rewrite applications with matching equations, one rewrite per unit of
    fuel, until fuel or a fixpoint is reached."""
    for _ in range(max(fuel, 0)):
        nxt = _rewrite_first(p, env, table)
        if nxt is None:
            return p
        p = nxt
    return p


def instantiate_equations(
    preds: list[Pred], env: Env, table: ReflectionTable, fuel: int
) -> list[Pred]:
    """Ground equation instances for every reducible application reachable
    from preds (transitively through equation right-hand sides), newest
    last.  Used to strengthen VC antecedents."""
    seen: set[PApp] = set()
    out: list[Pred] = []
    work: list[Pred] = list(preds) + [f.pred for f in env.facts]
    budget = max(fuel, 0)
    while work and budget > 0:
        q = work.pop(0)
        for t in subterms(q):
            if isinstance(t, PApp) and t not in seen:
                rhs = match_equation(t, env, table)
                if rhs is None:
                    continue
                seen.add(t)
                out.append(eq(t, rhs))
                work.append(rhs)
                budget -= 1
                if budget <= 0:
                    break
    return out
