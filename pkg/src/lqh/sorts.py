"""Sort checking for predicates: a small unifier plus a typed-tree builder.

Every predicate subterm gets a unique sort (Int, Bool, Unit, list-of-s,
opaque s); `[]` and holes start as sort variables that unification resolves,
defaulting to list-of-`a` when nothing constrains them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Union

from lqh import logic
from lqh.logic import BOOL, INT, ListSort, OpaqueSort, Pred, Sort, UnitSort

_ids = itertools.count()


class SortError(Exception):
    pass


@dataclass(eq=False)
class SortVar:
    id: int = field(default_factory=lambda: next(_ids))
    bound: Optional["SortTerm"] = None

    def find(self) -> "SortTerm":
        if self.bound is None:
            return self
        root = self.bound.find() if isinstance(self.bound, SortVar) else self.bound
        self.bound = root
        return root

    def __str__(self) -> str:
        return f"?s{self.id}"


SortTerm = Union[Sort, SortVar]


def _shallow(s: SortTerm) -> SortTerm:
    return s.find() if isinstance(s, SortVar) else s


def unify(a: SortTerm, b: SortTerm) -> None:
    a, b = _shallow(a), _shallow(b)
    if a is b or a == b:
        return
    if isinstance(a, SortVar):
        a.bound = b
        return
    if isinstance(b, SortVar):
        b.bound = a
        return
    if isinstance(a, ListSort) and isinstance(b, ListSort):
        unify(a.elem, b.elem)
        return
    raise SortError(f"sort mismatch: {_show(a)} vs {_show(b)}")


def resolve(s: SortTerm, default: Sort = OpaqueSort("a")) -> Sort:
    """Ground a sort term, defaulting unconstrained variables."""
    s = _shallow(s)
    if isinstance(s, SortVar):
        return default
    if isinstance(s, ListSort):
        return ListSort(resolve(s.elem, default))
    return s


def _show(s: SortTerm) -> str:
    s = _shallow(s)
    if isinstance(s, SortVar):
        return str(s)
    return str(s)


FnSigs = dict[str, tuple[tuple[Sort, ...], Sort]]


@dataclass
class TPred:
    """A predicate subterm annotated with its (possibly unresolved) sort."""

    node: Pred
    sort: SortTerm
    kids: tuple["TPred", ...] = ()

    def resolved(self) -> Sort:
        return resolve(self.sort)


def type_pred(
    p: Pred,
    var_sorts: dict[str, SortTerm],
    fn_sigs: FnSigs,
    expected: Optional[SortTerm] = None,
) -> TPred:
    """Build the typed mirror of p, unifying as it goes.

    var_sorts may be extended in place for unknown variables only if a
    variable's entry is absent and strict mode is off; here unknown
    variables are an error.
    """
    t = _type(p, var_sorts, fn_sigs)
    if expected is not None:
        unify(t.sort, expected)
    return t


def _type(p: Pred, vs: dict[str, SortTerm], fns: FnSigs) -> TPred:
    match p:
        case logic.PInt():
            return TPred(p, INT)
        case logic.PBool():
            return TPred(p, BOOL)
        case logic.PVar(name=n):
            if n not in vs:
                raise SortError(f"unbound variable {n!r} in refinement")
            return TPred(p, vs[n])
        case logic.PArith(left=l, right=r):
            tl, tr = _type(l, vs, fns), _type(r, vs, fns)
            unify(tl.sort, INT)
            unify(tr.sort, INT)
            return TPred(p, INT, (tl, tr))
        case logic.PMod(arg=a, divisor=d):
            if d == 0:
                raise SortError("mod by zero")
            ta = _type(a, vs, fns)
            unify(ta.sort, INT)
            return TPred(p, INT, (ta,))
        case logic.PCmp(op=op, left=l, right=r):
            tl, tr = _type(l, vs, fns), _type(r, vs, fns)
            unify(tl.sort, tr.sort)
            if op != "==":
                unify(tl.sort, INT)
            elif isinstance(_shallow(tl.sort), UnitSort):
                raise SortError("equality at Unit sort is not allowed")
            return TPred(p, BOOL, (tl, tr))
        case logic.PNot(arg=a):
            ta = _type(a, vs, fns)
            unify(ta.sort, BOOL)
            return TPred(p, BOOL, (ta,))
        case logic.PAnd(left=l, right=r) | logic.POr(left=l, right=r):
            tl, tr = _type(l, vs, fns), _type(r, vs, fns)
            unify(tl.sort, BOOL)
            unify(tr.sort, BOOL)
            return TPred(p, BOOL, (tl, tr))
        case logic.PNil():
            return TPred(p, ListSort(SortVar()))
        case logic.PCons(head=h, tail=t):
            th, tt = _type(h, vs, fns), _type(t, vs, fns)
            unify(tt.sort, ListSort(th.sort))
            return TPred(p, tt.sort, (th, tt))
        case logic.PApp(fn="len", args=args):
            if len(args) != 1:
                raise SortError("len takes exactly one argument")
            ta = _type(args[0], vs, fns)
            unify(ta.sort, ListSort(SortVar()))
            return TPred(p, INT, (ta,))
        case logic.PApp(fn=f, args=args):
            if f not in fns:
                raise SortError(f"unknown function {f!r} in refinement")
            params, result = fns[f]
            if len(params) != len(args):
                raise SortError(f"{f!r} expects {len(params)} arguments, got {len(args)}")
            kids = []
            for a, want in zip(args, params):
                ta = _type(a, vs, fns)
                unify(ta.sort, want)
                kids.append(ta)
            return TPred(p, result, tuple(kids))
    raise AssertionError(f"unknown predicate node {p!r}")


def check_linear(p: Pred) -> Optional[str]:
    """Multiplication must have a literal operand (decidable arithmetic)."""
    for t in logic.subterms(p):
        if isinstance(t, logic.PArith) and t.op == "*":
            if not (isinstance(t.left, logic.PInt) or isinstance(t.right, logic.PInt)):
                return f"nonlinear multiplication {logic.print_pred(t)!r}"
    return None


def env_var_sorts(env: logic.Env) -> dict[str, SortTerm]:
    out: dict[str, SortTerm] = {}
    for name, t in env.binders:
        if isinstance(t, logic.RBase) and t.sort is not None:
            out[name] = t.sort
    return out


def check_pred(p: Pred, var_sorts: dict[str, SortTerm], fn_sigs: FnSigs, expected: Optional[Sort] = None) -> list[str]:
    """All well-formedness violations in p: unbound variables, sort clashes,
    nonlinear multiplication (mod-literal restriction is structural: PMod
    only holds literal divisors)."""
    errors = []
    try:
        type_pred(p, var_sorts, fn_sigs, expected)
    except SortError as e:
        errors.append(str(e))
    lin = check_linear(p)
    if lin:
        errors.append(lin)
    return errors


def well_formed(t: logic.RType, env: logic.Env, fn_sigs: FnSigs) -> list[str]:
    """Check a resolved refinement type in an environment.  Returns error
    messages; empty means ok."""
    vs = env_var_sorts(env)
    return _wf(t, dict(vs), fn_sigs)


def _wf(t: logic.RType, vs: dict[str, SortTerm], fn_sigs: FnSigs) -> list[str]:
    match t:
        case logic.RBase(binder=b, pred=p, sort=s):
            if s is None:
                return [f"unresolved base type {t.label!r}"]
            scoped = dict(vs)
            scoped[b] = s
            return check_pred(p, scoped, fn_sigs, BOOL)
        case logic.RFun(binder=x, dom=d, cod=c):
            errors = _wf(d, vs, fn_sigs)
            scoped = dict(vs)
            if x is not None and isinstance(d, logic.RBase) and d.sort is not None:
                scoped[x] = d.sort
            return errors + _wf(c, scoped, fn_sigs)
        case logic.RWild():
            return ["uninferred wildcard type"]
    raise AssertionError
