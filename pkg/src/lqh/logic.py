"""Refinement-logic core: sorts, quantifier-free predicates, refinement
types, logical environments, substitution, alias resolution, and the stable
textual printer used by diagnostics and JSON payloads."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Union


class LogicError(Exception):
    pass


# ---------------------------------------------------------------------------
# Sorts


@dataclass(frozen=True)
class IntSort:
    def __str__(self) -> str:
        return "Int"


@dataclass(frozen=True)
class BoolSort:
    def __str__(self) -> str:
        return "Bool"


@dataclass(frozen=True)
class UnitSort:
    def __str__(self) -> str:
        return "Unit"


@dataclass(frozen=True)
class ListSort:
    elem: "Sort"

    def __str__(self) -> str:
        return f"[{self.elem}]"


@dataclass(frozen=True)
class OpaqueSort:
    # uninterpreted element sort, e.g. the `a` in [a]
    name: str

    def __str__(self) -> str:
        return self.name


Sort = Union[IntSort, BoolSort, UnitSort, ListSort, OpaqueSort]

INT = IntSort()
BOOL = BoolSort()
UNIT = UnitSort()


# ---------------------------------------------------------------------------
# Predicates: quantifier-free terms over Int/Bool/Unit/list/opaque sorts.


@dataclass(frozen=True)
class PInt:
    value: int


@dataclass(frozen=True)
class PBool:
    value: bool


@dataclass(frozen=True)
class PVar:
    name: str


@dataclass(frozen=True)
class PArith:
    # op in + - *; linearity (* by a literal) is enforced by well_formed
    op: str
    left: "Pred"
    right: "Pred"


@dataclass(frozen=True)
class PMod:
    arg: "Pred"
    divisor: int


@dataclass(frozen=True)
class PCmp:
    # == at Int/Bool/list/opaque sorts; <= < >= > at Int only
    op: str
    left: "Pred"
    right: "Pred"


@dataclass(frozen=True)
class PNot:
    arg: "Pred"


@dataclass(frozen=True)
class PAnd:
    left: "Pred"
    right: "Pred"


@dataclass(frozen=True)
class POr:
    left: "Pred"
    right: "Pred"


@dataclass(frozen=True)
class PNil:
    pass


@dataclass(frozen=True)
class PCons:
    head: "Pred"
    tail: "Pred"


@dataclass(frozen=True)
class PApp:
    # measure (len) or reflected-function application
    fn: str
    args: tuple["Pred", ...]


Pred = Union[PInt, PBool, PVar, PArith, PMod, PCmp, PNot, PAnd, POr, PNil, PCons, PApp]

TRUE = PBool(True)
FALSE = PBool(False)


def conj(*ps: Pred) -> Pred:
    """Left-nested conjunction, dropping `true` conjuncts."""
    flat = [p for p in ps if p != TRUE]
    if not flat:
        return TRUE
    out = flat[0]
    for p in flat[1:]:
        out = PAnd(out, p)
    return out


def conjuncts(p: Pred) -> list[Pred]:
    if isinstance(p, PAnd):
        return conjuncts(p.left) + conjuncts(p.right)
    return [p]


def eq(l: Pred, r: Pred) -> Pred:
    return PCmp("==", l, r)


def subterms(p: Pred) -> Iterator[Pred]:
    yield p
    match p:
        case PArith(left=l, right=r) | PCmp(left=l, right=r) | PAnd(left=l, right=r) | POr(left=l, right=r) | PCons(head=l, tail=r):
            yield from subterms(l)
            yield from subterms(r)
        case PNot(arg=a) | PMod(arg=a):
            yield from subterms(a)
        case PApp(args=args):
            for a in args:
                yield from subterms(a)
        case _:
            pass


def free_vars(p: Pred) -> set[str]:
    return {t.name for t in subterms(p) if isinstance(t, PVar)}


def subst(p: Pred, mapping: dict[str, Pred]) -> Pred:
    """Simultaneous substitution.  Predicates bind nothing, so plain
    replacement is already capture avoiding."""
    match p:
        case PVar(name=n):
            return mapping.get(n, p)
        case PArith(op=op, left=l, right=r):
            return PArith(op, subst(l, mapping), subst(r, mapping))
        case PMod(arg=a, divisor=d):
            return PMod(subst(a, mapping), d)
        case PCmp(op=op, left=l, right=r):
            return PCmp(op, subst(l, mapping), subst(r, mapping))
        case PNot(arg=a):
            return PNot(subst(a, mapping))
        case PAnd(left=l, right=r):
            return PAnd(subst(l, mapping), subst(r, mapping))
        case POr(left=l, right=r):
            return POr(subst(l, mapping), subst(r, mapping))
        case PCons(head=h, tail=t):
            return PCons(subst(h, mapping), subst(t, mapping))
        case PApp(fn=f, args=args):
            return PApp(f, tuple(subst(a, mapping) for a in args))
        case _:
            return p


def substitute(p: Pred, var: str, term: Pred) -> Pred:
    return subst(p, {var: term})


# ---------------------------------------------------------------------------
# Refinement types


@dataclass(frozen=True)
class RBase:
    """`{ binder:label | pred }`.

    `label` is the displayed base name.  For Nat the constraint 0 <= binder
    stays implicit in the label and is excluded from `pred`; `full_pred`
    reattaches it.  `sort` is filled in by alias resolution.
    """

    label: str
    binder: str
    pred: Pred
    sort: Optional[Sort] = None

    def with_binder(self, name: str) -> "RBase":
        if name == self.binder:
            return self
        return RBase(self.label, name, substitute(self.pred, self.binder, PVar(name)), self.sort)


@dataclass(frozen=True)
class RFun:
    binder: Optional[str]
    dom: "RType"
    cod: "RType"


@dataclass(frozen=True)
class RWild:
    # `_` in binder position, e.g. `xs:_`; removed by wildcard inference
    pass


RType = Union[RBase, RFun, RWild]


def base(label: str, binder: str = "v", pred: Pred = TRUE) -> RBase:
    return RBase(label, binder, pred, _label_sort(label))


def implicit_pred(t: RBase) -> Pred:
    """The constraint carried by the base label itself."""
    if t.label == "Nat":
        return PCmp("<=", PInt(0), PVar(t.binder))
    return TRUE


def full_pred(t: RBase) -> Pred:
    return conj(implicit_pred(t), t.pred)


def rtype_free_vars(t: RType) -> set[str]:
    match t:
        case RBase(binder=b, pred=p):
            return free_vars(p) - {b}
        case RFun(binder=x, dom=d, cod=c):
            fv = rtype_free_vars(d) | (rtype_free_vars(c) - ({x} if x else set()))
            return fv
        case _:
            return set()


def subst_rtype(t: RType, var: str, term: Pred) -> RType:
    """Capture-avoiding substitution into refinement positions."""
    match t:
        case RBase(label=lb, binder=b, pred=p, sort=s):
            if b == var:
                return t
            if b in free_vars(term):
                fresh = _fresh_name(b, free_vars(term) | free_vars(p) | {var})
                p = substitute(p, b, PVar(fresh))
                b = fresh
            return RBase(lb, b, substitute(p, var, term), s)
        case RFun(binder=x, dom=d, cod=c):
            d2 = subst_rtype(d, var, term)
            if x == var:
                return RFun(x, d2, c)
            if x is not None and x in free_vars(term):
                fresh = _fresh_name(x, free_vars(term) | rtype_free_vars(c) | {var})
                c = subst_rtype(c, x, PVar(fresh))
                x = fresh
            return RFun(x, d2, subst_rtype(c, var, term))
        case _:
            return t


def _fresh_name(stem: str, avoid: set[str]) -> str:
    for i in itertools.count(1):
        cand = f"{stem}{i}"
        if cand not in avoid:
            return cand
    raise AssertionError


# ---------------------------------------------------------------------------
# Environments

FACT_CTOR = "ctor"  # pattern equality, e.g. xs == (y:ys); shown in goals
FACT_MEASURE = "measure"  # derived measure equation, e.g. len xs == 1 + len ys
FACT_PATH = "path"  # branch condition or ?-combinator lemma


@dataclass(frozen=True)
class Fact:
    pred: Pred
    kind: str = FACT_PATH


@dataclass(frozen=True)
class Env:
    """Ordered binders plus path facts."""

    binders: tuple[tuple[str, RType], ...] = ()
    facts: tuple[Fact, ...] = ()

    def bind(self, name: str, t: RType) -> "Env":
        if self.lookup(name) is not None:
            raise LogicError(f"duplicate binder {name!r}")
        return Env(self.binders + ((name, t),), self.facts)

    def assume(self, pred: Pred, kind: str = FACT_PATH) -> "Env":
        if pred == TRUE:
            return self
        return Env(self.binders, self.facts + (Fact(pred, kind),))

    def lookup(self, name: str) -> Optional[RType]:
        for n, t in self.binders:
            if n == name:
                return t
        return None

    def names(self) -> set[str]:
        return {n for n, _ in self.binders}

    def drop(self, name: str) -> "Env":
        return Env(tuple(b for b in self.binders if b[0] != name), self.facts)

    def ctor_facts(self) -> list[Pred]:
        return [f.pred for f in self.facts if f.kind == FACT_CTOR]


def env_to_antecedent(env: Env) -> Pred:
    """Conjunction of every binder's refinement (value binder renamed to the
    binder) and every path fact; `true` for the empty environment."""
    parts: list[Pred] = []
    for name, t in env.binders:
        if isinstance(t, RBase):
            p = full_pred(t.with_binder(name))
            if p != TRUE:
                parts.append(p)
    parts.extend(f.pred for f in env.facts)
    return conj(*parts)


# ---------------------------------------------------------------------------
# Aliases

BUILTIN_BASES = {"Int", "Bool", "Unit", "Nat", "Proof"}


def _label_sort(label: str) -> Optional[Sort]:
    return {
        "Int": INT,
        "Nat": INT,
        "Bool": BOOL,
        "Unit": UNIT,
        "Proof": UNIT,
    }.get(label)


def resolve_aliases(t: RType, aliases: dict[str, RType]) -> RType:
    """Expand user aliases and fill in sorts.  Built-in Nat/Proof keep their
    labels (their implicit refinements stay attached to the label)."""
    match t:
        case RBase(label=lb, binder=b, pred=p):
            if lb in BUILTIN_BASES:
                return RBase(lb, b, p, _label_sort(lb))
            if lb.startswith("["):
                # list base: label carries the printed element sort
                elem = _parse_list_label(lb, aliases)
                return RBase(_list_label(elem), b, p, ListSort(elem))
            if lb in aliases:
                inner = resolve_aliases(aliases[lb], aliases)
                if isinstance(inner, RFun):
                    if p != TRUE:
                        raise LogicError(f"alias {lb!r} is a function type and cannot be refined")
                    return inner
                assert isinstance(inner, RBase)
                merged = conj(inner.with_binder(b).pred, p)
                return RBase(inner.label, b, merged, inner.sort)
            if lb and lb[0].islower():
                return RBase(lb, b, p, OpaqueSort(lb))
            raise LogicError(f"unknown type name {lb!r}")
        case RFun(binder=x, dom=d, cod=c):
            return RFun(x, resolve_aliases(d, aliases), resolve_aliases(c, aliases))
        case _:
            return t


def _list_label(elem: Sort) -> str:
    return f"[{elem}]"


def _parse_list_label(label: str, aliases: dict[str, RType]) -> Sort:
    inner = label[1:-1]
    resolved = resolve_aliases(RBase(inner, "v", TRUE), aliases)
    if not isinstance(resolved, RBase) or resolved.sort is None:
        raise LogicError(f"bad list element type {inner!r}")
    if implicit_pred(resolved) != TRUE or resolved.pred != TRUE:
        raise LogicError(f"list element type {inner!r} must be unrefined")
    return resolved.sort


def check_alias_graph(aliases: list[tuple[str, RType]]) -> dict[str, RType]:
    """Validate the alias list: names unique, references known, graph acyclic."""
    table: dict[str, RType] = {}
    for name, t in aliases:
        if name in table or name in BUILTIN_BASES:
            raise LogicError(f"duplicate type alias {name!r}")
        table[name] = t
    for name, t in table.items():
        for used in _alias_refs(t):
            if used not in table and used not in BUILTIN_BASES and not (used and used[0].islower()):
                raise LogicError(f"alias {name!r} refers to unknown type {used!r}")

    state: dict[str, int] = {}  # 1 = visiting, 2 = done

    def visit(n: str, trail: tuple[str, ...]) -> None:
        if state.get(n) == 2 or n not in table:
            return
        if state.get(n) == 1:
            cycle = " -> ".join(trail + (n,))
            raise LogicError(f"cyclic type alias: {cycle}")
        state[n] = 1
        for used in _alias_refs(table[n]):
            visit(used, trail + (n,))
        state[n] = 2

    for name in table:
        visit(name, ())
    return table


def _alias_refs(t: RType) -> Iterator[str]:
    match t:
        case RBase(label=lb):
            if lb.startswith("[") and lb.endswith("]"):
                yield lb[1:-1]
            else:
                yield lb
        case RFun(dom=d, cod=c):
            yield from _alias_refs(d)
            yield from _alias_refs(c)
        case _:
            pass


def base_sort(t: RType) -> Sort:
    if isinstance(t, RBase) and t.sort is not None:
        return t.sort
    raise LogicError(f"expected a resolved base type, got {print_rtype(t)}")


# ---------------------------------------------------------------------------
# Printing.  One stable concrete syntax used everywhere: diagnostics,
# JSON payloads, golden hole messages.

_PREC_OR = 2
_PREC_AND = 3
_PREC_CMP = 4
_PREC_CONS = 5
_PREC_ADD = 6
_PREC_MUL = 7
_PREC_APP = 10
_PREC_ATOM = 11


def print_pred(p: Pred) -> str:
    return _pp(p, 0)


def _pp(p: Pred, ctx: int) -> str:
    match p:
        case PInt(value=n):
            s = str(n)
            return _wrap(s, _PREC_ATOM if n >= 0 else _PREC_APP, ctx)
        case PBool(value=b):
            return "true" if b else "false"
        case PVar(name=n):
            return n
        case PArith(op=op, left=l, right=r):
            prec = _PREC_ADD if op in "+-" else _PREC_MUL
            return _wrap(f"{_pp(l, prec)} {op} {_pp(r, prec + 1)}", prec, ctx)
        case PMod(arg=a, divisor=d):
            return _wrap(f"{_pp(a, _PREC_MUL)} mod {d}", _PREC_MUL, ctx)
        case PCmp(op=op, left=l, right=r):
            return _wrap(f"{_pp(l, _PREC_CMP + 1)} {op} {_pp(r, _PREC_CMP + 1)}", _PREC_CMP, ctx)
        case PNot(arg=a):
            return _wrap(f"not {_pp(a, _PREC_APP + 1)}", _PREC_APP, ctx)
        case PAnd(left=l, right=r):
            return _wrap(f"{_pp(l, _PREC_AND)} && {_pp(r, _PREC_AND + 1)}", _PREC_AND, ctx)
        case POr(left=l, right=r):
            return _wrap(f"{_pp(l, _PREC_OR)} || {_pp(r, _PREC_OR + 1)}", _PREC_OR, ctx)
        case PNil():
            return "[]"
        case PCons():
            return f"({_cons_chain(p)})"
        case PApp(fn=f, args=args):
            if not args:
                return f
            parts = " ".join(_pp(a, _PREC_ATOM) for a in args)
            return _wrap(f"{f} {parts}", _PREC_APP, ctx)
    raise AssertionError(f"unprintable predicate {p!r}")


def _cons_chain(p: Pred) -> str:
    # (y:ys), (0:1:[]) — the chain prints flat, parenthesized by the caller
    parts = []
    while isinstance(p, PCons):
        parts.append(_pp(p.head, _PREC_CONS + 1))
        p = p.tail
    parts.append(_pp(p, _PREC_CONS))
    return ":".join(parts)


def _wrap(s: str, prec: int, ctx: int) -> str:
    return f"({s})" if prec < ctx else s


def print_rtype(t: RType) -> str:
    match t:
        case RBase(label=lb, binder=b, pred=p):
            if p == TRUE:
                return lb
            return f"{{ {b}:{lb} | {print_pred(p)} }}"
        case RFun(binder=x, dom=d, cod=c):
            dom_s = print_rtype(d)
            if isinstance(d, RFun):
                dom_s = f"({dom_s})"
            prefix = f"{x}:" if x else ""
            return f"{prefix}{dom_s} -> {print_rtype(c)}"
        case RWild():
            return "_"
    raise AssertionError


def display_rtype(t: RType) -> str:
    """Goal display: value binders rename to `v` (`_` at Unit sort)."""
    match t:
        case RBase(sort=s):
            want = "_" if isinstance(s, UnitSort) else "v"
            return print_rtype(t.with_binder(want))
        case RFun(binder=x, dom=d, cod=c):
            dom_s = display_rtype(d) if isinstance(d, RFun) else print_rtype(d)
            if isinstance(d, RFun):
                dom_s = f"({dom_s})"
            prefix = f"{x}:" if x else ""
            return f"{prefix}{dom_s} -> {display_rtype(c)}"
        case _:
            return print_rtype(t)
