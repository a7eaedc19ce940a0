"""Surface AST for the mini-language: programs, declarations, expressions,
patterns, all carrying 1-based end-exclusive source spans."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from lqh.logic import RType


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    end_line: int
    end_col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"

    def cover(self, other: "Span") -> "Span":
        a = min((self.line, self.col), (other.line, other.col))
        b = max((self.end_line, self.end_col), (other.end_line, other.end_col))
        return Span(a[0], a[1], b[0], b[1])


NO_SPAN = Span(0, 0, 0, 0)


@dataclass
class Expr:
    span: Span = field(init=False, default=NO_SPAN, compare=False, repr=False)


@dataclass
class EInt(Expr):
    value: int


@dataclass
class EUnit(Expr):
    pass


@dataclass
class EBool(Expr):
    value: bool


@dataclass
class EVar(Expr):
    name: str


@dataclass
class ENil(Expr):
    pass


@dataclass
class ECons(Expr):
    head: Expr
    tail: Expr


@dataclass
class EBinOp(Expr):
    # one of: + - * mod == <= < >= > && ||
    op: str
    left: Expr
    right: Expr


@dataclass
class ENot(Expr):
    arg: Expr


@dataclass
class EApp(Expr):
    fn: str
    args: list[Expr]


@dataclass
class EIf(Expr):
    cond: Expr
    then: Expr
    els: Expr


@dataclass
class EHint(Expr):
    # `e ? p`: evaluates to e; p is a proof term whose refinement becomes
    # available when checking e
    body: Expr
    proof: Expr


@dataclass
class EHole(Expr):
    name: str


@dataclass
class Pattern:
    span: Span = field(init=False, default=NO_SPAN, compare=False, repr=False)


@dataclass
class PatVar(Pattern):
    # "_" is a non-binding wildcard
    name: str


@dataclass
class PatNil(Pattern):
    pass


@dataclass
class PatCons(Pattern):
    head: str
    tail: str


@dataclass
class PatInt(Pattern):
    value: int


@dataclass
class Clause:
    name: str
    patterns: list[Pattern]
    body: Expr
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass
class Decl:
    name: str
    signature: Optional[RType]
    clauses: list[Clause]
    sig_span: Span = field(default=NO_SPAN, compare=False, repr=False)
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass
class TypeAlias:
    name: str
    rtype: RType
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


Item = Union[TypeAlias, Decl]


@dataclass
class Program:
    aliases: list[TypeAlias]
    decls: list[Decl]
    items: list[Item] = field(default_factory=list, compare=False, repr=False)
    source: str = field(default="", compare=False, repr=False)

    def decl(self, name: str) -> Optional[Decl]:
        for d in self.decls:
            if d.name == name:
                return d
        return None


def subexpressions(e: Expr) -> Iterator[Expr]:
    """Yield e and every expression nested inside it, pre-order."""
    yield e
    match e:
        case ECons(head=h, tail=t) | EBinOp(left=h, right=t) | EHint(body=h, proof=t):
            yield from subexpressions(h)
            yield from subexpressions(t)
        case ENot(arg=a):
            yield from subexpressions(a)
        case EApp(args=args):
            for a in args:
                yield from subexpressions(a)
        case EIf(cond=c, then=t, els=f):
            yield from subexpressions(c)
            yield from subexpressions(t)
            yield from subexpressions(f)
        case _:
            pass


@dataclass(frozen=True)
class HoleSite:
    """A hole occurrence: where it sits and what encloses it."""

    name: str
    span: Span
    decl_name: str
    clause_index: int
    path: tuple[str, ...]  # constructor fields from clause body down to the hole
    at_clause_root: bool


def _hole_sites(e: Expr, path: tuple[str, ...]) -> Iterator[tuple[str, Span, tuple[str, ...]]]:
    match e:
        case EHole(name=n):
            yield n, e.span, path
        case ECons(head=h, tail=t):
            yield from _hole_sites(h, path + ("cons.head",))
            yield from _hole_sites(t, path + ("cons.tail",))
        case EBinOp(op=op, left=l, right=r):
            yield from _hole_sites(l, path + (f"{op}.left",))
            yield from _hole_sites(r, path + (f"{op}.right",))
        case ENot(arg=a):
            yield from _hole_sites(a, path + ("not.arg",))
        case EApp(fn=f, args=args):
            for i, a in enumerate(args):
                yield from _hole_sites(a, path + (f"{f}.arg{i}",))
        case EIf(cond=c, then=t, els=f):
            yield from _hole_sites(c, path + ("if.cond",))
            yield from _hole_sites(t, path + ("if.then",))
            yield from _hole_sites(f, path + ("if.else",))
        case EHint(body=b, proof=p):
            yield from _hole_sites(b, path + ("?.body",))
            yield from _hole_sites(p, path + ("?.proof",))
        case _:
            pass


def holes_of(p: Program) -> list[HoleSite]:
    """All holes in the program, in source order."""
    sites = []
    for d in p.decls:
        for ci, c in enumerate(d.clauses):
            for name, span, path in _hole_sites(c.body, ()):
                sites.append(
                    HoleSite(name, span, d.name, ci, path, isinstance(c.body, EHole))
                )
    sites.sort(key=lambda s: (s.span.line, s.span.col))
    return sites
