"""Recursive-descent parser.

Layout rule: every top-level item (alias, signature, clause) starts at
column 1; indented lines continue the previous item.  Items parse
independently so several syntax errors can be reported at once.
"""

from __future__ import annotations


from lqh import diagnostics as diag
from lqh.diagnostics import Diagnostic, DiagnosticError
from lqh.lexer import LexError, Token, tokenize
from lqh.logic import TRUE, PBool, Pred, RBase, RFun, RType, RWild
from lqh.syntax import (
    Clause,
    Decl,
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
    Span,
    TypeAlias,
    holes_of,
)


class ParseError(DiagnosticError):
    pass


class _Cursor:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        t = self.peek()
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.peek()
        return t.kind == kind and (text is None or t.text == text)

    def eat(self, kind: str, text: str | None = None) -> Token | None:
        if self.at(kind, text):
            return self.next()
        return None

    def expect(self, kind: str, text: str | None = None) -> Token:
        t = self.peek()
        if not self.at(kind, text):
            want = text or kind
            raise _Fail(f"expected {want!r}, found {t.text or 'end of input'!r}", t.span)
        return self.next()

    def done(self) -> bool:
        return self.peek().kind == "eof"


class _Fail(Exception):
    def __init__(self, message: str, span: Span):
        self.message = message
        self.span = span


def parse_program(source: str) -> Program:
    """Parse a whole module.  Raises ParseError carrying one diagnostic per
    failed item."""
    try:
        tokens = tokenize(source)
    except LexError as e:
        raise ParseError([diag.error(diag.PARSE, e.span, e.message)]) from None

    errors: list[Diagnostic] = []
    aliases: list[TypeAlias] = []
    decls: list[Decl] = []
    items: list = []
    by_name: dict[str, Decl] = {}

    for chunk in _split_items(tokens):
        cur = _Cursor(chunk)
        first = cur.peek()
        if first.span.col != 1:
            errors.append(diag.error(diag.PARSE, first.span, "top-level item must start at column 1"))
            continue
        try:
            _parse_item(cur, aliases, decls, items, by_name)
        except _Fail as f:
            errors.append(diag.error(diag.PARSE, f.span, f.message))

    program = Program(aliases, decls, items, source)
    errors.extend(_structural_checks(program))
    if errors:
        raise ParseError(errors)
    return program


def _split_items(tokens: list[Token]) -> list[list[Token]]:
    eof = tokens[-1]
    chunks: list[list[Token]] = []
    current: list[Token] = []
    for t in tokens[:-1]:
        if t.span.col == 1 and current:
            chunks.append(current + [eof])
            current = []
        current.append(t)
    if current:
        chunks.append(current + [eof])
    return chunks


def _parse_item(cur, aliases, decls, items, by_name) -> None:
    if cur.at("keyword", "type"):
        a = _parse_alias(cur)
        aliases.append(a)
        items.append(a)
        return
    name_tok = cur.expect("varid")
    if cur.at("symbol", "::"):
        cur.next()
        t = _parse_rtype(cur)
        _expect_end(cur)
        d = by_name.get(name_tok.text)
        if d is None:
            d = Decl(name_tok.text, t, [], sig_span=name_tok.span, span=name_tok.span)
            by_name[name_tok.text] = d
            decls.append(d)
            items.append(d)
        elif d.signature is None:
            d.signature = t
            d.sig_span = name_tok.span
        else:
            raise _Fail(f"duplicate signature for {name_tok.text!r}", name_tok.span)
        return
    patterns = []
    while not cur.at("symbol", "="):
        patterns.append(_parse_pattern(cur))
    cur.expect("symbol", "=")
    body = _parse_expr(cur)
    _expect_end(cur)
    span = name_tok.span.cover(body.span)
    clause = Clause(name_tok.text, patterns, body, span)
    d = by_name.get(name_tok.text)
    if d is None:
        d = Decl(name_tok.text, None, [], span=span)
        by_name[name_tok.text] = d
        decls.append(d)
        items.append(d)
    d.clauses.append(clause)
    d.span = d.span.cover(span) if d.clauses else span


def _expect_end(cur) -> None:
    if not cur.done():
        t = cur.peek()
        raise _Fail(f"unexpected {t.text!r} after item", t.span)


def _parse_alias(cur) -> TypeAlias:
    kw = cur.expect("keyword", "type")
    name = cur.expect("conid")
    cur.expect("symbol", "=")
    t = _parse_rtype(cur)
    _expect_end(cur)
    return TypeAlias(name.text, t, kw.span.cover(name.span))


# ---------------------------------------------------------------------------
# Types


def _parse_rtype(cur) -> RType:
    # binder: `x :` or `_ :` before a type, at arrow level
    binder = None
    if (cur.at("varid") or cur.at("wild")) and cur.peek(1).kind == "symbol" and cur.peek(1).text == ":":
        binder = cur.next().text
        cur.next()
    t = _parse_atype(cur)
    if cur.eat("symbol", "->"):
        cod = _parse_rtype(cur)
        return RFun(binder if binder != "_" else None, t, cod)
    if binder is not None:
        raise _Fail("binder is only allowed before a function domain", cur.peek().span)
    return t


def _parse_atype(cur) -> RType:
    t = cur.peek()
    if cur.eat("symbol", "{"):
        b = cur.next()
        if b.kind not in ("varid", "wild"):
            raise _Fail("expected a value binder", b.span)
        cur.expect("symbol", ":")
        base_label = _parse_base_label(cur)
        cur.expect("symbol", "|")
        pred_expr = _parse_expr(cur)
        cur.expect("symbol", "}")
        return RBase(base_label, b.text if b.text != "_" else "_", expr_to_pred_syntax(pred_expr))
    if cur.eat("symbol", "["):
        label = _parse_base_label(cur)
        cur.expect("symbol", "]")
        return RBase(f"[{label}]", "v", TRUE)
    if cur.at("conid") or cur.at("varid"):
        return RBase(cur.next().text, "v", TRUE)
    if cur.eat("wild"):
        return RWild()
    if cur.eat("symbol", "("):
        if cur.eat("symbol", ")"):
            return RBase("Unit", "v", TRUE)
        inner = _parse_rtype(cur)
        cur.expect("symbol", ")")
        return inner
    raise _Fail(f"expected a type, found {t.text!r}", t.span)


def _parse_base_label(cur) -> str:
    if cur.eat("symbol", "["):
        inner = _parse_base_label(cur)
        cur.expect("symbol", "]")
        return f"[{inner}]"
    t = cur.peek()
    if cur.at("conid") or cur.at("varid"):
        return cur.next().text
    raise _Fail(f"expected a base type name, found {t.text!r}", t.span)


# ---------------------------------------------------------------------------
# Patterns


def _parse_pattern(cur) -> Pattern:
    t = cur.peek()
    if cur.at("varid") or cur.at("wild"):
        cur.next()
        p = PatVar(t.text)
        p.span = t.span
        return p
    if cur.at("int"):
        cur.next()
        p = PatInt(int(t.text))
        p.span = t.span
        return p
    if cur.eat("symbol", "["):
        close = cur.expect("symbol", "]")
        p = PatNil()
        p.span = t.span.cover(close.span)
        return p
    if cur.eat("symbol", "("):
        head = cur.expect("varid")
        cur.expect("symbol", ":")
        tail = cur.expect("varid")
        close = cur.expect("symbol", ")")
        if head.text == tail.text:
            raise _Fail(f"pattern binds {head.text!r} twice", tail.span)
        p = PatCons(head.text, tail.text)
        p.span = t.span.cover(close.span)
        return p
    raise _Fail(f"expected a pattern, found {t.text!r}", t.span)


# ---------------------------------------------------------------------------
# Expressions


def _parse_expr(cur) -> Expr:
    return _parse_hint(cur)


def _parse_hint(cur) -> Expr:
    e = _parse_if(cur)
    while cur.at("symbol", "?"):
        cur.next()
        proof = _parse_if(cur)
        node = EHint(e, proof)
        node.span = e.span.cover(proof.span)
        e = node
    return e


def _parse_if(cur) -> Expr:
    start = cur.peek()
    if cur.eat("keyword", "if"):
        cond = _parse_or(cur)
        cur.expect("keyword", "then")
        then = _parse_if(cur)
        cur.expect("keyword", "else")
        els = _parse_if(cur)
        node = EIf(cond, then, els)
        node.span = start.span.cover(els.span)
        return node
    return _parse_or(cur)


def _binop_level(cur, ops: list[str], sub) -> Expr:
    e = sub(cur)
    while cur.peek().kind in ("symbol", "keyword") and cur.peek().text in ops:
        op = cur.next().text
        r = sub(cur)
        node = EBinOp(op, e, r)
        node.span = e.span.cover(r.span)
        e = node
    return e


def _parse_or(cur) -> Expr:
    return _binop_level(cur, ["||"], _parse_and)


def _parse_and(cur) -> Expr:
    return _binop_level(cur, ["&&"], _parse_cmp)


def _parse_cmp(cur) -> Expr:
    e = _parse_cons(cur)
    if cur.peek().kind == "symbol" and cur.peek().text in ("==", "<=", "<", ">=", ">"):
        op = cur.next().text
        r = _parse_cons(cur)
        node = EBinOp(op, e, r)
        node.span = e.span.cover(r.span)
        return node
    return e


def _parse_cons(cur) -> Expr:
    e = _parse_add(cur)
    if cur.at("symbol", ":"):
        cur.next()
        tail = _parse_cons(cur)
        node = ECons(e, tail)
        node.span = e.span.cover(tail.span)
        return node
    return e


def _parse_add(cur) -> Expr:
    return _binop_level(cur, ["+", "-"], _parse_mul)


def _parse_mul(cur) -> Expr:
    return _binop_level(cur, ["*", "mod"], _parse_app)


_ATOM_STARTS = {"int", "varid", "hole"}


def _parse_app(cur) -> Expr:
    if cur.at("keyword", "not"):
        kw = cur.next()
        arg = _parse_app(cur)
        node = ENot(arg)
        node.span = kw.span.cover(arg.span)
        return node
    first = _parse_atom(cur)
    args = []
    while _at_atom(cur):
        args.append(_parse_atom(cur))
    if not args:
        return first
    if not isinstance(first, EVar):
        raise _Fail("only named functions can be applied", first.span)
    node = EApp(first.name, args)
    node.span = first.span.cover(args[-1].span)
    return node


def _at_atom(cur) -> bool:
    t = cur.peek()
    if t.kind in _ATOM_STARTS:
        return True
    if t.kind == "keyword" and t.text in ("true", "false"):
        return True
    return t.kind == "symbol" and t.text in ("(", "[")


def _parse_atom(cur) -> Expr:
    t = cur.peek()
    if cur.eat("int"):
        node = EInt(int(t.text))
        node.span = t.span
        return node
    if cur.at("symbol", "-") and cur.peek(1).kind == "int":
        cur.next()
        num = cur.next()
        node = EInt(-int(num.text))
        node.span = t.span.cover(num.span)
        return node
    if cur.eat("varid"):
        node = EVar(t.text)
        node.span = t.span
        return node
    if cur.eat("hole"):
        node = EHole(t.text)
        node.span = t.span
        return node
    if cur.eat("keyword", "true") or cur.eat("keyword", "false"):
        node = EBool(t.text == "true")
        node.span = t.span
        return node
    if cur.eat("symbol", "("):
        if cur.at("symbol", ")"):
            close = cur.next()
            node = EUnit()
            node.span = t.span.cover(close.span)
            return node
        inner = _parse_expr(cur)
        close = cur.expect("symbol", ")")
        inner.span = t.span.cover(close.span)
        return inner
    if cur.eat("symbol", "["):
        if cur.at("symbol", "]"):
            close = cur.next()
            node = ENil()
            node.span = t.span.cover(close.span)
            return node
        elems = [_parse_expr(cur)]
        while cur.eat("symbol", ","):
            elems.append(_parse_expr(cur))
        close = cur.expect("symbol", "]")
        node = ENil()
        node.span = Span(close.span.line, close.span.col, close.span.end_line, close.span.end_col)
        out: Expr = node
        for e in reversed(elems):
            cell = ECons(e, out)
            cell.span = e.span.cover(close.span)
            out = cell
        out.span = t.span.cover(close.span)
        return out
    raise _Fail(f"expected an expression, found {t.text or 'end of input'!r}", t.span)


def parse_expr(text: str) -> Expr:
    """Parse a standalone expression (for hole filling)."""
    try:
        tokens = tokenize(text)
    except LexError as e:
        raise ParseError([diag.error(diag.PARSE, e.span, e.message)]) from None
    cur = _Cursor(tokens)
    try:
        e = _parse_expr(cur)
        if not cur.done():
            t = cur.peek()
            raise _Fail(f"unexpected {t.text!r} after expression", t.span)
    except _Fail as f:
        raise ParseError([diag.error(diag.PARSE, f.span, f.message)]) from None
    return e


# ---------------------------------------------------------------------------
# Program-level structural checks


def _structural_checks(program: Program) -> list[Diagnostic]:
    errors: list[Diagnostic] = []
    seen: dict[str, Span] = {}
    for site in holes_of(program):
        if site.name in seen:
            errors.append(
                diag.error(diag.DUP_HOLE, site.span, f"duplicate hole name {site.name!r}")
            )
        seen[site.name] = site.span
    for d in program.decls:
        arities = {len(c.patterns) for c in d.clauses}
        if len(arities) > 1:
            errors.append(
                diag.error(diag.ARITY, d.clauses[-1].span, f"clauses of {d.name!r} differ in arity")
            )
        for c in d.clauses:
            bound = [p for p in c.patterns if isinstance(p, PatVar) and p.name != "_"]
            names = [p.name for p in bound]
            names += [n for p in c.patterns if isinstance(p, PatCons) for n in (p.head, p.tail)]
            dupes = {n for n in names if names.count(n) > 1}
            if dupes:
                errors.append(
                    diag.error(diag.PARSE, c.span, f"clause binds {sorted(dupes)!r} more than once")
                )
    return errors


def expr_to_pred_syntax(e: Expr) -> Pred:
    """Convert a parsed refinement expression to a predicate.  Purely
    syntactic; sort checking happens in well_formed."""
    from lqh import logic

    match e:
        case EInt(value=n):
            return logic.PInt(n)
        case EVar(name=n):
            return logic.PVar(n)
        case ENil():
            return logic.PNil()
        case ECons(head=h, tail=tl):
            return logic.PCons(expr_to_pred_syntax(h), expr_to_pred_syntax(tl))
        case EBinOp(op="mod", left=l, right=r):
            if not isinstance(r, EInt) or r.value == 0:
                raise _Fail("mod in a refinement needs a nonzero literal divisor", e.span)
            return logic.PMod(expr_to_pred_syntax(l), r.value)
        case EBinOp(op=op, left=l, right=r) if op in ("+", "-", "*"):
            return logic.PArith(op, expr_to_pred_syntax(l), expr_to_pred_syntax(r))
        case EBinOp(op=op, left=l, right=r) if op in ("==", "<=", "<", ">=", ">"):
            return logic.PCmp(op, expr_to_pred_syntax(l), expr_to_pred_syntax(r))
        case EBinOp(op="&&", left=l, right=r):
            return logic.PAnd(expr_to_pred_syntax(l), expr_to_pred_syntax(r))
        case EBinOp(op="||", left=l, right=r):
            return logic.POr(expr_to_pred_syntax(l), expr_to_pred_syntax(r))
        case ENot(arg=a):
            return logic.PNot(expr_to_pred_syntax(a))
        case EApp(fn=f, args=args):
            return logic.PApp(f, tuple(expr_to_pred_syntax(a) for a in args))
        case EBool(value=b):
            return PBool(b)
        case _:
            pass
    raise _Fail("this expression form is not allowed in a refinement", e.span)
