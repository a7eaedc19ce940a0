"""Bidirectional refinement checking.

Each clause is checked against its declared signature: patterns bind the
signature's parameter types and contribute pattern facts, the body is
checked against the (dependently substituted) result type, and subtyping at
base types emits verification conditions `env ∧ p ⇒ q`.  Holes never fail
checking; they produce environment captures instead, and obligations that
mention a hole's value become that hole's goal rather than a VC.  Function
arguments are A-normalized internally so dependent substitution always
substitutes a variable or literal.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from lqh import diagnostics as diag
from lqh import logic
from lqh.diagnostics import Diagnostic
from lqh.logic import (
    BOOL,
    INT,
    TRUE,
    UNIT,
    Env,
    Fact,
    FACT_CTOR,
    FACT_MEASURE,
    FACT_PATH,
    ListSort,
    OpaqueSort,
    PApp,
    PArith,
    PBool,
    PCmp,
    PCons,
    PInt,
    PNil,
    PVar,
    Pred,
    RBase,
    RFun,
    RType,
    RWild,
    Sort,
    UnitSort,
    check_alias_graph,
    conj,
    eq,
    free_vars,
    full_pred,
    resolve_aliases,
    subst_rtype,
    substitute,
)
from lqh.reflection import ReflectionTable, build_reflection_table
from lqh.smt import (
    POOL,
    VC,
    Invalid,
    SolverVerdict,
    Unknown,
    discover_solver,
    fn_sigs_tuple,
    solve,
)
from lqh.sorts import FnSigs, SortError, SortTerm, SortVar, resolve, unify
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
)


@dataclass
class CheckConfig:
    solver: Optional[str] = None  # explicit solver command line
    fuel: int = 8
    smt_timeout_ms: int = 5000
    auto_unit: bool = True  # probe holes with () during action enumeration
    dump_smt: Optional[str] = None
    client: object = None  # injected solver client (tests, service)


@dataclass
class HoleCapture:
    """Everything known about one hole at its capture point."""

    name: str
    env: Env
    expected: RType  # raw goal type before simplification
    span: Span
    decl_name: str
    clause_index: int
    at_clause_root: bool
    nested_context: Optional[str] = None  # enclosing expression image, printed


@dataclass
class CheckResult:
    program: Program
    vcs: list[VC] = field(default_factory=list)
    verdicts: dict[int, SolverVerdict] = field(default_factory=dict)
    captures: list[HoleCapture] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    table: ReflectionTable = field(default_factory=ReflectionTable)
    resolved_sigs: dict[str, RType] = field(default_factory=dict)
    fn_sigs: FnSigs = field(default_factory=dict)

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == diag.SEV_ERROR]

    @property
    def accepted(self) -> bool:
        return not self.errors and not self.captures

    def capture(self, hole: str) -> Optional[HoleCapture]:
        for c in self.captures:
            if c.name == hole:
                return c
        return None


def result_type(t: RType) -> RType:
    while isinstance(t, RFun):
        t = t.cod
    return t


def fn_sort_sig(t: RType) -> Optional[tuple[tuple[Sort, ...], Sort]]:
    params: list[Sort] = []
    while isinstance(t, RFun):
        if not isinstance(t.dom, RBase) or t.dom.sort is None:
            return None
        params.append(t.dom.sort)
        t = t.cod
    if not isinstance(t, RBase) or t.sort is None:
        return None
    return tuple(params), t.sort


def _label_for(sort: Sort) -> str:
    match sort:
        case logic.IntSort():
            return "Int"
        case logic.BoolSort():
            return "Bool"
        case UnitSort():
            return "Unit"
        case OpaqueSort(name=n):
            return n
        case ListSort(elem=e):
            return f"[{_label_for(e)}]"
    raise AssertionError


def _is_atom(p: Pred) -> bool:
    return isinstance(p, (PVar, PInt, PBool, PNil))


# ---------------------------------------------------------------------------
# Pattern facts


def branch_facts(
    scrutinee: str, pattern: Pattern, elem: Optional[Sort] = None
) -> tuple[list[tuple[str, RType]], list[Fact]]:
    """Bindings and facts a pattern match contributes.

    A variable pattern only binds; `[]` and `(y:ys)` yield the constructor
    equality plus the matching `len` equation; an integer literal yields the
    equality with the literal.
    """
    x = PVar(scrutinee)
    match pattern:
        case PatVar():
            return [], []
        case PatNil():
            return [], [
                Fact(eq(x, PNil()), FACT_CTOR),
                Fact(eq(PApp("len", (x,)), PInt(0)), FACT_MEASURE),
            ]
        case PatCons(head=h, tail=t):
            e = elem if elem is not None else OpaqueSort("a")
            bindings = [
                (h, RBase(_label_for(e), "v", TRUE, e)),
                (t, RBase(f"[{_label_for(e)}]", "v", TRUE, ListSort(e))),
            ]
            facts = [
                Fact(eq(x, PCons(PVar(h), PVar(t))), FACT_CTOR),
                Fact(
                    eq(PApp("len", (x,)), PArith("+", PInt(1), PApp("len", (PVar(t),)))),
                    FACT_MEASURE,
                ),
            ]
            return bindings, facts
        case PatInt(value=n):
            return [], [Fact(eq(x, PInt(n)), FACT_CTOR)]
    raise AssertionError


# ---------------------------------------------------------------------------
# Termination


def metric_index(sig: RType) -> Optional[int]:
    """Index of the designated termination metric: the first list-sorted
    parameter."""
    i = 0
    while isinstance(sig, RFun):
        if isinstance(sig.dom, RBase) and isinstance(sig.dom.sort, ListSort):
            return i
        sig = sig.cod
        i += 1
    return None


def termination_ok(
    decl_name: str,
    sig: RType,
    clause: Clause,
    call_args: list[Expr],
    span: Span,
) -> Optional[Diagnostic]:
    """A recursive call is allowed when its metric argument is a strict
    structural subterm of the metric parameter, witnessed by the clause's
    cons pattern."""
    mi = metric_index(sig)
    if mi is None:
        return diag.error(
            diag.TERMINATION,
            span,
            f"recursive {decl_name!r} has no list-sorted parameter to decrease",
        )
    if mi >= len(call_args):
        return diag.error(
            diag.TERMINATION,
            span,
            f"recursive call to {decl_name!r} is missing its metric argument",
        )
    pat = clause.patterns[mi] if mi < len(clause.patterns) else None
    if not isinstance(pat, PatCons):
        return diag.error(
            diag.TERMINATION,
            span,
            f"recursive call to {decl_name!r} outside a (y:ys) match on its metric parameter",
        )
    arg = call_args[mi]
    if isinstance(arg, EVar) and arg.name == pat.tail:
        return None
    return diag.error(
        diag.TERMINATION,
        span,
        f"metric argument of the recursive call to {decl_name!r} must be the tail binding {pat.tail!r}",
    )


# ---------------------------------------------------------------------------
# Wildcard binder inference


def infer_wildcards(decl: Decl, sig: RType, known: dict[str, RType]) -> tuple[RType, Optional[str]]:
    """Replace `_` parameter types using, in order: measure/reflected
    applications of the binder in the signature's own refinements, the first
    clause's pattern at that position, and arithmetic context.  Limited to
    list-of-opaque and Int."""
    apps: list[PApp] = []

    def collect(t: RType) -> None:
        match t:
            case RBase(pred=p):
                apps.extend(s for s in logic.subterms(p) if isinstance(s, PApp))
            case RFun(dom=d, cod=c):
                collect(d)
                collect(c)
            case _:
                pass

    collect(sig)

    def from_apps(binder: str) -> Optional[RBase]:
        for app in apps:
            if app.fn == "len" and app.args and app.args[0] == PVar(binder):
                return RBase("[a]", "v", TRUE, ListSort(OpaqueSort("a")))
            target = known.get(app.fn)
            if target is None:
                continue
            doms: list[RType] = []
            w = target
            while isinstance(w, RFun):
                doms.append(w.dom)
                w = w.cod
            for a, d in zip(app.args, doms):
                if a == PVar(binder) and isinstance(d, RBase) and d.sort is not None:
                    return RBase(d.label, "v", TRUE, d.sort)
        return None

    def from_pattern(index: int) -> Optional[RBase]:
        if decl.clauses and index < len(decl.clauses[0].patterns):
            pat = decl.clauses[0].patterns[index]
            if isinstance(pat, (PatNil, PatCons)):
                return RBase("[a]", "v", TRUE, ListSort(OpaqueSort("a")))
            if isinstance(pat, PatInt):
                return RBase("Int", "v", TRUE, INT)
        return None

    def from_arith(binder: str) -> Optional[RBase]:
        for p in _sig_preds(sig):
            for s in logic.subterms(p):
                arith = isinstance(s, (PArith, logic.PMod))
                strict_cmp = isinstance(s, PCmp) and s.op != "=="
                if (arith or strict_cmp) and binder in free_vars(s):
                    return RBase("Int", "v", TRUE, INT)
        return None

    def walk(t: RType, index: int) -> tuple[RType, Optional[str]]:
        match t:
            case RFun(binder=x, dom=RWild(), cod=c):
                inferred = None
                if x is not None:
                    inferred = from_apps(x)
                if inferred is None:
                    inferred = from_pattern(index)
                if inferred is None and x is not None:
                    inferred = from_arith(x)
                if inferred is None:
                    return t, x or "_"
                c2, err = walk(c, index + 1)
                return RFun(x, inferred, c2), err
            case RFun(binder=x, dom=d, cod=c):
                c2, err = walk(c, index + 1)
                return RFun(x, d, c2), err
            case RWild():
                return t, "_"
            case _:
                return t, None

    return walk(sig, 0)


def _sig_preds(t: RType) -> list[Pred]:
    match t:
        case RBase(pred=p):
            return [p]
        case RFun(dom=d, cod=c):
            return _sig_preds(d) + _sig_preds(c)
        case _:
            return []


# ---------------------------------------------------------------------------
# Per-clause checking


class _ClauseChecker:
    def __init__(self, run: "_Run", decl: Decl, clause_index: int):
        self.run = run
        self.decl = decl
        self.clause_index = clause_index
        self.clause = decl.clauses[clause_index]
        self.env = Env()
        self.hole_binders: set[str] = set()
        self.node_sorts: dict[int, SortTerm] = {}
        self._fresh = itertools.count()

    # -- phase 1: sorts ----------------------------------------------------

    def infer_sorts(self, e: Expr, expected: Optional[SortTerm]) -> bool:
        try:
            s = self._sort_of(e)
            if expected is not None and s is not None:
                unify(s, expected)
        except SortError as err:
            code = diag.UNBOUND if "unbound" in str(err) else diag.SORT
            self.run.report(code, e.span, str(err))
            return False
        return True

    def _sort_of(self, e: Expr) -> Optional[SortTerm]:
        s = self._sort_node(e)
        if s is not None:
            self.node_sorts[id(e)] = s
        return s

    def _sort_node(self, e: Expr) -> Optional[SortTerm]:
        match e:
            case EInt():
                return INT
            case EBool():
                return BOOL
            case EUnit():
                return UNIT
            case EHole():
                return SortVar()
            case EVar(name=n):
                t = self.env.lookup(n)
                if t is not None:
                    if isinstance(t, RBase) and t.sort is not None:
                        return t.sort
                    raise SortError(f"{n!r} does not have a base sort")
                sig = self.run.resolved_sigs.get(n)
                if sig is None:
                    raise SortError(f"unbound name {n!r}")
                if isinstance(sig, RBase) and sig.sort is not None:
                    return sig.sort
                return None  # function value; only legal at a clause root
            case ENil():
                return ListSort(SortVar())
            case ECons(head=h, tail=t):
                hs = self._demand(h)
                ts = self._demand(t)
                unify(ts, ListSort(hs))
                return ts
            case ENot(arg=a):
                unify(self._demand(a), BOOL)
                return BOOL
            case EBinOp(op=op, left=l, right=r):
                ls, rs = self._demand(l), self._demand(r)
                if op in ("+", "-", "*", "mod"):
                    unify(ls, INT)
                    unify(rs, INT)
                    return INT
                if op in ("&&", "||"):
                    unify(ls, BOOL)
                    unify(rs, BOOL)
                    return BOOL
                unify(ls, rs)
                if op != "==":
                    unify(ls, INT)
                return BOOL
            case EApp(fn=f, args=args):
                sig = self.run.fn_sigs.get(f)
                if sig is None:
                    if self.env.lookup(f) is not None:
                        raise SortError(f"{f!r} is not a function")
                    raise SortError(f"unbound function {f!r}")
                params, res = sig
                if len(args) != len(params):
                    raise SortError(f"{f!r} expects {len(params)} arguments, got {len(args)}")
                for a, want in zip(args, params):
                    unify(self._demand(a), want)
                return res
            case EIf(cond=c, then=t, els=f):
                unify(self._demand(c), BOOL)
                ts, fs = self._demand(t), self._demand(f)
                unify(ts, fs)
                return ts
            case EHint(body=b, proof=p):
                unify(self._demand(p), UNIT)
                return self._demand(b)
        raise AssertionError

    def _demand(self, e: Expr) -> SortTerm:
        s = self._sort_of(e)
        if s is None:
            raise SortError("a function is used where a value is expected")
        return s

    def sort_at(self, e: Expr) -> Sort:
        return resolve(self.node_sorts.get(id(e), OpaqueSort("a")))

    # -- phase 2: refinements ------------------------------------------------

    def fresh_var(self) -> str:
        while True:
            name = f"$t{next(self._fresh)}"
            if name not in self.env.names():
                return name

    def bind_atom(self, t: RBase) -> str:
        name = self.fresh_var()
        self.env = self.env.bind(name, t)
        return name

    def check(self, e: Expr, expected: RType) -> None:
        match e:
            case EHole(name=n):
                self.capture_hole(n, e.span, expected)
                return
            case EIf(cond=c, then=t, els=f) if isinstance(expected, RBase):
                cimg = self.synth_image(c)
                self._in_branch(cimg, lambda: self.check(t, expected))
                self._in_branch(logic.PNot(cimg), lambda: self.check(f, expected))
                return
            case EHint(body=b, proof=p):
                self.add_proof_fact(p)
                self.check(b, expected)
                return
            case _:
                pass
        got, image = self.synth(e)
        self.subsume(got, image, expected, e.span)

    def _in_branch(self, cond: Pred, body) -> object:
        """Run body with cond assumed; afterwards remove only that
        assumption, keeping binders and unconditional facts introduced
        inside (lemma instances and A-normalization equalities are valid
        independent of the branch)."""
        before = self.env
        marker = len(before.facts)
        self.env = before.assume(cond, FACT_PATH)
        out = body()
        after = self.env
        facts = after.facts[:marker] + after.facts[marker + 1 :]
        self.env = Env(after.binders, facts)
        return out

    def subsume(self, got: RType, image: Optional[Pred], want: RType, span: Span) -> None:
        if isinstance(got, RFun) or isinstance(want, RFun):
            if not (isinstance(got, RFun) and isinstance(want, RFun)):
                self.run.report(diag.SORT, span, "function/value mismatch")
                return
            self.subsume_fun(got, want, span)
            return
        assert isinstance(got, RBase) and isinstance(want, RBase)
        if got.sort != want.sort:
            self.run.report(
                diag.SORT, span, f"base sort mismatch: {got.sort} is not {want.sort}"
            )
            return
        binder = "v" if "v" not in self.env.names() else self.fresh_var()
        antecedent = full_pred(got.with_binder(binder))
        consequent = full_pred(want.with_binder(binder))
        if consequent == TRUE:
            return
        touched = (free_vars(antecedent) | free_vars(consequent)) & self.hole_binders
        if touched:
            self.defer_to_hole(touched, want, image, span)
            return
        env = self.env.bind(binder, RBase(got.label, binder, TRUE, got.sort))
        self.run.add_vc(
            env,
            (antecedent,),
            consequent,
            span,
            f"{self.decl.name}: expression does not satisfy `{logic.print_rtype(want)}`",
        )

    def subsume_fun(self, got: RFun, want: RFun, span: Span) -> None:
        self.subsume(want.dom, None, got.dom, span)
        name = want.binder or got.binder or self.fresh_var()
        saved = self.env
        if isinstance(want.dom, RBase) and name not in self.env.names():
            self.env = self.env.bind(name, want.dom)
        got_cod = subst_rtype(got.cod, got.binder, PVar(name)) if got.binder else got.cod
        want_cod = subst_rtype(want.cod, want.binder, PVar(name)) if want.binder else want.cod
        self.subsume(got_cod, None, want_cod, span)
        self.env = saved

    def defer_to_hole(
        self, touched: set[str], want: RBase, image: Optional[Pred], span: Span
    ) -> None:
        """An obligation mentioning hole values is deferred: with a single
        hole and an expressible enclosing image E, the hole's goal becomes
        `{ v | want.pred[value := E] }` with the hole renamed to the new
        value binder."""
        if len(touched) != 1 or image is None:
            return
        hole = next(iter(touched))
        cap = self.run.capture_by_name(hole)
        if cap is None or hole not in free_vars(image):
            return
        sort = self.hole_sort(hole)
        binder = "_" if isinstance(sort, UnitSort) else "v"
        goal = substitute(want.pred, want.binder, image)
        if binder in free_vars(goal) - {hole}:
            binder = f"{binder}1"
        goal = substitute(goal, hole, PVar(binder))
        cap.expected = RBase(want.label, binder, goal, sort)
        cap.nested_context = logic.print_pred(image)
        cap.env = cap.env.drop(hole)

    def hole_sort(self, hole: str) -> Sort:
        t = self.env.lookup(hole)
        if isinstance(t, RBase) and t.sort is not None:
            return t.sort
        return OpaqueSort("a")

    def capture_hole(self, name: str, span: Span, expected: RType) -> None:
        self.run.add_capture(
            HoleCapture(
                name=name,
                env=self.env,
                expected=expected,
                span=span,
                decl_name=self.decl.name,
                clause_index=self.clause_index,
                at_clause_root=isinstance(self.clause.body, EHole),
            )
        )

    def add_proof_fact(self, p: Expr) -> None:
        if isinstance(p, EHole):
            self.capture_hole(p.name, p.span, RBase("Proof", "_", TRUE, UNIT))
            return
        ptype, _ = self.synth(p)
        if not (isinstance(ptype, RBase) and isinstance(ptype.sort, UnitSort)):
            self.run.report(diag.SORT, p.span, "the right operand of `?` must be a proof")
            return
        pred = ptype.pred
        if ptype.binder in free_vars(pred):
            self.run.report(diag.SORT, p.span, "proof refinement may not mention its value binder")
            return
        if pred != TRUE:
            self.env = self.env.assume(pred, FACT_PATH)

    def synth(self, e: Expr) -> tuple[RType, Optional[Pred]]:
        """Type and logical image of e."""
        match e:
            case EInt(value=n):
                return RBase("Int", "v", eq(PVar("v"), PInt(n)), INT), PInt(n)
            case EBool(value=b):
                return RBase("Bool", "v", eq(PVar("v"), PBool(b)), BOOL), PBool(b)
            case EUnit():
                return RBase("Unit", "_", TRUE, UNIT), None
            case ENil():
                sort = self.sort_at(e)
                elem = sort.elem if isinstance(sort, ListSort) else OpaqueSort("a")
                return (
                    RBase(f"[{_label_for(elem)}]", "v", eq(PVar("v"), PNil()), ListSort(elem)),
                    PNil(),
                )
            case EVar(name=n):
                t = self.env.lookup(n)
                if t is not None:
                    if isinstance(t, RBase) and t.sort is not None:
                        return RBase(t.label, "v", eq(PVar("v"), PVar(n)), t.sort), PVar(n)
                    return t, None
                sig = self.run.resolved_sigs.get(n)
                if sig is not None:
                    if isinstance(sig, RFun):
                        return sig, None
                    return self.apply_fn(n, [], e.span)
                self.run.report(diag.UNBOUND, e.span, f"unbound name {n!r}")
                return self.opaque_type(e), PVar(self.bind_opaque(e))
            case EHole(name=n):
                sort = self.sort_at(e)
                hole_t = RBase(_label_for(sort), "v", TRUE, sort)
                self.env = self.env.bind(n, hole_t)
                self.hole_binders.add(n)
                self.capture_hole(n, e.span, hole_t)
                return RBase(hole_t.label, "v", eq(PVar("v"), PVar(n)), sort), PVar(n)
            case ECons(head=h, tail=t):
                _, himg = self.synth_atomized(h)
                _, timg = self.synth_atomized(t)
                img = PCons(himg, timg)
                sort = self.sort_at(e)
                elem = sort.elem if isinstance(sort, ListSort) else OpaqueSort("a")
                return (
                    RBase(f"[{_label_for(elem)}]", "v", eq(PVar("v"), img), ListSort(elem)),
                    img,
                )
            case ENot(arg=a):
                img = logic.PNot(self.synth_image(a))
                return RBase("Bool", "v", eq(PVar("v"), img), BOOL), img
            case EBinOp(op=op, left=l, right=r):
                limg = self.synth_image(l)
                rimg = self.synth_image(r)
                if op == "mod":
                    if not isinstance(rimg, PInt) or rimg.value == 0:
                        name = self.bind_atom(RBase("Int", "v", TRUE, INT))
                        return self.env.lookup(name), PVar(name)  # type: ignore[return-value]
                    img: Pred = logic.PMod(limg, rimg.value)
                    return RBase("Int", "v", eq(PVar("v"), img), INT), img
                if op in ("+", "-", "*"):
                    img = PArith(op, limg, rimg)
                    return RBase("Int", "v", eq(PVar("v"), img), INT), img
                if op == "&&":
                    img = logic.PAnd(limg, rimg)
                elif op == "||":
                    img = logic.POr(limg, rimg)
                else:
                    img = PCmp(op, limg, rimg)
                return RBase("Bool", "v", eq(PVar("v"), img), BOOL), img
            case EApp(fn=f, args=args):
                return self.apply_fn(f, args, e.span)
            case EIf(cond=c, then=t, els=f):
                cimg = self.synth_image(c)
                ttype, _ = self._in_branch(cimg, lambda: self.synth(t))
                ftype, _ = self._in_branch(logic.PNot(cimg), lambda: self.synth(f))
                sort = self.sort_at(e)
                if not (isinstance(ttype, RBase) and isinstance(ftype, RBase)):
                    self.run.report(diag.SORT, e.span, "branches must produce base-typed values")
                    return self.opaque_type(e), PVar(self.bind_opaque(e))
                joined = logic.POr(
                    conj(cimg, ttype.with_binder("v").pred),
                    conj(logic.PNot(cimg), ftype.with_binder("v").pred),
                )
                name = self.bind_atom(RBase(_label_for(sort), "v", joined, sort))
                return (
                    RBase(_label_for(sort), "v", eq(PVar("v"), PVar(name)), sort),
                    PVar(name),
                )
            case EHint(body=b, proof=p):
                self.add_proof_fact(p)
                return self.synth(b)
        raise AssertionError(f"cannot synthesize {e!r}")

    def synth_image(self, e: Expr) -> Pred:
        _, img = self.synth_atomized(e)
        return img

    def synth_atomized(self, e: Expr) -> tuple[RType, Pred]:
        t, img = self.synth(e)
        if img is None:
            if isinstance(t, RBase):
                img = PVar(self.bind_atom(t))
            else:
                self.run.report(diag.SORT, e.span, "a function is used where a value is expected")
                img = PVar(self.bind_atom(RBase("Int", "v", TRUE, INT)))
        if isinstance(t, RBase):
            self.assume_at(t, img)
        return t, img

    def assume_at(self, t: RBase, image: Pred) -> None:
        """Record what the type says about the image term, so operand
        refinements (e.g. a recursive call's postcondition) stay available
        to later obligations."""
        known = substitute(full_pred(t), t.binder, image)
        for part in logic.conjuncts(known):
            if part == TRUE or (isinstance(part, PCmp) and part.op == "==" and part.left == part.right):
                continue
            if part not in {f.pred for f in self.env.facts}:
                self.env = self.env.assume(part, FACT_PATH)

    def opaque_type(self, e: Expr) -> RBase:
        sort = self.sort_at(e)
        return RBase(_label_for(sort), "v", TRUE, sort)

    def bind_opaque(self, e: Expr) -> str:
        name = self.fresh_var()
        self.env = self.env.bind(name, self.opaque_type(e))
        return name

    def apply_fn(self, f: str, args: list[Expr], span: Span) -> tuple[RType, Optional[Pred]]:
        sig = self.run.resolved_sigs.get(f)
        if sig is None:
            self.run.report(diag.UNBOUND, span, f"unbound function {f!r}")
            for a in args:
                self.synth(a)
            name = self.bind_atom(RBase("Int", "v", TRUE, INT))
            return self.env.lookup(name), PVar(name)  # type: ignore[return-value]
        if f == self.decl.name:
            d = termination_ok(f, sig, self.clause, args, span)
            if d is not None:
                self.run.diagnostics.append(d)
        remaining: RType = sig
        atoms: list[Pred] = []
        for a in args:
            if not isinstance(remaining, RFun):
                self.run.report(diag.ARITY, span, f"{f!r} is applied to too many arguments")
                return self.opaque_type(a), None
            dom, binder = remaining.dom, remaining.binder
            atom = self._argument_atom(a, dom)
            atoms.append(atom)
            if binder is not None:
                remaining = subst_rtype(remaining.cod, binder, atom)
            else:
                remaining = remaining.cod
        if isinstance(remaining, RBase):
            img = PApp(f, tuple(atoms))
            if self.run.table.is_reflected(f) and not isinstance(remaining.sort, UnitSort):
                strengthened = conj(remaining.pred, eq(PVar(remaining.binder), img))
                remaining = RBase(remaining.label, remaining.binder, strengthened, remaining.sort)
                return remaining, img
            return remaining, img if not isinstance(remaining.sort, UnitSort) else None
        return remaining, None  # partial application

    def _argument_atom(self, a: Expr, dom: RType) -> Pred:
        if isinstance(a, EHole):
            sort = dom.sort if isinstance(dom, RBase) and dom.sort is not None else self.sort_at(a)
            hole_t = dom if isinstance(dom, RBase) else RBase(_label_for(sort), "v", TRUE, sort)
            self.env = self.env.bind(a.name, hole_t)
            self.hole_binders.add(a.name)
            self.capture_hole(a.name, a.span, hole_t)
            return PVar(a.name)
        atype, img = self.synth_atomized(a)
        if _is_atom(img):
            atom = img
        else:
            base_t = atype if isinstance(atype, RBase) else RBase("Int", "v", TRUE, INT)
            name = self.bind_atom(RBase(base_t.label, "v", TRUE, base_t.sort))
            self.env = self.env.assume(eq(PVar(name), img), FACT_PATH)
            atom = PVar(name)
        self.subsume(atype, atom, dom, a.span)
        return atom

    # -- clause driver -------------------------------------------------------

    def run_clause(self) -> None:
        sig = self.run.resolved_sigs.get(self.decl.name)
        assert sig is not None
        remaining: RType = sig
        for i, pat in enumerate(self.clause.patterns):
            if not isinstance(remaining, RFun):
                self.run.report(
                    diag.ARITY,
                    pat.span,
                    f"clause of {self.decl.name!r} has more patterns than the signature has arguments",
                )
                return
            dom, binder = remaining.dom, remaining.binder
            if not isinstance(dom, RBase) or dom.sort is None:
                self.run.report(diag.SIGNATURE, pat.span, "parameter types must be base types")
                return
            scrutinee, ok = self.bind_pattern(pat, dom, binder, i)
            if not ok:
                return
            if binder is not None and scrutinee != binder:
                remaining = subst_rtype(remaining.cod, binder, PVar(scrutinee))
            else:
                remaining = remaining.cod
        expected_sort = remaining.sort if isinstance(remaining, RBase) else None
        if not self.infer_sorts(self.clause.body, expected_sort):
            return
        self.check(self.clause.body, remaining)

    def bind_pattern(
        self, pat: Pattern, dom: RBase, binder: Optional[str], index: int
    ) -> tuple[str, bool]:
        if isinstance(pat, PatVar) and pat.name != "_":
            name = pat.name
            if name in self.env.names():
                self.run.report(diag.PARSE, pat.span, f"{name!r} is bound twice")
                return name, False
            self.env = self.env.bind(name, dom)
            return name, True
        scrutinee = binder if binder is not None else f"$arg{index}"
        if scrutinee in self.env.names():
            scrutinee = self.fresh_var()
        self.env = self.env.bind(scrutinee, dom)
        if isinstance(pat, PatVar):  # wildcard
            return scrutinee, True
        if isinstance(pat, (PatNil, PatCons)):
            if not isinstance(dom.sort, ListSort):
                self.run.report(diag.MATCH, pat.span, f"list pattern against {dom.sort}")
                return scrutinee, False
            bindings, facts = branch_facts(scrutinee, pat, dom.sort.elem)
        else:
            assert isinstance(pat, PatInt)
            if not isinstance(dom.sort, logic.IntSort):
                self.run.report(diag.MATCH, pat.span, f"integer pattern against {dom.sort}")
                return scrutinee, False
            bindings, facts = branch_facts(scrutinee, pat, None)
        for n, t in bindings:
            if n in self.env.names():
                self.run.report(diag.PARSE, pat.span, f"{n!r} is bound twice")
                return scrutinee, False
            self.env = self.env.bind(n, t)
        for fct in facts:
            self.env = self.env.assume(fct.pred, fct.kind)
        return scrutinee, True


# ---------------------------------------------------------------------------
# Program-level driver


class _Run:
    def __init__(self, program: Program, config: CheckConfig):
        self.program = program
        self.config = config
        self.diagnostics: list[Diagnostic] = []
        self.vcs: list[VC] = []
        self.captures: list[HoleCapture] = []
        self.resolved_sigs: dict[str, RType] = {}
        self.fn_sigs: FnSigs = {}
        self.table = ReflectionTable()
        self._vc_ids = itertools.count()

    def report(self, code: str, span: Span, message: str) -> None:
        self.diagnostics.append(diag.error(code, span, message))

    def add_vc(self, env: Env, extra: tuple[Pred, ...], consequent: Pred, span: Span, blame: str) -> None:
        self.vcs.append(
            VC(
                id=next(self._vc_ids),
                env=env,
                antecedent_extra=extra,
                consequent=consequent,
                span=span,
                blame=blame,
                fn_sigs=fn_sigs_tuple(self.fn_sigs),
            )
        )

    def add_capture(self, cap: HoleCapture) -> None:
        self.captures.append(cap)

    def capture_by_name(self, name: str) -> Optional[HoleCapture]:
        for c in self.captures:
            if c.name == name:
                return c
        return None


def check_program(program: Program, config: Optional[CheckConfig] = None) -> CheckResult:
    """Check a whole program: resolve signatures, generate and solve VCs,
    capture holes.  Static errors (unbound names, arity, sorts) are reported
    before any solver call."""
    config = config or CheckConfig()
    run = _Run(program, config)

    # aliases
    try:
        alias_table = check_alias_graph([(a.name, a.rtype) for a in program.aliases])
    except logic.LogicError as e:
        span = program.aliases[-1].span if program.aliases else Span(1, 1, 1, 1)
        run.report(diag.ALIAS, span, str(e))
        alias_table = {}

    # signature resolution + wildcard inference
    pending: list[Decl] = []
    for d in program.decls:
        if d.signature is None:
            run.report(diag.SIGNATURE, d.span, f"{d.name!r} has no type signature")
            continue
        try:
            resolved = resolve_aliases(d.signature, alias_table)
        except logic.LogicError as e:
            run.report(diag.ALIAS, d.sig_span, str(e))
            continue
        run.resolved_sigs[d.name] = resolved
        pending.append(d)
    for d in pending:
        sig = run.resolved_sigs[d.name]
        inferred, failed = infer_wildcards(d, sig, run.resolved_sigs)
        if failed is not None:
            run.report(
                diag.WILDCARD,
                d.sig_span,
                f"cannot infer a type for wildcard parameter {failed!r} of {d.name!r}",
            )
            del run.resolved_sigs[d.name]
            continue
        run.resolved_sigs[d.name] = inferred

    # sort-level signatures
    for name, sig in list(run.resolved_sigs.items()):
        ss = fn_sort_sig(sig)
        if ss is None:
            d = program.decl(name)
            run.report(
                diag.SIGNATURE,
                d.sig_span if d else Span(1, 1, 1, 1),
                f"{name!r} has a higher-order or unresolved signature",
            )
            del run.resolved_sigs[name]
            continue
        run.fn_sigs[name] = ss

    # well-formedness of signatures
    from lqh.sorts import well_formed

    for name, sig in run.resolved_sigs.items():
        d = program.decl(name)
        for msg in well_formed(sig, Env(), run.fn_sigs):
            run.report(diag.UNBOUND if "unbound" in msg else diag.SORT, d.sig_span if d else Span(1, 1, 1, 1), msg)

    # reflection table (hole-free, representable clauses only)
    run.table = build_reflection_table(program, run.resolved_sigs)

    # mutual recursion gate
    _check_call_graph(run)

    static_errors = bool(run.diagnostics)

    # per-clause checking
    if not static_errors:
        for d in program.decls:
            if d.name not in run.resolved_sigs:
                continue
            for ci in range(len(d.clauses)):
                _ClauseChecker(run, d, ci).run_clause()

    result = CheckResult(
        program=program,
        vcs=run.vcs,
        captures=run.captures,
        diagnostics=run.diagnostics,
        table=run.table,
        resolved_sigs=run.resolved_sigs,
        fn_sigs=run.fn_sigs,
    )

    # solve (static errors suppress solver calls entirely)
    if not result.errors and run.vcs:
        client = config.client
        acquired = False
        if client is None:
            client = POOL.acquire(discover_solver(config.solver), config.smt_timeout_ms)
            acquired = True
        try:
            for vc in run.vcs:
                verdict = solve(vc, client, run.table, config.fuel, config.dump_smt)
                result.verdicts[vc.id] = verdict
                if isinstance(verdict, Invalid):
                    model = ", ".join(
                        f"{k} = {_show_value(v)}" for k, v in sorted(verdict.model.items())
                    )
                    extra = f" (falsified with {model})" if model else ""
                    result.diagnostics.append(
                        diag.error(diag.VC_INVALID, vc.span, vc.blame + extra)
                    )
                elif isinstance(verdict, Unknown):
                    result.diagnostics.append(
                        diag.error(
                            diag.VC_UNKNOWN,
                            vc.span,
                            f"{vc.blame} (solver could not decide: {verdict.reason})",
                        )
                    )
        finally:
            if acquired:
                POOL.release(client)
    return result


def _show_value(v) -> str:
    from lqh.evaluator import _show

    return _show(v)


def _check_call_graph(run: _Run) -> None:
    """Mutual recursion is out of scope: reject call-graph cycles spanning
    more than one declaration."""
    calls: dict[str, set[str]] = {}
    for d in run.program.decls:
        out: set[str] = set()
        for c in d.clauses:
            from lqh.syntax import subexpressions

            for e in subexpressions(c.body):
                if isinstance(e, EApp):
                    out.add(e.fn)
                elif isinstance(e, EVar) and run.program.decl(e.name) is not None:
                    out.add(e.name)
        calls[d.name] = out

    state: dict[str, int] = {}
    stack: list[str] = []

    def visit(n: str) -> None:
        if state.get(n) == 2 or n not in calls:
            return
        if state.get(n) == 1:
            cycle = stack[stack.index(n) :] + [n]
            if len(set(cycle)) > 1:
                d = run.program.decl(n)
                run.report(
                    diag.MUTUAL_RECURSION,
                    d.span if d else Span(1, 1, 1, 1),
                    f"mutually recursive group {' -> '.join(cycle)} is not supported",
                )
            return
        state[n] = 1
        stack.append(n)
        for m in calls[n]:
            visit(m)
        stack.pop()
        state[n] = 2

    for name in calls:
        visit(name)
