"""Hole goals, machine-assisted edits, and the compiler message blocks.

From a checker capture this module computes the displayed goal (raw and
SMT-simplified), probes whether `()` closes a proof branch, builds case
splits and fills as textual edits, and recognizes the inductive assumption
for recursive proofs.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from typing import Optional

from lqh import logic
from lqh.checker import (
    CheckConfig,
    CheckResult,
    HoleCapture,
    check_program,
    metric_index,
    termination_ok,
)
from lqh.logic import (
    TRUE,
    Env,
    ListSort,
    PApp,
    PVar,
    Pred,
    RBase,
    RFun,
    RType,
    UnitSort,
    conj,
    display_rtype,
    print_pred,
    substitute,
)
from lqh.parser import ParseError, parse_expr, parse_program
from lqh.reflection import SHAPE_CONS, SHAPE_NIL, ReflectionTable, unfold
from lqh.simplify import SimplificationTrace, simplify
from lqh.smt import POOL, VC, SolverVerdict, Valid, discover_solver, fn_sigs_tuple, solve
from lqh.syntax import (
    Clause,
    Decl,
    EApp,
    EBool,
    EHole,
    EInt,
    ENil,
    EUnit,
    EVar,
    Expr,
    PatCons,
    PatInt,
    PatNil,
    PatVar,
    Program,
    Span,
    holes_of,
)


class HoleError(Exception):
    pass


class StaleEditError(Exception):
    pass


@dataclass
class HoleGoal:
    name: str
    env: Env
    raw: RType
    simplified: RType
    trace: SimplificationTrace
    conclusion: Pred  # the goal's core predicate before any rewriting
    expansion: Optional[Pred]  # conclusion after substitution + unfolding
    expansion_simplified: Optional[Pred]
    at_clause_root: bool
    capture: HoleCapture

    @property
    def is_proof(self) -> bool:
        return isinstance(self.raw, RBase) and isinstance(self.raw.sort, UnitSort)

    def display_env(self) -> tuple[list[tuple[str, str]], list[str]]:
        binders = [
            (n, display_binder_type(t))
            for n, t in self.env.binders
            if not n.startswith("$") and n != self.name
        ]
        facts = [
            print_pred(f.pred)
            for f in self.env.facts
            if not (logic.free_vars(f.pred) & {n for n, _ in self.env.binders if n.startswith("$")})
        ]
        return binders, facts


def display_binder_type(t: RType) -> str:
    if isinstance(t, RBase):
        return logic.print_rtype(t)
    return logic.print_rtype(t)


@dataclass
class EditAction:
    kind: str  # fill_unit | case_split | fill_expr | unfold_view
    hole: str
    message: str
    variable: Optional[str] = None
    expr_text: Optional[str] = None
    certificate: Optional[SolverVerdict] = None
    edit_preview: Optional[str] = None


@dataclass
class Edit:
    """Non-overlapping textual replacements plus the hole renumbering they
    imply.  Bound to one exact source text by hash."""

    pieces: list[tuple[Span, str]]
    renumbering: dict[str, str] = field(default_factory=dict)
    created: list[str] = field(default_factory=list)
    source_hash: str = ""

    @staticmethod
    def for_source(source: str, pieces: list[tuple[Span, str]], renumbering=None, created=None) -> "Edit":
        return Edit(
            pieces=pieces,
            renumbering=renumbering or {},
            created=created or [],
            source_hash=hashlib.sha256(source.encode("utf-8")).hexdigest(),
        )


def apply_edit(source: str, edit: Edit) -> str:
    """Splice the replacements; all untouched bytes are preserved."""
    if edit.source_hash and hashlib.sha256(source.encode("utf-8")).hexdigest() != edit.source_hash:
        raise StaleEditError("the source text changed since this edit was computed")
    starts = _line_starts(source)

    def offset(line: int, col: int) -> int:
        if line - 1 >= len(starts):
            return len(source)
        return starts[line - 1] + (col - 1)

    spans = []
    for span, text in edit.pieces:
        a, b = offset(span.line, span.col), offset(span.end_line, span.end_col)
        if not (0 <= a <= b <= len(source)):
            raise StaleEditError(f"edit span {span} is outside the source")
        spans.append((a, b, text))
    spans.sort()
    for (_, b1, _), (a2, _, _) in zip(spans, spans[1:]):
        if a2 < b1:
            raise StaleEditError("overlapping edit spans")
    out = []
    pos = 0
    for a, b, text in spans:
        out.append(source[pos:a])
        out.append(text)
        pos = b
    out.append(source[pos:])
    return "".join(out)


def _line_starts(source: str) -> list[int]:
    starts = [0]
    for i, ch in enumerate(source):
        if ch == "\n":
            starts.append(i + 1)
    return starts


# ---------------------------------------------------------------------------
# Goals


def hole_goal(
    capture: HoleCapture,
    table: ReflectionTable,
    fuel: int = 8,
    client=None,
    fn_sigs=None,
) -> HoleGoal:
    """Raw and simplified goal for one capture.

    Proof goals display the branch's constructor facts conjoined with the
    conclusion; other goals substitute those facts into the predicate (so
    `v == len xs` under `xs == []` displays as `v == len []`).
    """
    expected = capture.expected
    env = capture.env
    if isinstance(expected, RFun):
        goal = HoleGoal(
            name=capture.name,
            env=env,
            raw=expected,
            simplified=expected,
            trace=[],
            conclusion=_fun_conclusion(expected),
            expansion=None,
            expansion_simplified=None,
            at_clause_root=capture.at_clause_root,
            capture=capture,
        )
        return goal

    assert isinstance(expected, RBase)
    proof = isinstance(expected.sort, UnitSort)
    ctor_facts = env.ctor_facts()
    conclusion = expected.pred

    if proof:
        raw_pred = conj(*ctor_facts, conclusion)
        raw = RBase("Proof", "_", raw_pred, expected.sort)
    else:
        raw_pred = conclusion
        for f in ctor_facts:
            if isinstance(f, logic.PCmp) and f.op == "==" and isinstance(f.left, PVar):
                raw_pred = substitute(raw_pred, f.left.name, f.right)
        raw = RBase(expected.label, expected.binder, raw_pred, expected.sort)

    binder = None if proof else expected.binder
    simplified_pred, trace = simplify(
        raw.pred, env, table, fuel, value_binder=binder, client=client, fn_sigs=fn_sigs
    )
    simplified = RBase(raw.label, raw.binder, simplified_pred, raw.sort)

    expansion, exp_trace = simplify(conclusion, env, table, fuel, rules=("R1", "R2"))
    unfolded = any(s.rule == "R2" for s in exp_trace)
    expansion_simplified = None
    if unfolded:
        expansion_simplified, _ = simplify(
            conclusion, env, table, fuel, value_binder=binder, client=client, fn_sigs=fn_sigs
        )
    return HoleGoal(
        name=capture.name,
        env=env,
        raw=raw,
        simplified=simplified,
        trace=trace,
        conclusion=conclusion,
        expansion=expansion if unfolded else None,
        expansion_simplified=expansion_simplified,
        at_clause_root=capture.at_clause_root,
        capture=capture,
    )


def _fun_conclusion(t: RType) -> Pred:
    while isinstance(t, RFun):
        t = t.cod
    return t.pred if isinstance(t, RBase) else TRUE


# ---------------------------------------------------------------------------
# Unit probing


def try_unit(
    capture: HoleCapture,
    table: ReflectionTable,
    fuel: int,
    client,
    fn_sigs,
) -> SolverVerdict:
    """Would `()` close this hole?  Valid certifies the fill."""
    expected = capture.expected
    if not (isinstance(expected, RBase) and isinstance(expected.sort, UnitSort)):
        raise HoleError(f"hole {capture.name!r} does not expect a proof")
    consequent = unfold(expected.pred, capture.env, table, fuel)
    vc = VC(
        id=-1,
        env=capture.env,
        antecedent_extra=(),
        consequent=consequent,
        span=capture.span,
        blame=f"() does not complete {capture.name}",
        fn_sigs=fn_sigs_tuple(fn_sigs),
    )
    return solve(vc, client, table, fuel)


# ---------------------------------------------------------------------------
# Case split


def case_split(
    program: Program,
    result: CheckResult,
    hole: str,
    variable: str,
    auto_unit: bool = False,
    config: Optional[CheckConfig] = None,
) -> Edit:
    """Replace the clause whose body is `hole` with one clause per list
    constructor.  New right-hand sides are fresh holes, or `()` where
    auto_unit is set and the solver certifies it.  All holes in the program
    are renumbered `_0, _1, ...` in source order."""
    config = config or CheckConfig()
    cap = result.capture(hole)
    if cap is None:
        raise HoleError(f"unknown hole {hole!r}")
    if not cap.at_clause_root:
        raise HoleError(f"hole {hole!r} is not the entire right-hand side of a clause")
    decl = program.decl(cap.decl_name)
    assert decl is not None
    clause = decl.clauses[cap.clause_index]
    sig = result.resolved_sigs[decl.name]

    split_at, through = _split_position(clause, sig, variable)

    used = _decl_names(decl) | {variable}
    head_name = _fresh_name("y", used)
    tail_name = _fresh_name("ys", used | {head_name})

    def clause_text(ctor: str, body: str) -> str:
        pats = [_pattern_text(p) for p in clause.patterns]
        pats += through
        pats.append(ctor)
        return " ".join([decl.name] + pats) + " = " + body

    # probe both branches on the candidate program before deciding bodies
    nil_body, cons_body = "_new0", "_new1"
    candidate = _splice_clause(
        program.source,
        clause.span,
        clause_text("[]", nil_body) + "\n" + clause_text(f"({head_name}:{tail_name})", cons_body),
    )
    client = config.client
    acquired = False
    if auto_unit and client is None:
        client = POOL.acquire(discover_solver(config.solver), config.smt_timeout_ms)
        acquired = True
    try:
        discharged: dict[str, bool] = {nil_body: False, cons_body: False}
        if auto_unit:
            probe_result = check_program(parse_program(candidate), _probe_config(config, client))
            for name in (nil_body, cons_body):
                c = probe_result.capture(name)
                if c is None:
                    continue
                exp = c.expected
                if isinstance(exp, RBase) and isinstance(exp.sort, UnitSort):
                    verdict = try_unit(c, probe_result.table, config.fuel, client, probe_result.fn_sigs)
                    discharged[name] = isinstance(verdict, Valid)
    finally:
        if acquired:
            POOL.release(client)

    # final numbering: holes before the clause, new holes, holes after
    before, after = [], []
    for site in holes_of(program):
        if site.name == hole:
            continue
        key = (site.span.line, site.span.col)
        target = before if key < (clause.span.line, clause.span.col) else after
        target.append(site)
    renumbering: dict[str, str] = {}
    created: list[str] = []
    counter = itertools.count()
    for site in before:
        renumbering[site.name] = f"_{next(counter)}"
    new_names: dict[str, str] = {}
    for tmp in (nil_body, cons_body):
        if not discharged[tmp]:
            name = f"_{next(counter)}"
            new_names[tmp] = name
            created.append(name)
    for site in after:
        renumbering[site.name] = f"_{next(counter)}"

    nil_text = clause_text("[]", "()" if discharged[nil_body] else new_names[nil_body])
    cons_text = clause_text(
        f"({head_name}:{tail_name})", "()" if discharged[cons_body] else new_names[cons_body]
    )
    pieces: list[tuple[Span, str]] = [(clause.span, nil_text + "\n" + cons_text)]
    for site in before + after:
        if renumbering[site.name] != site.name:
            pieces.append((site.span, renumbering[site.name]))
    renumbering = {k: v for k, v in renumbering.items() if k != v}
    return Edit.for_source(program.source, pieces, renumbering, created)


def _probe_config(config: CheckConfig, client) -> CheckConfig:
    return CheckConfig(
        solver=config.solver,
        fuel=config.fuel,
        smt_timeout_ms=config.smt_timeout_ms,
        auto_unit=config.auto_unit,
        dump_smt=config.dump_smt,
        client=client,
    )


def _split_position(clause: Clause, sig: RType, variable: str) -> tuple[int, list[str]]:
    """Where to split and the fresh variable patterns needed to reach a
    point-free parameter.  Errors when the variable is not a list-sorted,
    still-splittable parameter."""
    binders: list[tuple[Optional[str], RType]] = []
    w = sig
    while isinstance(w, RFun):
        binders.append((w.binder, w.dom))
        w = w.cod
    for i, pat in enumerate(clause.patterns):
        if isinstance(pat, PatVar) and pat.name == variable:
            dom = binders[i][1] if i < len(binders) else None
            if not (isinstance(dom, RBase) and isinstance(dom.sort, ListSort)):
                raise HoleError(f"parameter {variable!r} does not have a list type")
            return i, []
    through: list[str] = []
    for i in range(len(clause.patterns), len(binders)):
        name, dom = binders[i]
        if name == variable:
            if not (isinstance(dom, RBase) and isinstance(dom.sort, ListSort)):
                raise HoleError(f"parameter {variable!r} does not have a list type")
            return i, through
        through.append(name or "_")
    raise HoleError(f"{variable!r} is not a splittable parameter here")


def _decl_names(decl: Decl) -> set[str]:
    from lqh.syntax import subexpressions

    names: set[str] = {decl.name}
    for c in decl.clauses:
        for p in c.patterns:
            if isinstance(p, PatVar):
                names.add(p.name)
            elif isinstance(p, PatCons):
                names.add(p.head)
                names.add(p.tail)
        for e in subexpressions(c.body):
            if isinstance(e, (EVar, EHole)):
                names.add(getattr(e, "name", ""))
            elif isinstance(e, EApp):
                names.add(e.fn)
    return names


def _fresh_name(stem: str, avoid: set[str]) -> str:
    if stem not in avoid:
        return stem
    for i in itertools.count(1):
        cand = f"{stem}{i}"
        if cand not in avoid:
            return cand
    raise AssertionError


def _pattern_text(p) -> str:
    from lqh.printer import print_pattern

    return print_pattern(p)


def _splice_clause(source: str, span: Span, text: str) -> str:
    edit = Edit.for_source(source, [(span, text)])
    return apply_edit(source, edit)


# ---------------------------------------------------------------------------
# Induction hint


def suggest_induction(
    goal: HoleGoal, program: Program, result: CheckResult
) -> Optional[str]:
    """The recursive-call expression proving this goal, when the simplified
    goal is syntactically the declaration's statement at a strict subterm
    and the termination gate passes."""
    if not goal.is_proof:
        return None
    cap = goal.capture
    decl = program.decl(cap.decl_name)
    if decl is None or cap.clause_index >= len(decl.clauses):
        return None
    sig = result.resolved_sigs.get(cap.decl_name)
    if sig is None or not isinstance(sig, RFun):
        return None
    res = sig
    while isinstance(res, RFun):
        res = res.cod
    if not (isinstance(res, RBase) and isinstance(res.sort, UnitSort)):
        return None
    clause = decl.clauses[cap.clause_index]
    mi = metric_index(sig)
    if mi is None or mi >= len(clause.patterns):
        return None
    pat = clause.patterns[mi]
    if not isinstance(pat, PatCons):
        return None
    tail = pat.tail

    statement = cap.expected
    if not isinstance(statement, RBase):
        return None
    metric_name = _param_name(clause, sig, mi)
    if metric_name is None:
        return None
    want = substitute(statement.pred, metric_name, PVar(tail))
    simplified = goal.simplified
    if not isinstance(simplified, RBase) or simplified.pred != want:
        return None

    args: list[Expr] = []
    arg_names: list[str] = []
    nb = sig
    for i in range(_arity(sig)):
        assert isinstance(nb, RFun)
        if i == mi:
            arg_names.append(tail)
        else:
            name = _param_name(clause, sig, i)
            if name is None:
                return None
            arg_names.append(name)
        nb = nb.cod
    call_args = [_evar(n) for n in arg_names]
    if termination_ok(decl.name, sig, clause, call_args, cap.span) is not None:
        return None
    return " ".join([decl.name] + arg_names)


def _evar(name: str) -> Expr:
    e = EVar(name)
    return e


def _arity(sig: RType) -> int:
    n = 0
    while isinstance(sig, RFun):
        n += 1
        sig = sig.cod
    return n


def _param_name(clause: Clause, sig: RType, index: int) -> Optional[str]:
    """The in-scope name of parameter `index`: its variable pattern, or the
    signature binder when the pattern is a constructor match."""
    binders = []
    w = sig
    while isinstance(w, RFun):
        binders.append(w.binder)
        w = w.cod
    if index < len(clause.patterns):
        pat = clause.patterns[index]
        if isinstance(pat, PatVar) and pat.name != "_":
            return pat.name
        if isinstance(pat, (PatNil, PatCons, PatInt)) or (
            isinstance(pat, PatVar) and pat.name == "_"
        ):
            return binders[index] if index < len(binders) else None
    return None


# ---------------------------------------------------------------------------
# Action enumeration and messages

INDENT = "       "


def message_found(hole: str, goal_text: str) -> str:
    return f"Found hole `{hole}' of type `{goal_text}'."

def message_fill_unit() -> str:
    return f"{INDENT}This can be completed with `()'."

def message_case_split(fn: str) -> str:
    return f"{INDENT}Consider a case split as in the body of `{fn}'."

def message_unfold(expanded: str, simplified: str) -> str:
    return f"{INDENT}Conclusion expands to `{expanded}',\n{INDENT}which is simplified to `{simplified}`."

def message_fill_expr(expr_text: str) -> str:
    return f"{INDENT}Fill with `{expr_text}'."


def enumerate_actions_for(
    program: Program,
    result: CheckResult,
    hole: str,
    config: Optional[CheckConfig] = None,
    client=None,
) -> tuple[HoleGoal, list[EditAction]]:
    """Ordered applicable actions: certified unit fill, case split,
    induction fill, unfold view."""
    config = config or CheckConfig()
    cap = result.capture(hole)
    if cap is None:
        raise HoleError(f"unknown hole {hole!r}")
    acquired = False
    if client is None:
        client = config.client
    if client is None:
        client = POOL.acquire(discover_solver(config.solver), config.smt_timeout_ms)
        acquired = True
    try:
        goal = hole_goal(cap, result.table, config.fuel, client, result.fn_sigs)
        actions: list[EditAction] = []

        if goal.is_proof and isinstance(cap.expected, RBase) and config.auto_unit:
            verdict = try_unit(cap, result.table, config.fuel, client, result.fn_sigs)
            if isinstance(verdict, Valid):
                preview = _preview_fill(program, cap, "()")
                actions.append(
                    EditAction(
                        kind="fill_unit",
                        hole=hole,
                        message=message_fill_unit(),
                        certificate=verdict,
                        edit_preview=preview,
                    )
                )

        split = _split_candidate(goal, program, result)
        if split is not None:
            fn, var = split
            preview = None
            try:
                edit = case_split(program, result, hole, var, auto_unit=False, config=config)
                preview = apply_edit(program.source, edit)
            except (HoleError, StaleEditError):
                preview = None
            actions.append(
                EditAction(
                    kind="case_split",
                    hole=hole,
                    message=message_case_split(fn),
                    variable=var,
                    edit_preview=preview,
                )
            )

        suggestion = suggest_induction(goal, program, result)
        if suggestion is not None:
            actions.append(
                EditAction(
                    kind="fill_expr",
                    hole=hole,
                    message=message_fill_expr(suggestion),
                    expr_text=suggestion,
                    edit_preview=_preview_fill(program, cap, suggestion),
                )
            )

        if goal.expansion is not None and goal.expansion_simplified is not None:
            actions.append(
                EditAction(
                    kind="unfold_view",
                    hole=hole,
                    message=message_unfold(
                        print_pred(goal.expansion), print_pred(goal.expansion_simplified)
                    ),
                )
            )
        return goal, actions
    finally:
        if acquired:
            POOL.release(client)


def enumerate_actions(
    program: Program, hole: str, config: Optional[CheckConfig] = None
) -> tuple[HoleGoal, list[EditAction]]:
    config = config or CheckConfig()
    result = check_program(program, config)
    return enumerate_actions_for(program, result, hole, config)


def _split_candidate(
    goal: HoleGoal, program: Program, result: CheckResult
) -> Optional[tuple[str, str]]:
    """A reflected function in the goal that is defined by matching on a
    parameter we can still split: returns (function, variable)."""
    if not goal.at_clause_root:
        return None
    cap = goal.capture
    decl = program.decl(cap.decl_name)
    if decl is None:
        return None
    clause = decl.clauses[cap.clause_index]
    sig = result.resolved_sigs.get(cap.decl_name)
    if sig is None:
        return None

    splittable = _splittable_params(clause, sig)
    for term in logic.subterms(goal.conclusion):
        if not isinstance(term, PApp) or term.fn == "len":
            continue
        equations = result.table.for_fn(term.fn)
        ctor_positions = {
            i
            for eq_ in equations
            for i, shape in enumerate(eq_.shapes)
            if shape.kind in (SHAPE_NIL, SHAPE_CONS)
        }
        if not ctor_positions:
            continue
        for i in ctor_positions:
            if i < len(term.args) and isinstance(term.args[i], PVar):
                var = term.args[i].name
                if var in splittable:
                    return term.fn, var
    return None


def _splittable_params(clause: Clause, sig: RType) -> set[str]:
    out: set[str] = set()
    binders: list[tuple[Optional[str], RType]] = []
    w = sig
    while isinstance(w, RFun):
        binders.append((w.binder, w.dom))
        w = w.cod
    for i, (name, dom) in enumerate(binders):
        if not (isinstance(dom, RBase) and isinstance(dom.sort, ListSort)):
            continue
        if i < len(clause.patterns):
            pat = clause.patterns[i]
            if isinstance(pat, PatVar) and pat.name != "_":
                out.add(pat.name)
        elif name is not None:
            out.add(name)
    return out


def _preview_fill(program: Program, cap: HoleCapture, expr_text: str) -> Optional[str]:
    try:
        edit = fill_edit(program, cap, expr_text)
        return apply_edit(program.source, edit)
    except (ParseError, StaleEditError):
        return None


# ---------------------------------------------------------------------------
# Fill


_ATOMIC = (EInt, EVar, EUnit, ENil, EBool, EHole)


def fill_edit(program: Program, cap: HoleCapture, expr_text: str) -> Edit:
    parsed = parse_expr(expr_text)
    text = expr_text.strip()
    needs_parens = not isinstance(parsed, _ATOMIC) and not cap.at_clause_root
    if isinstance(parsed, EInt) and parsed.value < 0 and not cap.at_clause_root:
        needs_parens = True
    if needs_parens and not (text.startswith("(") and text.endswith(")")):
        text = f"({text})"
    return Edit.for_source(program.source, [(cap.span, text)])


def fill(
    program: Program,
    result: CheckResult,
    hole: str,
    expr_text: str,
    config: Optional[CheckConfig] = None,
) -> tuple[Edit, str, CheckResult]:
    """Splice expr_text into the hole, reparse, recheck.  Returns the edit,
    the new source, and the fresh check result.  A parse failure of
    expr_text raises without touching the program."""
    config = config or CheckConfig()
    cap = result.capture(hole)
    if cap is None:
        raise HoleError(f"unknown hole {hole!r}")
    edit = fill_edit(program, cap, expr_text)
    new_source = apply_edit(program.source, edit)
    new_program = parse_program(new_source)
    new_result = check_program(new_program, config)
    return edit, new_source, new_result


# ---------------------------------------------------------------------------
# The compiler message block


def render_hole_block(goal: HoleGoal, actions: list[EditAction]) -> str:
    """The two-line (or three-line) message for one hole, exactly as the
    checker prints it."""
    lines = [message_found(goal.name, display_rtype(goal.raw))]
    by_kind = {a.kind: a for a in actions}
    if "fill_unit" in by_kind:
        lines.append(by_kind["fill_unit"].message)
    elif "case_split" in by_kind:
        lines.append(by_kind["case_split"].message)
    elif "unfold_view" in by_kind:
        lines.append(by_kind["unfold_view"].message)
    return "\n".join(lines)
