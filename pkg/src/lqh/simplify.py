"""SMT-validated goal simplification.

Four rules run in a fixed order per pass (at most 10 passes):

  R1  substitute environment equalities whose left side is a binder
  R2  unfold measure/reflected applications (fuel bounded)
  R3  linear normalization: isolate the value binder, fold constants,
      cancel equal additive terms across `==`
  R4  drop conjuncts the environment already entails (needs a solver)

Every step is recorded; in verification mode each step's before/after
equivalence is checked against the solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from lqh import logic
from lqh.logic import (
    FALSE,
    TRUE,
    Env,
    PAnd,
    PApp,
    PArith,
    PBool,
    PCmp,
    PCons,
    PInt,
    PMod,
    PNil,
    PNot,
    POr,
    PVar,
    Pred,
    conj,
    conjuncts,
    free_vars,
    substitute,
)
from lqh.reflection import ReflectionTable, _rewrite_first
from lqh.smt import VC, SolverVerdict, Valid, fn_sigs_tuple, solve
from lqh.sorts import FnSigs


@dataclass(frozen=True)
class SimplifyStep:
    rule: str  # R1 | R2 | R3 | R4
    before: Pred
    after: Pred


SimplificationTrace = list[SimplifyStep]


class SimplifyVerificationError(Exception):
    def __init__(self, step: SimplifyStep, verdict: SolverVerdict):
        self.step = step
        self.verdict = verdict
        super().__init__(
            f"{step.rule} rewrite is not an SMT-valid equivalence: "
            f"{logic.print_pred(step.before)}  =>  {logic.print_pred(step.after)}"
        )


ALL_RULES = ("R1", "R2", "R3", "R4")


def simplify(
    p: Pred,
    env: Env,
    table: Optional[ReflectionTable] = None,
    fuel: int = 8,
    value_binder: Optional[str] = None,
    client=None,
    fn_sigs: Optional[FnSigs] = None,
    verify: bool = False,
    max_passes: int = 10,
    rules: tuple[str, ...] = ALL_RULES,
) -> tuple[Pred, SimplificationTrace]:
    """Simplify p under env.  R4 and verification run only when a solver
    client (and fn_sigs) are supplied."""
    trace: SimplificationTrace = []
    table = table or ReflectionTable()
    remaining_fuel = fuel

    def record(rule: str, before: Pred, after: Pred) -> None:
        step = SimplifyStep(rule, before, after)
        trace.append(step)
        if verify and client is not None:
            _verify_step(step, env, table, fuel, client, fn_sigs or {})

    for _ in range(max_passes):
        start = p

        # R1: environment equalities, left side a binder
        if "R1" in rules:
            binders = env.names()
            for fact in env.facts:
                fp = fact.pred
                if (
                    isinstance(fp, PCmp)
                    and fp.op == "=="
                    and isinstance(fp.left, PVar)
                    and fp.left.name in binders
                    and fp.left.name not in free_vars(fp.right)
                ):
                    after = substitute(p, fp.left.name, fp.right)
                    if after != p:
                        record("R1", p, after)
                        p = after

        # R2: fuel-bounded unfolding, one rewrite at a time
        if "R2" in rules:
            while remaining_fuel > 0:
                nxt = _rewrite_first(p, env, table)
                if nxt is None:
                    break
                record("R2", p, nxt)
                p = nxt
                remaining_fuel -= 1

        # R3: linear normalization and constant folding
        if "R3" in rules:
            after = _normalize(p, value_binder)
            if after != p:
                record("R3", p, after)
                p = after

        # R4: drop conjuncts entailed by the environment
        if "R4" in rules and client is not None and fn_sigs is not None:
            parts = conjuncts(p)
            if len(parts) > 1:
                kept = []
                for part in parts:
                    vc = VC(
                        id=-1,
                        env=env,
                        antecedent_extra=(),
                        consequent=part,
                        blame="simplifier entailment probe",
                        fn_sigs=fn_sigs_tuple(fn_sigs),
                    )
                    if isinstance(solve(vc, client, table, fuel), Valid):
                        continue
                    kept.append(part)
                if len(kept) < len(parts):
                    after = conj(*kept)
                    record("R4", p, after)
                    p = after

        if p == start:
            break
    return p, trace


def _verify_step(
    step: SimplifyStep, env: Env, table: ReflectionTable, fuel: int, client, fn_sigs: FnSigs
) -> None:
    equivalence = PCmp("==", step.before, step.after)
    vc = VC(
        id=-1,
        env=env,
        antecedent_extra=(),
        consequent=equivalence,
        blame="simplifier step verification",
        fn_sigs=fn_sigs_tuple(fn_sigs),
    )
    verdict = solve(vc, client, table, fuel)
    if not isinstance(verdict, Valid):
        raise SimplifyVerificationError(step, verdict)


def verify_trace(
    trace: SimplificationTrace,
    env: Env,
    table: ReflectionTable,
    fuel: int,
    client,
    fn_sigs: FnSigs,
) -> list[SimplifyStep]:
    """Return the steps whose before/after equivalence the solver does not
    confirm (empty list = fully verified)."""
    bad = []
    for step in trace:
        try:
            _verify_step(step, env, table, fuel, client, fn_sigs)
        except SimplifyVerificationError:
            bad.append(step)
    return bad


# ---------------------------------------------------------------------------
# R3


def _normalize(p: Pred, binder: Optional[str]) -> Pred:
    match p:
        case PAnd(left=l, right=r):
            ln, rn = _normalize(l, binder), _normalize(r, binder)
            if ln == FALSE or rn == FALSE:
                return FALSE
            return conj(ln, rn)
        case POr(left=l, right=r):
            ln, rn = _normalize(l, binder), _normalize(r, binder)
            if ln == TRUE or rn == TRUE:
                return TRUE
            if ln == FALSE:
                return rn
            if rn == FALSE:
                return ln
            return POr(ln, rn)
        case PNot(arg=a):
            an = _normalize(a, binder)
            if isinstance(an, PBool):
                return PBool(not an.value)
            return PNot(an)
        case PCmp(op=op, left=l, right=r):
            return _normalize_cmp(op, _fold_term(l), _fold_term(r), binder)
        case _:
            return _fold_term(p)


def _fold_term(p: Pred) -> Pred:
    match p:
        case PArith(op=op, left=l, right=r):
            ln, rn = _fold_term(l), _fold_term(r)
            if isinstance(ln, PInt) and isinstance(rn, PInt):
                v = {"+": ln.value + rn.value, "-": ln.value - rn.value, "*": ln.value * rn.value}
                return PInt(v[op])
            if op == "+" and ln == PInt(0):
                return rn
            if op in ("+", "-") and rn == PInt(0):
                return ln
            if op == "*" and (ln == PInt(0) or rn == PInt(0)):
                return PInt(0)
            if op == "*" and ln == PInt(1):
                return rn
            if op == "*" and rn == PInt(1):
                return ln
            return PArith(op, ln, rn)
        case PMod(arg=a, divisor=d):
            an = _fold_term(a)
            if isinstance(an, PInt):
                return PInt(an.value % abs(d))
            return PMod(an, d)
        case PCons(head=h, tail=t):
            return PCons(_fold_term(h), _fold_term(t))
        case PApp(fn=f, args=args):
            return PApp(f, tuple(_fold_term(a) for a in args))
        case _:
            return p


def _normalize_cmp(op: str, l: Pred, r: Pred, binder: Optional[str]) -> Pred:
    if isinstance(l, PInt) and isinstance(r, PInt):
        res = {
            "==": l.value == r.value,
            "<=": l.value <= r.value,
            "<": l.value < r.value,
            ">=": l.value >= r.value,
            ">": l.value > r.value,
        }[op]
        return PBool(res)
    if op == "==":
        if l == r:
            return TRUE
        if _ctor_clash(l, r):
            return FALSE
        return _normalize_eq(l, r, binder)
    return PCmp(op, l, r)


def _ctor_clash(l: Pred, r: Pred) -> bool:
    return (isinstance(l, PNil) and isinstance(r, PCons)) or (
        isinstance(l, PCons) and isinstance(r, PNil)
    )


def _flatten(p: Pred) -> Optional[tuple[int, list[tuple[int, Pred]]]]:
    """Flatten an additive term into (constant, [(sign, atom)]).  None when
    the term is not integer-arithmetic shaped."""
    match p:
        case PInt(value=n):
            return n, []
        case PArith(op="+", left=l, right=r):
            lf, rf = _flatten(l), _flatten(r)
            if lf is None or rf is None:
                return None
            return lf[0] + rf[0], lf[1] + rf[1]
        case PArith(op="-", left=l, right=r):
            lf, rf = _flatten(l), _flatten(r)
            if lf is None or rf is None:
                return None
            return lf[0] - rf[0], lf[1] + [(-s, t) for s, t in rf[1]]
        case PVar() | PApp() | PMod() | PArith(op="*"):
            return 0, [(1, p)]
        case _:
            return None


def _normalize_eq(l: Pred, r: Pred, binder: Optional[str]) -> Pred:
    if binder is not None and l == PVar(binder) and binder not in free_vars(r):
        return PCmp("==", l, r)  # already isolated
    lf, rf = _flatten(l), _flatten(r)
    if lf is None or rf is None:
        return PCmp("==", l, r)
    lc, lterms = lf
    rc, rterms = rf

    # cancel equal additive atoms appearing with equal sign on both sides
    lrest: list[tuple[int, Pred]] = []
    rleft = list(rterms)
    for item in lterms:
        if item in rleft:
            rleft.remove(item)
        else:
            lrest.append(item)
    lterms, rterms = lrest, rleft

    if not lterms and not rterms:
        return TRUE if lc == rc else FALSE

    if binder is not None:
        v = PVar(binder)
        occurrences = [("L", i) for i, (_, t) in enumerate(lterms) if t == v]
        occurrences += [("R", i) for i, (_, t) in enumerate(rterms) if t == v]
        nested = any(
            t != v and binder in free_vars(t) for _, t in lterms + rterms
        )
        if len(occurrences) == 1 and not nested:
            side, i = occurrences[0]
            if side == "L":
                sign = lterms[i][0]
                rest = lterms[:i] + lterms[i + 1 :]
                rhs_terms = [(s * sign, t) for s, t in rterms] + [(-s * sign, t) for s, t in rest]
                rhs_const = (rc - lc) * sign
            else:
                sign = rterms[i][0]
                rest = rterms[:i] + rterms[i + 1 :]
                rhs_terms = [(s * sign, t) for s, t in lterms] + [(-s * sign, t) for s, t in rest]
                rhs_const = (lc - rc) * sign
            return PCmp("==", v, _rebuild(rhs_const, rhs_terms))

    # no isolation: net constants onto the side that has none left
    if not lterms:
        return PCmp("==", _rebuild(0, rterms), PInt(lc - rc))
    if not rterms:
        return PCmp("==", _rebuild(0, lterms), PInt(rc - lc))
    return PCmp("==", _rebuild(lc - rc, lterms), _rebuild(0, rterms))


def _rebuild(const: int, terms: list[tuple[int, Pred]]) -> Pred:
    positives = [t for s, t in terms if s > 0]
    negatives = [t for s, t in terms if s < 0]
    expr: Optional[Pred] = None
    for t in positives:
        expr = t if expr is None else PArith("+", expr, t)
    if expr is None:
        expr = PInt(const)
        const = 0
    for t in negatives:
        expr = PArith("-", expr, t)
    if const > 0:
        expr = PArith("+", expr, PInt(const))
    elif const < 0:
        expr = PArith("-", expr, PInt(-const))
    return expr
