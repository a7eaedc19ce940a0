"""Random generators used by round-trip and simplifier-soundness properties."""

from __future__ import annotations

import random
import string

from lqh import logic
from lqh.logic import (
    INT,
    TRUE,
    Env,
    FACT_CTOR,
    FACT_MEASURE,
    ListSort,
    OpaqueSort,
    PApp,
    PArith,
    PCmp,
    PCons,
    PInt,
    PMod,
    PNil,
    PVar,
    Pred,
    RBase,
    eq,
)
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
    PatVar,
    Program,
    TypeAlias,
)

_LOWER = [c for c in string.ascii_lowercase if c not in ("v",)]


def _name(rng: random.Random, used: set[str]) -> str:
    while True:
        n = rng.choice(_LOWER) + (str(rng.randrange(10)) if rng.random() < 0.4 else "")
        if n not in used and n not in ("if", "then", "else", "mod", "not", "type", "true", "false"):
            used.add(n)
            return n


def gen_expr(rng: random.Random, names: list[str], holes: list[str], depth: int) -> Expr:
    leaf = depth <= 0 or rng.random() < 0.3
    if leaf:
        roll = rng.random()
        if roll < 0.35:
            return EInt(rng.randrange(0, 50))
        if roll < 0.6 and names:
            return EVar(rng.choice(names))
        if roll < 0.7:
            return ENil()
        if roll < 0.78:
            return EUnit()
        if roll < 0.86:
            return EBool(rng.random() < 0.5)
        if holes:
            return EHole(holes.pop())
        return EInt(rng.randrange(0, 9))
    kind = rng.randrange(7)
    sub = lambda: gen_expr(rng, names, holes, depth - 1)  # noqa: E731
    if kind == 0:
        op = rng.choice(["+", "-", "*", "mod", "==", "<=", "<", ">=", ">", "&&", "||"])
        return EBinOp(op, sub(), sub())
    if kind == 1:
        return ECons(sub(), sub())
    if kind == 2:
        return EIf(sub(), sub(), sub())
    if kind == 3:
        return ENot(sub())
    if kind == 4 and names:
        return EApp(rng.choice(names), [sub() for _ in range(rng.randrange(1, 3))])
    if kind == 5:
        return EHint(sub(), sub())
    return sub()


def gen_rtype(rng: random.Random, depth: int) -> logic.RType:
    if depth > 0 and rng.random() < 0.5:
        binder = None if rng.random() < 0.5 else f"b{rng.randrange(20)}"
        return logic.RFun(binder, gen_rtype(rng, 0), gen_rtype(rng, depth - 1))
    label = rng.choice(["Int", "Bool", "Nat", "Unit", "[a]", "a", "Proof"])
    if rng.random() < 0.5:
        binder = rng.choice(["v", "w"])
        pred_expr = gen_expr(rng, [binder], [], 1)
        try:
            from lqh.parser import expr_to_pred_syntax

            pred = expr_to_pred_syntax(pred_expr)
        except Exception:
            pred = TRUE
        if pred != TRUE:
            return RBase(label, binder, pred)
    return RBase(label, "v", TRUE)


def gen_program(rng: random.Random) -> Program:
    used: set[str] = set()
    aliases = []
    for _ in range(rng.randrange(0, 3)):
        name = "T" + _name(rng, used).capitalize()
        aliases.append(TypeAlias(name, gen_rtype(rng, 1)))
    decls = []
    items: list = list(aliases)
    hole_counter = iter(range(100))
    for _ in range(rng.randrange(1, 4)):
        fname = _name(rng, used)
        arity = rng.randrange(0, 3)
        sig = gen_rtype(rng, max(arity, 1)) if rng.random() < 0.8 else None
        clauses = []
        for _ in range(rng.randrange(1, 3)):
            pats = []
            bound: set[str] = set()
            for _ in range(arity):
                roll = rng.random()
                if roll < 0.4:
                    pats.append(PatVar(_name(rng, bound | used | {fname})))
                elif roll < 0.55:
                    pats.append(PatVar("_"))
                elif roll < 0.7:
                    pats.append(PatNil())
                elif roll < 0.85:
                    h = _name(rng, bound | used | {fname})
                    t = _name(rng, bound | used | {fname, h})
                    pats.append(PatCons(h, t))
                else:
                    pats.append(PatInt(rng.randrange(0, 10)))
            param_names = [p.name for p in pats if isinstance(p, PatVar) and p.name != "_"]
            param_names += [n for p in pats if isinstance(p, PatCons) for n in (p.head, p.tail)]
            holes = [f"_{next(hole_counter)}"] if rng.random() < 0.3 else []
            body = gen_expr(rng, param_names + [fname], holes, rng.randrange(0, 4))
            clauses.append(Clause(fname, pats, body))
        d = Decl(fname, sig, clauses)
        decls.append(d)
        items.append(d)
    return Program(aliases, decls, items)


# ---------------------------------------------------------------------------
# (env, predicate) pairs for simplifier soundness


def gen_env_and_pred(rng: random.Random) -> tuple[Env, Pred, str]:
    """A well-sorted environment with pattern-style facts plus a random
    predicate over it.  Returns (env, predicate, value_binder)."""
    elem = OpaqueSort("a")
    env = Env()
    int_vars: list[str] = []
    list_vars: list[str] = []
    used: set[str] = {"v"}

    for _ in range(rng.randrange(1, 4)):
        n = _name(rng, used)
        refinement = TRUE
        if rng.random() < 0.5:
            refinement = PCmp(rng.choice(["<=", "<"]), PInt(rng.randrange(-5, 5)), PVar("v"))
        env = env.bind(n, RBase("Int", "v", refinement, INT))
        int_vars.append(n)

    xs = _name(rng, used)
    env = env.bind(xs, RBase("[a]", "v", TRUE, ListSort(elem)))
    list_vars.append(xs)
    shape = rng.randrange(3)
    if shape == 0:
        env = env.assume(eq(PVar(xs), PNil()), FACT_CTOR)
        env = env.assume(eq(PApp("len", (PVar(xs),)), PInt(0)), FACT_MEASURE)
    elif shape == 1:
        h = _name(rng, used)
        t = _name(rng, used)
        env = env.bind(h, RBase("a", "v", TRUE, elem))
        env = env.bind(t, RBase("[a]", "v", TRUE, ListSort(elem)))
        env = env.assume(eq(PVar(xs), PCons(PVar(h), PVar(t))), FACT_CTOR)
        env = env.assume(
            eq(PApp("len", (PVar(xs),)), PArith("+", PInt(1), PApp("len", (PVar(t),)))),
            FACT_MEASURE,
        )
        list_vars.append(t)

    env = env.bind("v", RBase("Int", "v", TRUE, INT))
    int_vars.append("v")

    def int_term(depth: int) -> Pred:
        if depth <= 0 or rng.random() < 0.4:
            roll = rng.random()
            if roll < 0.45:
                return PVar(rng.choice(int_vars))
            if roll < 0.75:
                return PInt(rng.randrange(-9, 10))
            return PApp("len", (PVar(rng.choice(list_vars)),))
        roll = rng.random()
        if roll < 0.35:
            return PArith(rng.choice(["+", "-"]), int_term(depth - 1), int_term(depth - 1))
        if roll < 0.5:
            return PArith("*", PInt(rng.randrange(-3, 4)), int_term(depth - 1))
        if roll < 0.65:
            return PMod(int_term(depth - 1), rng.choice([2, 3, 5]))
        if roll < 0.8:
            return PApp("listLength", (PVar(rng.choice(list_vars)),))
        return PArith("+", int_term(depth - 1), int_term(depth - 1))

    def atom() -> Pred:
        op = rng.choice(["==", "<=", "<", ">=", ">"])
        return PCmp(op, int_term(2), int_term(2))

    pred = atom()
    for _ in range(rng.randrange(0, 2)):
        pred = logic.PAnd(pred, atom())
    return env, pred, "v"
