from __future__ import annotations

import random

import pytest

from lqh.checker import CheckConfig, check_program
from lqh.driver import analyze
from lqh.holes import (
    Edit,
    HoleError,
    StaleEditError,
    apply_edit,
    case_split,
    enumerate_actions_for,
    fill,
    render_hole_block,
    suggest_induction,
    try_unit,
)
from lqh.logic import display_rtype
from lqh.parser import ParseError, parse_program
from lqh.smt import Valid
from lqh.syntax import Span, holes_of

from .conftest import corpus_text

INTRINSIC = corpus_text("list_length_intrinsic.lqh")
PROOF_START = corpus_text("list_length_proof_start.lqh")
PROOF_SPLIT = corpus_text("list_length_proof_split.lqh")


def _analysis(src, config):
    a = analyze(src, config)
    assert not a.parse_errors and a.check is not None
    return a


# ---------------------------------------------------------------------------
# Goals


def test_intrinsic_goals_exactly_match(config):
    a = _analysis(INTRINSIC, config)
    (g0, _), (g1, _) = a.holes
    assert g0.name == "_0"
    assert display_rtype(g0.raw) == "{ v:Nat | v == len [] }"
    assert display_rtype(g0.simplified) == "{ v:Nat | v == 0 }"
    assert g1.name == "_1"
    assert display_rtype(g1.raw) == "{ v:Nat | 1 + v == len (y:ys) }"
    assert display_rtype(g1.simplified) == "{ v:Nat | v == len ys }"


def test_split_proof_goal_display_conjoins_pattern_fact(config):
    a = _analysis(PROOF_SPLIT, config)
    g0 = a.hole("_0")[0]
    assert display_rtype(g0.raw) == "{ _:Proof | xs == [] && listLength xs == len xs }"
    g1 = a.hole("_1")[0]
    assert display_rtype(g1.raw) == "{ _:Proof | xs == (y:ys) && listLength xs == len xs }"
    assert display_rtype(g1.simplified) == "{ _:Proof | listLength ys == len ys }"


def test_unrefined_hole_has_trivial_goal(config):
    a = _analysis("f :: Int -> Int\nf x = _0\n", config)
    g = a.hole("_0")[0]
    assert display_rtype(g.raw) == "Int"


def test_function_typed_goal_for_point_free_hole(config):
    a = _analysis(PROOF_START, config)
    g = a.hole("_0")[0]
    assert display_rtype(g.raw) == "xs:[a] -> { _:Proof | listLength xs == len xs }"


def test_raw_and_simplified_are_smt_equivalent(config, solver_client):
    # checked via the trace: every step is a solver-validated equivalence
    from lqh.logic import RBase, TRUE
    from lqh.simplify import verify_trace

    for src in (INTRINSIC, PROOF_SPLIT):
        a = _analysis(src, config)
        for goal, _ in a.holes:
            env = goal.env
            raw = goal.raw
            if isinstance(raw, RBase) and raw.binder not in env.names():
                env = env.bind(raw.binder, RBase(raw.label, raw.binder, TRUE, raw.sort))
            assert (
                verify_trace(goal.trace, env, a.check.table, 8, solver_client, a.check.fn_sigs)
                == []
            )


# ---------------------------------------------------------------------------
# try_unit


def test_nil_branch_completes_with_unit(config, solver_client):
    a = _analysis(PROOF_SPLIT, config)
    cap = a.check.capture("_0")
    verdict = try_unit(cap, a.check.table, 8, solver_client, a.check.fn_sigs)
    assert isinstance(verdict, Valid)


def test_cons_branch_does_not_complete_with_unit(config, solver_client):
    a = _analysis(PROOF_SPLIT, config)
    cap = a.check.capture("_1")
    verdict = try_unit(cap, a.check.table, 8, solver_client, a.check.fn_sigs)
    assert not isinstance(verdict, Valid)


def test_trivial_proof_goal_is_valid(config, solver_client):
    a = _analysis("t :: Int -> Proof\nt x = _0\n", config)
    cap = a.check.capture("_0")
    assert isinstance(try_unit(cap, a.check.table, 8, solver_client, a.check.fn_sigs), Valid)


def test_try_unit_rejects_non_proof_holes(config, solver_client):
    a = _analysis(INTRINSIC, config)
    cap = a.check.capture("_0")
    with pytest.raises(HoleError):
        try_unit(cap, a.check.table, 8, solver_client, a.check.fn_sigs)


# ---------------------------------------------------------------------------
# case_split


def test_case_split_produces_the_two_clause_listing(config):
    p = parse_program(PROOF_START)
    r = check_program(p, config)
    edit = case_split(p, r, "_0", "xs", config=config)
    out = apply_edit(p.source, edit)
    assert "listLengthProof [] = _0" in out
    assert "listLengthProof (y:ys) = _1" in out
    assert edit.created == ["_0", "_1"]
    reparsed = parse_program(out)  # result must parse
    assert [h.name for h in holes_of(reparsed)] == ["_0", "_1"]


def test_case_split_auto_unit_discharges_nil(config):
    p = parse_program(PROOF_START)
    r = check_program(p, config)
    edit = case_split(p, r, "_0", "xs", auto_unit=True, config=config)
    out = apply_edit(p.source, edit)
    assert "listLengthProof [] = ()" in out
    assert "listLengthProof (y:ys) = _0" in out


def test_case_split_preserves_signatures_and_decls(config):
    p = parse_program(PROOF_START)
    r = check_program(p, config)
    out = apply_edit(p.source, case_split(p, r, "_0", "xs", config=config))
    before, after = parse_program(PROOF_START), parse_program(out)
    assert [d.name for d in before.decls] == [d.name for d in after.decls]
    assert [d.signature for d in before.decls] == [d.signature for d in after.decls]
    # patterns cover nil and cons exactly
    split_decl = after.decl("listLengthProof")
    from lqh.syntax import PatCons, PatNil

    shapes = [type(c.patterns[0]) for c in split_decl.clauses]
    assert shapes == [PatNil, PatCons]


def test_case_split_on_matched_parameter_is_error(config):
    p = parse_program(PROOF_SPLIT)
    r = check_program(p, config)
    with pytest.raises(HoleError):
        case_split(p, r, "_0", "xs", config=config)


def test_case_split_requires_clause_root(config):
    p = parse_program(INTRINSIC)
    r = check_program(p, config)
    with pytest.raises(HoleError):
        case_split(p, r, "_1", "xs", config=config)


def test_case_split_renumbers_other_holes(config):
    src = (
        "before :: Int -> Int\nbefore x = _9\n\n"
        "listLength :: [a] -> Nat\nlistLength [] = 0\nlistLength (y:ys) = 1 + listLength ys\n\n"
        "listLengthProof :: xs:_ -> { _:Proof | listLength xs == len xs }\nlistLengthProof = _5\n"
    )
    p = parse_program(src)
    r = check_program(p, config)
    edit = case_split(p, r, "_5", "xs", config=config)
    out = apply_edit(src, edit)
    names = [h.name for h in holes_of(parse_program(out))]
    assert names == ["_0", "_1", "_2"]
    assert edit.renumbering == {"_9": "_0"}


def test_case_split_fresh_names_avoid_capture(config):
    src = (
        "listLength :: [a] -> Nat\nlistLength [] = 0\nlistLength (y:ys) = 1 + listLength ys\n\n"
        "listLengthProof :: y:Int -> ys:_ -> { _:Proof | listLength ys == len ys }\n"
        "listLengthProof y = _0\n"
    )
    p = parse_program(src)
    r = check_program(p, config)
    edit = case_split(p, r, "_0", "ys", config=config)
    out = apply_edit(src, edit)
    reparsed = parse_program(out)
    clause = reparsed.decl("listLengthProof").clauses[1]
    from lqh.syntax import PatCons

    cons = clause.patterns[1]
    assert isinstance(cons, PatCons)
    assert cons.head not in ("y", "ys") and cons.tail not in ("y", "ys")


# ---------------------------------------------------------------------------
# suggest_induction


def test_cons_branch_suggests_recursive_call(config):
    a = _analysis(PROOF_SPLIT, config)
    goal = a.hole("_1")[0]
    assert suggest_induction(goal, a.check.program, a.check) == "listLengthProof ys"


def test_nil_branch_suggests_nothing(config):
    a = _analysis(PROOF_SPLIT, config)
    goal = a.hole("_0")[0]
    assert suggest_induction(goal, a.check.program, a.check) is None


def test_non_subterm_instantiation_rejected(config):
    # goal equal to the statement itself (metric = xs, not strict) gets no hint
    src = (
        "listLength :: [a] -> Nat\nlistLength [] = 0\nlistLength (y:ys) = 1 + listLength ys\n\n"
        "thm :: xs:_ -> { _:Proof | listLength xs == len xs }\nthm xs = _0\n"
    )
    a = _analysis(src, config)
    goal = a.hole("_0")[0]
    assert suggest_induction(goal, a.check.program, a.check) is None


# ---------------------------------------------------------------------------
# enumerate_actions


def test_unsplit_hole_offers_case_split(config):
    a = _analysis(PROOF_START, config)
    goal, actions = a.hole("_0")
    assert [x.kind for x in actions] == ["case_split"]
    assert actions[0].variable == "xs"
    assert actions[0].message == "       Consider a case split as in the body of `listLength'."


def test_nil_hole_offers_fill_unit_first(config):
    a = _analysis(PROOF_SPLIT, config)
    goal, actions = a.hole("_0")
    assert actions[0].kind == "fill_unit"
    assert isinstance(actions[0].certificate, Valid)
    assert actions[0].message == "       This can be completed with `()'."


def test_cons_hole_offers_induction_then_unfold(config):
    a = _analysis(PROOF_SPLIT, config)
    goal, actions = a.hole("_1")
    kinds = [x.kind for x in actions]
    assert kinds == ["fill_expr", "unfold_view"]
    assert actions[0].expr_text == "listLengthProof ys"
    assert actions[1].message == (
        "       Conclusion expands to `1 + listLength ys == 1 + len ys',\n"
        "       which is simplified to `listLength ys == len ys`."
    )


def test_enumerate_is_deterministic(config):
    first = _analysis(PROOF_SPLIT, config)
    second = _analysis(PROOF_SPLIT, config)
    for (g1, a1), (g2, a2) in zip(first.holes, second.holes):
        assert [x.kind for x in a1] == [x.kind for x in a2]
        assert [x.message for x in a1] == [x.message for x in a2]
        assert display_rtype(g1.raw) == display_rtype(g2.raw)


def test_no_auto_unit_suppresses_probe(solver_client):
    config = CheckConfig(client=solver_client, auto_unit=False)
    a = _analysis(PROOF_SPLIT, config)
    _, actions = a.hole("_0")
    assert all(x.kind != "fill_unit" for x in actions)


def test_unknown_hole_raises(config):
    p = parse_program(PROOF_SPLIT)
    r = check_program(p, config)
    with pytest.raises(HoleError):
        enumerate_actions_for(p, r, "_42", config, config.client)


# ---------------------------------------------------------------------------
# Golden message blocks


def test_golden_block_unsplit(config):
    a = _analysis(PROOF_START, config)
    goal, actions = a.hole("_0")
    assert render_hole_block(goal, actions) == (
        "Found hole `_0' of type `xs:[a] -> { _:Proof | listLength xs == len xs }'.\n"
        "       Consider a case split as in the body of `listLength'."
    )


def test_golden_block_nil(config):
    a = _analysis(PROOF_SPLIT, config)
    goal, actions = a.hole("_0")
    assert render_hole_block(goal, actions) == (
        "Found hole `_0' of type `{ _:Proof | xs == [] && listLength xs == len xs }'.\n"
        "       This can be completed with `()'."
    )


def test_golden_block_cons(config):
    a = _analysis(PROOF_SPLIT, config)
    goal, actions = a.hole("_1")
    assert render_hole_block(goal, actions) == (
        "Found hole `_1' of type `{ _:Proof | xs == (y:ys) && listLength xs == len xs }'.\n"
        "       Conclusion expands to `1 + listLength ys == 1 + len ys',\n"
        "       which is simplified to `listLength ys == len ys`."
    )


# ---------------------------------------------------------------------------
# fill


def test_fill_cons_with_recursive_call_completes_proof(config):
    p = parse_program(PROOF_SPLIT)
    r = check_program(p, config)
    _, src2, r2 = fill(p, r, "_0", "()", config)
    p2 = parse_program(src2)
    _, src3, r3 = fill(p2, r2, "_1", "listLengthProof ys", config)
    assert r3.accepted
    assert holes_of(parse_program(src3)) == []


def test_fill_with_wrong_value_recheck_rejects(config):
    p = parse_program(INTRINSIC)
    r = check_program(p, config)
    _, _, r2 = fill(p, r, "_0", "1", config)
    assert any(d.code == "VC_INVALID" for d in r2.diagnostics)


def test_fill_parse_failure_leaves_program_alone(config):
    p = parse_program(PROOF_SPLIT)
    r = check_program(p, config)
    with pytest.raises(ParseError):
        fill(p, r, "_0", "1 +", config)


def test_fill_nested_hole_parenthesizes(config):
    p = parse_program(INTRINSIC)
    r = check_program(p, config)
    _, src2, r2 = fill(p, r, "_1", "listLength ys", config)
    assert "1 + (listLength ys)" in src2
    # _0 still open; no new errors
    assert not r2.errors
    assert [c.name for c in r2.captures] == ["_0"]


def test_goal_fidelity_subtype_fill_rechecks(config):
    # the simplified goal says v == 0; filling with 0 satisfies the clause
    p = parse_program(INTRINSIC)
    r = check_program(p, config)
    _, src2, r2 = fill(p, r, "_0", "0", config)
    assert not r2.errors
    p2 = parse_program(src2)
    _, _, r3 = fill(p2, r2, "_1", "listLength ys", config)
    assert r3.accepted


# ---------------------------------------------------------------------------
# apply_edit


def test_empty_edit_is_identity():
    src = corpus_text("odd_add.lqh")
    assert apply_edit(src, Edit.for_source(src, [])) == src


def test_stale_edit_detected():
    src = corpus_text("odd_add.lqh")
    edit = Edit.for_source(src, [])
    with pytest.raises(StaleEditError):
        apply_edit(src + "\n-- changed", edit)


def test_overlapping_spans_rejected():
    src = "abcdef\n"
    edit = Edit.for_source(
        src, [(Span(1, 1, 1, 4), "x"), (Span(1, 2, 1, 5), "y")]
    )
    with pytest.raises(StaleEditError):
        apply_edit(src, edit)


def test_split_edit_reparses(config):
    p = parse_program(PROOF_START)
    r = check_program(p, config)
    out = apply_edit(p.source, case_split(p, r, "_0", "xs", config=config))
    parse_program(out)


def test_fill_edit_round_trips_through_printer(config):
    from lqh.printer import print_program

    p = parse_program(PROOF_SPLIT)
    r = check_program(p, config)
    _, src2, _ = fill(p, r, "_0", "()", config)
    p2 = parse_program(src2)
    p3 = parse_program(print_program(p2))
    assert p3.decls == p2.decls


# ---------------------------------------------------------------------------
# FillUnit soundness on generated proof goals


def _tautology_programs(rng: random.Random, count: int):
    out = []
    for i in range(count):
        k = rng.randint(0, 30)
        kind = rng.randrange(5)
        if kind == 0:
            pred = f"x + {k} == {k} + x"
        elif kind == 1:
            pred = f"(2 * x) mod 2 == 0"
        elif kind == 2:
            pred = f"x <= x + {k}"
        elif kind == 3:
            pred = f"(x + x) mod 2 == 0"
        else:
            pred = f"0 <= x * x" if False else f"x - x == 0"
        out.append(f"taut :: x:Int -> {{ _:Proof | {pred} }}\ntaut x = _0\n")
    return out


def test_fill_unit_soundness_on_generated_goals(config):
    rng = random.Random(55001)
    for src in _tautology_programs(rng, 100):
        p = parse_program(src)
        r = check_program(p, config)
        cap = r.capture("_0")
        verdict = try_unit(cap, r.table, 8, config.client, r.fn_sigs)
        assert isinstance(verdict, Valid), src
        _, _, r2 = fill(p, r, "_0", "()", config)
        assert r2.accepted, src
