from __future__ import annotations

import pytest

from lqh.evaluator import (
    EvalError,
    HoleReached,
    VBool,
    VInt,
    VList,
    VUnit,
    eval_pred,
    evaluate,
)
from lqh.logic import PApp, PArith, PCmp, PInt, PVar
from lqh.parser import parse_program

from .conftest import corpus_text


def ints(*ns):
    return VList(tuple(VInt(n) for n in ns))


LIST_LENGTH = parse_program(corpus_text("list_length_proof_done.lqh"))


def test_list_length_of_three_elements():
    # hand evaluation: 1 + (1 + (1 + 0))
    assert evaluate(LIST_LENGTH, "listLength", [ints(10, 20, 30)]) == VInt(3)


def test_unit_body_returns_unit():
    p = parse_program("u :: Int -> Unit\nu x = ()\n")
    assert evaluate(p, "u", [VInt(5)]) == VUnit()


def test_odd_add_three_five():
    p = parse_program(corpus_text("odd_add.lqh"))
    assert evaluate(p, "oddAdd", [VInt(3), VInt(5)]) == VInt(8)


def test_determinism():
    for _ in range(3):
        assert evaluate(LIST_LENGTH, "listLength", [ints(1, 2)]) == VInt(2)


def test_hint_returns_left_operand():
    p = parse_program(corpus_text("len_nonneg.lqh"))
    assert evaluate(p, "lenNonneg", [ints(1, 2, 3)]) == VUnit()


def test_hole_reached_is_reported():
    p = parse_program("f :: Int -> Int\nf x = _0\n")
    with pytest.raises(HoleReached):
        evaluate(p, "f", [VInt(1)])


def test_match_failure_is_reported():
    p = parse_program("g :: [a] -> Int\ng (y:ys) = 1\n")
    with pytest.raises(EvalError):
        evaluate(p, "g", [ints()])


def test_mod_by_zero_is_reported():
    p = parse_program("h :: Int -> Int -> Int\nh x y = x mod y\n")
    with pytest.raises(EvalError):
        evaluate(p, "h", [VInt(3), VInt(0)])


def test_mod_is_euclidean():
    p = parse_program("m :: Int -> Int\nm x = x mod 2\n")
    assert evaluate(p, "m", [VInt(-7)]) == VInt(1)


def test_if_branches():
    p = parse_program(corpus_text("abs_val.lqh"))
    assert evaluate(p, "absVal", [VInt(-4)]) == VInt(4)
    assert evaluate(p, "absVal", [VInt(4)]) == VInt(4)


def test_int_literal_patterns():
    p = parse_program("z :: Int -> Int\nz 0 = 100\nz x = x\n")
    assert evaluate(p, "z", [VInt(0)]) == VInt(100)
    assert evaluate(p, "z", [VInt(7)]) == VInt(7)


def test_point_free_clause_applies_through():
    p = parse_program("g :: Int -> Int\ng x = x + 1\n\nf :: Int -> Int\nf = g\n")
    assert evaluate(p, "f", [VInt(41)]) == VInt(42)


def test_eval_pred_len_and_reflection():
    assignment = {"xs": ints(1, 2, 3)}
    assert eval_pred(PApp("len", (PVar("xs"),)), assignment) == VInt(3)
    assert eval_pred(
        PCmp("==", PApp("listLength", (PVar("xs"),)), PApp("len", (PVar("xs"),))),
        assignment,
        LIST_LENGTH,
    ) == VBool(True)


def test_eval_pred_arithmetic():
    assert eval_pred(PArith("+", PInt(2), PInt(3)), {}) == VInt(5)
