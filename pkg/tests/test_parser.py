from __future__ import annotations

import random

import pytest

from lqh.parser import ParseError, parse_expr, parse_program
from lqh.printer import print_program
from lqh.syntax import EBinOp, EHole, EInt, holes_of

from .conftest import ALL_CORPUS, corpus_text
from .gen import gen_program

ODD_ADD = corpus_text("odd_add.lqh")
INTRINSIC = corpus_text("list_length_intrinsic.lqh")
PROOF_START = corpus_text("list_length_proof_start.lqh")


def test_odd_add_listing_parses():
    p = parse_program(ODD_ADD)
    assert len(p.aliases) == 2
    assert len(p.decls) == 1
    assert len(p.decls[0].clauses) == 1
    assert p.decls[0].name == "oddAdd"


def test_empty_input_is_empty_program():
    p = parse_program("")
    assert p.aliases == [] and p.decls == []


def test_single_hole_body():
    p = parse_program("f :: Int -> Int\nf x = _0\n")
    assert len(p.decls) == 1
    clause = p.decls[0].clauses[0]
    assert clause.body == EHole("_0")


def test_all_corpus_files_parse():
    for name in ALL_CORPUS:
        parse_program(corpus_text(name))


def test_proof_listing_round_trips():
    p = parse_program(PROOF_START)
    again = parse_program(print_program(p))
    assert again.aliases == p.aliases
    assert again.decls == p.decls


def test_empty_program_prints_empty():
    assert print_program(parse_program("")) == ""


def test_round_trip_on_50_generated_programs():
    rng = random.Random(20260809)
    for i in range(50):
        p = gen_program(rng)
        text = print_program(p)
        try:
            again = parse_program(text)
        except ParseError as e:
            raise AssertionError(f"generated program {i} failed to reparse:\n{text}\n{e}") from None
        assert again.aliases == p.aliases, f"aliases differ for program {i}:\n{text}"
        assert again.decls == p.decls, f"decls differ for program {i}:\n{text}"


def test_holes_of_order_and_spans():
    p = parse_program(INTRINSIC)
    sites = holes_of(p)
    assert [s.name for s in sites] == ["_0", "_1"]
    assert sites[0].span.line < sites[1].span.line
    assert sites[0].decl_name == "listLength"
    assert sites[0].at_clause_root
    assert not sites[1].at_clause_root
    assert sites[1].path == ("+.right",)


def test_holes_of_hole_free():
    assert holes_of(parse_program(ODD_ADD)) == []


def test_duplicate_hole_name_is_error():
    with pytest.raises(ParseError) as e:
        parse_program("f :: Int -> Int\nf x = _0 + _0\n")
    assert any(d.code == "DUP_HOLE" for d in e.value.diagnostics)


def test_arity_mismatch_is_error():
    with pytest.raises(ParseError) as e:
        parse_program("f :: Int -> Int -> Int\nf x y = x\nf x = x\n")
    assert any(d.code == "ARITY" for d in e.value.diagnostics)


def test_syntax_error_has_span():
    with pytest.raises(ParseError) as e:
        parse_program("f :: Int ->\n")
    d = e.value.diagnostics[0]
    assert d.span.line >= 1 and d.span.col >= 1
    assert d.code == "PARSE"


def test_items_must_start_at_column_1():
    with pytest.raises(ParseError):
        parse_program("  f :: Int -> Int\n")


def test_multiline_signature_continuation():
    p = parse_program("f :: Int ->\n     Int\nf x = x\n")
    assert len(p.decls) == 1


def test_parse_expr_standalone():
    e = parse_expr("1 + listLength ys")
    assert isinstance(e, EBinOp)
    assert e.op == "+"
    assert e.left == EInt(1)


def test_parse_expr_rejects_garbage():
    with pytest.raises(ParseError):
        parse_expr("1 +")


def test_comments_are_ignored():
    p = parse_program("-- a comment\nf :: Int -> Int\nf x = x  -- trailing\n")
    assert len(p.decls) == 1


def test_pattern_duplicate_binding_rejected():
    with pytest.raises(ParseError):
        parse_program("f :: [a] -> Int\nf (y:y) = 0\n")


def test_spans_are_one_based_end_exclusive():
    p = parse_program("f :: Int -> Int\nf x = _0\n")
    site = holes_of(p)[0]
    assert (site.span.line, site.span.col) == (2, 7)
    assert (site.span.end_line, site.span.end_col) == (2, 9)
