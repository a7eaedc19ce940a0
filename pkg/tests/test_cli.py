from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import pytest

from lqh.cli import main

from .conftest import ALL_CORPUS, corpus_path, corpus_text

SCHEMA = json.loads(
    (Path(__file__).resolve().parent.parent / "docs" / "lqh1.schema.json").read_text()
)


def run_cli(capsys, *argv) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_check_accepted_file_silent_exit_zero(capsys):
    code, out, err = run_cli(capsys, "check", str(corpus_path("odd_add.lqh")))
    assert code == 0
    assert out == "" and err == ""


def test_check_empty_file_exit_zero(capsys, tmp_path):
    f = tmp_path / "empty.lqh"
    f.write_text("")
    code, out, _ = run_cli(capsys, "check", str(f))
    assert code == 0 and out == ""


def test_check_rejected_file_exit_one(capsys):
    code, out, _ = run_cli(capsys, "check", str(corpus_path("odd_add_bad.lqh")))
    assert code == 1
    assert "VC_INVALID" in out


def test_check_completed_proof_exit_zero(capsys):
    code, out, _ = run_cli(capsys, "check", str(corpus_path("list_length_proof_done.lqh")))
    assert code == 0 and out == ""


def test_check_holes_are_errors(capsys):
    code, out, _ = run_cli(capsys, "check", str(corpus_path("list_length_proof_split.lqh")))
    assert code == 1
    assert "HOLE" in out
    assert "This can be completed with `()'." in out


def test_hole_report_prints_golden_block(capsys):
    code, out, _ = run_cli(capsys, "hole", str(corpus_path("list_length_proof_split.lqh")), "_0")
    assert code == 0
    assert out.startswith(
        "Found hole `_0' of type `{ _:Proof | xs == [] && listLength xs == len xs }'.\n"
        "       This can be completed with `()'.\n"
    )
    assert "Environment:" in out


def test_holes_lists_simplified_goals(capsys):
    code, out, _ = run_cli(capsys, "holes", str(corpus_path("list_length_intrinsic.lqh")))
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("_0") and "{ v:Nat | v == 0 }" in lines[0]
    assert lines[1].startswith("_1") and "{ v:Nat | v == len ys }" in lines[1]


def test_split_prints_two_clause_listing(capsys):
    code, out, _ = run_cli(capsys, "split", str(corpus_path("list_length_proof_start.lqh")), "_0", "xs")
    assert code == 0
    assert "listLengthProof [] = _0" in out
    assert "listLengthProof (y:ys) = _1" in out


def test_split_write_then_check_parses(capsys, tmp_path):
    f = tmp_path / "proof.lqh"
    f.write_text(corpus_text("list_length_proof_start.lqh"))
    code, _, _ = run_cli(capsys, "split", str(f), "_0", "xs", "--write")
    assert code == 0
    code2, out, _ = run_cli(capsys, "check", str(f))
    assert code2 == 1  # holes remain, but no parse errors
    assert "PARSE" not in out


def test_fill_write_completes_proof(capsys, tmp_path):
    f = tmp_path / "proof.lqh"
    f.write_text(corpus_text("list_length_proof_split.lqh"))
    assert run_cli(capsys, "fill", str(f), "_0", "()", "--write")[0] == 0
    assert run_cli(capsys, "fill", str(f), "_1", "listLengthProof ys", "--write")[0] == 0
    assert run_cli(capsys, "check", str(f))[0] == 0


def test_missing_file_exit_one(capsys):
    code, _, err = run_cli(capsys, "check", "/nonexistent/file.lqh")
    assert code == 1
    assert "not found" in err


def test_unknown_hole_exit_one(capsys):
    code, _, err = run_cli(capsys, "hole", str(corpus_path("list_length_proof_split.lqh")), "_42")
    assert code == 1


def test_usage_error_exit_two(capsys):
    assert run_cli(capsys, "frobnicate")[0] == 2
    assert run_cli(capsys)[0] == 2


def test_solver_failure_exit_four(capsys):
    from lqh.smt import clear_memo

    clear_memo()
    code, _, err = run_cli(
        capsys, "--solver", "definitely-not-a-solver", "check", str(corpus_path("odd_add.lqh"))
    )
    assert code == 4
    assert "solver" in err.lower()


@pytest.mark.parametrize("name", ALL_CORPUS)
def test_json_output_validates_against_schema(capsys, name):
    code, out, _ = run_cli(capsys, "--json", "check", str(corpus_path(name)))
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    assert doc["schema"] == "lqh/1"


def test_json_hole_payload_shape(capsys):
    code, out, _ = run_cli(
        capsys, "--json", "hole", str(corpus_path("list_length_proof_split.lqh")), "_1"
    )
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    [hole] = doc["holes"]
    assert hole["id"] == "_1"
    assert hole["raw_type"] == "{ _:Proof | xs == (y:ys) && listLength xs == len xs }"
    assert hole["simplified_type"] == "{ _:Proof | listLength ys == len ys }"
    assert {e["name"] for e in hole["env"]} >= {"xs", "y", "ys"}
    assert "xs == (y:ys)" in hole["facts"]
    kinds = [a["kind"] for a in hole["actions"]]
    assert kinds == ["fill_expr", "unfold_view"]


def test_exit_code_is_function_of_result_category(capsys):
    # same file, same flags: identical exit codes across runs
    for name, expected in (
        ("odd_add.lqh", 0),
        ("odd_add_bad.lqh", 1),
        ("list_length_proof_split.lqh", 1),
    ):
        codes = {run_cli(capsys, "check", str(corpus_path(name)))[0] for _ in range(2)}
        assert codes == {expected}
