from __future__ import annotations

from pathlib import Path

import pytest

from lqh.checker import CheckConfig
from lqh.smt import POOL, SubprocessSolver, discover_solver

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

ACCEPTED_CORPUS = [
    "odd_add.lqh",
    "sum_odd.lqh",
    "list_length_intrinsic_done.lqh",
    "list_length_proof_done.lqh",
    "abs_val.lqh",
    "len_nonneg.lqh",
    "double_even.lqh",
    "length_append.lqh",
    "head_or.lqh",
]

REJECTED_CORPUS = [
    "odd_add_bad.lqh",
    "bad_termination.lqh",
]

HOLED_CORPUS = [
    "list_length_intrinsic.lqh",
    "list_length_proof_start.lqh",
    "list_length_proof_split.lqh",
]

ALL_CORPUS = ACCEPTED_CORPUS + REJECTED_CORPUS + HOLED_CORPUS


def corpus_path(name: str) -> Path:
    return CORPUS / name


def corpus_text(name: str) -> str:
    return corpus_path(name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def solver_client():
    client = SubprocessSolver(discover_solver(), timeout_ms=20000)
    yield client
    client.close()


@pytest.fixture(scope="session")
def config(solver_client) -> CheckConfig:
    return CheckConfig(client=solver_client, smt_timeout_ms=20000)


@pytest.fixture(scope="session", autouse=True)
def _drain_pool():
    yield
    POOL.close_all()
