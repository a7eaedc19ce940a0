"""SMT-LIB 2 encoding and the external solver client.

Queries are quantifier free (logic QF_UFDTLIA): lists are a parametric
datatype, opaque element sorts are uninterpreted sorts, measures and
reflected functions are uninterpreted functions whose defining equations are
instantiated up front (see reflection).  The client speaks SMT-LIB 2 text
over the stdin/stdout of a configured solver executable and memoizes
verdicts per script hash.
"""

from __future__ import annotations

import hashlib
import os
import queue
import shlex
import shutil
import subprocess
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from lqh import logic
from lqh.evaluator import Value, VBool, VInt, VList, VOpaque, VUnit
from lqh.logic import (
    BOOL,
    Env,
    ListSort,
    OpaqueSort,
    Pred,
    Sort,
    UnitSort,
    env_to_antecedent,
)
from lqh.reflection import ReflectionTable, instantiate_equations
from lqh.sorts import FnSigs, TPred, env_var_sorts, type_pred
from lqh.syntax import NO_SPAN, Span


class SolverError(Exception):
    """Infrastructure failure: the solver could not be run or misbehaved.
    Distinct from an `unknown` verdict."""


class SolverUnavailableError(SolverError):
    pass


class SolverProtocolError(SolverError):
    pass


@dataclass(frozen=True)
class VC:
    """One verification condition: env ∧ extra ⇒ consequent."""

    id: int
    env: Env
    antecedent_extra: tuple[Pred, ...]
    consequent: Pred
    span: Span = NO_SPAN
    blame: str = ""
    fn_sigs: tuple[tuple[str, tuple[Sort, ...], Sort], ...] = ()

    def sig_dict(self) -> FnSigs:
        return {name: (params, result) for name, params, result in self.fn_sigs}


def fn_sigs_tuple(sigs: FnSigs) -> tuple[tuple[str, tuple[Sort, ...], Sort], ...]:
    return tuple(sorted((n, p, r) for n, (p, r) in sigs.items()))


@dataclass(frozen=True)
class Valid:
    pass


@dataclass(frozen=True)
class Invalid:
    model: dict[str, Value] = field(default_factory=dict)


@dataclass(frozen=True)
class Unknown:
    reason: str = "unknown"


SolverVerdict = Union[Valid, Invalid, Unknown]


# ---------------------------------------------------------------------------
# Encoding


def _mangle_sort(s: Sort) -> str:
    match s:
        case logic.IntSort():
            return "Int"
        case logic.BoolSort():
            return "Bool"
        case UnitSort():
            return "Unit"
        case OpaqueSort(name=n):
            return n
        case ListSort(elem=e):
            return f"L{_mangle_sort(e)}"
    raise AssertionError


def _smt_sort(s: Sort) -> str:
    match s:
        case logic.IntSort():
            return "Int"
        case logic.BoolSort():
            return "Bool"
        case UnitSort():
            return "Unit"
        case OpaqueSort(name=n):
            return n
        case ListSort(elem=e):
            return f"(Lst {_smt_sort(e)})"
    raise AssertionError


def _collect_sorts(s: Sort, opaque: set[str], lists: set[Sort]) -> None:
    if isinstance(s, OpaqueSort):
        opaque.add(s.name)
    elif isinstance(s, ListSort):
        lists.add(s.elem)
        _collect_sorts(s.elem, opaque, lists)


class _Encoder:
    def __init__(self, fn_sigs: FnSigs):
        self.fn_sigs = fn_sigs
        self.opaque: set[str] = set()
        self.list_elems: set[Sort] = set()
        self.lens: set[Sort] = set()  # element sorts with a len instance
        self.fns: dict[str, tuple[tuple[Sort, ...], Sort]] = {}
        self.consts: dict[str, Sort] = {}

    def term(self, t: TPred) -> str:
        p = t.node
        match p:
            case logic.PInt(value=n):
                return str(n) if n >= 0 else f"(- {-n})"
            case logic.PBool(value=b):
                return "true" if b else "false"
            case logic.PVar(name=n):
                self._const(n, t.resolved())
                return _sym(n)
            case logic.PArith(op=op, left=_, right=_):
                return f"({op} {self.term(t.kids[0])} {self.term(t.kids[1])})"
            case logic.PMod(divisor=d):
                dv = str(d) if d >= 0 else f"(- {-d})"
                return f"(mod {self.term(t.kids[0])} {dv})"
            case logic.PCmp(op=op):
                smt_op = "=" if op == "==" else op
                return f"({smt_op} {self.term(t.kids[0])} {self.term(t.kids[1])})"
            case logic.PNot():
                return f"(not {self.term(t.kids[0])})"
            case logic.PAnd():
                return f"(and {self.term(t.kids[0])} {self.term(t.kids[1])})"
            case logic.POr():
                return f"(or {self.term(t.kids[0])} {self.term(t.kids[1])})"
            case logic.PNil():
                sort = t.resolved()
                assert isinstance(sort, ListSort)
                self._note(sort)
                return f"(as nil {_smt_sort(sort)})"
            case logic.PCons():
                sort = t.resolved()
                self._note(sort)
                return f"(cons {self.term(t.kids[0])} {self.term(t.kids[1])})"
            case logic.PApp(fn="len"):
                arg_sort = t.kids[0].resolved()
                assert isinstance(arg_sort, ListSort)
                self._note(arg_sort)
                self.lens.add(arg_sort.elem)
                return f"({_len_name(arg_sort.elem)} {self.term(t.kids[0])})"
            case logic.PApp(fn=f):
                params, result = self.fn_sigs[f]
                self.fns[f] = (params, result)
                for s in list(params) + [result]:
                    self._note_sort(s)
                args = " ".join(self.term(k) for k in t.kids)
                return f"({_sym(f)} {args})" if args else _sym(f)
        raise AssertionError

    def _const(self, name: str, sort: Sort) -> None:
        self.consts.setdefault(name, sort)
        self._note_sort(sort)

    def _note(self, s: ListSort) -> None:
        self.list_elems.add(s.elem)
        self._note_sort(s.elem)

    def _note_sort(self, s: Sort) -> None:
        _collect_sorts(s, self.opaque, self.list_elems)


def _sym(name: str) -> str:
    return name


def _len_name(elem: Sort) -> str:
    return f"len!{_mangle_sort(elem)}"


def encode_query(vc: VC, table: Optional[ReflectionTable] = None, fuel: int = 8) -> str:
    """Deterministic SMT-LIB 2 script asserting antecedent ∧ ¬consequent.
    Identical VCs produce byte-identical scripts."""
    env = vc.env
    fn_sigs = vc.sig_dict()
    var_sorts = env_var_sorts(env)

    antecedent = env_to_antecedent(env)
    extras = list(vc.antecedent_extra)
    equations: list[Pred] = []
    if table is not None:
        # constructor equalities in the extra antecedent count for matching
        match_env = env
        for p in extras:
            for c in logic.conjuncts(p):
                if c != logic.TRUE:
                    match_env = match_env.assume(c)
        equations = instantiate_equations(
            [antecedent, *extras, vc.consequent], match_env, table, fuel
        )

    enc = _Encoder(fn_sigs)
    asserts: list[str] = []
    for p in logic.conjuncts(antecedent) + extras + equations:
        if p == logic.TRUE:
            continue
        tp = type_pred(p, dict(var_sorts), fn_sigs, BOOL)
        asserts.append(f"(assert {enc.term(tp)})")
    tp = type_pred(vc.consequent, dict(var_sorts), fn_sigs, BOOL)
    asserts.append(f"(assert (not {enc.term(tp)}))")

    lines = ["(set-logic QF_UFDTLIA)"]
    for name in sorted(enc.opaque):
        lines.append(f"(declare-sort {name} 0)")
    if any(isinstance(s, UnitSort) for s in enc.consts.values()) or UnitSort() in enc.list_elems:
        lines.append("(declare-datatypes ((Unit 0)) (((unit))))")
    if enc.list_elems:
        lines.append(
            "(declare-datatypes ((Lst 1)) ((par (T) ((nil) (cons (hd T) (tl (Lst T)))))))"
        )
    for elem in sorted(enc.lens, key=_mangle_sort):
        lines.append(f"(declare-fun {_len_name(elem)} ((Lst {_smt_sort(elem)})) Int)")
    for f in sorted(enc.fns):
        params, result = enc.fns[f]
        ps = " ".join(_smt_sort(s) for s in params)
        lines.append(f"(declare-fun {_sym(f)} ({ps}) {_smt_sort(result)})")
    # env binders in environment order, then any remaining named constants
    emitted = set()
    for name, _t in env.binders:
        if name in enc.consts and name not in emitted:
            lines.append(f"(declare-const {_sym(name)} {_smt_sort(enc.consts[name])})")
            emitted.add(name)
    for name in sorted(enc.consts):
        if name not in emitted:
            lines.append(f"(declare-const {_sym(name)} {_smt_sort(enc.consts[name])})")
            emitted.add(name)
    lines.extend(asserts)
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Solver clients


def discover_solver(explicit: Optional[str] = None) -> list[str]:
    """Resolve the solver command: explicit flag, LQH_SOLVER, a z3 or cvc5
    binary on PATH, then the bundled z3-wasm shim (requires node and an
    installed z3-solver npm package)."""
    if explicit:
        return shlex.split(explicit)
    env_cmd = os.environ.get("LQH_SOLVER")
    if env_cmd:
        return shlex.split(env_cmd)
    if shutil.which("z3"):
        return ["z3", "-in"]
    if shutil.which("cvc5"):
        return ["cvc5", "--incremental", "--force-logic=QF_UFDTLIA"]
    if shutil.which("node"):
        shim = Path(__file__).parent / "_z3shim" / "z3_stdio.mjs"
        if shim.exists():
            return ["node", str(shim)]
    raise SolverUnavailableError(
        "no SMT solver found: pass --solver, set LQH_SOLVER, or install z3"
    )


class SubprocessSolver:
    """A persistent solver process fed one query at a time, reset between
    queries.  Not thread safe; use the pool for exclusive access."""

    def __init__(self, cmd: list[str], timeout_ms: int = 5000):
        self.cmd = cmd
        self.timeout_ms = timeout_ms
        self._proc: Optional[subprocess.Popen] = None
        self._lines: "queue.Queue[Optional[str]]" = queue.Queue()

    def _spawn(self) -> None:
        try:
            self._proc = subprocess.Popen(
                self.cmd,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
            )
        except OSError as e:
            raise SolverUnavailableError(f"cannot start solver {self.cmd!r}: {e}") from None
        self._lines = queue.Queue()
        t = threading.Thread(target=self._pump, args=(self._proc,), daemon=True)
        t.start()

    def _pump(self, proc: subprocess.Popen) -> None:
        assert proc.stdout is not None
        for line in proc.stdout:
            self._lines.put(line.rstrip("\n"))
        self._lines.put(None)

    def _write(self, text: str) -> None:
        assert self._proc is not None and self._proc.stdin is not None
        try:
            self._proc.stdin.write(text)
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as e:
            self._kill()
            raise SolverProtocolError(f"solver pipe closed: {e}") from None

    def _read_line(self, deadline_ms: float) -> Optional[str]:
        try:
            line = self._lines.get(timeout=max(deadline_ms, 1) / 1000.0)
        except queue.Empty:
            return None
        if line is None:
            raise SolverProtocolError("solver exited unexpectedly")
        return line

    def _kill(self) -> None:
        if self._proc is not None:
            try:
                self._proc.kill()
            except OSError:
                pass
            self._proc = None

    def close(self) -> None:
        if self._proc is not None and self._proc.stdin is not None:
            try:
                self._proc.stdin.write("(exit)\n")
                self._proc.stdin.flush()
            except OSError:
                pass
        self._kill()

    def query(self, script: str) -> tuple[str, Optional[str]]:
        """Run one script ending in (check-sat).  Returns (verdict,
        model-text) where verdict is sat/unsat/unknown."""
        if self._proc is None or self._proc.poll() is not None:
            self._spawn()
        self._write(f"(set-option :timeout {self.timeout_ms})\n")
        self._write(script)
        verdict = self._read_line(self.timeout_ms * 1.5)
        if verdict is None:
            self._kill()
            return "unknown", None
        while verdict == "success":
            verdict = self._read_line(self.timeout_ms * 1.5) or ""
        if verdict.startswith("(error"):
            raise SolverProtocolError(f"solver rejected query: {verdict}")
        if verdict not in ("sat", "unsat", "unknown"):
            raise SolverProtocolError(f"unexpected solver output: {verdict!r}")
        model_text: Optional[str] = None
        if verdict == "sat":
            self._write("(get-model)\n")
            model_text = self._read_sexpr()
        self._write("(reset)\n")
        return verdict, model_text

    def _read_sexpr(self) -> Optional[str]:
        parts: list[str] = []
        depth = 0
        while True:
            line = self._read_line(self.timeout_ms * 1.5)
            if line is None:
                self._kill()
                return None
            parts.append(line)
            depth += line.count("(") - line.count(")")
            if depth <= 0 and parts:
                return "\n".join(parts)


class ReplaySolver:
    """Serves recorded responses keyed by script hash; hermetic tests run
    without a solver binary."""

    def __init__(self, transcript: dict[str, dict]):
        self.transcript = transcript

    def query(self, script: str) -> tuple[str, Optional[str]]:
        key = script_hash(script)
        if key not in self.transcript:
            raise SolverUnavailableError(f"transcript has no entry for script {key[:12]}…")
        entry = self.transcript[key]
        return entry["verdict"], entry.get("model")

    def close(self) -> None:
        pass


class RecordingSolver:
    """Wraps a real client and captures every exchange."""

    def __init__(self, inner, transcript: Optional[dict[str, dict]] = None):
        self.inner = inner
        self.transcript: dict[str, dict] = transcript if transcript is not None else {}

    def query(self, script: str) -> tuple[str, Optional[str]]:
        verdict, model = self.inner.query(script)
        entry: dict = {"verdict": verdict}
        if model is not None:
            entry["model"] = model
        self.transcript[script_hash(script)] = entry
        return verdict, model

    def close(self) -> None:
        self.inner.close()


def script_hash(script: str) -> str:
    return hashlib.sha256(script.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Memoized solving


_memo_lock = threading.Lock()
_memo: dict[str, tuple[str, Optional[str]]] = {}


def clear_memo() -> None:
    with _memo_lock:
        _memo.clear()


_dump_counter = 0


def solve(
    vc: VC,
    client,
    table: Optional[ReflectionTable] = None,
    fuel: int = 8,
    dump_dir: Optional[str] = None,
) -> SolverVerdict:
    """Check one VC: unsat ⇒ Valid, sat ⇒ Invalid(model), otherwise
    Unknown.  Verdicts are memoized per script hash."""
    script = encode_query(vc, table, fuel)
    if dump_dir:
        _dump(script, dump_dir)
    key = script_hash(script)
    with _memo_lock:
        hit = _memo.get(key)
    if hit is None:
        hit = client.query(script)
        with _memo_lock:
            _memo[key] = hit
    verdict, model_text = hit
    if verdict == "unsat":
        return Valid()
    if verdict == "sat":
        binders = {name for name, _ in vc.env.binders}
        return Invalid(parse_model(model_text or "", binders))
    return Unknown("solver returned unknown or timed out")


def _dump(script: str, dump_dir: str) -> None:
    global _dump_counter
    Path(dump_dir).mkdir(parents=True, exist_ok=True)
    with _memo_lock:
        n = _dump_counter
        _dump_counter += 1
    path = Path(dump_dir) / f"{n:04d}_{script_hash(script)[:12]}.smt2"
    path.write_text(script, encoding="utf-8")


# ---------------------------------------------------------------------------
# Model parsing (best effort: unparseable pieces are dropped, never promoted
# to Valid)


def _tokenize_sexpr(text: str) -> list[str]:
    out: list[str] = []
    i = 0
    while i < len(text):
        c = text[i]
        if c in "()":
            out.append(c)
            i += 1
        elif c.isspace():
            i += 1
        elif c == "|":
            j = text.find("|", i + 1)
            j = len(text) if j < 0 else j
            out.append(text[i + 1 : j])
            i = j + 1
        else:
            j = i
            while j < len(text) and not text[j].isspace() and text[j] not in "()":
                j += 1
            out.append(text[i:j])
            i = j
    return out


def _parse_sexprs(tokens: list[str], pos: int = 0):
    items = []
    while pos < len(tokens):
        t = tokens[pos]
        if t == "(":
            inner, pos = _parse_sexprs(tokens, pos + 1)
            items.append(inner)
        elif t == ")":
            return items, pos + 1
        else:
            items.append(t)
            pos += 1
    return items, pos


def _value_of(sexpr) -> Optional[Value]:
    if isinstance(sexpr, str):
        if sexpr.lstrip("-").isdigit():
            return VInt(int(sexpr))
        if sexpr == "true":
            return VBool(True)
        if sexpr == "false":
            return VBool(False)
        if sexpr == "nil":
            return VList(())
        if sexpr == "unit":
            return VUnit()
        return VOpaque(sexpr)
    if isinstance(sexpr, list) and sexpr:
        head = sexpr[0]
        if head == "-" and len(sexpr) == 2:
            inner = _value_of(sexpr[1])
            return VInt(-inner.value) if isinstance(inner, VInt) else None
        if head == "as" and len(sexpr) >= 2:
            return _value_of(sexpr[1])
        if head == "cons" and len(sexpr) == 3:
            h = _value_of(sexpr[1])
            t = _value_of(sexpr[2])
            if h is None or not isinstance(t, VList):
                return None
            return VList((h,) + t.items)
    return None


def parse_model(text: str, names: set[str]) -> dict[str, Value]:
    try:
        sexprs, _ = _parse_sexprs(_tokenize_sexpr(text))
    except RecursionError:
        return {}
    model: dict[str, Value] = {}
    # shape: ( (define-fun x () Int 6) ... ) possibly wrapped in (model ...)
    def walk(items) -> None:
        for it in items:
            if isinstance(it, list):
                if it[:1] == ["define-fun"] and len(it) >= 5 and it[1] in names and it[2] == []:
                    v = _value_of(it[4])
                    if v is not None:
                        model[it[1]] = v
                else:
                    walk(it)

    walk(sexprs)
    return model


# ---------------------------------------------------------------------------
# Client pool: sequential checks reuse processes; concurrent checks each get
# an exclusive client.


class SolverPool:
    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._idle: dict[tuple, list] = {}

    def acquire(self, cmd: list[str], timeout_ms: int):
        key = (tuple(cmd), timeout_ms)
        with self._lock:
            bucket = self._idle.get(key)
            if bucket:
                return bucket.pop()
        return SubprocessSolver(cmd, timeout_ms)

    def release(self, client) -> None:
        if isinstance(client, SubprocessSolver):
            key = (tuple(client.cmd), client.timeout_ms)
            with self._lock:
                self._idle.setdefault(key, []).append(client)
        else:
            client.close()

    def close_all(self) -> None:
        with self._lock:
            for bucket in self._idle.values():
                for c in bucket:
                    c.close()
            self._idle.clear()


POOL = SolverPool()
