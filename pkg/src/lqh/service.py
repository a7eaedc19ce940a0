"""Stateless HTTP JSON facade over check/hole/action.

POST /v1/check   {source}                                -> {schema, diagnostics, holes}
POST /v1/action  {source, hole, action, args}            -> {schema, new_source, diagnostics, holes}
GET  /healthz                                            -> {status, solver}

The source travels with every request; nothing is retained between calls.
A bounded semaphore (default 4) caps concurrent solver processes.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from lqh.checker import CheckConfig, check_program
from lqh.driver import analyze, full_check_json
from lqh.holes import (
    HoleError,
    StaleEditError,
    apply_edit,
    case_split,
    fill,
    try_unit,
)
from lqh.logic import RBase, UnitSort
from lqh.parser import ParseError, parse_program
from lqh.smt import POOL, SolverError, Valid, discover_solver

DEFAULT_PORT = 8645
MAX_SOURCE_BYTES = 256 * 1024
ACTION_KINDS = ("split", "fill_unit", "fill_expr")


class ServiceError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


def _check_payload(source: str, config: CheckConfig) -> dict:
    analysis = analyze(source, config)
    return full_check_json(analysis)


def _action_payload(body: dict, config: CheckConfig) -> dict:
    source = body.get("source")
    hole = body.get("hole")
    kind = body.get("action")
    args = body.get("args")
    if not isinstance(source, str) or not isinstance(hole, str) or kind not in ACTION_KINDS:
        raise ServiceError(400, "body must carry source, hole, and a valid action kind")

    try:
        program = parse_program(source)
    except ParseError as e:
        raise ServiceError(400, f"source does not parse: {e}") from None
    result = check_program(program, config)
    cap = result.capture(hole)
    if cap is None:
        raise ServiceError(404, f"no hole named {hole!r}")

    client = POOL.acquire(discover_solver(config.solver), config.smt_timeout_ms)
    inner = CheckConfig(
        solver=config.solver,
        fuel=config.fuel,
        smt_timeout_ms=config.smt_timeout_ms,
        auto_unit=config.auto_unit,
        dump_smt=config.dump_smt,
        client=client,
    )
    try:
        if kind == "split":
            if not isinstance(args, str) or not args:
                raise ServiceError(400, "split needs the variable name in args")
            try:
                edit = case_split(program, result, hole, args, auto_unit=False, config=inner)
            except HoleError as e:
                raise ServiceError(409, str(e)) from None
            new_source = apply_edit(source, edit)
        elif kind == "fill_unit":
            expected = cap.expected
            if not (isinstance(expected, RBase) and isinstance(expected.sort, UnitSort)):
                raise ServiceError(409, f"hole {hole!r} does not expect a proof")
            verdict = try_unit(cap, result.table, inner.fuel, client, result.fn_sigs)
            if not isinstance(verdict, Valid):
                raise ServiceError(409, f"() does not discharge {hole!r}")
            _edit, new_source, _res = fill(program, result, hole, "()", inner)
        else:  # fill_expr
            if not isinstance(args, str) or not args.strip():
                raise ServiceError(400, "fill_expr needs the expression text in args")
            try:
                _edit, new_source, _res = fill(program, result, hole, args, inner)
            except ParseError as e:
                raise ServiceError(400, f"fill expression does not parse: {e}") from None
        payload = _check_payload(new_source, inner)
    except StaleEditError as e:
        raise ServiceError(409, str(e)) from None
    finally:
        POOL.release(client)
    payload["new_source"] = new_source
    return payload


class _Handler(BaseHTTPRequestHandler):
    config: CheckConfig = CheckConfig()
    gate: threading.BoundedSemaphore = threading.BoundedSemaphore(4)

    def log_message(self, fmt, *args):  # silence request logging
        pass

    def _cors(self) -> None:
        origin = self.headers.get("Origin", "")
        if origin.startswith("http://localhost") or origin.startswith("http://127.0.0.1"):
            self.send_header("Access-Control-Allow-Origin", origin)
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")

    def _reply(self, status: int, payload: dict) -> None:
        data = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self._cors()
        self.end_headers()
        self.wfile.write(data)

    def do_OPTIONS(self) -> None:
        self.send_response(204)
        self._cors()
        self.end_headers()

    def do_GET(self) -> None:
        if self.path != "/healthz":
            self._reply(404, {"error": "not found"})
            return
        try:
            cmd = discover_solver(self.config.solver)
            self._reply(200, {"status": "ok", "solver": " ".join(cmd)})
        except SolverError as e:
            self._reply(503, {"status": "unavailable", "error": str(e)})

    def do_POST(self) -> None:
        if self.path not in ("/v1/check", "/v1/action"):
            self._reply(404, {"error": "not found"})
            return
        length = int(self.headers.get("Content-Length") or 0)
        if length > MAX_SOURCE_BYTES:
            self._reply(413, {"error": f"body exceeds {MAX_SOURCE_BYTES} bytes"})
            return
        raw = self.rfile.read(length)
        try:
            body = json.loads(raw.decode("utf-8"))
            if not isinstance(body, dict):
                raise ValueError("body must be an object")
        except (ValueError, UnicodeDecodeError) as e:
            self._reply(400, {"error": f"malformed JSON: {e}"})
            return
        try:
            with self.gate:
                if self.path == "/v1/check":
                    source = body.get("source")
                    if not isinstance(source, str):
                        raise ServiceError(400, "body must carry a source string")
                    if len(source.encode("utf-8")) > MAX_SOURCE_BYTES:
                        raise ServiceError(413, "source exceeds the size limit")
                    self._reply(200, _check_payload(source, self.config))
                else:
                    self._reply(200, _action_payload(body, self.config))
        except ServiceError as e:
            self._reply(e.status, {"error": e.message})
        except SolverError as e:
            self._reply(503, {"error": f"solver unavailable: {e}"})


def make_server(host: str = "127.0.0.1", port: int = DEFAULT_PORT, config: Optional[CheckConfig] = None, workers: int = 4) -> ThreadingHTTPServer:
    handler = type(
        "Handler",
        (_Handler,),
        {"config": config or CheckConfig(), "gate": threading.BoundedSemaphore(workers)},
    )
    return ThreadingHTTPServer((host, port), handler)


def serve(host: str = "127.0.0.1", port: int = DEFAULT_PORT, config: Optional[CheckConfig] = None) -> None:
    server = make_server(host, port, config)
    print(f"lqh service listening on http://{host}:{port}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
