"""HTTP service exposing sessions for remote and browser clients.

Endpoints (JSON in and out):

    POST   /sessions                         {"metadata": doc} -> {"session_id"}
    POST   /sessions/{id}/models             tree document     -> {"model_id"}
    POST   /sessions/{id}/instances          {"name","model_id","label","minconf"?} -> 201
    POST   /sessions/{id}/constraints        {"text"}          -> {"constraint_id"}
    DELETE /sessions/{id}/constraints/{cid}                    -> 204
    POST   /sessions/{id}/solve              {"project"?,"minimize"?} -> answer document
    GET    /sessions/{id}                    state dump
    GET    /sessions/{id}/script             replay bundle

Validation failures are 400 with {"kind","message"} (plus line/column for
constraint text), unknown ids 404, name collisions 409. A solve that blows
the configured budget is still a 200, carrying {"status":"timeout",
"solved_members"}: a partial result report, not a transport failure.

Sessions live in memory and expire after `ttl` idle seconds; anything worth
keeping can be fetched as a replay bundle and rerun offline. Answer bytes
match the CLI's json format exactly.
"""

from __future__ import annotations

import json
import logging
import threading
import time
import uuid
from fractions import Fraction
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .errors import InputError, RationaleError, SolveBudgetExceeded
from .linear import parse_rat
from .session import Session, answer_document, render_rat
from .theory import Budget

log = logging.getLogger("rationale.service")


class _Entry:
    def __init__(self, session: Session):
        self.session = session
        self.lock = threading.Lock()
        self.last_used = time.monotonic()


class _HttpError(Exception):
    def __init__(self, status: int, kind: str, message: str, **extra):
        super().__init__(message)
        self.status = status
        self.doc = {"kind": kind, "message": message}
        self.doc.update({k: v for k, v in extra.items() if v is not None})


def _input_error_status(e: InputError) -> int:
    return 409 if e.kind == "duplicate" else 400


class ReasonServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, ttl: float, budget, cors):
        super().__init__(address, _Handler)
        self.store: dict[str, _Entry] = {}
        self.store_lock = threading.Lock()
        self.ttl = ttl
        self.budget = budget
        self.cors = cors

    def sweep(self) -> None:
        cutoff = time.monotonic() - self.ttl
        with self.store_lock:
            for sid in [s for s, e in self.store.items() if e.last_used < cutoff]:
                del self.store[sid]

    def create(self, session: Session) -> str:
        sid = uuid.uuid4().hex[:16]
        with self.store_lock:
            self.store[sid] = _Entry(session)
        return sid

    def entry(self, sid: str) -> _Entry:
        with self.store_lock:
            e = self.store.get(sid)
            if e is None:
                raise _HttpError(404, "not_found", f"no session '{sid}'")
            e.last_used = time.monotonic()
            return e


def _parse_minconf(raw):
    if raw is None:
        return None
    if isinstance(raw, bool) or isinstance(raw, float):
        raise InputError(
            "minconf must be an integer or a 'p/q' string, not a float",
            kind="instance",
        )
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, str):
        return parse_rat(raw)
    raise InputError("minconf must be an integer or a 'p/q' string", kind="instance")


class _Handler(BaseHTTPRequestHandler):
    server_version = "rationale"
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):
        log.info("%s %s", self.address_string(), fmt % args)

    # --- plumbing -----------------------------------------------------------

    def _send(self, status: int, doc=None) -> None:
        body = b"" if doc is None else json.dumps(doc, separators=(",", ":")).encode()
        self.send_response(status)
        if self.server.cors:
            self.send_header("Access-Control-Allow-Origin", self.server.cors)
        if body or status not in (204,):
            self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        if body:
            self.wfile.write(body)

    def _body(self):
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            return {}
        try:
            return json.loads(raw)
        except json.JSONDecodeError as e:
            raise _HttpError(400, "parse_error", f"invalid JSON body: {e}") from None

    def _route(self, method: str) -> None:
        self.server.sweep()
        try:
            self._dispatch(method)
        except _HttpError as e:
            self._send(e.status, e.doc)
        except InputError as e:
            doc = {"kind": e.kind, "message": str(e)}
            if e.line is not None:
                doc["line"] = e.line
            if e.column is not None:
                doc["column"] = e.column
            self._send(_input_error_status(e), doc)
        except RationaleError as e:
            self._send(500, {"kind": "internal", "message": str(e)})
        except Exception:
            log.exception("unhandled error serving %s %s", method, self.path)
            self._send(500, {"kind": "internal", "message": "unhandled error"})

    def do_GET(self):
        self._route("GET")

    def do_POST(self):
        self._route("POST")

    def do_DELETE(self):
        self._route("DELETE")

    def do_OPTIONS(self):
        if not self.server.cors:
            self._send(404, {"kind": "not_found", "message": "unknown path"})
            return
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", self.server.cors)
        self.send_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    # --- routing ------------------------------------------------------------

    def _dispatch(self, method: str) -> None:
        parts = [p for p in self.path.split("?")[0].split("/") if p]
        if method == "POST" and parts == ["sessions"]:
            return self._create_session()
        if len(parts) >= 2 and parts[0] == "sessions":
            sid, rest = parts[1], parts[2:]
            if method == "GET" and rest == []:
                return self._state(sid)
            if method == "GET" and rest == ["script"]:
                return self._script(sid)
            if method == "POST" and rest == ["models"]:
                return self._add_model(sid)
            if method == "POST" and rest == ["instances"]:
                return self._add_instance(sid)
            if method == "POST" and rest == ["constraints"]:
                return self._add_constraint(sid)
            if method == "DELETE" and len(rest) == 2 and rest[0] == "constraints":
                return self._delete_constraint(sid, rest[1])
            if method == "POST" and rest == ["solve"]:
                return self._solve(sid)
        raise _HttpError(404, "not_found", f"unknown path {self.path}")

    # --- endpoints ------------------------------------------------------------

    def _create_session(self) -> None:
        body = self._body()
        if "metadata" not in body:
            raise _HttpError(400, "metadata", "body must carry a 'metadata' document")
        session = Session(body["metadata"])
        self._send(200, {"session_id": self.server.create(session)})

    def _state(self, sid: str) -> None:
        e = self.server.entry(sid)
        with e.lock:
            s = e.session
            doc = {
                "metadata": s.metadata_doc,
                "models": list(s.model_order),
                "instances": [
                    {
                        "name": name,
                        "model_id": s.decls[name].model_id,
                        "label": s.decls[name].label,
                        **(
                            {"minconf": render_rat(s.decls[name].minconf)}
                            if s.decls[name].minconf is not None
                            else {}
                        ),
                    }
                    for name in s.decl_order
                ],
                "constraints": [
                    {"id": cid, "text": text} for cid, text, _ in s.constraints
                ],
            }
        self._send(200, doc)

    def _script(self, sid: str) -> None:
        e = self.server.entry(sid)
        with e.lock:
            bundle = e.session.export_script()
        self._send(200, bundle)

    def _add_model(self, sid: str) -> None:
        doc = self._body()
        e = self.server.entry(sid)
        with e.lock:
            mid = e.session.model(doc)
        self._send(200, {"model_id": mid})

    def _add_instance(self, sid: str) -> None:
        body = self._body()
        missing = {"name", "model_id", "label"} - set(body)
        if missing:
            raise _HttpError(
                400, "instance", f"missing fields: {', '.join(sorted(missing))}"
            )
        minconf = _parse_minconf(body.get("minconf"))
        e = self.server.entry(sid)
        with e.lock:
            e.session.instance(body["name"], body["model_id"], body["label"], minconf)
        self._send(201, {"name": body["name"]})

    def _add_constraint(self, sid: str) -> None:
        body = self._body()
        if not isinstance(body.get("text"), str):
            raise _HttpError(400, "constraint", "body must carry constraint 'text'")
        e = self.server.entry(sid)
        with e.lock:
            cid = e.session.constraint(body["text"])
        self._send(200, {"constraint_id": cid})

    def _delete_constraint(self, sid: str, cid_text: str) -> None:
        if not cid_text.isdigit():
            raise _HttpError(400, "constraint", "constraint id must be an integer")
        e = self.server.entry(sid)
        with e.lock:
            try:
                e.session.retract(int(cid_text))
            except InputError as err:
                raise _HttpError(404, "not_found", str(err)) from None
        self._send(204)

    def _solve(self, sid: str) -> None:
        body = self._body()
        project = body.get("project")
        if project is not None and (
            not isinstance(project, list)
            or not all(isinstance(x, str) for x in project)
        ):
            raise _HttpError(400, "project", "'project' must be a list of names")
        minimize = body.get("minimize")
        if minimize is not None and not isinstance(minimize, str):
            raise _HttpError(400, "minimize", "'minimize' must be a spec string")
        e = self.server.entry(sid)
        budget = Budget(self.server.budget) if self.server.budget else None
        with e.lock:
            try:
                answer = e.session.solveopt(project=project, minimize=minimize,
                                            budget=budget)
            except SolveBudgetExceeded as exc:
                self._send(
                    200,
                    {"status": "timeout", "solved_members": exc.solved_members},
                )
                return
        self._send(200, answer_document(answer))


def make_server(host: str, port: int, ttl: float = 3600.0,
                budget=None, cors=None) -> ReasonServer:
    return ReasonServer((host, port), ttl=ttl, budget=budget, cors=cors)


def run_server(host: str, port: int, ttl: float = 3600.0,
               budget=None, cors=None) -> None:
    server = make_server(host, port, ttl=ttl, budget=budget, cors=cors)
    log.info("listening on %s:%s", *server.server_address[:2])
    try:
        server.serve_forever()
    finally:
        server.server_close()
