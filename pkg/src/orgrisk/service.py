"""HTTP/JSON service: scenario sessions, inference, explanation, what-if.

Sessions hold an immutable base model; what-if branches never mutate it.
With a store directory configured, each session is persisted as an
append-only log (scenario document first, then one line per what-if call)
and reloaded on startup, so identical requests reproduce identical
responses across restarts.

Request handling runs in a threadpool; operations on one session serialize
on the session lock while distinct sessions proceed in parallel.
"""

from __future__ import annotations

import json
import secrets
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from starlette.concurrency import run_in_threadpool

from .engine import InferenceResult, infer
from .explain import FactNotFoundError, explain, report_document
from .model import OrgModel, Severity, Violation, validate_model
from .scenario import ScenarioParseError, document_to_model, model_to_document
from .whatif import (
    UnknownTargetError,
    WouldInvalidateError,
    apply_intervention,
    diff_inferences,
    parse_ops,
)


def _canonical_json(payload: Any, status_code: int = 200) -> Response:
    body = json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False)
    return Response(content=body, status_code=status_code,
                    media_type="application/json")


def _violation_records(violations: list[Violation]) -> list[dict]:
    return [{"severity": v.severity.value, "code": v.code, "message": v.message,
             "entityIds": list(v.entity_ids)} for v in violations]


def _issue_records(issues) -> list[dict]:
    return [{"location": i.location, "code": i.code, "message": i.message}
            for i in issues]


def _ops_key(raw_ops: list) -> tuple[str, ...]:
    return tuple(json.dumps(op, sort_keys=True, default=str) for op in raw_ops)


@dataclass
class _Branch:
    ops_key: tuple[str, ...]
    raw_ops: list
    result: InferenceResult | None = None


@dataclass
class Session:
    id: str
    model: OrgModel
    warnings: list[Violation]
    lock: threading.Lock = field(default_factory=threading.Lock)
    inference: InferenceResult | None = None
    branches: dict[str, _Branch] = field(default_factory=dict)

    def base_inference(self) -> InferenceResult:
        if self.inference is None:
            self.inference = infer(self.model)
        return self.inference


class SessionStore:
    """In-memory session registry with optional append-only file persistence."""

    def __init__(self, directory: Path | None = None):
        self._directory = directory
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        if directory is not None:
            directory.mkdir(parents=True, exist_ok=True)
            self._reload()

    def _reload(self) -> None:
        assert self._directory is not None
        for path in sorted(self._directory.glob("*.jsonl")):
            session_id = path.stem
            session: Session | None = None
            for line in path.read_text("utf-8").splitlines():
                record = json.loads(line)
                if record["type"] == "scenario":
                    model = document_to_model(record["document"])
                    session = Session(session_id, model, validate_model(model))
                elif record["type"] == "whatif" and session is not None:
                    session.branches[record["branch"]] = _Branch(
                        _ops_key(record["ops"]), record["ops"])
            if session is not None:
                self._sessions[session_id] = session

    def _append(self, session_id: str, record: dict) -> None:
        if self._directory is None:
            return
        path = self._directory / f"{session_id}.jsonl"
        with path.open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(record, sort_keys=True) + "\n")

    def create(self, model: OrgModel, warnings: list[Violation]) -> Session:
        session_id = secrets.token_urlsafe(16)
        session = Session(session_id, model, warnings)
        with self._lock:
            self._sessions[session_id] = session
        self._append(session_id, {"type": "scenario",
                                  "document": model_to_document(model)})
        return session

    def get(self, session_id: str) -> Session | None:
        with self._lock:
            return self._sessions.get(session_id)

    def log_whatif(self, session_id: str, branch: str, raw_ops: list) -> None:
        self._append(session_id, {"type": "whatif", "branch": branch,
                                  "ops": raw_ops})


async def _read_json(request: Request) -> tuple[Any, Response | None]:
    raw = await request.body()
    try:
        return json.loads(raw.decode("utf-8") if raw else "null"), None
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        error = _canonical_json(
            {"errors": [{"location": "body", "code": "INVALID_JSON",
                         "message": str(exc)}]}, 400)
        return None, error


def create_app(store_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="orgrisk", docs_url=None, redoc_url=None)
    # the browser companion is served from its own origin
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    store = SessionStore(store_dir)
    app.state.sessions = store

    def _create_scenario(body: Any) -> Response:
        if not isinstance(body, dict):
            return _canonical_json(
                {"errors": [{"location": "$", "code": "WRONG_TYPE",
                             "message": "expected a scenario document object"}]}, 400)
        try:
            model = document_to_model(body)
        except ScenarioParseError as exc:
            return _canonical_json({"errors": _issue_records(exc.issues)}, 400)
        violations = validate_model(model)
        errors = [v for v in violations if v.severity is Severity.ERROR]
        if errors:
            return _canonical_json({"violations": _violation_records(errors)}, 422)
        session = store.create(model, violations)
        return _canonical_json({"sessionId": session.id,
                                "validation": _violation_records(violations)}, 201)

    @app.post("/scenarios")
    async def create_scenario(request: Request) -> Response:
        body, error = await _read_json(request)
        if error is not None:
            return error
        return await run_in_threadpool(_create_scenario, body)

    @app.post("/scenarios/{session_id}/infer")
    def infer_scenario(session_id: str) -> Response:
        session = store.get(session_id)
        if session is None:
            return _canonical_json({"error": "unknown session"}, 404)
        with session.lock:
            result = session.base_inference()
            payload = result.to_document()
            payload["report"] = report_document(result)
        return _canonical_json(payload)

    @app.get("/scenarios/{session_id}/explain/{fact_id}")
    def explain_fact(session_id: str, fact_id: str) -> Response:
        session = store.get(session_id)
        if session is None:
            return _canonical_json({"error": "unknown session"}, 404)
        with session.lock:
            result = session.base_inference()
            target = result.by_id().get(fact_id)
            if target is None:
                return _canonical_json({"error": "unknown fact"}, 404)
            try:
                tree = explain(result, target)
            except FactNotFoundError:
                return _canonical_json({"error": "unknown fact"}, 404)
        return _canonical_json(tree.to_document())

    def _whatif(session: Session, body: Any) -> Response:
        if not isinstance(body, dict):
            return _canonical_json({"error": "expected object body"}, 400)
        branch_name = body.get("branch", "default")
        raw_ops = body.get("interventions", [])
        try:
            intervention = parse_ops(raw_ops)
        except ScenarioParseError as exc:
            return _canonical_json({"violations": _issue_records(exc.issues)}, 422)
        with session.lock:
            base = session.base_inference()
            try:
                varied = apply_intervention(session.model, intervention)
            except UnknownTargetError as exc:
                return _canonical_json(
                    {"violations": [{"code": "UNKNOWN_TARGET", "message": str(exc)}]},
                    422)
            except WouldInvalidateError as exc:
                if exc.violations and isinstance(exc.violations[0], Violation):
                    records = _violation_records(exc.violations)  # type: ignore[arg-type]
                else:
                    records = _issue_records(exc.violations)
                return _canonical_json({"violations": records}, 422)
            key = _ops_key(raw_ops)
            branch = session.branches.get(branch_name)
            if branch is None or branch.ops_key != key:
                branch = _Branch(key, raw_ops, infer(varied))
                session.branches[branch_name] = branch
                store.log_whatif(session.id, branch_name, raw_ops)
            elif branch.result is None:  # replayed from the log after restart
                branch.result = infer(varied)
            diff = diff_inferences(base, branch.result)
        payload = diff.to_document()
        payload["branch"] = branch_name
        return _canonical_json(payload)

    @app.post("/scenarios/{session_id}/whatif")
    async def whatif_scenario(session_id: str, request: Request) -> Response:
        session = store.get(session_id)
        if session is None:
            return _canonical_json({"error": "unknown session"}, 404)
        body, error = await _read_json(request)
        if error is not None:
            return error
        return await run_in_threadpool(_whatif, session, body)

    return app


def default_address() -> tuple[str, int]:
    """Loopback default, overridable via ORGRISK_ADDR (host:port)."""
    import os

    raw = os.environ.get("ORGRISK_ADDR", "127.0.0.1:8732")
    return parse_address(raw)


def parse_address(raw: str) -> tuple[str, int]:
    host, _, port = raw.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"address must be host:port, got {raw!r}")
    return host, int(port)
