"""HTTP facade over sessions, diagnosis, planning, and the knowledge base.

Sessions live in process memory and die with the server; the knowledge base
is durable when a directory is configured and in-memory otherwise.  Request
and response bodies are the same JSON documents the library modules emit, so
clients never see a second data model.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

from .conformance import check, explain, violation_doc
from .diagnosis import CauseCandidate, detect_patterns, diagnosis_doc, rank_causes
from .errors import ArchmendError, ResourceLimitError, SessionStateError
from .kb import KnowledgeEvent, KnowledgeStore, Snapshot, builtin_priors, event_doc
from .model import SystemState, architecture_from_doc, implementation_from_doc
from .planner import SearchConfig, plan_beam, plan_exhaustive, plan_greedy, plans_doc, rank_plans
from .repair import action_from_doc
from .session import Session, node_doc, tree_doc

STRATEGIES = ("beam", "greedy", "exhaustive")


class ApiError(Exception):
    """Carries the HTTP status plus the {error, detail} payload."""

    def __init__(self, status: int, error: str, detail: str):
        super().__init__(detail)
        self.status = status
        self.error = error
        self.detail = detail


class _EphemeralStore:
    """Drop-in for KnowledgeStore when no directory is configured."""

    def __init__(self):
        self._events: list[KnowledgeEvent] = []

    def record(self, events: list[KnowledgeEvent]) -> None:
        self._events.extend(events)

    def snapshot(self) -> Snapshot:
        return Snapshot(tuple(self._events), builtin_priors())


class SessionBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    architecture: dict
    implementation: dict
    system_id: str


class CauseBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    candidate_id: int


class StepBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    action: dict


class CursorBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    node_id: int


class FinishBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    outcome: str


def _session_error(exc: SessionStateError) -> ApiError:
    msg = str(exc)
    if msg.startswith("unknown node"):
        return ApiError(404, "unknown_node", msg)
    if msg.startswith("session is closed"):
        return ApiError(409, "session_closed", msg)
    return ApiError(422, "invalid_request", msg)


def create_app(kb_dir: str | None = None, cors_origins: list[str] | None = None) -> FastAPI:
    app = FastAPI(title="archmend", docs_url=None, redoc_url=None)
    if cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(cors_origins),
            allow_methods=["*"],
            allow_headers=["*"],
        )

    store = KnowledgeStore(kb_dir) if kb_dir else _EphemeralStore()
    store_lock = threading.Lock()
    sessions: dict[str, Session] = {}
    session_locks: dict[str, threading.Lock] = {}
    registry_lock = threading.Lock()

    def kb_snapshot() -> Snapshot:
        with store_lock:
            return store.snapshot()

    def get_session(session_id: str) -> tuple[Session, threading.Lock]:
        with registry_lock:
            sess = sessions.get(session_id)
            if sess is None:
                raise ApiError(404, "unknown_session", f"no session with id {session_id}")
            return sess, session_locks[session_id]

    @app.exception_handler(ApiError)
    async def on_api_error(request: Request, exc: ApiError):
        return JSONResponse({"error": exc.error, "detail": exc.detail}, status_code=exc.status)

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse({"error": "validation_error", "detail": str(exc)}, status_code=422)

    # -- sessions -----------------------------------------------------------

    @app.post("/api/v1/sessions", status_code=201)
    def create_session(body: SessionBody):
        if not body.system_id:
            raise ApiError(422, "invalid_request", "system_id must be non-empty")
        try:
            architecture = architecture_from_doc(body.architecture)
            implementation = implementation_from_doc(body.implementation)
            sess = Session(architecture, implementation, system_id=body.system_id)
        except ArchmendError as exc:
            raise ApiError(422, "invalid_documents", str(exc)) from exc
        with registry_lock:
            sessions[sess.session_id] = sess
            session_locks[sess.session_id] = threading.Lock()
        return {"session_id": sess.session_id, "root": node_doc(sess.nodes[0])}

    @app.get("/api/v1/sessions/{session_id}/tree")
    def get_tree(session_id: str):
        sess, lock = get_session(session_id)
        with lock:
            return tree_doc(sess)

    @app.get("/api/v1/sessions/{session_id}/nodes/{node_id}/violations")
    def get_violations(session_id: str, node_id: int):
        sess, lock = get_session(session_id)
        with lock:
            try:
                state = sess.state_at(node_id)
            except SessionStateError as exc:
                raise _session_error(exc) from exc
            vs = check(state.architecture, state.implementation)
            violations = []
            for v in vs.violations:
                doc = violation_doc(v)
                doc["explanation"] = explain(v, state.architecture, state.implementation)
                violations.append(doc)
            return {
                "node_id": node_id,
                "conformant": vs.conformant,
                "counts": vs.counts(),
                "violations": violations,
            }

    @app.get("/api/v1/sessions/{session_id}/nodes/{node_id}/causes")
    def get_causes(session_id: str, node_id: int):
        sess, lock = get_session(session_id)
        snap = kb_snapshot()
        with lock:
            try:
                if node_id == sess.cursor:
                    candidates = sess.diagnose(snap)
                else:
                    state = sess.state_at(node_id)
                    vs = check(state.architecture, state.implementation)
                    patterns = detect_patterns(vs, state.architecture, state.implementation)
                    candidates = rank_causes(patterns, snap, sess.system_id)
            except SessionStateError as exc:
                raise _session_error(exc) from exc
            return {"node_id": node_id, "candidates": diagnosis_doc(candidates)}

    @app.post("/api/v1/sessions/{session_id}/cause")
    def select_cause(session_id: str, body: CauseBody):
        sess, lock = get_session(session_id)
        with lock:
            try:
                sess.select_cause(body.candidate_id)
            except SessionStateError as exc:
                raise _session_error(exc) from exc
            assert sess.selected_cause is not None
            return {
                "selected_cause": {
                    "signature": sess.selected_cause.signature,
                    "class_key": sess.selected_cause.class_key,
                }
            }

    @app.get("/api/v1/sessions/{session_id}/nodes/{node_id}/plans")
    def get_plans(
        session_id: str,
        node_id: int,
        strategy: str = "beam",
        width: int | None = None,
        depth: int | None = None,
    ):
        if strategy not in STRATEGIES:
            raise ApiError(422, "invalid_request", f"strategy must be one of {STRATEGIES}")
        base = SearchConfig()
        try:
            cfg = SearchConfig(
                beam_width=width if width is not None else base.beam_width,
                max_depth=depth if depth is not None else base.max_depth,
            )
        except ValueError as exc:
            raise ApiError(422, "invalid_request", str(exc)) from exc

        sess, lock = get_session(session_id)
        snap = kb_snapshot()
        with lock:
            try:
                state = sess.state_at(node_id)
            except SessionStateError as exc:
                raise _session_error(exc) from exc
            state = SystemState(
                architecture=state.architecture, implementation=state.implementation
            )
            vs = check(state.architecture, state.implementation)
            cause = None
            if sess.selected_cause is not None and node_id == sess.cursor:
                cause = CauseCandidate(
                    id=0, pattern=sess.selected_cause, confidence=0.0, explanation=""
                )
            scope = cause if cause is not None else vs
            try:
                if strategy == "beam":
                    plans = plan_beam(state, scope, cfg, kb=snap, system_id=sess.system_id)
                elif strategy == "greedy":
                    plans = [plan_greedy(state, scope, cfg)]
                else:
                    plans = [plan_exhaustive(state, scope, cfg)]
            except ResourceLimitError as exc:
                raise ApiError(422, "resource_limit", str(exc)) from exc
            except ArchmendError as exc:
                raise ApiError(422, "invalid_request", str(exc)) from exc
            if cause is not None:
                plans = rank_plans(plans, cause, snap, sess.system_id)
            return {
                "node_id": node_id,
                "strategy": strategy,
                "scope": sess.selected_cause.signature if cause is not None else "violations",
                "plans": plans_doc(plans),
            }

    @app.post("/api/v1/sessions/{session_id}/steps", status_code=201)
    def apply_step(session_id: str, body: StepBody):
        sess, lock = get_session(session_id)
        with lock:
            try:
                action = action_from_doc(body.action)
                node = sess.apply_step(action)
            except SessionStateError as exc:
                raise _session_error(exc) from exc
            except ArchmendError as exc:
                raise ApiError(422, "invalid_action", str(exc)) from exc
            return {"node": node_doc(node), "cursor": sess.cursor}

    @app.post("/api/v1/sessions/{session_id}/cursor")
    def move_cursor(session_id: str, body: CursorBody):
        sess, lock = get_session(session_id)
        with lock:
            try:
                sess.goto(body.node_id)
            except SessionStateError as exc:
                raise _session_error(exc) from exc
            return {"cursor": sess.cursor}

    @app.post("/api/v1/sessions/{session_id}/finish")
    def finish_session(session_id: str, body: FinishBody):
        sess, lock = get_session(session_id)
        with lock:
            try:
                events = sess.finish(body.outcome)
            except SessionStateError as exc:
                raise _session_error(exc) from exc
            with store_lock:
                store.record(events)
            return {"outcome": sess.outcome, "events": [event_doc(e) for e in events]}

    # -- knowledge base -------------------------------------------------------

    @app.get("/api/v1/kb/stats")
    def kb_stats():
        return kb_snapshot().stats_doc()

    return app
