"""HTTP service: models, sessions, decisions and live event streams.

In-memory stores only; sessions are evicted least-recently-used past a
configurable cap. The event stream is newline-delimited JSON, one event
per line (blank lines are keep-alives and carry no information).
"""

from __future__ import annotations

import json
import queue
import threading
from collections import OrderedDict
from typing import Optional
from uuid import uuid4

from fastapi import Body, FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response, StreamingResponse

from .consequences import model_consequences
from .errors import (
    UNKNOWN_VARIABLE,
    DecisionRejected,
    InfeasibleModelError,
    ParseError,
    ResourceLimitError,
    TranslateError,
    UnknownDecisionError,
)
from .model import FeatureModel, parse_model
from .session import Restriction, Session, create_session
from .solver import DEFAULT_NODE_BUDGET
from .translate import compile_model

MAX_MODEL_BYTES = 1 << 20
DEFAULT_SESSION_CAP = 100
STREAM_KEEPALIVE_S = 1.0


def _error(status: int, code: str, message: str, details=None) -> JSONResponse:
    body = {"code": code, "message": message}
    if details is not None:
        body["details"] = details
    return JSONResponse(body, status_code=status)


class _Stores:
    def __init__(self, session_cap: int, node_budget: int):
        self.lock = threading.Lock()
        self.models: dict[str, tuple[FeatureModel, dict]] = {}
        self.sessions: OrderedDict[str, Session] = OrderedDict()
        self.session_cap = session_cap
        self.node_budget = node_budget

    def add_model(self, m: FeatureModel, conseq_json: dict) -> str:
        mid = uuid4().hex
        with self.lock:
            self.models[mid] = (m, conseq_json)
        return mid

    def add_session(self, s: Session) -> None:
        with self.lock:
            self.sessions[s.id] = s
            while len(self.sessions) > self.session_cap:
                _, evicted = self.sessions.popitem(last=False)
                evicted.close()

    def get_session(self, sid: str) -> Optional[Session]:
        with self.lock:
            s = self.sessions.get(sid)
            if s is not None:
                self.sessions.move_to_end(sid)
            return s


def create_app(session_cap: int = DEFAULT_SESSION_CAP,
               node_budget: int = DEFAULT_NODE_BUDGET) -> FastAPI:
    app = FastAPI(title="fdconfig", docs_url=None, redoc_url=None)
    # the web UI is served as static files from elsewhere; no auth anyway
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    stores = _Stores(session_cap, node_budget)
    app.state.stores = stores

    @app.post("/models", status_code=201)
    async def post_model(request: Request):
        raw = await request.body()
        if len(raw) > MAX_MODEL_BYTES:
            return _error(413, "model_too_large", "model text exceeds 1 MiB")
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError:
            return _error(422, "parse_error", "model text is not valid UTF-8")
        try:
            m = parse_model(text)
        except ParseError as exc:
            return _error(422, "parse_error", exc.message,
                          {"line": exc.line, "col": exc.col})
        try:
            cm = compile_model(m, node_budget=stores.node_budget)
            conseq = model_consequences(cm)
        except TranslateError as exc:
            return _error(422, "invalid_model", str(exc))
        except InfeasibleModelError:
            return _error(422, "infeasible_model", "the model admits no product")
        except ResourceLimitError as exc:
            return _error(422, "resource_limit", str(exc))
        mid = stores.add_model(m, conseq.to_json_dict())
        return {"modelId": mid, "modelConsequences": stores.models[mid][1]}

    @app.post("/sessions", status_code=201)
    async def post_session(payload: dict = Body(...)):
        mid = payload.get("modelId")
        with stores.lock:
            entry = stores.models.get(mid)
        if entry is None:
            return _error(404, "unknown_model", f"no model {mid!r}")
        try:
            s = create_session(entry[0], node_budget=stores.node_budget)
        except (InfeasibleModelError, TranslateError, ResourceLimitError) as exc:
            return _error(422, "invalid_model", str(exc))
        stores.add_session(s)
        return {"sessionId": s.id, "state": s.get_state().to_json_dict()}

    @app.get("/sessions/{sid}")
    async def get_session(sid: str):
        s = stores.get_session(sid)
        if s is None:
            return _error(404, "unknown_session", f"no session {sid!r}")
        return s.get_state().to_json_dict()

    @app.post("/sessions/{sid}/decisions", status_code=201)
    async def post_decision(sid: str, payload: dict = Body(...)):
        s = stores.get_session(sid)
        if s is None:
            return _error(404, "unknown_session", f"no session {sid!r}")
        variable = payload.get("variable")
        try:
            restriction = Restriction.from_json_dict(payload.get("restriction") or {})
        except ValueError as exc:
            return _error(422, "invalid_restriction", str(exc))
        try:
            decision = s.post_decision(variable, restriction)
        except DecisionRejected as exc:
            status = 404 if exc.reason == UNKNOWN_VARIABLE else 409
            return _error(status, exc.reason, exc.detail)
        return {"decisionId": decision.id, "epoch": s.epoch}

    @app.delete("/sessions/{sid}/decisions/{did}", status_code=204)
    async def delete_decision(sid: str, did: int):
        s = stores.get_session(sid)
        if s is None:
            return _error(404, "unknown_session", f"no session {sid!r}")
        try:
            s.retract_decision(did)
        except UnknownDecisionError as exc:
            return _error(404, "unknown_decision", str(exc))
        return Response(status_code=204)

    @app.get("/sessions/{sid}/events")
    async def get_events(sid: str):
        s = stores.get_session(sid)
        if s is None:
            return _error(404, "unknown_session", f"no session {sid!r}")
        q = s.subscribe()

        def stream():
            try:
                while True:
                    try:
                        event = q.get(timeout=STREAM_KEEPALIVE_S)
                    except queue.Empty:
                        yield "\n"  # keep-alive; clients skip blank lines
                        continue
                    yield json.dumps(event, separators=(",", ":")) + "\n"
            finally:
                s.unsubscribe(q)

        return StreamingResponse(stream(), media_type="application/x-ndjson")

    return app


def run(host: str = "127.0.0.1", port: int = 7070,
        session_cap: int = DEFAULT_SESSION_CAP,
        node_budget: int = DEFAULT_NODE_BUDGET) -> None:
    import uvicorn

    uvicorn.run(create_app(session_cap, node_budget),
                host=host, port=port, log_level="warning")
