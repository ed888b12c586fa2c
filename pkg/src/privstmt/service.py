"""HTTP backend for annotation sessions.

Endpoints (JSON bodies, UTF-8):
  POST /api/session {"annotator_id"}                  -> {"session_id", ...}
  GET  /api/session/{id}/current                      -> sample view
  POST /api/session/{id}/select {"statement_index", "rationale"?}
  POST /api/session/{id}/none {"confirmed"}
  GET  /api/session/{id}/progress

Session flow: an annotator picks up to three statements per sample, in
relevance order, with a rationale required for the first pick. The first
pick highlights red, the second blue; picking the same statement twice is
rejected. "No relevant statement" needs an explicit confirmation and either
persists a none_relevant annotation (zero picks) or finalizes the picks made
so far. The third pick auto-finalizes. Sessions expire after a fixed limit
(default 90 minutes); an in-progress sample at expiry is abandoned, not
persisted.

Annotation writes are line-atomic appends through a single writer lock, so
concurrent sessions never interleave mid-record.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from random import Random
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .corpus import Annotation, MethodSample, Selection, annotation_to_obj, load_annotations
from .javastmt import MethodCode, extract

DEFAULT_SESSION_MINUTES = 90
DEFAULT_DOUBLE_FRACTION = 0.10

_HIGHLIGHT_ROLES = {1: "red", 2: "blue"}


class ServiceError(Exception):
    status = 400
    code = "ServiceError"

    def __init__(self, detail: str = ""):
        self.detail = detail or self.code
        super().__init__(self.detail)


class SessionUnknown(ServiceError):
    status = 404
    code = "SessionUnknown"


class SessionExpired(ServiceError):
    status = 410
    code = "SessionExpired"


class QueueEmpty(ServiceError):
    status = 404
    code = "QueueEmpty"


class DuplicateSelection(ServiceError):
    status = 409
    code = "DuplicateSelection"


class AlreadyComplete(ServiceError):
    status = 409
    code = "AlreadyComplete"


class IndexOutOfRange(ServiceError):
    status = 400
    code = "IndexOutOfRange"


class RationaleRequired(ServiceError):
    status = 422
    code = "RationaleRequired"


class AnnotationWriter:
    """Append-only annotations.jsonl writer; one line per annotation."""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def append(self, annotation: Annotation) -> None:
        line = json.dumps(annotation_to_obj(annotation), ensure_ascii=False) + "\n"
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fp:
                fp.write(line)
                fp.flush()


@dataclass
class SessionState:
    session_id: str
    annotator_id: str
    queue: list[str]
    position: int = 0
    selections: list[Selection] = field(default_factory=list)
    started_at: float = 0.0
    deadline: float = 0.0
    completed: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def current_sample_id(self) -> Optional[str]:
        if self.position < len(self.queue):
            return self.queue[self.position]
        return None


class AnnotationService:
    def __init__(
        self,
        samples: list[MethodSample],
        annotations_path,
        seed: int = 0,
        session_minutes: float = DEFAULT_SESSION_MINUTES,
        double_fraction: float = DEFAULT_DOUBLE_FRACTION,
        time_fn=time.time,
    ):
        self.samples = {s.id: s for s in samples}
        self.sample_order = [s.id for s in samples]
        self.methods: dict[str, MethodCode] = {
            s.id: extract(s.id, s.code) for s in samples
        }
        self.writer = AnnotationWriter(annotations_path)
        self.seed = seed
        self.session_limit = session_minutes * 60.0
        self.double_fraction = double_fraction
        self.time_fn = time_fn
        self.sessions: dict[str, SessionState] = {}
        self._registry_lock = threading.Lock()
        # sample id -> set of annotator ids that finished it
        self.done: dict[str, set[str]] = {}
        if Path(annotations_path).exists():
            for a in load_annotations(annotations_path):
                self.done.setdefault(a.sample_id, set()).add(a.annotator_id)

    # -------------------- queue assignment --------------------

    def _annotator_rng(self, annotator_id: str) -> Random:
        return Random(self.seed * 1000003 + zlib.crc32(annotator_id.encode("utf-8")))

    def build_queue(self, annotator_id: str) -> list[str]:
        """Randomized per-annotator queue: all samples nobody annotated yet,
        plus a quota of once-annotated samples for double annotation."""
        with self._registry_lock:
            fresh = [
                sid
                for sid in self.sample_order
                if not self.done.get(sid)
            ]
            once = [
                sid
                for sid in self.sample_order
                if len(self.done.get(sid, ())) == 1 and annotator_id not in self.done[sid]
            ]
        rng = self._annotator_rng(annotator_id)
        n_double = min(len(once), round(self.double_fraction * len(fresh)))
        doubles = rng.sample(once, n_double) if n_double else []
        queue = fresh + doubles
        rng.shuffle(queue)
        return queue

    # -------------------- session operations --------------------

    def create_session(self, annotator_id: str) -> SessionState:
        now = self.time_fn()
        state = SessionState(
            session_id=uuid.uuid4().hex,
            annotator_id=annotator_id,
            queue=self.build_queue(annotator_id),
            started_at=now,
            deadline=now + self.session_limit,
        )
        self.sessions[state.session_id] = state
        return state

    def _get(self, session_id: str) -> SessionState:
        state = self.sessions.get(session_id)
        if state is None:
            raise SessionUnknown(f"unknown session {session_id!r}")
        return state

    def _check_alive(self, state: SessionState) -> None:
        if self.time_fn() > state.deadline:
            raise SessionExpired("session time limit reached")

    def view(self, state: SessionState) -> dict:
        sid = state.current_sample_id()
        if sid is None:
            raise QueueEmpty("no samples left in this session")
        sample = self.samples[sid]
        method = self.methods[sid]
        return {
            "session_id": state.session_id,
            "sample_id": sid,
            "code": sample.code,
            "label": sample.label.value,
            "label_description": sample.label.description,
            "statements": [
                {
                    "index": st.index,
                    "text": st.text,
                    "line_start": st.line_start,
                    "line_end": st.line_end,
                }
                for st in method.statements
            ],
            "selections": [
                {
                    "order": sel.order,
                    "statement_index": sel.statement_index,
                    "role": _HIGHLIGHT_ROLES.get(sel.order, "blue"),
                }
                for sel in state.selections
            ],
            "completed": state.completed,
            "remaining": len(state.queue) - state.position,
        }

    def current(self, session_id: str) -> dict:
        state = self._get(session_id)
        with state.lock:
            self._check_alive(state)
            return self.view(state)

    def _finalize(self, state: SessionState, none_relevant: bool) -> None:
        sid = state.current_sample_id()
        annotation = Annotation(
            sample_id=sid,
            annotator_id=state.annotator_id,
            selections=tuple(state.selections),
            none_relevant=none_relevant,
        )
        annotation.validate(statement_count=len(self.methods[sid].statements))
        self.writer.append(annotation)
        with self._registry_lock:
            self.done.setdefault(sid, set()).add(state.annotator_id)
        state.selections = []
        state.position += 1
        state.completed += 1

    def select(self, session_id: str, statement_index: int, rationale: Optional[str]) -> dict:
        state = self._get(session_id)
        with state.lock:
            self._check_alive(state)
            sid = state.current_sample_id()
            if sid is None:
                raise QueueEmpty("no samples left in this session")
            method = self.methods[sid]
            if len(state.selections) >= 3:
                raise AlreadyComplete("three statements already selected")
            if not 0 <= statement_index < len(method.statements):
                raise IndexOutOfRange(
                    f"statement_index {statement_index} out of range 0..{len(method.statements) - 1}"
                )
            if any(s.statement_index == statement_index for s in state.selections):
                raise DuplicateSelection(f"statement {statement_index} already selected")
            order = len(state.selections) + 1
            if order == 1 and not (rationale and rationale.strip()):
                raise RationaleRequired("a rationale is required for the first selection")
            state.selections.append(
                Selection(order=order, statement_index=statement_index, rationale=rationale)
            )
            finalized = False
            if order == 3:
                self._finalize(state, none_relevant=False)
                finalized = True
            out = {"finalized": finalized}
            try:
                out["view"] = self.view(state)
            except QueueEmpty:
                out["view"] = None
                out["done"] = True
            return out

    def none_relevant(self, session_id: str, confirmed: bool) -> dict:
        state = self._get(session_id)
        with state.lock:
            self._check_alive(state)
            sid = state.current_sample_id()
            if sid is None:
                raise QueueEmpty("no samples left in this session")
            if not confirmed:
                # client shows the confirmation dialog; nothing changes
                return {"finalized": False, "confirmation_required": True, "view": self.view(state)}
            self._finalize(state, none_relevant=len(state.selections) == 0)
            out = {"finalized": True}
            try:
                out["view"] = self.view(state)
            except QueueEmpty:
                out["view"] = None
                out["done"] = True
            return out

    def progress(self, session_id: str) -> dict:
        state = self._get(session_id)
        with state.lock:
            now = self.time_fn()
            return {
                "session_id": state.session_id,
                "annotator_id": state.annotator_id,
                "completed": state.completed,
                "remaining": len(state.queue) - state.position,
                "seconds_left": max(0.0, state.deadline - now),
                "expired": now > state.deadline,
            }


def create_app(
    samples: list[MethodSample],
    annotations_path,
    ui_dir: Optional[str] = None,
    seed: int = 0,
    session_minutes: float = DEFAULT_SESSION_MINUTES,
    double_fraction: float = DEFAULT_DOUBLE_FRACTION,
    time_fn=time.time,
) -> FastAPI:
    service = AnnotationService(
        samples,
        annotations_path,
        seed=seed,
        session_minutes=session_minutes,
        double_fraction=double_fraction,
        time_fn=time_fn,
    )
    app = FastAPI(title="privstmt annotation service")
    app.state.service = service

    @app.exception_handler(ServiceError)
    async def _service_error(_request: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status, content={"error": exc.code, "detail": exc.detail})

    @app.post("/api/session")
    def new_session(body: dict):
        annotator_id = body.get("annotator_id")
        if not annotator_id or not isinstance(annotator_id, str):
            return JSONResponse(
                status_code=400,
                content={"error": "BadRequest", "detail": "annotator_id is required"},
            )
        state = service.create_session(annotator_id)
        return {
            "session_id": state.session_id,
            "annotator_id": state.annotator_id,
            "queued": len(state.queue),
            "seconds_left": service.session_limit,
        }

    @app.get("/api/session/{session_id}/current")
    def current(session_id: str):
        return service.current(session_id)

    @app.post("/api/session/{session_id}/select")
    def select(session_id: str, body: dict):
        idx = body.get("statement_index")
        if not isinstance(idx, int):
            return JSONResponse(
                status_code=400,
                content={"error": "BadRequest", "detail": "statement_index must be an integer"},
            )
        return service.select(session_id, idx, body.get("rationale"))

    @app.post("/api/session/{session_id}/none")
    def none_relevant(session_id: str, body: dict):
        return service.none_relevant(session_id, bool(body.get("confirmed", False)))

    @app.get("/api/session/{session_id}/progress")
    def progress(session_id: str):
        return service.progress(session_id)

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app
