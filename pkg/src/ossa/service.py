"""Loopback session service exposing the episode loop over HTTP.

One session runs one episode: planning happens on a background thread
(status ``pending``), every uncertain plan pauses the session at
``awaiting_answer`` until the client posts keep/discard, and the finished
episode is available at ``/result``.  Operations are serialized per
session; distinct sessions run concurrently.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ossa.backends import PlanBackend, SceneInput, plan_with_backend
from ossa.dataset_io import SchemaError, parse_scene_doc
from ossa.episode import (
    CommandLog,
    EpisodeDriver,
    EpisodeResult,
    UnrecognizedAnswer,
)
from ossa.oracle import TaskSpec
from ossa.plans import UNKNOWN, ObjectManipulationPlan
from ossa.prompts import PromptMode
from ossa.scene import Dataset, Scene, validate_scene

ANSWER_RETRY_LIMIT = 3


class SessionStatus(str, Enum):
    PENDING = "pending"
    AWAITING_ANSWER = "awaiting_answer"
    COMPLETE = "complete"
    ERROR = "error"


class CreateSessionBody(BaseModel):
    scene_id: str | None = None
    scene: dict | None = None
    task_id: str
    backend_id: str = "oracle"
    mode: str = "zero_shot"


class AnswerBody(BaseModel):
    object_name: str
    answer: str


def _error(status_code: int, error_code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status_code,
        content={"error_code": error_code, "message": message},
    )


def _field_doc(value) -> object:
    if value is UNKNOWN:
        return None
    if isinstance(value, Enum):
        return value.value
    return value


def plan_doc(plan: ObjectManipulationPlan) -> dict:
    return {
        "name": plan.name,
        "state": _field_doc(plan.state),
        "destination": _field_doc(plan.destination),
        "grasping_type": _field_doc(plan.grasping_type),
        "placing_type": _field_doc(plan.placing_type),
    }


def episode_doc(result: EpisodeResult) -> dict:
    return {
        "task_id": result.task_id,
        "plans_initial": [plan_doc(p) for p in result.plans_initial],
        "plans_final": [plan_doc(p) for p in result.plans_final],
        "clarifications": [
            {
                "object_name": record.request.object_name,
                "question": record.request.question,
                "answer": record.answer,
            }
            for record in result.clarifications
        ],
        "commands": [
            {
                "name": c.name,
                "grasping_type": c.grasping_type.value,
                "destination": c.destination.value,
                "placing_type": c.placing_type.value,
            }
            for c in result.commands
        ],
        "quarantined": [
            {"name": q.name, "reasons": list(q.reasons)} for q in result.quarantined
        ],
        "warnings": list(result.warnings),
        "timings": dict(result.timings),
    }


@dataclass
class _Session:
    session_id: str
    task: TaskSpec
    backend_id: str
    status: SessionStatus = SessionStatus.PENDING
    driver: EpisodeDriver | None = None
    result: EpisodeResult | None = None
    error: str | None = None
    bad_answers: int = 0
    plan_started: float = 0.0
    plan_s: float = 0.0
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionService:
    """In-memory session registry driving episode walks.

    With ``results_dir`` set, every completed episode is written there as
    ``session-<id>.json`` the moment it finishes, so shutdown never loses a
    finished result.
    """

    def __init__(
        self,
        backends: Mapping[str, PlanBackend],
        dataset: Dataset | None = None,
        executor: CommandLog | None = None,
        results_dir: str | None = None,
    ):
        self._backends = dict(backends)
        self._scenes = {
            scene.scene_id: scene for scene in (dataset.scenes if dataset else ())
        }
        self._executor = executor or CommandLog()
        self._results_dir = Path(results_dir) if results_dir else None
        self._sessions: dict[str, _Session] = {}
        self._registry_lock = threading.Lock()

    @property
    def executor(self) -> CommandLog:
        return self._executor

    def backend(self, backend_id: str) -> PlanBackend | None:
        return self._backends.get(backend_id)

    def scene(self, scene_id: str) -> Scene | None:
        return self._scenes.get(scene_id)

    def create(self, session: _Session) -> None:
        with self._registry_lock:
            self._sessions[session.session_id] = session

    def get(self, session_id: str) -> _Session | None:
        with self._registry_lock:
            return self._sessions.get(session_id)

    def plan_in_background(self, session: _Session, backend: PlanBackend, scene: Scene, mode: PromptMode) -> None:
        def work() -> None:
            session.plan_started = time.perf_counter()
            try:
                result = plan_with_backend(
                    backend, SceneInput.from_scene(scene), session.task, mode
                )
            except Exception as exc:
                with session.lock:
                    session.status = SessionStatus.ERROR
                    session.error = f"backend failure: {exc}"
                return
            with session.lock:
                session.plan_s = time.perf_counter() - session.plan_started
                session.driver = EpisodeDriver(session.task, result.report)
                self._settle(session)

        threading.Thread(target=work, daemon=True).start()

    def _settle(self, session: _Session) -> None:
        # Caller holds session.lock.
        assert session.driver is not None
        if session.driver.finished:
            session.result = session.driver.finalize(
                executor=self._executor, timings={"plan_s": session.plan_s}
            )
            session.status = SessionStatus.COMPLETE
            self._persist(session)
        else:
            session.status = SessionStatus.AWAITING_ANSWER

    def _persist(self, session: _Session) -> None:
        if self._results_dir is None or session.result is None:
            return
        self._results_dir.mkdir(parents=True, exist_ok=True)
        path = self._results_dir / f"session-{session.session_id}.json"
        path.write_text(
            json.dumps(episode_doc(session.result), indent=2, ensure_ascii=True) + "\n",
            encoding="utf-8",
        )


def create_app(
    backends: Mapping[str, PlanBackend],
    dataset: Dataset | None = None,
    executor: CommandLog | None = None,
    results_dir: str | None = None,
) -> FastAPI:
    service = SessionService(backends, dataset, executor, results_dir)
    app = FastAPI(title="ossa session service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.service = service

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.post("/api/sessions")
    def create_session(body: CreateSessionBody):
        backend = service.backend(body.backend_id)
        if backend is None:
            return _error(400, "unknown_backend", f"no backend '{body.backend_id}'")
        try:
            task = TaskSpec.of(body.task_id)
        except ValueError as exc:
            return _error(400, "unknown_task", str(exc))
        try:
            mode = PromptMode(body.mode)
        except ValueError:
            return _error(400, "unknown_mode", f"no mode '{body.mode}'")
        if (body.scene_id is None) == (body.scene is None):
            return _error(400, "bad_scene", "provide exactly one of scene_id or scene")
        if body.scene_id is not None:
            scene = service.scene(body.scene_id)
            if scene is None:
                return _error(404, "unknown_scene", f"no scene '{body.scene_id}'")
        else:
            try:
                scene = parse_scene_doc(body.scene)
            except SchemaError as exc:
                return _error(400, "invalid_scene", str(exc))
            violations = validate_scene(scene)
            if violations:
                return _error(400, "invalid_scene", "; ".join(violations))
        session = _Session(
            session_id=uuid.uuid4().hex,
            task=task,
            backend_id=body.backend_id,
        )
        service.create(session)
        service.plan_in_background(session, backend, scene, mode)
        return {"session_id": session.session_id}

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        session = service.get(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session '{session_id}'")
        with session.lock:
            doc: dict = {"session_id": session_id, "status": session.status.value}
            if session.error:
                doc["error"] = session.error
            if session.driver is not None:
                doc["plans"] = [plan_doc(p) for p in session.driver.current_plans()]
            else:
                doc["plans"] = []
            if session.status is SessionStatus.AWAITING_ANSWER:
                request = session.driver.pending()
                doc["pending_clarification"] = {
                    "object_name": request.object_name,
                    "question": request.question,
                    "allowed_answers": list(request.allowed_answers),
                }
            return doc

    @app.post("/api/sessions/{session_id}/answer")
    def answer(session_id: str, body: AnswerBody):
        session = service.get(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session '{session_id}'")
        with session.lock:
            if session.status is not SessionStatus.AWAITING_ANSWER:
                return _error(
                    409,
                    "not_awaiting",
                    f"session status is '{session.status.value}'",
                )
            request = session.driver.pending()
            if body.object_name != request.object_name:
                return _error(
                    409,
                    "stale_object",
                    f"pending clarification is for '{request.object_name}'",
                )
            try:
                session.driver.submit_answer(body.object_name, body.answer)
            except UnrecognizedAnswer as exc:
                session.bad_answers += 1
                if session.bad_answers >= ANSWER_RETRY_LIMIT:
                    session.status = SessionStatus.ERROR
                    session.error = "answer retries exceeded"
                    return _error(400, "policy_exhausted", session.error)
                return _error(400, "unrecognized_answer", str(exc))
            session.bad_answers = 0
            service._settle(session)
            return {"session_id": session_id, "status": session.status.value}

    @app.get("/api/sessions/{session_id}/result")
    def result(session_id: str):
        session = service.get(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session '{session_id}'")
        with session.lock:
            if session.status is SessionStatus.ERROR:
                return _error(409, "session_error", session.error or "episode failed")
            if session.status is not SessionStatus.COMPLETE or session.result is None:
                return _error(409, "not_complete", "episode still in progress")
            return episode_doc(session.result)

    return app


def default_app(
    dataset: Dataset | None = None,
    executor: CommandLog | None = None,
    results_dir: str | None = None,
) -> FastAPI:
    from ossa.backends import ModularSimBackend, OracleBackend

    backends: dict[str, PlanBackend] = {
        "oracle": OracleBackend(),
        "modular-sim": ModularSimBackend(),
    }
    return create_app(backends, dataset, executor, results_dir)
