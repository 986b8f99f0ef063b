"""HTTP face of the session service.

JSON bodies throughout; errors use {code, message, event_ordinal} so a
client can retry optimistic-concurrency conflicts with the fresh
ordinal.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import FileResponse, JSONResponse
from pydantic import BaseModel, Field

from ..errors import (
    FigcraftError,
    IllegalTransition,
    OrdinalConflict,
    UnknownSession,
)
from .events import Session
from .service import SessionService


class CreateSessionBody(BaseModel):
    bundle_refs: list[str]
    intent_text: str = ""


class IntentBody(BaseModel):
    intent_text: str
    expected_ordinal: int | None = None


class QAPairBody(BaseModel):
    question: str
    answer: str


class PlanBody(BaseModel):
    qa_pairs: list[QAPairBody] | None = None
    expected_ordinal: int | None = None


class RenderBody(BaseModel):
    source: str | None = None
    expected_ordinal: int | None = None


class CritiqueBody(BaseModel):
    aspect: str = "all"


class FeedbackBody(BaseModel):
    ratings: dict[str, int] = Field(default_factory=dict)
    text: str = ""
    regenerate: bool = False
    expected_ordinal: int | None = None


def session_view(session: Session) -> dict:
    return {
        "session_id": session.session_id,
        "state": session.state.value,
        "bundle_refs": list(session.bundle_refs),
        "intent_text": session.intent_text,
        "intent_label": session.intent_label,
        "questions": list(session.questions),
        "plan": session.plan,
        "versions": list(session.versions),
        "critiques": list(session.critiques),
        "ratings": list(session.ratings),
        "feedback_notes": list(session.feedback_notes),
        "errors": list(session.errors),
        "last_ordinal": session.last_ordinal,
    }


def create_app(service: SessionService) -> FastAPI:
    app = FastAPI(title="figcraft session service")

    def error_body(code: str, message: str, session_id: str | None = None) -> dict:
        ordinal = 0
        if session_id is not None:
            try:
                ordinal = service.get(session_id).last_ordinal
            except FigcraftError:
                ordinal = 0
        return {"code": code, "message": message, "event_ordinal": ordinal}

    @app.exception_handler(FigcraftError)
    async def figcraft_error_handler(request: Request, exc: FigcraftError):
        status = 500
        if isinstance(exc, UnknownSession):
            status = 404
        elif isinstance(exc, (IllegalTransition, OrdinalConflict)):
            status = 409
        session_id = request.path_params.get("session_id")
        return JSONResponse(
            status_code=status,
            content=error_body(type(exc).__name__, str(exc), session_id),
        )

    @app.exception_handler(ValueError)
    async def value_error_handler(request: Request, exc: ValueError):
        session_id = request.path_params.get("session_id")
        return JSONResponse(
            status_code=400, content=error_body("ValueError", str(exc), session_id)
        )

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        session = service.create_session(body.bundle_refs, body.intent_text)
        return session_view(session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return session_view(service.get(session_id))

    @app.post("/sessions/{session_id}/intent")
    def submit_intent(session_id: str, body: IntentBody):
        return session_view(
            service.submit_intent(session_id, body.intent_text, body.expected_ordinal)
        )

    @app.get("/sessions/{session_id}/questions")
    def get_questions(session_id: str):
        return {"questions": list(service.get(session_id).questions)}

    @app.put("/sessions/{session_id}/plan")
    def put_plan(session_id: str, body: PlanBody):
        pairs = (
            [pair.model_dump() for pair in body.qa_pairs]
            if body.qa_pairs is not None
            else None
        )
        return session_view(service.put_plan(session_id, pairs, body.expected_ordinal))

    @app.post("/sessions/{session_id}/render")
    def render(session_id: str, body: RenderBody):
        return session_view(
            service.render(session_id, body.source, body.expected_ordinal)
        )

    @app.post("/sessions/{session_id}/critique")
    def critique(session_id: str, body: CritiqueBody):
        return session_view(service.critique(session_id, body.aspect))

    @app.post("/sessions/{session_id}/feedback")
    def feedback(session_id: str, body: FeedbackBody):
        return session_view(
            service.feedback(
                session_id,
                body.ratings,
                body.text,
                action="regenerate" if body.regenerate else "save",
                expected_ordinal=body.expected_ordinal,
            )
        )

    @app.get("/sessions/{session_id}/versions/{version_number}/image")
    def version_image(session_id: str, version_number: int):
        path = service.version_image_path(session_id, version_number)
        return FileResponse(path, media_type="image/png")

    @app.get("/sessions/{session_id}/versions/{version_number}/code")
    def version_code(session_id: str, version_number: int):
        return {
            "version": version_number,
            "source": service.version_source(session_id, version_number),
        }

    @app.get("/sessions/{session_id}/export")
    def export(session_id: str):
        data = service.export_session(session_id)
        return Response(
            content=data,
            media_type="application/zip",
            headers={
                "Content-Disposition": f'attachment; filename="{session_id}.zip"'
            },
        )

    return app


def serve(service: SessionService, port: int = 8040, static_dir: str | None = None) -> None:
    import uvicorn

    app = create_app(service)
    if static_dir and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="studio")
    uvicorn.run(app, host="127.0.0.1", port=port)
