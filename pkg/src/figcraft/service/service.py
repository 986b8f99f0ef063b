"""Session business logic bridging the event store and the pipeline.

The service is stateless per request: all state lives in the store, and
the in-memory view is a cache rebuilt from logs on startup. Requests for
one session are serialized by a per-session lock plus an optimistic
check on the last event ordinal.
"""

from __future__ import annotations

import io
import json
import threading
import uuid
import zipfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from ..corpus import DocumentBundle, load_document_bundle
from ..critics import CRITIC_ASPECTS, Aspect, CriticSuite
from ..dialects import DIALECTS, select_dialect
from ..errors import (
    FigcraftError,
    IllegalTransition,
    OrdinalConflict,
    UnknownSession,
)
from ..gateway import Gateway
from ..pipeline import PipelineConfig, complete_plan
from ..planner import (
    ClarificationQuestion,
    DiagramPlan,
    IntentRecord,
    QAPair,
    classify_intent,
    generate_questions,
    plan_from_dict,
    plan_to_dict,
)
from ..refiner import apply_feedback
from ..renderer import (
    CodeArtifact,
    CodeOrigin,
    DiagramVersion,
    RenderResult,
    execute,
    render_with_repair,
)
from ..sandbox import ExecStatus, RunnerClient
from .events import EventKind, Session, SessionEvent, SessionState, apply_event, fold_session
from .store import SessionStore

# UI "correctness" ratings map onto the faithfulness aspect on the wire.
RATING_ASPECTS = {"completeness", "correctness", "layout"}


@dataclass
class SessionService:
    store: SessionStore
    gateway: Gateway
    runner: RunnerClient | None = None
    cfg: PipelineConfig = field(default_factory=PipelineConfig)

    def __post_init__(self):
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._bundles: dict[str, list[DocumentBundle]] = {}
        self._guard = threading.Lock()
        for session_id in self.store.list_sessions():
            self._sessions[session_id] = fold_session(
                session_id, self.store.read_events(session_id)
            )

    # -- plumbing ---------------------------------------------------------------

    def _lock_for(self, session_id: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def get(self, session_id: str) -> Session:
        session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSession(session_id)
        return session

    def _append(self, session: Session, kind: EventKind, payload: dict) -> Session:
        event = SessionEvent(
            ordinal=session.last_ordinal + 1,
            kind=kind,
            payload=payload,
            timestamp=datetime.now(timezone.utc).isoformat(),
        )
        updated = apply_event(session, event)  # validates before persisting
        self.store.append_event(session.session_id, event)
        self._sessions[session.session_id] = updated
        return updated

    def _check_ordinal(self, session: Session, expected: int | None) -> None:
        if expected is not None and expected != session.last_ordinal:
            raise OrdinalConflict(expected, session.last_ordinal)

    def _bundles_for(self, session: Session) -> list[DocumentBundle]:
        key = session.session_id
        if key not in self._bundles:
            self._bundles[key] = [load_document_bundle(ref) for ref in session.bundle_refs]
        return self._bundles[key]

    def _intent_record(self, session: Session) -> IntentRecord:
        if session.intent_label is None:
            raise IllegalTransition(session.state.value, "intent required first")
        from ..corpus import DiagramType

        return IntentRecord(
            intent_text=session.intent_text, label=DiagramType(session.intent_label)
        )

    def _version_payload(self, version: DiagramVersion) -> dict:
        code_blob = self.store.blobs.put_text(version.code.source, suffix=".py")
        return {
            "version": version.code.version,
            "code_id": version.code.code_id,
            "parent": version.code.parent,
            "origin": version.code.origin.value,
            "dialect_id": version.code.dialect.dialect_id,
            "status": version.render.status.value,
            "code_blob": code_blob.relpath,
            "image_blob": version.render.image_blob.relpath
            if version.render.image_blob
            else None,
        }

    def _version_from_payload(self, payload: dict) -> DiagramVersion:
        source = self.store.blobs.read_bytes(payload["code_blob"]).decode("utf-8")
        code = CodeArtifact(
            code_id=payload["code_id"],
            dialect=DIALECTS[payload["dialect_id"]],
            source=source,
            version=payload["version"],
            parent=payload.get("parent"),
            origin=CodeOrigin(payload["origin"]),
        )
        image_blob = payload.get("image_blob")
        from ..artifacts import BlobRef

        blob = None
        image_ref = None
        if image_blob:
            digest = Path(image_blob).stem
            blob = BlobRef(digest=digest, relpath=image_blob)
            image_ref = self.store.blobs.path_for(blob)
        render = RenderResult(
            status=ExecStatus(payload["status"]),
            log="",
            image_blob=blob,
            image_ref=image_ref,
        )
        return DiagramVersion(
            code=code, render=render, created_at=datetime.now(timezone.utc)
        )

    # -- operations ----------------------------------------------------------------

    def create_session(self, bundle_refs: list[str], intent_text: str = "") -> Session:
        for ref in bundle_refs:
            load_document_bundle(ref)  # fail fast on unreadable bundles
        session_id = uuid.uuid4().hex[:12]
        session = Session(session_id=session_id)
        with self._lock_for(session_id):
            session = self._append(
                session,
                EventKind.CREATED,
                {"bundle_refs": list(bundle_refs), "intent_text": intent_text},
            )
        return session

    def submit_intent(
        self, session_id: str, intent_text: str, expected_ordinal: int | None = None
    ) -> Session:
        with self._lock_for(session_id):
            session = self.get(session_id)
            self._check_ordinal(session, expected_ordinal)
            if session.state is not SessionState.CREATED:
                raise IllegalTransition(session.state.value, "intent_submitted")
            record = classify_intent(intent_text, self.gateway)
            session = self._append(
                session,
                EventKind.INTENT_SUBMITTED,
                {"intent_text": intent_text, "label": record.label.value},
            )
            questions = generate_questions(record, self.gateway)
            return self._append(
                session,
                EventKind.QUESTIONS_ISSUED,
                {"questions": [q.text for q in questions]},
            )

    def put_plan(
        self,
        session_id: str,
        qa_pairs: list[dict] | None = None,
        expected_ordinal: int | None = None,
    ) -> Session:
        """Accept a user-edited plan, or synthesize one when none is given."""
        with self._lock_for(session_id):
            session = self.get(session_id)
            self._check_ordinal(session, expected_ordinal)
            intent = self._intent_record(session)
            if qa_pairs is not None:
                pairs = tuple(
                    QAPair(
                        question_id=i + 1,
                        question=p["question"],
                        answer=p["answer"],
                    )
                    for i, p in enumerate(qa_pairs)
                )
                plan = DiagramPlan(intent=intent, qa_pairs=pairs)
            else:
                questions = tuple(
                    ClarificationQuestion(question_id=i + 1, text=text)
                    for i, text in enumerate(session.questions)
                )
                plan = complete_plan(
                    self._bundles_for(session), intent, questions, self.gateway, self.cfg
                )
            return self._append(
                session, EventKind.PLAN_EDITED, {"plan": plan_to_dict(plan)}
            )

    def render(
        self,
        session_id: str,
        source: str | None = None,
        expected_ordinal: int | None = None,
    ) -> Session:
        """Render from the plan, or re-execute user-edited source."""
        with self._lock_for(session_id):
            session = self.get(session_id)
            self._check_ordinal(session, expected_ordinal)
            try:
                if source is not None:
                    latest = session.latest_version
                    if latest is None:
                        raise IllegalTransition(session.state.value, "code edit")
                    prior = self._version_from_payload(latest)
                    code = prior.code.revise(source, CodeOrigin.HUMAN_EDIT)
                    result = execute(code, self.cfg.limits, self.store.blobs, self.runner)
                    version = DiagramVersion(
                        code=code, render=result, created_at=datetime.now(timezone.utc)
                    )
                    if not result.ok:
                        session = self._append(
                            session,
                            EventKind.ERROR,
                            {"message": f"edited code failed: {result.status.value}"},
                        )
                        return session
                else:
                    if session.plan is None:
                        raise IllegalTransition(session.state.value, "rendered")
                    plan = plan_from_dict(session.plan)
                    version = render_with_repair(
                        plan.intent,
                        plan,
                        select_dialect(plan.intent.label),
                        self.gateway,
                        self.store.blobs,
                        limits=self.cfg.limits,
                        max_repairs=self.cfg.max_repairs,
                        runner=self.runner,
                    )
                return self._append(
                    session,
                    EventKind.RENDERED,
                    {"version": self._version_payload(version)},
                )
            except FigcraftError as exc:
                session = self._append(
                    session, EventKind.ERROR, {"message": str(exc)}
                )
                raise

    def critique(self, session_id: str, aspect: str = "all") -> Session:
        with self._lock_for(session_id):
            session = self.get(session_id)
            latest = session.latest_version
            if latest is None or latest.get("status") != "ok":
                raise IllegalTransition(session.state.value, "critique")
            version = self._version_from_payload(latest)
            intent = self._intent_record(session)
            suite = CriticSuite(
                gateway=self.gateway,
                intent=intent,
                bundles=tuple(self._bundles_for(session)),
            )
            aspects = (
                CRITIC_ASPECTS if aspect == "all" else (Aspect(aspect.capitalize()),)
            )
            for a in aspects:
                report = suite.evaluate(a, version)
                session = self._append(
                    session,
                    EventKind.CRITIQUE,
                    {
                        "aspect": report.aspect.value,
                        "score": report.score,
                        "feedback": report.feedback,
                        "sub_scores": [[q, s] for q, s in report.sub_scores],
                        "satisfied": report.satisfied,
                        "version": latest["version"],
                    },
                )
            return session

    def feedback(
        self,
        session_id: str,
        ratings: dict[str, int],
        text: str = "",
        action: str = "save",
        expected_ordinal: int | None = None,
    ) -> Session:
        """Record human ratings/remarks, then regenerate or save."""
        if action not in ("regenerate", "save"):
            raise ValueError(f"action must be regenerate or save, got {action!r}")
        unknown = set(ratings) - RATING_ASPECTS
        if unknown:
            raise ValueError(f"unknown rating aspects: {sorted(unknown)}")
        with self._lock_for(session_id):
            session = self.get(session_id)
            self._check_ordinal(session, expected_ordinal)
            if ratings:
                session = self._append(
                    session, EventKind.HUMAN_RATING, {"ratings": dict(ratings)}
                )
            if text:
                session = self._append(session, EventKind.HUMAN_FEEDBACK, {"text": text})
            if action == "save":
                return self._append(session, EventKind.SAVED, {})

            latest = session.latest_version
            if latest is None:
                raise IllegalTransition(session.state.value, "regenerated")
            prior = self._version_from_payload(latest)
            score = float(min(ratings.values())) if ratings else 3.0
            critique_text = text or "Address the human reviewer's concerns."
            try:
                code = apply_feedback(
                    prior.code,
                    critique_text,
                    "human",
                    score,
                    self.gateway,
                    image=prior.render.image_ref,
                )
                result = execute(code, self.cfg.limits, self.store.blobs, self.runner)
                if not result.ok:
                    return self._append(
                        session,
                        EventKind.ERROR,
                        {"message": f"regenerated code failed: {result.status.value}"},
                    )
                version = DiagramVersion(
                    code=code, render=result, created_at=datetime.now(timezone.utc)
                )
                return self._append(
                    session,
                    EventKind.REGENERATED,
                    {"version": self._version_payload(version)},
                )
            except FigcraftError as exc:
                session = self._append(session, EventKind.ERROR, {"message": str(exc)})
                raise

    def version_image_path(self, session_id: str, version_number: int) -> Path:
        session = self.get(session_id)
        for payload in session.versions:
            if payload["version"] == version_number and payload.get("image_blob"):
                return self.store.blobs.path_for(payload["image_blob"])
        raise UnknownSession(f"{session_id} has no rendered version {version_number}")

    def version_source(self, session_id: str, version_number: int) -> str:
        session = self.get(session_id)
        for payload in session.versions:
            if payload["version"] == version_number:
                return self.store.blobs.read_bytes(payload["code_blob"]).decode("utf-8")
        raise UnknownSession(f"{session_id} has no version {version_number}")

    def export_session(self, session_id: str) -> bytes:
        """Zip archive: event log, session snapshot, and referenced blobs."""
        session = self.get(session_id)
        events = self.store.read_events(session_id)
        buffer = io.BytesIO()
        with zipfile.ZipFile(buffer, "w", zipfile.ZIP_DEFLATED) as archive:
            archive.writestr(
                f"{session_id}/events.jsonl",
                "".join(json.dumps(e.to_dict(), sort_keys=True) + "\n" for e in events),
            )
            snapshot = {
                "session_id": session.session_id,
                "state": session.state.value,
                "intent_text": session.intent_text,
                "intent_label": session.intent_label,
                "questions": list(session.questions),
                "plan": session.plan,
                "versions": list(session.versions),
                "last_ordinal": session.last_ordinal,
            }
            archive.writestr(
                f"{session_id}/session.json",
                json.dumps(snapshot, indent=2, sort_keys=True) + "\n",
            )
            seen = set()
            for payload in session.versions:
                for key in ("code_blob", "image_blob"):
                    rel = payload.get(key)
                    if rel and rel not in seen:
                        seen.add(rel)
                        archive.writestr(
                            f"{session_id}/{rel}",
                            self.store.blobs.read_bytes(rel),
                        )
        return buffer.getvalue()

    def rebuild(self, session_id: str) -> Session:
        """Fold the persisted log from scratch (crash-safety check)."""
        return fold_session(session_id, self.store.read_events(session_id))
