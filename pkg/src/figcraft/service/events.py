"""Session model as a pure fold over an append-only event log.

Events are never mutated or deleted; the current Session state is
derived entirely from the log, so a killed-and-restarted service
reconstructs every session with no divergence. Timestamps are recorded
for audit but the fold never depends on them.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable

from ..errors import IllegalTransition, MalformedManifest


class SessionState(str, Enum):
    CREATED = "created"
    QUESTIONED = "questioned"
    PLANNED = "planned"
    RENDERED = "rendered"
    REFINING = "refining"
    DONE = "done"


class EventKind(str, Enum):
    CREATED = "created"
    INTENT_SUBMITTED = "intent_submitted"
    QUESTIONS_ISSUED = "questions_issued"
    PLAN_EDITED = "plan_edited"
    RENDERED = "rendered"
    CRITIQUE = "critique"
    HUMAN_RATING = "human_rating"
    HUMAN_FEEDBACK = "human_feedback"
    REGENERATED = "regenerated"
    SAVED = "saved"
    ERROR = "error"


@dataclass(frozen=True)
class SessionEvent:
    ordinal: int  # dense from 1
    kind: EventKind
    payload: dict
    timestamp: str

    def to_dict(self) -> dict:
        return {
            "ordinal": self.ordinal,
            "kind": self.kind.value,
            "payload": self.payload,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "SessionEvent":
        return cls(
            ordinal=int(raw["ordinal"]),
            kind=EventKind(raw["kind"]),
            payload=raw.get("payload", {}),
            timestamp=raw.get("timestamp", ""),
        )


@dataclass(frozen=True)
class Session:
    """Materialized session view; equality ignores nothing, so
    rebuild-and-compare tests are field-for-field."""

    session_id: str
    bundle_refs: tuple[str, ...] = ()
    intent_text: str = ""
    intent_label: str | None = None
    state: SessionState = SessionState.CREATED
    questions: tuple[str, ...] = ()
    plan: dict | None = None
    versions: tuple[dict, ...] = ()
    critiques: tuple[dict, ...] = ()
    ratings: tuple[dict, ...] = ()
    feedback_notes: tuple[str, ...] = ()
    errors: tuple[str, ...] = ()
    last_ordinal: int = 0

    @property
    def latest_version(self) -> dict | None:
        return self.versions[-1] if self.versions else None


# Which event kinds are legal in which states; CREATED only as the log head.
_LEGAL: dict[SessionState, frozenset[EventKind]] = {
    SessionState.CREATED: frozenset(
        {EventKind.INTENT_SUBMITTED, EventKind.QUESTIONS_ISSUED, EventKind.ERROR}
    ),
    SessionState.QUESTIONED: frozenset({EventKind.PLAN_EDITED, EventKind.ERROR}),
    SessionState.PLANNED: frozenset(
        {EventKind.PLAN_EDITED, EventKind.RENDERED, EventKind.ERROR}
    ),
    SessionState.RENDERED: frozenset(
        {
            EventKind.RENDERED,
            EventKind.CRITIQUE,
            EventKind.HUMAN_RATING,
            EventKind.HUMAN_FEEDBACK,
            EventKind.REGENERATED,
            EventKind.SAVED,
            EventKind.ERROR,
        }
    ),
    SessionState.REFINING: frozenset(
        {
            EventKind.RENDERED,
            EventKind.CRITIQUE,
            EventKind.HUMAN_RATING,
            EventKind.HUMAN_FEEDBACK,
            EventKind.REGENERATED,
            EventKind.SAVED,
            EventKind.ERROR,
        }
    ),
    SessionState.DONE: frozenset({EventKind.ERROR}),
}


def check_legal(state: SessionState, kind: EventKind) -> None:
    if kind is EventKind.CREATED:
        raise IllegalTransition(state.value, kind.value)
    if kind not in _LEGAL[state]:
        raise IllegalTransition(state.value, kind.value)


def _validate_ratings(ratings: dict) -> None:
    for name, value in ratings.items():
        if not isinstance(value, int) or not 1 <= value <= 5:
            raise MalformedManifest(
                f"human rating {name!r} must be an integer in 1..5, got {value!r}"
            )


def apply_event(session: Session, event: SessionEvent) -> Session:
    """Pure transition function; raises IllegalTransition on bad sequences."""
    if event.ordinal != session.last_ordinal + 1:
        raise MalformedManifest(
            f"event ordinals must be dense: expected {session.last_ordinal + 1}, "
            f"got {event.ordinal}"
        )
    kind = event.kind
    payload = event.payload
    if kind is not EventKind.CREATED:
        check_legal(session.state, kind)

    if kind is EventKind.CREATED:
        if session.last_ordinal != 0:
            raise IllegalTransition(session.state.value, kind.value)
        session = replace(
            session,
            bundle_refs=tuple(payload.get("bundle_refs", ())),
            intent_text=payload.get("intent_text", ""),
            state=SessionState.CREATED,
        )
    elif kind is EventKind.INTENT_SUBMITTED:
        session = replace(
            session,
            intent_text=payload["intent_text"],
            intent_label=payload.get("label"),
        )
    elif kind is EventKind.QUESTIONS_ISSUED:
        session = replace(
            session,
            questions=tuple(payload["questions"]),
            state=SessionState.QUESTIONED,
        )
    elif kind is EventKind.PLAN_EDITED:
        session = replace(session, plan=payload["plan"], state=SessionState.PLANNED)
    elif kind in (EventKind.RENDERED, EventKind.REGENERATED):
        session = replace(
            session,
            versions=session.versions + (payload["version"],),
            state=SessionState.RENDERED,
        )
    elif kind is EventKind.CRITIQUE:
        session = replace(
            session,
            critiques=session.critiques + (payload,),
            state=SessionState.REFINING,
        )
    elif kind is EventKind.HUMAN_RATING:
        _validate_ratings(payload.get("ratings", {}))
        session = replace(session, ratings=session.ratings + (payload,))
    elif kind is EventKind.HUMAN_FEEDBACK:
        session = replace(
            session, feedback_notes=session.feedback_notes + (payload.get("text", ""),)
        )
    elif kind is EventKind.SAVED:
        session = replace(session, state=SessionState.DONE)
    elif kind is EventKind.ERROR:
        session = replace(session, errors=session.errors + (payload.get("message", ""),))

    return replace(session, last_ordinal=event.ordinal)


def fold_session(session_id: str, events: Iterable[SessionEvent]) -> Session:
    """Rebuild a session purely from its event log."""
    session = Session(session_id=session_id)
    for event in events:
        session = apply_event(session, event)
    return session
