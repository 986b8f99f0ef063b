"""Interactive sessions over the pipeline: event-sourced state + HTTP API."""

from .events import EventKind, Session, SessionEvent, SessionState, fold_session
from .service import SessionService
from .store import SessionStore

__all__ = [
    "EventKind",
    "Session",
    "SessionEvent",
    "SessionService",
    "SessionState",
    "SessionStore",
    "fold_session",
]
