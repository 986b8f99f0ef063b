"""Append-only session log plus the shared content-addressed blob store.

One JSONL file per session under ``sessions/``; blobs live next to it
under ``blobs/``. Appends flush before returning so a crashed service
loses at most the event it was writing.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path

from ..artifacts import BlobStore
from ..errors import UnknownSession
from .events import SessionEvent


class SessionStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.sessions_dir = self.root / "sessions"
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self.blobs = BlobStore(self.root)
        self._lock = threading.Lock()

    def _log_path(self, session_id: str) -> Path:
        return self.sessions_dir / f"{session_id}.jsonl"

    def exists(self, session_id: str) -> bool:
        return self._log_path(session_id).is_file()

    def append_event(self, session_id: str, event: SessionEvent) -> None:
        line = json.dumps(event.to_dict(), sort_keys=True, ensure_ascii=False)
        with self._lock:
            with open(self._log_path(session_id), "a", encoding="utf-8") as handle:
                handle.write(line + "\n")
                handle.flush()
                os.fsync(handle.fileno())

    def read_events(self, session_id: str) -> list[SessionEvent]:
        path = self._log_path(session_id)
        if not path.is_file():
            raise UnknownSession(session_id)
        events = []
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    events.append(SessionEvent.from_dict(json.loads(line)))
        return events

    def list_sessions(self) -> list[str]:
        return sorted(p.stem for p in self.sessions_dir.glob("*.jsonl"))
