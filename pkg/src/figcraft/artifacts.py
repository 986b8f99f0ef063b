"""Content-addressed artifact store.

Identical bytes are stored once; refs are digest-based relative paths so
serialized traces and reports stay stable across machines and runs.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class BlobRef:
    digest: str
    relpath: str


class BlobStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "blobs").mkdir(parents=True, exist_ok=True)

    def put_bytes(self, data: bytes, suffix: str = "") -> BlobRef:
        digest = hashlib.sha256(data).hexdigest()
        relpath = f"blobs/{digest[:2]}/{digest}{suffix}"
        target = self.root / relpath
        if not target.exists():
            target.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=target.parent, suffix=".tmp")
            try:
                with os.fdopen(fd, "wb") as handle:
                    handle.write(data)
                os.replace(tmp, target)
            finally:
                if os.path.exists(tmp):
                    os.unlink(tmp)
        return BlobRef(digest=digest, relpath=relpath)

    def put_text(self, text: str, suffix: str = ".txt") -> BlobRef:
        return self.put_bytes(text.encode("utf-8"), suffix)

    def put_file(self, path: str | Path) -> BlobRef:
        path = Path(path)
        return self.put_bytes(path.read_bytes(), path.suffix.lower())

    def path_for(self, ref: BlobRef | str) -> Path:
        relpath = ref.relpath if isinstance(ref, BlobRef) else ref
        return self.root / relpath

    def read_bytes(self, ref: BlobRef | str) -> bytes:
        return self.path_for(ref).read_bytes()
