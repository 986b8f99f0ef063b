"""Wire schema shared by every runner implementation.

One request and one response per line, both JSON objects:

    request  = {"toolchain_id", "source", "timeout_s", "mem_mb", "out_dir"}
    response = {"status", "image_filename"?, "log"}

transported over stdio or a local socket. Any payload failure is a
response status, never a transport error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum


class ExecStatus(str, Enum):
    OK = "ok"
    EXEC_ERROR = "exec_error"
    TIMEOUT = "timeout"
    FORBIDDEN_OP = "forbidden_op"


@dataclass(frozen=True)
class ExecRequest:
    toolchain_id: str
    source: str
    timeout_s: float
    mem_mb: int
    out_dir: str

    def __post_init__(self):
        if not 1 <= self.timeout_s <= 300:
            raise ValueError(f"timeout_s must be within [1, 300], got {self.timeout_s}")

    def to_line(self) -> str:
        return json.dumps(
            {
                "toolchain_id": self.toolchain_id,
                "source": self.source,
                "timeout_s": self.timeout_s,
                "mem_mb": self.mem_mb,
                "out_dir": self.out_dir,
            },
            ensure_ascii=True,
        )

    @classmethod
    def from_line(cls, line: str) -> "ExecRequest":
        raw = json.loads(line)
        return cls(
            toolchain_id=raw["toolchain_id"],
            source=raw["source"],
            timeout_s=float(raw["timeout_s"]),
            mem_mb=int(raw["mem_mb"]),
            out_dir=raw["out_dir"],
        )


@dataclass(frozen=True)
class ExecResponse:
    status: ExecStatus
    log: str
    image_filename: str | None = None

    def to_line(self) -> str:
        payload: dict = {"status": self.status.value, "log": self.log}
        if self.image_filename is not None:
            payload["image_filename"] = self.image_filename
        return json.dumps(payload, ensure_ascii=True)

    @classmethod
    def from_line(cls, line: str) -> "ExecResponse":
        raw = json.loads(line)
        return cls(
            status=ExecStatus(raw["status"]),
            log=raw.get("log", ""),
            image_filename=raw.get("image_filename"),
        )
