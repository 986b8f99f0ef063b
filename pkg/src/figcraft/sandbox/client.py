"""Clients that speak the runner wire protocol.

The default client spawns one stub-runner process per execution, which
keeps limit enforcement clean and exercises the exact protocol a
standalone runner implements. A socket client can point at such a
runner serving on a local unix socket instead.
"""

from __future__ import annotations

import json
import socket
import subprocess
import sys
from dataclasses import dataclass, field
from typing import Protocol

from ..errors import SandboxUnavailable
from .protocol import ExecRequest, ExecResponse

TRANSPORT_MARGIN_S = 30.0


def default_runner_cmd() -> list[str]:
    return [sys.executable, "-m", "figcraft.sandbox.stub_runner", "--stdio"]


class RunnerClient(Protocol):
    def run(self, request: ExecRequest) -> ExecResponse: ...


@dataclass
class SubprocessRunnerClient:
    """One runner process per execution, talking line-JSON over stdio."""

    cmd: list[str] = field(default_factory=default_runner_cmd)

    def run(self, request: ExecRequest) -> ExecResponse:
        try:
            proc = subprocess.Popen(
                self.cmd,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
            )
        except OSError as exc:
            raise SandboxUnavailable(f"cannot spawn runner {self.cmd!r}: {exc}") from exc
        try:
            out, err = proc.communicate(
                request.to_line() + "\n",
                timeout=request.timeout_s + TRANSPORT_MARGIN_S,
            )
        except subprocess.TimeoutExpired as exc:
            proc.kill()
            proc.communicate()
            raise SandboxUnavailable("runner process hung past the transport margin") from exc
        line = out.strip().splitlines()[-1] if out.strip() else ""
        if not line:
            raise SandboxUnavailable(
                f"runner produced no response (exit {proc.returncode}): {err[-500:]}"
            )
        try:
            return ExecResponse.from_line(line)
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            raise SandboxUnavailable(f"runner spoke garbage: {line[:200]!r}") from exc


@dataclass
class SocketRunnerClient:
    """Connects to a runner serving the protocol on a unix socket."""

    socket_path: str

    def run(self, request: ExecRequest) -> ExecResponse:
        try:
            with socket.socket(socket.AF_UNIX, socket.SOCK_STREAM) as sock:
                sock.settimeout(request.timeout_s + TRANSPORT_MARGIN_S)
                sock.connect(self.socket_path)
                sock.sendall((request.to_line() + "\n").encode("utf-8"))
                sock.shutdown(socket.SHUT_WR)
                chunks = []
                while True:
                    chunk = sock.recv(65536)
                    if not chunk:
                        break
                    chunks.append(chunk)
        except OSError as exc:
            raise SandboxUnavailable(f"cannot reach runner at {self.socket_path}: {exc}") from exc
        line = b"".join(chunks).decode("utf-8").strip()
        if not line:
            raise SandboxUnavailable("runner closed the connection without responding")
        try:
            return ExecResponse.from_line(line.splitlines()[-1])
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            raise SandboxUnavailable(f"runner spoke garbage: {line[:200]!r}") from exc
