"""Protocol transports: stdio loop and a unix-socket server.

The socket server handles connections concurrently up to a configured
cap; every payload still gets its own isolated child process.
"""

from __future__ import annotations

import json
import logging
import socket
import socketserver
import sys
import threading
from pathlib import Path

from .protocol import ExecRequest, ExecResponse, Status
from .runner import run_request

logger = logging.getLogger(__name__)


def _handle_line(line: str) -> ExecResponse:
    try:
        request = ExecRequest.from_line(line)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        return ExecResponse(status=Status.EXEC_ERROR, log=f"malformed request: {exc}")
    return run_request(request)


def serve_stdio() -> None:
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        response = _handle_line(line)
        sys.stdout.write(response.to_line() + "\n")
        sys.stdout.flush()


class _Handler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        limiter: threading.Semaphore = self.server.limiter  # type: ignore[attr-defined]
        for raw in self.rfile:
            line = raw.decode("utf-8").strip()
            if not line:
                continue
            with limiter:
                response = _handle_line(line)
            self.wfile.write((response.to_line() + "\n").encode("utf-8"))
            self.wfile.flush()


class _Server(socketserver.ThreadingUnixStreamServer):
    daemon_threads = True
    allow_reuse_address = True


def serve_socket(socket_path: str | Path, cap: int = 4) -> _Server:
    """Bind and serve forever on a unix socket (blocking)."""
    socket_path = Path(socket_path)
    if socket_path.exists():
        socket_path.unlink()
    server = _Server(str(socket_path), _Handler)
    server.limiter = threading.Semaphore(max(cap, 1))  # type: ignore[attr-defined]
    logger.info("serving on %s with cap %d", socket_path, cap)
    try:
        server.serve_forever()
    finally:
        server.server_close()
        if socket_path.exists():
            socket_path.unlink()
    return server


def request_over_socket(socket_path: str | Path, request: ExecRequest) -> ExecResponse:
    """Convenience client for tests and scripts."""
    with socket.socket(socket.AF_UNIX, socket.SOCK_STREAM) as sock:
        sock.settimeout(request.timeout_s + 30.0)
        sock.connect(str(socket_path))
        sock.sendall((request.to_line() + "\n").encode("utf-8"))
        sock.shutdown(socket.SHUT_WR)
        chunks = []
        while True:
            chunk = sock.recv(65536)
            if not chunk:
                break
            chunks.append(chunk)
    line = b"".join(chunks).decode("utf-8").strip().splitlines()[-1]
    return ExecResponse.from_line(line)
