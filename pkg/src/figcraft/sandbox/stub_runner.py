"""Conformance stub runner: executes payloads behind the wire protocol.

This is the runner that ships with the library so protocol-level tests
and local pipeline runs need no separate build. Per request it spawns
one child interpreter with:

- a guard prelude (audit hook) that turns network access, subprocess
  spawning, and writes outside ``out_dir`` into a forbidden-op failure;
- wall-clock enforcement via process-group kill at ``timeout_s``;
- environment pinned so matplotlib/tmp caches land inside ``out_dir``.

It does not enforce memory limits; the standalone runner does. Produced
raster images are re-encoded canonically (metadata stripped) so repeated
runs of the same payload yield byte-identical files. Interpreter
diagnostics are captured verbatim except that workspace paths are
rewritten to stable placeholders.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import signal
import subprocess
import sys
from pathlib import Path

from .protocol import ExecRequest, ExecResponse, ExecStatus
from .toolchains import toolchain_for

FORBIDDEN_MARK = "FIGCRAFT_FORBIDDEN_OP"
PAYLOAD_NAME = "payload.py"
GUARD_NAME = ".guard.py"
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".gif", ".bmp", ".svg", ".pdf")
KILL_GRACE_S = 1.0

_GUARD_SOURCE = f"""\
import os, runpy, sys

_OUT = os.path.realpath(os.getcwd())
_WRITE_FLAGS = os.O_WRONLY | os.O_RDWR | os.O_APPEND | os.O_CREAT | os.O_TRUNC
_ALLOWED = ("/dev/null", "/dev/urandom", "/dev/stdout", "/dev/stderr")


def _inside_out_dir(path):
    try:
        real = os.path.realpath(os.fspath(path))
    except TypeError:
        return True  # fd-relative opens; nothing to check
    return real.startswith(_OUT + os.sep) or real == _OUT or real in _ALLOWED


def _deny(event):
    raise RuntimeError("{FORBIDDEN_MARK}: " + event)


def _hook(event, args):
    if event.startswith("socket."):
        _deny(event)
    if event in ("subprocess.Popen", "os.system", "os.posix_spawn", "os.spawn",
                 "os.fork", "os.forkpty"):
        _deny(event)
    if event == "open":
        mode = args[1]
        flags = args[2]
        writing = False
        if isinstance(mode, str):
            writing = any(ch in mode for ch in "wax+")
        elif flags is not None:
            writing = bool(flags & _WRITE_FLAGS)
        if writing and not _inside_out_dir(args[0]):
            _deny("open-for-write outside out_dir")


sys.addaudithook(_hook)
runpy.run_path({PAYLOAD_NAME!r}, run_name="__main__")
"""


def _font_cache_dir() -> Path:
    configured = os.environ.get("FIGCRAFT_FONT_CACHE")
    if configured:
        return Path(configured)
    base = Path(os.environ.get("XDG_CACHE_HOME", str(Path.home() / ".cache")))
    return base / "figcraft" / "mpl"


def _ensure_host_font_cache() -> Path | None:
    """Build matplotlib's font cache once on the host side.

    Payload processes may not spawn subprocesses, but a cold matplotlib
    font manager shells out to fc-list; seeding each payload's scratch
    with a pre-built cache removes the need.
    """
    cache = _font_cache_dir()
    if any(cache.glob("fontlist*.json")):
        return cache
    cache.mkdir(parents=True, exist_ok=True)
    env = dict(os.environ, MPLCONFIGDIR=str(cache), MPLBACKEND="Agg")
    try:
        subprocess.run(
            [sys.executable, "-c", "import matplotlib.font_manager"],
            env=env,
            check=True,
            capture_output=True,
            timeout=120,
        )
    except (subprocess.SubprocessError, OSError):
        return None
    return cache if any(cache.glob("fontlist*.json")) else None


def _seed_font_cache(target: Path) -> None:
    cache = _ensure_host_font_cache()
    if cache is None:
        return
    import shutil

    for entry in cache.iterdir():
        if entry.is_file():
            shutil.copy2(entry, target / entry.name)


def _canonical_png(path: Path) -> None:
    """Re-encode in place, dropping ancillary metadata chunks."""
    from PIL import Image

    with Image.open(path) as img:
        pixels = img.copy()
    buffer = io.BytesIO()
    pixels.save(buffer, format="PNG")
    path.write_bytes(buffer.getvalue())


def _scrub(text: str, out_dir: Path) -> str:
    text = text.replace(str(out_dir.resolve()), "<out_dir>")
    text = text.replace(str(out_dir), "<out_dir>")
    return text


def _pick_image(out_dir: Path, before: set[str]) -> Path | None:
    candidates = [
        p
        for p in sorted(out_dir.iterdir())
        if p.is_file()
        and p.suffix.lower() in IMAGE_SUFFIXES
        and p.name not in before
        and p.stat().st_size > 0
    ]
    if not candidates:
        return None
    for p in candidates:
        if p.name == "diagram.png":
            return p
    return candidates[0]


def run_request(request: ExecRequest) -> ExecResponse:
    """Execute one payload in a fresh, guarded child process."""
    if toolchain_for(request.toolchain_id) is None:
        return ExecResponse(
            status=ExecStatus.EXEC_ERROR,
            log=f"unregistered toolchain: {request.toolchain_id}",
        )

    out_dir = Path(request.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    before = {p.name for p in out_dir.iterdir()}
    (out_dir / PAYLOAD_NAME).write_text(request.source, encoding="utf-8")
    (out_dir / GUARD_NAME).write_text(_GUARD_SOURCE, encoding="utf-8")
    before |= {PAYLOAD_NAME, GUARD_NAME}

    scratch = out_dir / ".scratch"
    scratch.mkdir(exist_ok=True)
    env = {
        "PATH": os.environ.get("PATH", "/usr/bin:/bin"),
        "PYTHONDONTWRITEBYTECODE": "1",
        "MPLBACKEND": "Agg",
        "MPLCONFIGDIR": str(scratch / "mpl"),
        "TMPDIR": str(scratch / "tmp"),
        "HOME": str(scratch),
        "LANG": "C.UTF-8",
    }
    (scratch / "mpl").mkdir(exist_ok=True)
    (scratch / "tmp").mkdir(exist_ok=True)
    _seed_font_cache(scratch / "mpl")

    proc = subprocess.Popen(
        [sys.executable, GUARD_NAME],
        cwd=out_dir,
        env=env,
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
        text=True,
        start_new_session=True,
    )
    try:
        output, _ = proc.communicate(timeout=request.timeout_s)
    except subprocess.TimeoutExpired:
        try:
            os.killpg(proc.pid, signal.SIGKILL)
        except ProcessLookupError:
            pass
        try:
            proc.communicate(timeout=KILL_GRACE_S)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.communicate()
        return ExecResponse(
            status=ExecStatus.TIMEOUT,
            log=f"payload exceeded wall-clock limit of {request.timeout_s}s",
        )

    log = _scrub(output or "", out_dir)
    if proc.returncode != 0:
        status = (
            ExecStatus.FORBIDDEN_OP if FORBIDDEN_MARK in log else ExecStatus.EXEC_ERROR
        )
        return ExecResponse(status=status, log=log)

    image = _pick_image(out_dir, before)
    if image is None:
        return ExecResponse(
            status=ExecStatus.EXEC_ERROR,
            log=log + "\npayload exited cleanly but produced no image file",
        )
    if image.suffix.lower() == ".png":
        _canonical_png(image)
    return ExecResponse(status=ExecStatus.OK, log=log, image_filename=image.name)


def serve_stdio() -> None:
    """Serve requests from stdin, one JSON line each, until EOF."""
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = ExecRequest.from_line(line)
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            response = ExecResponse(
                status=ExecStatus.EXEC_ERROR, log=f"malformed request: {exc}"
            )
        else:
            response = run_request(request)
        sys.stdout.write(response.to_line() + "\n")
        sys.stdout.flush()


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="figcraft conformance stub runner")
    parser.add_argument("--stdio", action="store_true", help="serve requests over stdio")
    args = parser.parse_args(argv)
    if not args.stdio:
        parser.error("only --stdio transport is supported by the stub")
    serve_stdio()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
