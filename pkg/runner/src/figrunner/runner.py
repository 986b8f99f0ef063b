"""One payload, one guarded child process.

Isolation layers, per execution:

- audit-hook guard inside the child: denies socket use, subprocess
  spawning, and writes outside ``out_dir``;
- resource limits set before exec: address space at ``mem_mb``, process
  count, CPU seconds as a backup to the wall clock, and output file size;
- wall-clock enforcement by killing the child's process group at
  ``timeout_s``;
- environment pinned so matplotlib/tmp caches stay inside ``out_dir``.

Note: RLIMIT_NPROC is not enforced by the kernel for processes holding
CAP_SYS_RESOURCE (root); the in-process guard still denies fork/spawn.
Produced PNGs are re-encoded canonically (metadata stripped) so repeated
runs of one payload yield byte-identical files. Diagnostics are captured
verbatim except workspace paths, which are rewritten to placeholders.
"""

from __future__ import annotations

import io
import os
import resource
import shutil
import signal
import subprocess
import sys
from pathlib import Path

from .protocol import TOOLCHAINS, ExecRequest, ExecResponse, Status

FORBIDDEN_MARK = "FIGRUNNER_FORBIDDEN_OP"
PAYLOAD_NAME = "payload.py"
GUARD_NAME = ".guard.py"
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".gif", ".bmp", ".svg", ".pdf")
KILL_GRACE_S = 1.0
MAX_OUTPUT_MB = 64
NPROC_LIMIT = 256

_GUARD_SOURCE = f"""\
import os, runpy, sys

_OUT = os.path.realpath(os.getcwd())
_WRITE_FLAGS = os.O_WRONLY | os.O_RDWR | os.O_APPEND | os.O_CREAT | os.O_TRUNC
_ALLOWED = ("/dev/null", "/dev/urandom", "/dev/stdout", "/dev/stderr")


def _inside_out_dir(path):
    try:
        real = os.path.realpath(os.fspath(path))
    except TypeError:
        return True
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
    configured = os.environ.get("FIGRUNNER_FONT_CACHE")
    if configured:
        return Path(configured)
    base = Path(os.environ.get("XDG_CACHE_HOME", str(Path.home() / ".cache")))
    return base / "figrunner" / "mpl"


def _ensure_host_font_cache() -> Path | None:
    """Pre-build matplotlib's font cache host-side: a cold font manager
    shells out to fc-list, which the guard denies inside payloads."""
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


def _limits_preexec(mem_mb: int, timeout_s: float):
    def apply_limits() -> None:
        mem_bytes = mem_mb * 1024 * 1024
        resource.setrlimit(resource.RLIMIT_AS, (mem_bytes, mem_bytes))
        cpu = int(timeout_s) + 5
        resource.setrlimit(resource.RLIMIT_CPU, (cpu, cpu))
        fsize = MAX_OUTPUT_MB * 1024 * 1024
        resource.setrlimit(resource.RLIMIT_FSIZE, (fsize, fsize))
        try:
            resource.setrlimit(resource.RLIMIT_NPROC, (NPROC_LIMIT, NPROC_LIMIT))
        except (ValueError, OSError):
            pass  # lowering below current usage can fail; guard still denies fork
        os.setsid()

    return apply_limits


def _canonical_png(path: Path) -> None:
    from PIL import Image

    with Image.open(path) as img:
        pixels = img.copy()
    buffer = io.BytesIO()
    pixels.save(buffer, format="PNG")
    path.write_bytes(buffer.getvalue())


def _scrub(text: str, out_dir: Path) -> str:
    text = text.replace(str(out_dir.resolve()), "<out_dir>")
    return text.replace(str(out_dir), "<out_dir>")


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
    for candidate in candidates:
        if candidate.name == "diagram.png":
            return candidate
    return candidates[0]


def run_request(request: ExecRequest) -> ExecResponse:
    if request.toolchain_id not in TOOLCHAINS:
        return ExecResponse(
            status=Status.EXEC_ERROR,
            log=f"unregistered toolchain: {request.toolchain_id}",
        )

    out_dir = Path(request.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    before = {p.name for p in out_dir.iterdir()}
    (out_dir / PAYLOAD_NAME).write_text(request.source, encoding="utf-8")
    (out_dir / GUARD_NAME).write_text(_GUARD_SOURCE, encoding="utf-8")
    before |= {PAYLOAD_NAME, GUARD_NAME}

    scratch = out_dir / ".scratch"
    for sub in ("mpl", "tmp"):
        (scratch / sub).mkdir(parents=True, exist_ok=True)
    font_cache = _ensure_host_font_cache()
    if font_cache is not None:
        for entry in font_cache.iterdir():
            if entry.is_file():
                shutil.copy2(entry, scratch / "mpl" / entry.name)

    env = {
        "PATH": os.environ.get("PATH", "/usr/bin:/bin"),
        "PYTHONDONTWRITEBYTECODE": "1",
        "MPLBACKEND": "Agg",
        "MPLCONFIGDIR": str(scratch / "mpl"),
        "TMPDIR": str(scratch / "tmp"),
        "HOME": str(scratch),
        "LANG": "C.UTF-8",
    }

    proc = subprocess.Popen(
        [sys.executable, GUARD_NAME],
        cwd=out_dir,
        env=env,
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
        text=True,
        preexec_fn=_limits_preexec(request.mem_mb, request.timeout_s),
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
            status=Status.TIMEOUT,
            log=f"payload exceeded wall-clock limit of {request.timeout_s}s",
        )

    log = _scrub(output or "", out_dir)
    if proc.returncode != 0:
        status = Status.FORBIDDEN_OP if FORBIDDEN_MARK in log else Status.EXEC_ERROR
        if proc.returncode < 0 and not log.strip():
            log += f"payload killed by signal {-proc.returncode}"
        return ExecResponse(status=status, log=log)

    image = _pick_image(out_dir, before)
    if image is None:
        return ExecResponse(
            status=Status.EXEC_ERROR,
            log=log + "\npayload exited cleanly but produced no image file",
        )
    if image.suffix.lower() == ".png":
        _canonical_png(image)
    return ExecResponse(status=Status.OK, log=log, image_filename=image.name)
