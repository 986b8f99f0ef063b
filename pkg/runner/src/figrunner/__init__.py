"""Standalone sandboxed runner for generated diagram code.

Speaks the shared line-delimited JSON protocol: request
{toolchain_id, source, timeout_s, mem_mb, out_dir}, response
{status, image_filename?, log}. One isolated child process per payload.
"""

from .protocol import ExecRequest, ExecResponse, Status
from .runner import run_request

__all__ = ["ExecRequest", "ExecResponse", "Status", "run_request"]

__version__ = "0.1.0"
