"""Execution of generated diagram code behind a line-delimited JSON protocol."""

from .client import RunnerClient, SocketRunnerClient, SubprocessRunnerClient, default_runner_cmd
from .protocol import ExecRequest, ExecResponse, ExecStatus
from .toolchains import TOOLCHAINS, toolchain_for

__all__ = [
    "ExecRequest",
    "ExecResponse",
    "ExecStatus",
    "RunnerClient",
    "SocketRunnerClient",
    "SubprocessRunnerClient",
    "TOOLCHAINS",
    "default_runner_cmd",
    "toolchain_for",
]
