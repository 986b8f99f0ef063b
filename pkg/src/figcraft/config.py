"""Environment-driven configuration.

Env vars:
    GATEWAY_MODE                 live | record | replay   (default replay)
    FIGCRAFT_CACHE_DIR           gateway response cache / fixture directory
    FIGCRAFT_STORE_DIR           artifact + session store root
    FIGCRAFT_PROVIDER_BASE_URL   OpenAI-compatible endpoint for live/record
    FIGCRAFT_PROVIDER_API_KEY    provider credential
    FIGCRAFT_PROVIDER_MODEL      model name for live/record
    FIGCRAFT_RUNNER_CMD          command line of an external protocol runner
    FIGCRAFT_RUNNER_SOCKET       unix socket of a serving runner
"""

from __future__ import annotations

import os
import shlex
from pathlib import Path

from .gateway import Gateway, GatewayMode, OpenAICompatProvider
from .prompts import REGISTRY
from .sandbox import RunnerClient, SocketRunnerClient, SubprocessRunnerClient


def gateway_mode(override: str | None = None) -> GatewayMode:
    return GatewayMode(override or os.environ.get("GATEWAY_MODE", "replay"))


def cache_dir(override: str | None = None) -> Path:
    return Path(override or os.environ.get("FIGCRAFT_CACHE_DIR", ".figcraft/cache"))


def store_dir(override: str | None = None) -> Path:
    return Path(override or os.environ.get("FIGCRAFT_STORE_DIR", ".figcraft/store"))


def gateway_from_env(
    mode: str | None = None, cache: str | None = None
) -> Gateway:
    resolved = gateway_mode(mode)
    provider = None
    if resolved is not GatewayMode.REPLAY:
        base_url = os.environ.get("FIGCRAFT_PROVIDER_BASE_URL")
        api_key = os.environ.get("FIGCRAFT_PROVIDER_API_KEY")
        model = os.environ.get("FIGCRAFT_PROVIDER_MODEL")
        if not (base_url and api_key and model):
            raise SystemExit(
                "live/record mode needs FIGCRAFT_PROVIDER_BASE_URL, "
                "FIGCRAFT_PROVIDER_API_KEY, and FIGCRAFT_PROVIDER_MODEL"
            )
        provider = OpenAICompatProvider(base_url=base_url, api_key=api_key, model=model)
    return Gateway(
        registry=REGISTRY,
        provider=provider,
        mode=resolved,
        cache_dir=cache_dir(cache),
    )


def runner_from_env() -> RunnerClient:
    socket_path = os.environ.get("FIGCRAFT_RUNNER_SOCKET")
    if socket_path:
        return SocketRunnerClient(socket_path)
    cmd = os.environ.get("FIGCRAFT_RUNNER_CMD")
    if cmd:
        return SubprocessRunnerClient(cmd=shlex.split(cmd))
    return SubprocessRunnerClient()
