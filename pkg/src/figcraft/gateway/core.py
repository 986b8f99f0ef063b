"""Gateway core: request digesting, deterministic caching, record/replay.

Every model call in the pipeline flows through ``Gateway.complete``. The
cache key is a content digest over (template_id, bindings, attachment
digests, decoding params), so retries and call ordering never change it.
Cache files are written atomically (temp file then rename) and are never
evicted automatically: benchmark runs must stay auditable.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import threading
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

from ..errors import ReplayMiss, UnboundSlot
from .providers import Decoding, Provider
from .templates import TemplateRegistry, render_prompt

logger = logging.getLogger(__name__)


class GatewayMode(str, Enum):
    LIVE = "live"
    RECORD = "record"
    REPLAY = "replay"


@dataclass(frozen=True)
class ModelRequest:
    template_id: str
    bindings: Mapping[str, str]
    attachments: tuple[Path, ...] = ()
    decoding: Decoding = Decoding()


@dataclass(frozen=True)
class ModelResponse:
    text: str
    provider_id: str
    latency_ms: float
    token_usage: Mapping[str, int]
    cache_hit: bool


def _digest_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _approx_tokens(text: str) -> int:
    return len(text.split())


class Gateway:
    """Provider facade with deterministic caching and record/replay modes."""

    def __init__(
        self,
        registry: TemplateRegistry,
        provider: Provider | None = None,
        mode: GatewayMode = GatewayMode.REPLAY,
        cache_dir: str | Path | None = None,
        concurrency_cap: int = 4,
    ):
        if mode is not GatewayMode.REPLAY and provider is None:
            raise ValueError(f"mode {mode.value} requires a provider")
        if mode is not GatewayMode.LIVE and cache_dir is None:
            raise ValueError(f"mode {mode.value} requires a cache directory")
        self.registry = registry
        self.provider = provider
        self.mode = mode
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self._memory: dict[str, dict] = {}
        self._lock = threading.Lock()
        self._limiter = threading.Semaphore(concurrency_cap)

    # -- keys and fixtures --------------------------------------------------

    def request_preimage(self, request: ModelRequest) -> dict:
        return {
            "template_id": request.template_id,
            "bindings": {k: str(v) for k, v in sorted(request.bindings.items())},
            "attachments": [_digest_file(p) for p in request.attachments],
            "decoding": request.decoding.as_dict(),
        }

    def cache_key(self, request: ModelRequest) -> str:
        canonical = json.dumps(
            self.request_preimage(request),
            sort_keys=True,
            ensure_ascii=True,
            separators=(",", ":"),
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def _fixture_path(self, key: str) -> Path:
        assert self.cache_dir is not None
        return self.cache_dir / key[:2] / f"{key}.json"

    def _read_fixture(self, key: str) -> dict | None:
        if self.cache_dir is None:
            return None
        path = self._fixture_path(key)
        if not path.is_file():
            return None
        return json.loads(path.read_text(encoding="utf-8"))["response"]

    def _write_fixture(self, key: str, request: ModelRequest, record: dict) -> None:
        path = self._fixture_path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {"key": key, "request": self.request_preimage(request), "response": record}
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                json.dump(payload, handle, indent=2, sort_keys=True, ensure_ascii=False)
                handle.write("\n")
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)

    # -- completion -----------------------------------------------------------

    def render(self, request: ModelRequest) -> str:
        template = self.registry.get(request.template_id)
        prompt = render_prompt(template, request.bindings)
        if request.attachments and template.modality.value != "vision":
            raise UnboundSlot(
                f"template {request.template_id!r} is text-only but got attachments"
            )
        return prompt

    def complete(self, request: ModelRequest, mode: GatewayMode | None = None) -> ModelResponse:
        mode = mode or self.mode
        key = self.cache_key(request)
        prompt = self.render(request)

        with self._lock:
            cached = self._memory.get(key)
        if cached is None:
            cached = self._read_fixture(key)
        if cached is not None:
            return self._response_from_record(prompt, cached, cache_hit=True)

        if mode is GatewayMode.REPLAY:
            raise ReplayMiss(key)

        assert self.provider is not None
        started = time.monotonic()
        with self._limiter:
            text = self.provider.complete(prompt, request.attachments, request.decoding)
        latency_ms = (time.monotonic() - started) * 1000.0
        record = {"text": text, "provider_id": self.provider.provider_id}
        with self._lock:
            self._memory[key] = record
        if mode is GatewayMode.RECORD:
            self._write_fixture(key, request, record)
        return ModelResponse(
            text=text,
            provider_id=self.provider.provider_id,
            latency_ms=latency_ms,
            token_usage={
                "prompt_tokens_approx": _approx_tokens(prompt),
                "completion_tokens_approx": _approx_tokens(text),
            },
            cache_hit=False,
        )

    def _response_from_record(self, prompt: str, record: dict, cache_hit: bool) -> ModelResponse:
        text = record["text"]
        return ModelResponse(
            text=text,
            provider_id=record.get("provider_id", "recorded"),
            latency_ms=0.0,
            token_usage={
                "prompt_tokens_approx": _approx_tokens(prompt),
                "completion_tokens_approx": _approx_tokens(text),
            },
            cache_hit=cache_hit,
        )

    # -- convenience -----------------------------------------------------------

    def ask(
        self,
        template_id: str,
        bindings: Mapping[str, str],
        attachments: Sequence[Path] = (),
        decoding: Decoding | None = None,
    ) -> ModelResponse:
        request = ModelRequest(
            template_id=template_id,
            bindings=dict(bindings),
            attachments=tuple(Path(p) for p in attachments),
            decoding=decoding or Decoding(),
        )
        return self.complete(request)
