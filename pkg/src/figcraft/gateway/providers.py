"""Model providers behind the gateway.

Only this module ever talks to a network endpoint. Tests use
ScriptedProvider; live and record modes use an OpenAI-compatible chat
endpoint configured through environment variables.
"""

from __future__ import annotations

import base64
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

from ..errors import ProviderError, RateLimited

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Decoding:
    """Decoding parameters; defaults maximize reproducibility."""

    temperature: float = 0.0
    max_output_tokens: int = 2048
    seed: int | None = 0

    def as_dict(self) -> dict:
        return {
            "temperature": self.temperature,
            "max_output_tokens": self.max_output_tokens,
            "seed": self.seed,
        }


class Provider(Protocol):
    provider_id: str

    def complete(
        self, prompt: str, attachments: Sequence[Path], decoding: Decoding
    ) -> str: ...


@dataclass
class ScriptedProvider:
    """Deterministic in-memory provider for tests and fixture recording.

    Responses are either routed by a callable or popped from a queue in
    call order. Raises when the script runs dry so drift is loud.
    """

    provider_id: str = "scripted"
    queue: list[str] = field(default_factory=list)
    router: object | None = None  # callable (prompt, attachments) -> str | None
    calls: list[str] = field(default_factory=list)

    def complete(self, prompt: str, attachments: Sequence[Path], decoding: Decoding) -> str:
        self.calls.append(prompt)
        if self.router is not None:
            routed = self.router(prompt, attachments)  # type: ignore[operator]
            if routed is not None:
                return routed
        if not self.queue:
            raise ProviderError(f"scripted provider exhausted on prompt: {prompt[:120]!r}")
        return self.queue.pop(0)


@dataclass
class OpenAICompatProvider:
    """Chat-completions client for any OpenAI-compatible endpoint.

    Exists for live/record modes only; the test suite never constructs
    one. Retries bounded transport failures with linear backoff.
    """

    base_url: str
    api_key: str
    model: str
    provider_id: str = ""
    max_retries: int = 2
    timeout_s: float = 120.0

    def __post_init__(self):
        if not self.provider_id:
            self.provider_id = f"openai-compat:{self.model}"

    def complete(self, prompt: str, attachments: Sequence[Path], decoding: Decoding) -> str:
        import httpx

        content: list[dict] | str
        if attachments:
            parts: list[dict] = [{"type": "text", "text": prompt}]
            for path in attachments:
                encoded = base64.b64encode(Path(path).read_bytes()).decode("ascii")
                parts.append(
                    {
                        "type": "image_url",
                        "image_url": {"url": f"data:image/png;base64,{encoded}"},
                    }
                )
            content = parts
        else:
            content = prompt

        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": content}],
            "temperature": decoding.temperature,
            "max_tokens": decoding.max_output_tokens,
        }
        if decoding.seed is not None:
            payload["seed"] = decoding.seed

        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            try:
                response = httpx.post(
                    f"{self.base_url.rstrip('/')}/chat/completions",
                    json=payload,
                    headers={"Authorization": f"Bearer {self.api_key}"},
                    timeout=self.timeout_s,
                )
                if response.status_code == 429:
                    raise RateLimited("provider rate limit", retries=attempt)
                response.raise_for_status()
                body = response.json()
                return body["choices"][0]["message"]["content"]
            except RateLimited:
                last_error = RateLimited("provider rate limit", retries=attempt)
                time.sleep(1.0 + attempt)
            except Exception as exc:  # transport, HTTP, schema
                last_error = exc
                logger.warning("provider call failed (attempt %d): %s", attempt + 1, exc)
                time.sleep(0.5 * (attempt + 1))
        if isinstance(last_error, RateLimited):
            raise last_error
        raise ProviderError(str(last_error), retries=self.max_retries)
