"""Vision-model captioning of diagram images for caption-space metrics.

The captioning prompt is declared plumbing: the comparison protocol
needs both images captioned by the same template + provider pair, and
the gateway's content-addressed cache keys captions by image digest.
"""

from __future__ import annotations

from pathlib import Path

from ..errors import EmptyCaption
from ..gateway import Gateway
from ..prompts import CAPTION


def caption_image(image_ref: str | Path, gateway: Gateway) -> str:
    image_ref = Path(image_ref)
    if not image_ref.is_file() or image_ref.stat().st_size == 0:
        raise ValueError(f"image_ref must name a non-empty file: {image_ref}")
    response = gateway.ask(CAPTION, {}, attachments=[image_ref])
    caption = response.text.strip()
    if not caption:
        raise EmptyCaption(f"model produced no caption for {image_ref.name}")
    return caption
