"""Prompt templates with named slots and fixed few-shot exemplars.

Rendering is deterministic string work: equal inputs produce byte-equal
output. Exemplars are baked into the template (their count is a declared
per-template constant) and are injected at the reserved ``{exemplars}``
slot.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

from ..errors import UnboundSlot

_SLOT_RE = re.compile(r"\{([a-z_][a-z0-9_]*)\}")

EXEMPLARS_SLOT = "exemplars"


class Modality(str, Enum):
    TEXT = "text"
    VISION = "vision"


@dataclass(frozen=True)
class PromptTemplate:
    """A prompt body with named ``{slot}`` placeholders plus optional exemplars."""

    template_id: str
    body: str
    exemplars: tuple[tuple[str, str], ...] = ()
    modality: Modality = Modality.TEXT
    exemplar_count: int | None = None

    def __post_init__(self):
        expected = self.exemplar_count
        if expected is not None and len(self.exemplars) != expected:
            raise ValueError(
                f"template {self.template_id!r} declares {expected} exemplars, "
                f"got {len(self.exemplars)}"
            )
        if self.exemplars and EXEMPLARS_SLOT not in self.slots:
            raise ValueError(
                f"template {self.template_id!r} carries exemplars but no "
                f"{{{EXEMPLARS_SLOT}}} slot"
            )

    @property
    def slots(self) -> frozenset[str]:
        return frozenset(_SLOT_RE.findall(self.body))

    @property
    def digest(self) -> str:
        payload = "\x1f".join(
            [self.template_id, self.body, self.modality.value]
            + [f"{i}\x1e{o}" for i, o in self.exemplars]
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _render_exemplars(exemplars: Sequence[tuple[str, str]]) -> str:
    blocks = [f"{given}\n{expected}" for given, expected in exemplars]
    return "\n\n".join(blocks)


def render_prompt(template: PromptTemplate, bindings: Mapping[str, str]) -> str:
    """Substitute bindings into the template; every referenced slot must be bound."""
    values = dict(bindings)
    if EXEMPLARS_SLOT in template.slots and EXEMPLARS_SLOT not in values:
        values[EXEMPLARS_SLOT] = _render_exemplars(template.exemplars)

    def substitute(match: re.Match) -> str:
        slot = match.group(1)
        if slot not in values:
            raise UnboundSlot(slot)
        return str(values[slot])

    return _SLOT_RE.sub(substitute, template.body)


@dataclass
class TemplateRegistry:
    """Lookup table of templates keyed by template_id."""

    _templates: dict[str, PromptTemplate] = field(default_factory=dict)

    def add(self, template: PromptTemplate) -> PromptTemplate:
        if template.template_id in self._templates:
            raise ValueError(f"duplicate template_id {template.template_id!r}")
        self._templates[template.template_id] = template
        return template

    def get(self, template_id: str) -> PromptTemplate:
        return self._templates[template_id]

    def __contains__(self, template_id: str) -> bool:
        return template_id in self._templates

    def digests(self) -> dict[str, str]:
        return {tid: t.digest for tid, t in sorted(self._templates.items())}
