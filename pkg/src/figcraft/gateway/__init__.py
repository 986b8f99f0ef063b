"""Single choke-point for all text- and vision-model calls."""

from .core import Gateway, GatewayMode, ModelRequest, ModelResponse
from .providers import OpenAICompatProvider, Provider, ScriptedProvider
from .templates import Modality, PromptTemplate, render_prompt

__all__ = [
    "Gateway",
    "GatewayMode",
    "Modality",
    "ModelRequest",
    "ModelResponse",
    "OpenAICompatProvider",
    "PromptTemplate",
    "Provider",
    "ScriptedProvider",
    "render_prompt",
]
