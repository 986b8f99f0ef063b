"""Exception hierarchy shared across the pipeline."""

from __future__ import annotations


class FigcraftError(Exception):
    """Base class for all package errors."""


# --- corpus ingestion ---------------------------------------------------


class MalformedBundle(FigcraftError):
    """Bundle file violates the ingestion schema; names the offending field."""

    def __init__(self, field: str, detail: str):
        self.field = field
        self.detail = detail
        super().__init__(f"malformed bundle field '{field}': {detail}")


class MissingAsset(FigcraftError):
    """A figure's image file could not be resolved at load time."""

    def __init__(self, figure_id: str, path: str):
        self.figure_id = figure_id
        self.path = path
        super().__init__(f"figure '{figure_id}' references missing image: {path}")


class MalformedManifest(FigcraftError):
    """Benchmark manifest violates the manifest schema."""


class DanglingPaperRef(FigcraftError):
    """A benchmark item names a paper_id with no loaded bundle."""

    def __init__(self, paper_id: str):
        self.paper_id = paper_id
        super().__init__(f"bench item references unknown paper_id: {paper_id}")


# --- gateway ------------------------------------------------------------


class UnboundSlot(FigcraftError):
    """A template slot was referenced but not bound."""

    def __init__(self, slot: str):
        self.slot = slot
        super().__init__(f"unbound template slot: {slot}")


class ProviderError(FigcraftError):
    """Transport or HTTP failure from a model provider, after retries."""

    def __init__(self, message: str, retries: int = 0):
        self.retries = retries
        super().__init__(f"{message} (after {retries} retries)")


class RateLimited(ProviderError):
    """Provider rejected the request for rate reasons."""


class ReplayMiss(FigcraftError):
    """Replay mode found no recorded response for a request's cache key."""

    def __init__(self, cache_key: str):
        self.cache_key = cache_key
        super().__init__(f"no recorded response for cache key {cache_key}")


# --- planner ------------------------------------------------------------


class UnparseableLabel(FigcraftError):
    """Model output matched no intent label after normalization and reprompt."""


class EmptyQuestionSet(FigcraftError):
    """Model produced no parseable questions after one reprompt."""


class ExtractionRefused(FigcraftError):
    """The vision model declined or returned empty output for figure data."""


class EmptyPlan(FigcraftError):
    """Every candidate answer was NA; no usable plan exists."""


# --- renderer / sandbox --------------------------------------------------


class NoCodeBlock(FigcraftError):
    """Model output contained no extractable code after one reprompt."""


class SandboxUnavailable(FigcraftError):
    """The execution runner could not be reached or spoke garbage."""


class RenderExhausted(FigcraftError):
    """All render attempts failed; carries the last result for diagnosis."""

    def __init__(self, last_result):
        self.last_result = last_result
        super().__init__(f"render attempts exhausted; last status={last_result.status}")


# --- critics / refiner ----------------------------------------------------


class UnparseableScore(FigcraftError):
    """Critic output yielded no in-range score after one reprompt."""


class RefinementError(FigcraftError):
    """A refinement run aborted mid-loop; carries the partial trace."""

    def __init__(self, message: str, trace=None):
        self.trace = trace
        super().__init__(message)


# --- evaluation -----------------------------------------------------------


class EmptyCaption(FigcraftError):
    """Captioning produced no text for an image."""


class ScorerUnavailable(FigcraftError):
    """A pluggable scorer is not configured; the metric is reported missing."""


# --- session service -------------------------------------------------------


class IllegalTransition(FigcraftError):
    """Requested session action is not legal in the current state."""

    def __init__(self, state: str, action: str):
        self.state = state
        self.action = action
        super().__init__(f"action '{action}' not legal in state '{state}'")


class OrdinalConflict(FigcraftError):
    """Optimistic concurrency check failed; retry with the fresh ordinal."""

    def __init__(self, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(f"event ordinal moved: expected {expected}, log is at {actual}")


class UnknownSession(FigcraftError):
    """No session exists for the given id."""
