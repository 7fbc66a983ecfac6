"""Exception types shared across gtscope modules."""

from __future__ import annotations


class GtscopeError(Exception):
    """Base class for all gtscope-specific errors."""


class FormatError(GtscopeError):
    """A file does not conform to its declared schema (structure, not values)."""


class EmptyInputError(GtscopeError, ValueError):
    """An operation received an empty collection it cannot summarize."""


class MissingDataError(GtscopeError):
    """Required optional data (e.g. raw KPI values) is absent."""


class ExtentError(GtscopeError):
    """A spatial operation was applied to temporal-only ground truth."""


class DegenerateInputError(GtscopeError, ValueError):
    """Input is structurally valid but degenerate for the operation (e.g. all-zero matrix)."""


class ParameterError(GtscopeError, ValueError):
    """A parameter lies outside its legal range."""


class PipelineStageError(GtscopeError):
    """A pipeline stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage: str, message: str) -> None:
        super().__init__(f"stage '{stage}' failed: {message}")
        self.stage = stage
