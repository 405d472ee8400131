"""Exception types shared across the toolkit.

Everything user-facing derives from :class:`ToolkitError` so the CLI can map
input/validation problems to exit code 1 and keep exit code 2 for genuine
runtime failures.
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for all expected, user-correctable failures."""


class ConfigError(ToolkitError):
    """Bad configuration: missing paths, malformed option values, empty lexicon."""


class CorpusFormatError(ToolkitError):
    """Corpus JSONL violates the schema. Carries the offending line number."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class AnnotationFormatError(ToolkitError):
    """Annotation JSONL violates the schema or disagrees with the corpus text."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class DegenerateTableError(ToolkitError):
    """A frequency table is too small for an odds ratio (zero remaining total)."""


class TemplateError(ToolkitError):
    """Template misuse: unverified template, bad substitution input."""


class CalibrationError(ToolkitError):
    """Recall-based calibration cannot proceed (for example, zero recall)."""


class EmbeddingFormatError(ToolkitError):
    """Embedding text file violates the token-plus-floats line format."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class EmbeddingLookupError(ToolkitError):
    """A required token has no vector (callers may treat this as a skip signal)."""
