"""Extractor error types."""


class ExtractorError(Exception):
    """Base class for extractor failures."""


class ModelLoadFailure(ExtractorError):
    """The requested encoder backend or weights could not be loaded."""


class UnreadableInput(ExtractorError):
    """Input manifest or image directory is missing, empty, or malformed."""


class FormatWriteFailure(ExtractorError):
    """The embedding file could not be written."""
