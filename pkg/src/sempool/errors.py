"""Semantic exception hierarchy for the whole package.

Every operation raises one of these instead of a bare ValueError so callers
(and the CLI) can map failures to exit codes without string matching.
"""


class SempoolError(Exception):
    """Base class for all package errors."""


# --- input-shape / emptiness errors -----------------------------------------

class EmptyInput(SempoolError, ValueError):
    """An input collection that must be non-empty is empty."""


class EmptySequence(EmptyInput):
    """Probability sequence is empty."""


class EmptySelection(EmptyInput):
    """Selected index set is empty."""


class EmptyIdSet(EmptyInput):
    """No in-distribution label embeddings were supplied."""


class EmptyCandidates(EmptyInput):
    """No candidate embeddings remain after validation/deduplication."""


class EmptyLabelSet(EmptyInput):
    """Label embedding set for count scoring is empty."""


class EmptySet(EmptyInput):
    """Image or pool embedding set is empty."""


class EmptyLexicon(EmptyInput):
    """Lexicon has no usable entries for the requested pool."""


class EmptyPool(EmptyInput):
    """Pool construction produced no candidates."""


class EmptySuperclassSet(EmptyInput):
    """Superclass name list is empty."""


class EmptySample(EmptyInput):
    """A metric was asked to evaluate an empty score sample."""


class GridEmpty(EmptyInput):
    """Ratio grid for a sweep is empty."""


class PoolTooSmall(SempoolError, ValueError):
    """Operation needs at least two pool labels."""


# --- domain errors -----------------------------------------------------------

class ProbabilityOutOfRange(SempoolError, ValueError):
    """A probability lies outside [0, 1]."""


class DegenerateProbability(SempoolError, ValueError):
    """A probability equals exactly 0 or 1 where the normal approximation
    requires it strictly inside (0, 1)."""


class DegenerateVariance(SempoolError, ValueError):
    """The per-label normal variance q(1-q) - v is not strictly positive."""


class DegenerateGap(SempoolError, ValueError):
    """The activation gap vanishes (floor == ceiling); the critical-ratio
    equation has no isolated root."""


class ErfInvDomain(SempoolError, ValueError):
    """erfinv input lies outside the open interval (-1, 1)."""


class RatioOutOfRange(SempoolError, ValueError):
    """Selection ratio lies outside (0, 1]."""


class NoRootInInterval(SempoolError, ValueError):
    """Bisection found no sign change on the search interval."""


class NonPositiveTemperature(SempoolError, ValueError):
    """Softmax temperature must be > 0."""


class DimensionMismatch(SempoolError, ValueError):
    """Vectors or matrices disagree on embedding dimension."""


class ZeroNormAfterAveraging(SempoolError, ValueError):
    """Prompt embeddings cancelled out; the ensemble mean has zero norm."""


class NormViolation(SempoolError, ValueError):
    """An embedding row is not unit-norm within tolerance."""


# --- file-format errors ------------------------------------------------------

class FormatError(SempoolError):
    """Base class for embedding-file format violations."""


class BadMagic(FormatError):
    """File does not start with the embedding-file magic bytes."""


class VersionUnsupported(FormatError):
    """Embedding-file version is not supported by this reader."""


class TruncatedPayload(FormatError):
    """Payload ended before count*dim floats were read."""

    def __init__(self, message: str, byte_offset: int):
        super().__init__(f"{message} (at byte offset {byte_offset})")
        self.byte_offset = byte_offset


class ManifestMismatch(FormatError):
    """Sidecar manifest does not agree with the binary header."""


class ConfigError(SempoolError, ValueError):
    """Run-configuration file or value is invalid."""
