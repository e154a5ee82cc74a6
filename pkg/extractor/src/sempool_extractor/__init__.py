"""sempool-extractor: offline embedding extraction for the sempool pipeline.

Encodes prompt manifests (text) and image directories into the sempool
embedding-file format.  Interaction with the pipeline is file handoff only.
"""

from .encoders import HashEncoder, load_encoder
from .errors import ExtractorError, FormatWriteFailure, ModelLoadFailure, UnreadableInput
from .jobs import ExtractionJob, extract_images, extract_text

__version__ = "0.1.0"

__all__ = [
    "ExtractionJob",
    "ExtractorError",
    "FormatWriteFailure",
    "HashEncoder",
    "ModelLoadFailure",
    "UnreadableInput",
    "extract_images",
    "extract_text",
    "load_encoder",
    "__version__",
]
