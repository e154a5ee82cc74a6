"""Writer for the sempool embedding-file wire format.

Layout (little-endian): magic b"OODEMB" (6 bytes), version u16 = 1, dim u32,
count u32, normalization flag u8 (0 = rows are unit-norm), then count*dim
float32 row-major.  A sidecar "<path>.manifest.jsonl" carries one JSON object
per row: {"index", "label", "kind", "prompt_count"} (UTF-8, LF).

This is a clean-room implementation of the format the sempool pipeline
reads; the extractor hands files over, it never shares code or state with
the consumer.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import FormatWriteFailure

MAGIC = b"OODEMB"
VERSION = 1
_HEADER = struct.Struct("<6sHIIB")


def _atomic_write(path: Path, payload: bytes) -> None:
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except OSError as exc:
        raise FormatWriteFailure(f"cannot write {path}: {exc}") from exc


def write_embedding_file(
    path: str | Path,
    vectors: np.ndarray,
    labels: Sequence[str],
    kinds: Sequence[str],
    prompt_counts: Sequence[int],
) -> None:
    """Write unit-norm rows plus the aligned manifest sidecar, atomically."""
    path = Path(path)
    rows = np.ascontiguousarray(vectors, dtype="<f4")
    if rows.ndim != 2:
        raise FormatWriteFailure(f"expected a 2-D row matrix, got shape {rows.shape}")
    count, dim = rows.shape
    if not (len(labels) == len(kinds) == len(prompt_counts) == count):
        raise FormatWriteFailure("manifest columns must align with the row count")
    header = _HEADER.pack(MAGIC, VERSION, dim, count, 0)
    _atomic_write(path, header + rows.tobytes())

    lines = [
        json.dumps(
            {
                "index": i,
                "label": labels[i],
                "kind": kinds[i],
                "prompt_count": int(prompt_counts[i]),
            },
            ensure_ascii=False,
            separators=(",", ":"),
        )
        for i in range(count)
    ]
    _atomic_write(
        path.with_name(path.name + ".manifest.jsonl"),
        ("\n".join(lines) + "\n").encode("utf-8"),
    )
