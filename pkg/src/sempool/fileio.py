"""Bit-exact file formats and run configuration.

Embedding file layout (little-endian):

    offset 0   magic   6 bytes  b"OODEMB"
    offset 6   version u16      currently 1
    offset 8   dim     u32
    offset 12  count   u32
    offset 16  flag    u8       0 = rows must be unit-norm within 1e-4
                                1 = renormalize rows on load
    offset 17  payload count*dim float32, row-major

A sidecar manifest at "<path>.manifest.jsonl" holds one JSON object per row:
{"index": i, "label": ..., "kind": ..., "prompt_count": n} (UTF-8, LF).
Writing is atomic (temp file + rename) and write(read(f)) reproduces f
byte-for-byte for any valid file.

Run configuration files are line-based "key = value" with '#' comments;
command-line flags override file values, and the SEMPOOL_CONFIG environment
variable supplies a default config path.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BadMagic,
    ConfigError,
    FormatError,
    ManifestMismatch,
    NormViolation,
    TruncatedPayload,
    VersionUnsupported,
)
from .selection import (
    DEFAULT_GROUP_COUNT,
    DEFAULT_PERCENTILE,
    DEFAULT_RATIO,
    EmbeddingMatrix,
    ManifestRecord,
)
from .scoring import DEFAULT_TEMPERATURE

__all__ = [
    "MAGIC",
    "VERSION",
    "RunConfig",
    "read_embeddings",
    "write_embeddings",
    "write_csv",
    "write_jsonl",
    "read_jsonl",
    "load_config",
    "CONFIG_ENV_VAR",
]

MAGIC = b"OODEMB"
VERSION = 1
_HEADER = struct.Struct("<6sHIIB")
CONFIG_ENV_VAR = "SEMPOOL_CONFIG"

_UNIT_NORM_TOL = 1e-4


def _manifest_path(path: Path) -> Path:
    return path.with_name(path.name + ".manifest.jsonl")


def _atomic_write_bytes(path: Path, payload: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_embeddings(
    matrix: EmbeddingMatrix, path: str | Path, renormalize_on_load: bool = False
) -> None:
    """Write the matrix and its manifest sidecar atomically."""
    path = Path(path)
    flag = 1 if renormalize_on_load else 0
    header = _HEADER.pack(MAGIC, VERSION, matrix.dim, matrix.count, flag)
    payload = np.ascontiguousarray(matrix.vectors, dtype="<f4").tobytes()
    _atomic_write_bytes(path, header + payload)

    lines = []
    for rec in matrix.manifest:
        lines.append(
            json.dumps(
                {
                    "index": rec.index,
                    "label": rec.label,
                    "kind": rec.kind,
                    "prompt_count": rec.prompt_count,
                },
                ensure_ascii=False,
                separators=(",", ":"),
            )
        )
    _atomic_write_bytes(_manifest_path(path), ("\n".join(lines) + "\n").encode("utf-8"))


def read_embeddings(path: str | Path) -> EmbeddingMatrix:
    """Read an embedding file, validating header, payload size, manifest, norms."""
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < len(MAGIC) or blob[: len(MAGIC)] != MAGIC:
        raise BadMagic(f"{path}: not an embedding file (bad magic)")
    if len(blob) < _HEADER.size:
        raise TruncatedPayload(f"{path}: header cut short", byte_offset=len(blob))
    _, version, dim, count, flag = _HEADER.unpack_from(blob, 0)
    if version != VERSION:
        raise VersionUnsupported(f"{path}: version {version} not supported (expected {VERSION})")
    if flag not in (0, 1):
        raise FormatError(f"{path}: unknown normalization flag {flag}")
    expected = count * dim * 4
    body = blob[_HEADER.size :]
    if len(body) < expected:
        raise TruncatedPayload(
            f"{path}: payload needs {expected} bytes, found {len(body)}",
            byte_offset=_HEADER.size + len(body),
        )
    if len(body) > expected:
        raise FormatError(f"{path}: {len(body) - expected} trailing bytes after payload")
    vectors = np.frombuffer(body, dtype="<f4").reshape(count, dim)

    manifest_file = _manifest_path(path)
    if not manifest_file.exists():
        raise ManifestMismatch(f"{path}: manifest sidecar {manifest_file.name} missing")
    records = []
    for line_no, obj in enumerate(read_jsonl(manifest_file)):
        try:
            records.append(
                ManifestRecord(
                    index=int(obj["index"]),
                    label=str(obj["label"]),
                    kind=str(obj["kind"]),
                    prompt_count=int(obj["prompt_count"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestMismatch(
                f"{manifest_file}: bad record on line {line_no + 1}: {exc}"
            ) from exc
    if len(records) != count:
        raise ManifestMismatch(
            f"{path}: header count {count} but manifest has {len(records)} records"
        )
    for i, rec in enumerate(records):
        if rec.index != i:
            raise ManifestMismatch(
                f"{manifest_file}: record {i} carries index {rec.index}"
            )

    if flag == 1:
        norms = np.linalg.norm(vectors.astype(np.float64), axis=1, keepdims=True)
        if np.any(norms == 0.0):
            raise NormViolation(f"{path}: zero-norm row cannot be renormalized")
        vectors = (vectors.astype(np.float64) / norms).astype("<f4")
    else:
        norms = np.linalg.norm(vectors.astype(np.float64), axis=1)
        bad = np.nonzero(np.abs(norms - 1.0) > _UNIT_NORM_TOL)[0]
        if bad.size:
            raise NormViolation(
                f"{path}: row {int(bad[0])} has norm {norms[bad[0]]!r}; "
                "set the renormalize flag to accept such files"
            )
    return EmbeddingMatrix(vectors=vectors, manifest=tuple(records))


def ensemble_matrix(matrix: EmbeddingMatrix) -> EmbeddingMatrix:
    """Collapse consecutive per-prompt rows into one ensemble row per label.

    Extractor output stores one row per prompt; the pipeline averages each
    label's rows and renormalizes.  A matrix that is already one-row-per-label
    passes through unchanged (single-row ensembles are identity).
    """
    from .pool import ensemble_embedding

    records: list[ManifestRecord] = []
    blocks: list[np.ndarray] = []
    manifest = matrix.manifest
    start = 0
    for i in range(1, matrix.count + 1):
        if i == matrix.count or manifest[i].label != manifest[start].label:
            vec = ensemble_embedding(matrix.vectors[start:i].astype(np.float64))
            blocks.append(vec.astype(np.float32))
            records.append(
                ManifestRecord(
                    index=len(records),
                    label=manifest[start].label,
                    kind=manifest[start].kind,
                    prompt_count=i - start,
                )
            )
            start = i
    return EmbeddingMatrix(vectors=np.stack(blocks), manifest=tuple(records))


def write_jsonl(path: str | Path, records: Iterable[dict]) -> None:
    """One compact JSON object per line, UTF-8, LF, atomic."""
    lines = [json.dumps(rec, ensure_ascii=False, separators=(",", ":")) for rec in records]
    _atomic_write_bytes(Path(path), ("\n".join(lines) + "\n").encode("utf-8"))


def read_jsonl(path: str | Path) -> list[dict]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            out.append(json.loads(line))
    return out


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Comma-separated, '.' decimals, LF line endings, atomic write.

    Floats are rendered with repr (shortest round-trip form) so identical
    inputs always produce identical bytes.
    """
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
    _atomic_write_bytes(Path(path), ("\n".join(lines) + "\n").encode("utf-8"))


@dataclass(frozen=True)
class RunConfig:
    """Pipeline defaults; every field can come from a config file or a flag."""

    ratio: float = DEFAULT_RATIO
    percentile: float = DEFAULT_PERCENTILE
    group_count: int = DEFAULT_GROUP_COUNT
    temperature: float = DEFAULT_TEMPERATURE
    tpr: float = 0.95
    seed: int = 0
    lexicon: str | None = None
    superclasses: str | None = None
    original_prefixes: tuple[str, ...] | None = None
    conjugated_prefixes: tuple[str, ...] | None = None

    def with_overrides(self, **overrides) -> "RunConfig":
        """Apply non-None overrides (CLI flags win over file values)."""
        filtered = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **filtered)


_FLOAT_KEYS = {"ratio", "percentile", "temperature", "tpr"}
_INT_KEYS = {"group_count", "seed"}
_STR_KEYS = {"lexicon", "superclasses"}
_PREFIX_KEYS = {"original_prefixes", "conjugated_prefixes"}


def load_config(path: str | Path | None) -> RunConfig:
    """Parse a key=value config file; None returns the defaults."""
    if path is None:
        return RunConfig()
    valid = {f.name for f in fields(RunConfig)}
    values: dict = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines()):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no + 1}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in valid:
            raise ConfigError(f"{path}:{line_no + 1}: unknown key {key!r}")
        try:
            if key in _FLOAT_KEYS:
                values[key] = float(value)
            elif key in _INT_KEYS:
                values[key] = int(value)
            elif key in _PREFIX_KEYS:
                values[key] = tuple(p.strip() for p in value.split("|") if p.strip())
            elif key in _STR_KEYS:
                values[key] = value
        except ValueError as exc:
            raise ConfigError(f"{path}:{line_no + 1}: bad value for {key}: {exc}") from exc
    return RunConfig(**values)
