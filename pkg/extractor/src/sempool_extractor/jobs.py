"""Extraction jobs: prompt manifests and image directories -> embedding files.

Text jobs keep one output row per prompt (the pipeline performs the ensemble
itself); manifest rows repeat the owning label and carry its prompt count.
Image jobs emit one row per file, sorted by file name for reproducibility.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .embfile import write_embedding_file
from .encoders import load_encoder
from .errors import UnreadableInput

IMAGE_SUFFIXES = {".jpg", ".jpeg", ".png", ".bmp", ".gif", ".webp"}


@dataclass(frozen=True)
class ExtractionJob:
    model_id: str
    input_path: str
    output_path: str
    batch_size: int = 64
    device: str = "cpu"


def _read_prompt_manifest(path: Path) -> list[dict]:
    if not path.is_file():
        raise UnreadableInput(f"prompt manifest {path} does not exist")
    records = []
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines()):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            records.append(
                {
                    "label": str(obj["label"]),
                    "kind": str(obj["kind"]),
                    "prompts": [str(p) for p in obj["prompts"]],
                }
            )
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise UnreadableInput(f"{path}:{line_no + 1}: bad manifest record: {exc}") from exc
    if not records or all(not r["prompts"] for r in records):
        raise UnreadableInput(f"prompt manifest {path} holds no prompts")
    return records


def extract_text(job: ExtractionJob) -> int:
    """Encode every prompt in the manifest; returns the row count written."""
    records = _read_prompt_manifest(Path(job.input_path))
    encoder = load_encoder(job.model_id, device=job.device)

    prompts: list[str] = []
    labels: list[str] = []
    kinds: list[str] = []
    counts: list[int] = []
    for record in records:
        for prompt in record["prompts"]:
            prompts.append(prompt)
            labels.append(record["label"])
            kinds.append(record["kind"])
            counts.append(len(record["prompts"]))

    vectors = encoder.encode_texts(prompts, job.batch_size)
    write_embedding_file(job.output_path, vectors, labels, kinds, counts)
    return len(prompts)


def extract_images(job: ExtractionJob) -> int:
    """Encode every image file in the directory; returns the row count written."""
    root = Path(job.input_path)
    if not root.is_dir():
        raise UnreadableInput(f"image directory {root} does not exist")
    files = sorted(
        p for p in root.rglob("*") if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    )
    if not files:
        raise UnreadableInput(f"image directory {root} holds no image files")
    encoder = load_encoder(job.model_id, device=job.device)

    blobs = [p.read_bytes() for p in files]
    vectors = encoder.encode_image_bytes(blobs, job.batch_size)
    labels = [str(p.relative_to(root)) for p in files]
    write_embedding_file(
        job.output_path, vectors, labels, ["image"] * len(files), [1] * len(files)
    )
    return len(files)
