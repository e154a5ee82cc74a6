"""Encoder backends.

``hash-<dim>`` is a dependency-free deterministic encoder for offline runs
and tests: embeddings are derived from SHA-256 of the input, so re-running a
job reproduces the output bit-for-bit.  CLIP-style backends load lazily and
raise :class:`ModelLoadFailure` when torch/open_clip are absent, keeping the
extractor usable in minimal environments.
"""

from __future__ import annotations

import hashlib
from typing import Protocol, Sequence

import numpy as np

from .errors import ModelLoadFailure


class Encoder(Protocol):
    dim: int

    def encode_texts(self, texts: Sequence[str], batch_size: int) -> np.ndarray: ...

    def encode_image_bytes(self, blobs: Sequence[bytes], batch_size: int) -> np.ndarray: ...


class HashEncoder:
    """Deterministic pseudo-embeddings from SHA-256 digests.

    Each input is hashed with an incrementing block counter until ``dim``
    float32 lanes are filled; lanes are mapped to [-1, 1) and the row is
    normalized.  No semantic content, full determinism.
    """

    def __init__(self, dim: int = 64):
        if dim < 2:
            raise ModelLoadFailure(f"hash encoder needs dim >= 2, got {dim}")
        self.dim = dim

    def _embed(self, payload: bytes) -> np.ndarray:
        lanes = np.empty(self.dim, dtype=np.float64)
        filled = 0
        block = 0
        while filled < self.dim:
            digest = hashlib.sha256(payload + block.to_bytes(4, "little")).digest()
            words = np.frombuffer(digest, dtype="<u4")
            take = min(words.size, self.dim - filled)
            lanes[filled : filled + take] = words[:take] / 2**31 - 1.0
            filled += take
            block += 1
        norm = float(np.linalg.norm(lanes))
        return (lanes / norm).astype(np.float32)

    def encode_texts(self, texts: Sequence[str], batch_size: int) -> np.ndarray:
        return np.stack([self._embed(t.encode("utf-8")) for t in texts])

    def encode_image_bytes(self, blobs: Sequence[bytes], batch_size: int) -> np.ndarray:
        return np.stack([self._embed(b) for b in blobs])


class ClipEncoder:
    """open_clip text/image encoder; weights resolved by model id.

    Model ids look like "ViT-B-16/openai" (architecture/pretrained tag).
    Inference runs in eval mode under no_grad; outputs are unit-normalized.
    """

    def __init__(self, model_id: str, device: str = "cpu"):
        try:
            import open_clip
            import torch
        except ImportError as exc:
            raise ModelLoadFailure(
                f"backend for {model_id!r} needs torch and open_clip_torch installed"
            ) from exc
        arch, _, pretrained = model_id.partition("/")
        try:
            model, _, preprocess = open_clip.create_model_and_transforms(
                arch, pretrained=pretrained or None
            )
        except Exception as exc:
            raise ModelLoadFailure(f"cannot load weights for {model_id!r}: {exc}") from exc
        self._torch = torch
        self._open_clip = open_clip
        self._model = model.to(device).eval()
        self._preprocess = preprocess
        self._tokenizer = open_clip.get_tokenizer(arch)
        self._device = device
        self.dim = int(model.text_projection.shape[-1])

    def encode_texts(self, texts: Sequence[str], batch_size: int) -> np.ndarray:
        torch = self._torch
        chunks = []
        with torch.no_grad():
            for start in range(0, len(texts), batch_size):
                tokens = self._tokenizer(list(texts[start : start + batch_size]))
                features = self._model.encode_text(tokens.to(self._device))
                features = features / features.norm(dim=-1, keepdim=True)
                chunks.append(features.cpu().numpy().astype(np.float32))
        return np.concatenate(chunks, axis=0)

    def encode_image_bytes(self, blobs: Sequence[bytes], batch_size: int) -> np.ndarray:
        import io

        try:
            from PIL import Image
        except ImportError as exc:
            raise ModelLoadFailure("image extraction needs pillow installed") from exc
        torch = self._torch
        chunks = []
        with torch.no_grad():
            for start in range(0, len(blobs), batch_size):
                batch = [
                    self._preprocess(Image.open(io.BytesIO(blob)).convert("RGB"))
                    for blob in blobs[start : start + batch_size]
                ]
                features = self._model.encode_image(torch.stack(batch).to(self._device))
                features = features / features.norm(dim=-1, keepdim=True)
                chunks.append(features.cpu().numpy().astype(np.float32))
        return np.concatenate(chunks, axis=0)


def load_encoder(model_id: str, device: str = "cpu") -> Encoder:
    """Resolve a model id: "hash-<dim>" or an open_clip "<arch>/<pretrained>"."""
    if model_id.startswith("hash-"):
        try:
            dim = int(model_id.removeprefix("hash-"))
        except ValueError as exc:
            raise ModelLoadFailure(f"bad hash encoder id {model_id!r}") from exc
        return HashEncoder(dim)
    return ClipEncoder(model_id, device=device)
