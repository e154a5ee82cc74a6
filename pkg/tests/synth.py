"""Synthetic embedding world for end-to-end pipeline tests (no VLM needed).

Geometry: an orthonormal basis supplies six ID class directions, four OOD
cluster directions, and filler directions.  ID images scatter tightly around
ID label embeddings.  OOD images scatter around the OOD directions; two of
those directions get original-pool candidates aligned to them ("covered"),
two do not ("uncovered") and their images lean slightly toward an ID class,
making them false positives until conjugated candidates aligned with every
OOD direction join the pool.
"""

from dataclasses import dataclass

import numpy as np

from sempool.pool import Lexicon, build_conjugated_pool, build_original_pool
from sempool.selection import EmbeddingMatrix

DIM = 32

ID_NOUNS = ["ant", "bear", "crow", "deer", "eagle", "fox"]
COVERED_NOUNS = ["glacier", "gorge", "iceberg", "marsh", "meadow", "mesa"]
DISTRACTOR_NOUNS = [f"filler{i:02d}" for i in range(12)]
SYNONYM_NOUNS = ["antlike", "bearish", "crowish", "deerish"]
DUPLICATE_NOUNS = ["ant", "bear"]  # same text as ID labels: must be excluded
ADJECTIVES = ["white", "rough", "striped"]
SUPERCLASSES = ("creature", "pattern", "place", "thing")


def aligned_unit(direction, rng, alignment):
    """Unit vector with exactly the given cosine to ``direction``."""
    residual = rng.normal(size=direction.size)
    residual -= (residual @ direction) * direction
    residual /= np.linalg.norm(residual)
    return alignment * direction + np.sqrt(1.0 - alignment**2) * residual


@dataclass
class SynthWorld:
    id_matrix: EmbeddingMatrix
    original_matrix: EmbeddingMatrix
    merged_matrix: EmbeddingMatrix
    id_images: EmbeddingMatrix
    ood_images: EmbeddingMatrix


def build_world(seed: int = 11) -> SynthWorld:
    rng = np.random.default_rng(seed)
    basis, _ = np.linalg.qr(rng.normal(size=(DIM, DIM)))
    id_dirs = [basis[:, i] for i in range(6)]
    ood_dirs = [basis[:, 6 + i] for i in range(4)]  # 0,1 covered; 2,3 uncovered
    filler_dirs = [basis[:, 10 + i] for i in range(12)]
    spare_dirs = [basis[:, 22 + i] for i in range(8)]

    lexicon = Lexicon(
        entries=tuple(
            (noun, "noun")
            for noun in COVERED_NOUNS + DISTRACTOR_NOUNS + SYNONYM_NOUNS + DUPLICATE_NOUNS
        )
        + tuple((adj, "adj") for adj in ADJECTIVES)
    )
    original_pool = build_original_pool(lexicon)
    conjugated_pool = build_conjugated_pool(lexicon, SUPERCLASSES)

    original_rows = []
    for i, _ in enumerate(COVERED_NOUNS):
        original_rows.append(aligned_unit(ood_dirs[i // 3], rng, 0.9))
    original_rows.extend(filler_dirs)
    for i, _ in enumerate(SYNONYM_NOUNS):
        original_rows.append(0.8 * id_dirs[i] + 0.6 * spare_dirs[i])
    for i, _ in enumerate(DUPLICATE_NOUNS):
        original_rows.append(id_dirs[i])
    original_matrix = EmbeddingMatrix.from_rows(
        np.stack(original_rows),
        original_pool.texts(),
        kinds=["original"] * len(original_pool),
    )

    conjugated_rows = [
        aligned_unit(ood_dirs[k % 4], rng, 0.97) for k in range(len(conjugated_pool))
    ]
    merged_matrix = EmbeddingMatrix.from_rows(
        np.vstack([np.stack(original_rows), np.stack(conjugated_rows)]),
        original_pool.texts() + conjugated_pool.texts(),
        kinds=["original"] * len(original_pool) + ["conjugated"] * len(conjugated_pool),
    )

    id_matrix = EmbeddingMatrix.from_rows(np.stack(id_dirs), ID_NOUNS)

    id_image_rows = [
        aligned_unit(id_dirs[c], rng, 0.98) for c in range(6) for _ in range(10)
    ]
    ood_image_rows = []
    for j in range(4):
        if j < 2:
            anchor = ood_dirs[j]
        else:
            # uncovered clusters lean toward an ID class: alpha^2+beta^2 = 1.
            anchor = 0.93 * ood_dirs[j] + np.sqrt(1.0 - 0.93**2) * id_dirs[j]
        ood_image_rows.extend(aligned_unit(anchor, rng, 0.98) for _ in range(10))

    id_images = EmbeddingMatrix.from_rows(
        np.stack(id_image_rows), [f"id-img-{k:03d}" for k in range(60)]
    )
    ood_images = EmbeddingMatrix.from_rows(
        np.stack(ood_image_rows), [f"ood-img-{k:03d}" for k in range(40)]
    )
    return SynthWorld(
        id_matrix=id_matrix,
        original_matrix=original_matrix,
        merged_matrix=merged_matrix,
        id_images=id_images,
        ood_images=ood_images,
    )
