"""Semantic pool construction and prompt ensembles.

Two kinds of label candidates feed the negative-label miner: the original
pool (lexicon nouns, used verbatim) and the conjugated pool (every adjective
from the lexicon combined with every superclass name, e.g. "white creature").
Each candidate is rendered through a prompt-prefix ensemble; the per-prompt
embeddings are later averaged and renormalized into one vector per label.

File formats handled here: lexicons are UTF-8 text with one "word<TAB>pos"
entry per line (pos in {noun, adj}); superclass files hold one name per line.
Lines starting with '#' are ignored in both.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyLexicon,
    EmptyPool,
    EmptySuperclassSet,
    NormViolation,
    ZeroNormAfterAveraging,
)

__all__ = [
    "Lexicon",
    "LabelCandidate",
    "SemanticPool",
    "PromptTemplateSet",
    "DEFAULT_SUPERCLASSES",
    "DEFAULT_ORIGINAL_PREFIXES",
    "DEFAULT_CONJUGATED_PREFIXES",
    "build_original_pool",
    "build_conjugated_pool",
    "expand_prompts",
    "ensemble_embedding",
    "ensemble_rows",
    "load_lexicon",
    "load_superclasses",
    "normalize_label",
]

# Superclass names broad enough to cover most visual objects; the conjugated
# pool is the product of these with the lexicon's adjectives.
DEFAULT_SUPERCLASSES = (
    "area",
    "creature",
    "environment",
    "item",
    "landscape",
    "object",
    "pattern",
    "place",
    "scene",
    "space",
    "structure",
    "thing",
    "view",
    "vista",
)

# Prefix ensembles; rendering is always "<prefix> <label>." with one space.
DEFAULT_ORIGINAL_PREFIXES = (
    "the",
    "the good",
    "the nice",
    "a photo of the nice",
    "a photo with the nice",
    "a good photo of the nice",
    "a close-up photo of the nice",
)
DEFAULT_CONJUGATED_PREFIXES = (
    "a nice photo of",
    "a good photo of",
    "a close-up photo of",
)


def normalize_label(text: str) -> str:
    """Whitespace-collapsed, lowercased form used for dedup comparisons."""
    return " ".join(text.split()).lower()


@dataclass(frozen=True)
class Lexicon:
    """Deduplicated (word, pos) entries, order preserved."""

    entries: tuple[tuple[str, str], ...]

    def __post_init__(self):
        seen = set()
        cleaned = []
        for word, pos in self.entries:
            word = normalize_label(word)
            if not word:
                raise EmptyLexicon("lexicon contains an empty word")
            if pos not in ("noun", "adj"):
                raise EmptyLexicon(f"unknown part of speech {pos!r} (expected noun/adj)")
            key = (word, pos)
            if key in seen:
                continue
            seen.add(key)
            cleaned.append(key)
        object.__setattr__(self, "entries", tuple(cleaned))

    def nouns(self) -> list[str]:
        return [w for w, pos in self.entries if pos == "noun"]

    def adjectives(self) -> list[str]:
        return [w for w, pos in self.entries if pos == "adj"]


@dataclass(frozen=True)
class LabelCandidate:
    """One pool entry: its rendered text, pool kind, and provenance."""

    text: str
    kind: str  # "original" | "conjugated"
    source: tuple[str, ...]  # (noun,) or (adjective, superclass)


@dataclass(frozen=True)
class SemanticPool:
    """Ordered, text-unique label candidates."""

    candidates: tuple[LabelCandidate, ...]

    def __post_init__(self):
        texts = [normalize_label(c.text) for c in self.candidates]
        if len(set(texts)) != len(texts):
            raise EmptyPool("pool candidates must be unique after normalization")

    def __len__(self) -> int:
        return len(self.candidates)

    def texts(self) -> list[str]:
        return [c.text for c in self.candidates]

    def merged_with(self, other: "SemanticPool") -> "SemanticPool":
        """Concatenate two pools, dropping later duplicates."""
        seen = {normalize_label(c.text) for c in self.candidates}
        extra = [c for c in other.candidates if normalize_label(c.text) not in seen]
        return SemanticPool(candidates=self.candidates + tuple(extra))


@dataclass(frozen=True)
class PromptTemplateSet:
    """Prefix lists for the two candidate kinds.

    An empty prefix list degenerates to rendering the bare label with the
    trailing period.
    """

    original_prefixes: tuple[str, ...] = DEFAULT_ORIGINAL_PREFIXES
    conjugated_prefixes: tuple[str, ...] = DEFAULT_CONJUGATED_PREFIXES

    def __post_init__(self):
        for prefix in self.original_prefixes + self.conjugated_prefixes:
            if not prefix.strip():
                raise EmptyPool("prompt prefixes must be non-empty")

    def prefixes_for(self, kind: str) -> tuple[str, ...]:
        return self.original_prefixes if kind == "original" else self.conjugated_prefixes


def build_original_pool(lexicon: Lexicon) -> SemanticPool:
    """One candidate per lexicon noun, in lexicon order."""
    nouns = lexicon.nouns()
    if not nouns:
        raise EmptyLexicon("lexicon has no nouns; original pool would be empty")
    return SemanticPool(
        candidates=tuple(
            LabelCandidate(text=noun, kind="original", source=(noun,)) for noun in nouns
        )
    )


def build_conjugated_pool(
    lexicon: Lexicon, superclasses: Sequence[str] = DEFAULT_SUPERCLASSES
) -> SemanticPool:
    """Full cartesian product adjective x superclass, adjective-major order."""
    adjectives = lexicon.adjectives()
    if not adjectives:
        raise EmptyLexicon("lexicon has no adjectives; conjugated pool would be empty")
    names = [normalize_label(s) for s in superclasses]
    if not names:
        raise EmptySuperclassSet("superclass set is empty")
    if len(set(names)) != len(names):
        raise EmptySuperclassSet("superclass names must be unique")
    return SemanticPool(
        candidates=tuple(
            LabelCandidate(text=f"{adj} {sup}", kind="conjugated", source=(adj, sup))
            for adj in adjectives
            for sup in names
        )
    )


def expand_prompts(
    candidate: LabelCandidate, templates: PromptTemplateSet | None = None
) -> list[str]:
    """Render the candidate through its kind's prefix ensemble.

    Every prompt is exactly "<prefix> <label>."; with no prefixes the single
    prompt "<label>." is returned.
    """
    templates = templates or PromptTemplateSet()
    label = normalize_label(candidate.text)
    if not label:
        raise EmptyPool("candidate text is empty")
    prefixes = templates.prefixes_for(candidate.kind)
    if not prefixes:
        return [f"{label}."]
    return [f"{prefix} {label}." for prefix in prefixes]


def ensemble_embedding(prompt_embeddings: np.ndarray) -> np.ndarray:
    """Mean of unit-norm prompt embeddings, renormalized to unit length.

    Rows must share one dimension and each be unit-norm within 1e-4.  Raises
    :class:`ZeroNormAfterAveraging` if the prompts cancel out.
    """
    rows = np.asarray(prompt_embeddings, dtype=np.float64)
    if rows.ndim == 1:
        rows = rows[None, :]
    if rows.ndim != 2 or rows.shape[0] == 0 or rows.shape[1] == 0:
        raise DimensionMismatch(f"expected a non-empty 2-D row matrix, got shape {rows.shape}")
    norms = np.linalg.norm(rows, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-4):
        raise NormViolation("prompt embeddings must be unit-norm within 1e-4")
    mean = rows.mean(axis=0)
    norm = float(np.linalg.norm(mean))
    if norm < 1e-12:
        raise ZeroNormAfterAveraging("prompt embeddings cancel out; ensemble undefined")
    return mean / norm


def ensemble_rows(
    rows: np.ndarray, labels: Sequence[str]
) -> tuple[np.ndarray, list[str]]:
    """Collapse consecutive per-prompt rows with equal labels into ensembles.

    Returns the (n_labels, dim) matrix of ensemble embeddings and the label
    order.  Rows belonging to one label must be contiguous, as written by the
    extractor.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.shape[0] != len(labels):
        raise DimensionMismatch(
            f"{rows.shape[0]} rows vs {len(labels)} labels in the manifest"
        )
    out_labels: list[str] = []
    blocks: list[np.ndarray] = []
    start = 0
    for i in range(1, len(labels) + 1):
        if i == len(labels) or labels[i] != labels[start]:
            out_labels.append(labels[start])
            blocks.append(ensemble_embedding(rows[start:i]))
            start = i
    return np.stack(blocks), out_labels


def _read_lines(path: Path) -> Iterable[str]:
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield line


def load_lexicon(path: str | Path) -> Lexicon:
    """Parse a lexicon file: one "word<TAB>pos" entry per line."""
    entries = []
    for line in _read_lines(Path(path)):
        if "\t" not in line:
            raise EmptyLexicon(f"malformed lexicon line (missing tab): {line!r}")
        word, pos = line.split("\t", 1)
        entries.append((word.strip(), pos.strip()))
    if not entries:
        raise EmptyLexicon(f"lexicon file {path} has no entries")
    return Lexicon(entries=tuple(entries))


def load_superclasses(path: str | Path) -> tuple[str, ...]:
    """Parse a superclass file: one name per line."""
    names = tuple(_read_lines(Path(path)))
    if not names:
        raise EmptySuperclassSet(f"superclass file {path} has no entries")
    return names
