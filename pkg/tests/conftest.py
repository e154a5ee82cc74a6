"""Shared fixtures: unit-vector builders used across the embedding tests."""

import numpy as np
import pytest

from sempool.selection import EmbeddingMatrix


def unit(v):
    v = np.asarray(v, dtype=np.float64)
    return v / np.linalg.norm(v)


def unit_rows(rng, count, dim):
    rows = rng.normal(size=(count, dim))
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def matrix_from(vectors, labels=None, kinds=None):
    vectors = np.asarray(vectors, dtype=np.float64)
    labels = labels if labels is not None else [f"label-{i}" for i in range(vectors.shape[0])]
    return EmbeddingMatrix.from_rows(vectors, labels, kinds=kinds)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
