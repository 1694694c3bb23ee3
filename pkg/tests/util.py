"""Shared builders for in-memory datasets and on-disk archives."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from dsi import ClassFeatureSet, DatasetFeatures

DATA = Path(__file__).parent / "data"
SYNTH4 = DATA / "synth4"
GOLDEN = DATA / "golden"


def make_class(name: str, vectors, ids=None) -> ClassFeatureSet:
    vectors = np.asarray(vectors, dtype=np.float64)
    if ids is None:
        ids = [f"{name}/{i}" for i in range(vectors.shape[0])]
    return ClassFeatureSet(class_name=name, sample_ids=list(ids), vectors=vectors)


def make_dataset(named_matrices, meta=None) -> DatasetFeatures:
    classes = [make_class(name, m) for name, m in named_matrices]
    return DatasetFeatures(classes, classes[0].dimension, list(meta or []))


def random_dataset(rng: np.random.Generator, n_classes: int, max_samples: int,
                   dim: int) -> DatasetFeatures:
    named = []
    for k in range(n_classes):
        n = int(rng.integers(1, max_samples + 1))
        named.append((f"class{k}", rng.normal(size=(n, dim))))
    return make_dataset(named)


def table1_matrix():
    """The four-vehicle-class centroid distance matrix, symmetric reading."""
    from dsi import SimilarityMatrix

    names = ["Bus", "Car", "Truck", "Van"]
    entries = np.array(
        [
            [0.0, 0.0977, 0.0314, 0.0468],
            [0.0977, 0.0, 0.0685, 0.0378],
            [0.0314, 0.0685, 0.0, 0.0292],
            [0.0468, 0.0378, 0.0292, 0.0],
        ]
    )
    return SimilarityMatrix(names, entries)


def chain_vectors():
    """Three unit vectors with pairwise cosine distances ~(0.03, 0.03, 0.06).

    Realized from the Gram matrix of the target similarities via a
    Cholesky factor; the middle vector links the two ends even though
    the end-to-end distance exceeds a 0.05 threshold.
    """
    gram = np.array(
        [
            [1.0, 0.97, 0.94],
            [0.97, 1.0, 0.97],
            [0.94, 0.97, 1.0],
        ]
    )
    return np.linalg.cholesky(gram)
