"""Cosine similarity, class centroids, inertia, and the class similarity matrix.

The matrix stores cosine *distance* (1 - similarity, lower = more
similar): its diagonal is zero and entries live in [0, 2], or [0, 1]
when all centroid components are non-negative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyClass, ZeroNorm
from .feature_store import ClassFeatureSet, DatasetFeatures


@dataclass
class ClassCentroid:
    """Component-wise mean of a class's feature vectors."""

    class_name: str
    vector: np.ndarray


@dataclass
class SimilarityMatrix:
    """Pairwise cosine distances between class centroids.

    entries[i][j] == entries[j][i] exactly (upper triangle computed once
    and mirrored) and entries[i][i] == 0.
    """

    class_names: list[str]
    entries: np.ndarray  # (n_c, n_c) float64

    def __post_init__(self) -> None:
        self.entries = np.asarray(self.entries, dtype=np.float64)
        n = len(self.class_names)
        if self.entries.shape != (n, n):
            raise DimensionMismatch(
                f"matrix shape {self.entries.shape} does not match {n} class names"
            )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SimilarityMatrix):
            return NotImplemented
        return self.class_names == other.class_names and np.array_equal(
            self.entries, other.entries
        )

    def min_off_diagonal(self) -> tuple[float, tuple[str, str]]:
        """Smallest inter-class distance and the pair realizing it."""
        n = len(self.class_names)
        if n < 2:
            raise DimensionMismatch("need at least two classes")
        best, pair = None, (0, 1)
        for i in range(n):
            for j in range(i + 1, n):
                d = float(self.entries[i, j])
                if best is None or d < best:
                    best, pair = d, (i, j)
        return best, (self.class_names[pair[0]], self.class_names[pair[1]])

    def mean_off_diagonal(self) -> float:
        n = len(self.class_names)
        if n < 2:
            raise DimensionMismatch("need at least two classes")
        mask = ~np.eye(n, dtype=bool)
        return float(self.entries[mask].mean())

    def to_json_dict(self) -> dict:
        return {"classes": list(self.class_names), "distances": self.entries.tolist()}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "SimilarityMatrix":
        return cls(list(doc["classes"]), np.asarray(doc["distances"], dtype=np.float64))


def _as_vector(x, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatch(f"{name} must be a 1-D vector, got shape {v.shape}")
    return v


def cosine_similarity(a, b) -> float:
    """dot(a, b) / (|a| * |b|), clamped to [-1, 1].

    Identical vectors short-circuit to exactly 1.0 so self-similarity is
    free of rounding noise.
    """
    a, b = _as_vector(a, "a"), _as_vector(b, "b")
    if a.shape != b.shape:
        raise DimensionMismatch(f"dimensions differ: {a.shape[0]} vs {b.shape[0]}")
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ZeroNorm("cosine similarity is undefined for zero-norm vectors")
    if np.array_equal(a, b):
        return 1.0
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def cosine_distance(a, b) -> float:
    """1 - cosine_similarity(a, b); in [0, 2], 0 means same direction."""
    return 1.0 - cosine_similarity(a, b)


def class_centroid(cfs: ClassFeatureSet) -> ClassCentroid:
    """Component-wise mean of the class's vectors.

    Single-cluster centroid fitting converges to exactly this mean, so
    it is computed directly with no iteration or seeding.
    """
    if cfs.sample_count < 1:
        raise EmptyClass(f"class {cfs.class_name!r} has no samples")
    return ClassCentroid(cfs.class_name, cfs.vectors.mean(axis=0))


def class_inertia(cfs: ClassFeatureSet) -> float:
    """Sum of squared Euclidean distances to the class centroid (spread)."""
    centroid = class_centroid(cfs).vector
    return float(((cfs.vectors - centroid) ** 2).sum())


def similarity_matrix(ds: DatasetFeatures) -> SimilarityMatrix:
    """Pairwise centroid cosine distances for every class pair.

    Class order follows the manifest order. The upper triangle is
    computed once and mirrored, so symmetry is exact by construction.
    """
    centroids = [class_centroid(cfs) for cfs in ds.classes]
    for c in centroids:
        if float(np.linalg.norm(c.vector)) == 0.0:
            raise ZeroNorm(f"class {c.class_name!r} has a zero-norm centroid")
    n = len(centroids)
    entries = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            d = cosine_distance(centroids[i].vector, centroids[j].vector)
            entries[i, j] = entries[j, i] = d
    return SimilarityMatrix([c.class_name for c in centroids], entries)
