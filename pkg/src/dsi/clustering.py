"""Density-based clustering over feature vectors.

Two entry points share one neighborhood definition (distance <= eps,
inclusive):

* :func:`dbscan` — textbook density clustering. A core point has at
  least ``min_samples`` points (itself included) within eps; clusters
  are maximal sets chained through core points; unreachable non-core
  points are NOISE.
* :func:`eps_components` — the ``min_samples=1`` special case. Every
  point is core, so clusters collapse to connected components of the
  threshold graph; computed with union-find instead of region growing.

Both label clusters 0..k-1 in order of first appearance by sample
index, so identical inputs always produce identical labelings. The
pairwise distance matrix is materialized whole for sample counts up to
``dense_cap`` and computed in row blocks above it.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyClass, UsageError, ZeroNorm

NOISE = -1
_UNDEFINED = -2

DEFAULT_DENSE_CAP = 20_000

METRICS = ("cosine", "euclidean")


@dataclass(frozen=True)
class ClusteringParams:
    eps: float
    min_samples: int = 1
    metric: str = "cosine"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.eps) and self.eps > 0):
            raise UsageError(f"eps must be finite and positive, got {self.eps}")
        if self.min_samples < 1:
            raise UsageError(f"min_samples must be >= 1, got {self.min_samples}")
        if self.metric not in METRICS:
            raise UsageError(f"metric must be one of {METRICS}, got {self.metric!r}")


@dataclass
class ClusterLabels:
    """Per-sample cluster ids (NOISE = -1) and the number of clusters."""

    labels: list[int]
    cluster_count: int


def _as_matrix(vectors) -> np.ndarray:
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        m = np.asarray(vectors, dtype=np.float64)
    else:
        rows = [np.asarray(v, dtype=np.float64) for v in vectors]
        if not rows:
            raise EmptyClass("need at least one vector")
        dim = rows[0].shape
        for i, r in enumerate(rows):
            if r.ndim != 1:
                raise DimensionMismatch(f"vector {i} is not 1-D")
            if r.shape != dim:
                raise DimensionMismatch(
                    f"vector {i} has dimension {r.shape[0]}, expected {dim[0]}"
                )
        m = np.vstack(rows)
    if m.shape[0] < 1:
        raise EmptyClass("need at least one vector")
    return m


class _Geometry:
    """Distance computations for one metric over a fixed sample matrix."""

    def __init__(self, matrix: np.ndarray, metric: str):
        self.n = matrix.shape[0]
        self.metric = metric
        if metric == "cosine":
            norms = np.linalg.norm(matrix, axis=1, keepdims=True)
            zero = np.flatnonzero(norms.ravel() == 0.0)
            if zero.size:
                raise ZeroNorm(f"vector {int(zero[0])} has zero norm")
            self.points = matrix / norms
            self.sq = None
        else:
            self.points = matrix
            self.sq = np.einsum("ij,ij->i", matrix, matrix)

    def block(self, rows: slice, cols: slice) -> np.ndarray:
        """Distances between points[rows] and points[cols]."""
        a, b = self.points[rows], self.points[cols]
        if self.metric == "cosine":
            g = a @ b.T
            np.clip(g, -1.0, 1.0, out=g)
            return 1.0 - g
        d2 = self.sq[rows][:, None] + self.sq[cols][None, :] - 2.0 * (a @ b.T)
        np.clip(d2, 0.0, None, out=d2)
        return np.sqrt(d2)

    def full_matrix(self) -> np.ndarray:
        """Whole n x n matrix, upper triangle mirrored, zero diagonal."""
        d = self.block(slice(0, self.n), slice(0, self.n))
        iu = np.triu_indices(self.n, k=1)
        d[(iu[1], iu[0])] = d[iu]
        np.fill_diagonal(d, 0.0)
        return d

    def row(self, i: int) -> np.ndarray:
        r = self.block(slice(i, i + 1), slice(0, self.n))[0]
        r[i] = 0.0
        return r


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:  # path compression
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


def _relabel_first_appearance(raw: list[int]) -> ClusterLabels:
    mapping: dict[int, int] = {}
    labels: list[int] = []
    for r in raw:
        if r == NOISE:
            labels.append(NOISE)
            continue
        if r not in mapping:
            mapping[r] = len(mapping)
        labels.append(mapping[r])
    return ClusterLabels(labels, len(mapping))


def dbscan(vectors, params: ClusteringParams,
           dense_cap: int = DEFAULT_DENSE_CAP) -> ClusterLabels:
    """Density clustering with deterministic labels.

    Points are scanned in index order, seed sets expand FIFO with
    ascending neighbor lists, and labels are renumbered by first
    appearance, so the labeling is a pure function of the input.
    """
    matrix = _as_matrix(vectors)
    geo = _Geometry(matrix, params.metric)
    n = geo.n

    if n <= dense_cap:
        dist = geo.full_matrix()
        region = lambda i: np.flatnonzero(dist[i] <= params.eps)
    else:
        region = lambda i: np.flatnonzero(geo.row(i) <= params.eps)

    labels = [_UNDEFINED] * n
    cid = 0
    for p in range(n):
        if labels[p] != _UNDEFINED:
            continue
        neighbors = region(p)
        if neighbors.size < params.min_samples:
            labels[p] = NOISE
            continue
        labels[p] = cid
        seeds = deque(int(q) for q in neighbors if q != p)
        while seeds:
            q = seeds.popleft()
            if labels[q] == NOISE:
                labels[q] = cid  # border point claimed by the first cluster reaching it
            if labels[q] != _UNDEFINED:
                continue
            labels[q] = cid
            expansion = region(q)
            if expansion.size >= params.min_samples:
                seeds.extend(int(r) for r in expansion if labels[r] in (_UNDEFINED, NOISE))
        cid += 1
    return _relabel_first_appearance(labels)


def eps_components(vectors, eps: float, metric: str = "cosine",
                   dense_cap: int = DEFAULT_DENSE_CAP) -> ClusterLabels:
    """Connected components of the distance-<=-eps graph.

    Produces exactly the labeling of ``dbscan`` with ``min_samples=1``:
    every point is core, so density clusters reduce to components, and
    transitive chains merge even when their endpoints are farther than
    eps apart.
    """
    params = ClusteringParams(eps=eps, min_samples=1, metric=metric)
    matrix = _as_matrix(vectors)
    geo = _Geometry(matrix, params.metric)
    n = geo.n
    uf = _UnionFind(n)

    if n <= dense_cap:
        dist = geo.full_matrix()
        for i in range(n - 1):
            for j in np.flatnonzero(dist[i, i + 1:] <= eps):
                uf.union(i, i + 1 + int(j))
    else:
        block = max(1, (dense_cap * dense_cap) // n)
        for lo in range(0, n, block):
            hi = min(lo + block, n)
            same = geo.block(slice(lo, hi), slice(lo, hi))
            for a, b in zip(*np.nonzero(np.triu(same <= eps, k=1))):
                uf.union(lo + int(a), lo + int(b))
            for lo2 in range(hi, n, block):
                hi2 = min(lo2 + block, n)
                cross = geo.block(slice(lo, hi), slice(lo2, hi2))
                for a, b in zip(*np.nonzero(cross <= eps)):
                    uf.union(lo + int(a), lo2 + int(b))

    return _relabel_first_appearance([uf.find(i) for i in range(n)])
