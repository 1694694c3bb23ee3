"""Variety contribution ratio (VCR) and redundancy pruning.

A class's VCR is the number of eps-connected clusters among its feature
vectors divided by its sample count: 1.0 means every sample adds
variety, lower values mean redundancy. Pruning keeps exactly one
representative per cluster (the member nearest the cluster mean), which
drives the dataset's VCR back to 1.0 at the same threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._parallel import map_in_order
from .clustering import DEFAULT_DENSE_CAP, eps_components
from .errors import InvariantViolation, ManifestMismatch, UsageError
from .feature_store import ClassFeatureSet, DatasetFeatures
from .metrics import SimilarityMatrix, similarity_matrix

DEFAULT_EPS = 0.05
EPS_FLOOR = 1e-6


@dataclass(frozen=True)
class FixedEps:
    """Use one threshold for every class."""

    eps: float = DEFAULT_EPS

    def __post_init__(self) -> None:
        if not (math.isfinite(self.eps) and self.eps > 0):
            raise UsageError(f"eps must be finite and positive, got {self.eps}")


@dataclass(frozen=True)
class AdaptiveEps:
    """Tighten the threshold for classes with close neighbors.

    eps_c = max(min(base_eps, alpha * d_min_c), 1e-6), where d_min_c is
    the class's smallest inter-class centroid distance. This functional
    form is a heuristic: highly similar classes should not be compressed
    aggressively, so their threshold shrinks with their nearest-class
    distance.
    """

    base_eps: float = DEFAULT_EPS
    alpha: float = 0.5

    def __post_init__(self) -> None:
        if not (math.isfinite(self.base_eps) and self.base_eps > 0):
            raise UsageError(f"base_eps must be finite and positive, got {self.base_eps}")
        if not (0 < self.alpha <= 1):
            raise UsageError(f"alpha must be in (0, 1], got {self.alpha}")


EpsPolicy = float | FixedEps | AdaptiveEps


@dataclass
class ClassVcr:
    class_name: str
    sample_count: int
    cluster_count: int
    vcr: float
    eps: float


@dataclass
class VcrReport:
    classes: list[ClassVcr]
    eps_policy: dict
    total_samples: int
    total_clusters: int
    dataset_vcr: float

    def to_json_dict(self) -> dict:
        return {
            "eps_policy": self.eps_policy,
            "classes": [
                {
                    "name": c.class_name,
                    "samples": c.sample_count,
                    "clusters": c.cluster_count,
                    "vcr": c.vcr,
                    "eps": c.eps,
                }
                for c in self.classes
            ],
            "totals": {
                "samples": self.total_samples,
                "clusters": self.total_clusters,
                "vcr": self.dataset_vcr,
            },
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "VcrReport":
        try:
            classes = [
                ClassVcr(c["name"], c["samples"], c["clusters"], c["vcr"], c["eps"])
                for c in doc["classes"]
            ]
            totals = doc["totals"]
            return cls(classes, doc["eps_policy"], totals["samples"],
                       totals["clusters"], totals["vcr"])
        except (KeyError, TypeError) as exc:
            raise InvariantViolation(f"malformed VCR report JSON: {exc}") from None


@dataclass
class ClusterGroup:
    representative: str
    members: list[str]


@dataclass
class ClassPrune:
    class_name: str
    eps: float
    kept: list[str]
    removed: list[str]
    clusters: list[ClusterGroup]


@dataclass
class PruneManifest:
    eps_policy: dict
    classes: list[ClassPrune]
    original_total: int
    optimized_total: int

    def to_json_dict(self) -> dict:
        return {
            "eps_policy": self.eps_policy,
            "classes": [
                {
                    "name": c.class_name,
                    "eps": c.eps,
                    "kept": c.kept,
                    "removed": c.removed,
                    "clusters": [
                        {"representative": g.representative, "members": g.members}
                        for g in c.clusters
                    ],
                }
                for c in self.classes
            ],
            "totals": {"original": self.original_total, "optimized": self.optimized_total},
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "PruneManifest":
        try:
            classes = [
                ClassPrune(
                    c["name"],
                    c["eps"],
                    list(c["kept"]),
                    list(c["removed"]),
                    [ClusterGroup(g["representative"], list(g["members"]))
                     for g in c["clusters"]],
                )
                for c in doc["classes"]
            ]
            totals = doc["totals"]
            return cls(doc["eps_policy"], classes, totals["original"], totals["optimized"])
        except (KeyError, TypeError) as exc:
            raise InvariantViolation(f"malformed prune manifest JSON: {exc}") from None


def adaptive_eps(class_index: int, simmat: SimilarityMatrix,
                 base_eps: float = DEFAULT_EPS, alpha: float = 0.5) -> float:
    """Per-class threshold scaled down by the nearest-class distance.

    Single-class datasets have no neighbor to adapt to and get base_eps.
    """
    AdaptiveEps(base_eps, alpha)  # reuse the parameter validation
    n = len(simmat.class_names)
    if n < 2:
        return base_eps
    others = [float(simmat.entries[class_index, j]) for j in range(n) if j != class_index]
    return max(min(base_eps, alpha * min(others)), EPS_FLOOR)


def _normalize_policy(eps_policy) -> FixedEps | AdaptiveEps:
    if isinstance(eps_policy, (FixedEps, AdaptiveEps)):
        return eps_policy
    if isinstance(eps_policy, (int, float)) and not isinstance(eps_policy, bool):
        return FixedEps(float(eps_policy))
    raise UsageError(f"eps_policy must be a number, FixedEps, or AdaptiveEps: {eps_policy!r}")


def _per_class_eps(ds: DatasetFeatures, policy) -> tuple[list[float], dict]:
    policy = _normalize_policy(policy)
    if isinstance(policy, FixedEps):
        return [policy.eps] * len(ds.classes), {"kind": "fixed", "eps": policy.eps}
    simmat = similarity_matrix(ds)
    eps = [adaptive_eps(i, simmat, policy.base_eps, policy.alpha)
           for i in range(len(ds.classes))]
    return eps, {
        "kind": "adaptive",
        "base_eps": policy.base_eps,
        "alpha": policy.alpha,
        "note": "heuristic",
    }


def class_vcr(cfs: ClassFeatureSet, eps: float, metric: str = "cosine",
              dense_cap: int = DEFAULT_DENSE_CAP) -> tuple[int, float]:
    """Cluster count and its ratio to the class's sample count."""
    labels = eps_components(cfs.vectors, eps, metric, dense_cap)
    return labels.cluster_count, labels.cluster_count / cfs.sample_count


def dataset_vcr(ds: DatasetFeatures, eps_policy=DEFAULT_EPS, metric: str = "cosine",
                dense_cap: int = DEFAULT_DENSE_CAP) -> VcrReport:
    """Per-class VCR in manifest order, plus dataset totals."""
    eps_list, policy_doc = _per_class_eps(ds, eps_policy)

    def one(pair: tuple[ClassFeatureSet, float]) -> ClassVcr:
        cfs, eps = pair
        clusters, ratio = class_vcr(cfs, eps, metric, dense_cap)
        return ClassVcr(cfs.class_name, cfs.sample_count, clusters, ratio, eps)

    records = map_in_order(one, list(zip(ds.classes, eps_list)))
    total_samples = sum(r.sample_count for r in records)
    total_clusters = sum(r.cluster_count for r in records)
    return VcrReport(records, policy_doc, total_samples, total_clusters,
                     total_clusters / total_samples)


def _prune_class(cfs: ClassFeatureSet, eps: float, metric: str,
                 dense_cap: int) -> ClassPrune:
    labels = eps_components(cfs.vectors, eps, metric, dense_cap)
    members_of: list[list[int]] = [[] for _ in range(labels.cluster_count)]
    for idx, lab in enumerate(labels.labels):
        members_of[lab].append(idx)

    groups: list[ClusterGroup] = []
    kept_idx: list[int] = []
    for members in members_of:
        vecs = cfs.vectors[members]
        mean = vecs.mean(axis=0)
        norm = float(np.linalg.norm(mean))
        if norm == 0.0 or len(members) == 1:
            # cosine-to-mean is undefined for a cancelled-out mean; keep the
            # lowest index (also the trivial answer for singletons)
            local = 0
        else:
            sims = (vecs @ (mean / norm)) / np.linalg.norm(vecs, axis=1)
            local = int(np.argmin(1.0 - np.clip(sims, -1.0, 1.0)))  # ties -> lowest index
        rep = members[local]
        kept_idx.append(rep)
        groups.append(ClusterGroup(cfs.sample_ids[rep],
                                   [cfs.sample_ids[m] for m in members]))

    kept_set = set(kept_idx)
    removed = [cfs.sample_ids[i] for i in range(cfs.sample_count) if i not in kept_set]
    return ClassPrune(cfs.class_name, eps, [cfs.sample_ids[i] for i in kept_idx],
                      removed, groups)


def prune(ds: DatasetFeatures, eps_policy=DEFAULT_EPS, metric: str = "cosine",
          dense_cap: int = DEFAULT_DENSE_CAP) -> PruneManifest:
    """Decide, per cluster, which single sample survives.

    The kept sample is the cluster member nearest (cosine distance) to
    the component-wise mean of the cluster's vectors; exact ties go to
    the lowest sample index.
    """
    eps_list, policy_doc = _per_class_eps(ds, eps_policy)
    records = map_in_order(
        lambda pair: _prune_class(pair[0], pair[1], metric, dense_cap),
        list(zip(ds.classes, eps_list)),
    )
    original = sum(c.sample_count for c in ds.classes)
    optimized = sum(len(r.kept) for r in records)
    return PruneManifest(policy_doc, records, original, optimized)


def apply_prune(ds: DatasetFeatures, manifest: PruneManifest) -> DatasetFeatures:
    """Materialize the optimized dataset: kept samples only, order preserved."""
    if [c.class_name for c in manifest.classes] != ds.class_names:
        raise ManifestMismatch("manifest class names do not match the dataset")
    new_classes: list[ClassFeatureSet] = []
    for cfs, record in zip(ds.classes, manifest.classes):
        ids = set(cfs.sample_ids)
        kept, removed = set(record.kept), set(record.removed)
        if kept | removed != ids or kept & removed:
            raise ManifestMismatch(
                f"class {cfs.class_name!r}: manifest samples do not partition the dataset"
            )
        keep_rows = [i for i, sid in enumerate(cfs.sample_ids) if sid in kept]
        new_classes.append(
            ClassFeatureSet(
                class_name=cfs.class_name,
                sample_ids=[cfs.sample_ids[i] for i in keep_rows],
                vectors=cfs.vectors[keep_rows],
            )
        )
    return DatasetFeatures(new_classes, ds.dimension, list(ds.source_meta))
