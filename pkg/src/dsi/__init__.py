"""Structural indexing for labeled visual datasets from feature vectors.

Two meta values characterize an archive: the per-class variety
contribution ratio (how many samples are non-redundant at a distance
threshold) and the inter-class similarity matrix (pairwise cosine
distances between class centroids, lower = more confusable). On top of
those sit redundancy pruning, threshold sweeps, and model-choice hints.
"""

from .analysis import (
    ModelHint,
    SweepCurve,
    SweepPoint,
    Verdict,
    model_hint,
    render_report,
    sweep,
)
from .clustering import (
    NOISE,
    ClusteringParams,
    ClusterLabels,
    dbscan,
    eps_components,
)
from .errors import (
    BadMagic,
    BadShape,
    DimensionMismatch,
    DsiError,
    EmptyClass,
    FortranOrder,
    InvariantViolation,
    IoFailure,
    ManifestClassFileMissing,
    ManifestMismatch,
    ManifestMissing,
    SingleClass,
    Truncated,
    UnsupportedDtype,
    UsageError,
    ZeroNorm,
)
from .feature_store import (
    ClassFeatureSet,
    DatasetFeatures,
    ValidationReport,
    Violation,
    load_dataset,
    parse_array_file,
    serialize_array,
    validate,
    write_dataset,
)
from .metrics import (
    ClassCentroid,
    SimilarityMatrix,
    class_centroid,
    class_inertia,
    cosine_distance,
    cosine_similarity,
    similarity_matrix,
)
from .vcr import (
    AdaptiveEps,
    ClassPrune,
    ClassVcr,
    ClusterGroup,
    FixedEps,
    PruneManifest,
    VcrReport,
    adaptive_eps,
    apply_prune,
    class_vcr,
    dataset_vcr,
    prune,
)

__version__ = "0.1.0"
