"""Cross-modality retrieval re-ranking.

Builds a similarity graph over query and gallery samples, replaces raw
cross-modality distances with averaged cheapest-path costs (SGR), compares
cross-modality neighbor sets against intra-gallery reciprocal sets with a
Jaccard distance (MNNR), and blends the two into the final ranking metric
(SIM). Ships a CMC/mAP evaluation harness, a seeded synthetic dataset
generator, binary matrix file I/O, and a CLI.
"""

from .distance import pairwise_l2, self_distances, unit_normalize
from .evaluation import (
    EvalReport,
    average_precision,
    cmc_curve,
    evaluate_rankings,
    multi_shot_trials,
    relevance_matrix,
)
from .graph import (
    SgrMatrix,
    SimilarityGraph,
    build_graph,
    oracle_shortest_path,
    sgr_distances,
)
from .neighbors import (
    MnnrMatrix,
    NeighborSet,
    cross_knn,
    mnnr_distances,
    reciprocal_neighbors,
)
from .pipeline import (
    VARIANTS,
    GalleryIndex,
    SimResult,
    precompute_gallery,
    rerank,
    run_baseline,
    run_sim,
    run_variant,
)
from .synthetic import SynthConfig, ablation_suite, gap_report, generate
from .types import (
    DistanceMatrix,
    EmbeddingSet,
    Modality,
    SampleId,
    SimParams,
    ValidationError,
    check_metric,
    validate_params,
)

__version__ = "0.1.0"

__all__ = [
    "DistanceMatrix",
    "EmbeddingSet",
    "EvalReport",
    "GalleryIndex",
    "MnnrMatrix",
    "Modality",
    "NeighborSet",
    "SampleId",
    "SgrMatrix",
    "SimParams",
    "SimResult",
    "SimilarityGraph",
    "SynthConfig",
    "VARIANTS",
    "ValidationError",
    "ablation_suite",
    "average_precision",
    "build_graph",
    "check_metric",
    "cmc_curve",
    "cross_knn",
    "evaluate_rankings",
    "gap_report",
    "generate",
    "mnnr_distances",
    "multi_shot_trials",
    "oracle_shortest_path",
    "pairwise_l2",
    "precompute_gallery",
    "relevance_matrix",
    "rerank",
    "reciprocal_neighbors",
    "run_baseline",
    "run_sim",
    "run_variant",
    "self_distances",
    "sgr_distances",
    "unit_normalize",
    "validate_params",
]
