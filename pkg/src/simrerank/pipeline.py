"""End-to-end re-ranking: graph reasoning, neighbor reasoning, and the
blended SIM distance with per-query gallery rankings.

Gallery-side structures (pruned adjacency and reciprocal sets) depend only
on the gallery matrix and the parameters, so they are precomputed once in a
GalleryIndex and reused for any number of query batches.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import kernels
from ._parallel import run_rows
from .graph import SgrMatrix, SimilarityGraph, gallery_adjacency_arrays, sgr_distances
from .neighbors import (
    MnnrMatrix,
    NeighborSet,
    cross_knn,
    membership_matrix,
    mnnr_distances,
    reciprocal_neighbors,
)
from .types import DistanceMatrix, SampleId, SimParams, ValidationError, validate_params

VARIANTS = ("baseline", "sgr", "mnnr", "sim")


@dataclass(frozen=True)
class SimResult:
    """Outputs of one re-ranking run.

    d_sim = alpha * d_s + (1 - alpha) * d_m holds exactly; rankings[i] is
    the gallery permutation sorted by ascending d_sim with ties broken by
    ascending gallery index.
    """

    d_sim: np.ndarray
    d_s: SgrMatrix
    d_m: MnnrMatrix
    params: SimParams
    rankings: np.ndarray


@dataclass(frozen=True)
class GalleryIndex:
    """Precomputed gallery-side structures shared across query batches."""

    gallery: tuple[SampleId, ...]
    params: SimParams
    nbr_indices: np.ndarray
    nbr_weights: np.ndarray
    rstar: tuple[NeighborSet, ...]
    rstar_matrix: np.ndarray

    @property
    def n_gallery(self) -> int:
        return len(self.gallery)


def precompute_gallery(dgg: DistanceMatrix, p: SimParams) -> GalleryIndex:
    """Build the pruned adjacency and reciprocal sets for one gallery."""
    if not dgg.square:
        raise ValidationError("precompute_gallery: gallery matrix must be square")
    validate_params(p, dgg.shape[0])
    nbr_idx, nbr_w = gallery_adjacency_arrays(dgg.values, p.lam, p.prune_k)
    rstar = reciprocal_neighbors(dgg, p.k_g, expand=p.expand_reciprocal)
    return GalleryIndex(
        gallery=dgg.rows,
        params=p,
        nbr_indices=nbr_idx,
        nbr_weights=nbr_w,
        rstar=tuple(rstar),
        rstar_matrix=membership_matrix(rstar, dgg.shape[0]),
    )


def _minmax_rows(values: np.ndarray) -> np.ndarray:
    lo = values.min(axis=1, keepdims=True)
    span = values.max(axis=1, keepdims=True) - lo
    span[span == 0.0] = 1.0
    return (values - lo) / span


def rerank(
    index: GalleryIndex,
    dqg: DistanceMatrix,
    *,
    nc_rank_raw: bool = False,
    normalize_sgr: bool = False,
) -> SimResult:
    """Re-rank a query batch against a precomputed gallery.

    nc_rank_raw ranks the queries' neighbor sets by the raw query-gallery
    distance instead of the graph distance (ablation aid). normalize_sgr
    min-max scales each query's graph-distance row before blending; the
    scaled values are what SimResult then reports as d_s. Both default off.
    """
    if dqg.cols != index.gallery:
        raise ValidationError("rerank: query columns do not match the gallery index")
    p = index.params
    graph = SimilarityGraph(
        n_query=dqg.shape[0],
        n_gallery=dqg.shape[1],
        cross_edges=dqg.values,
        nbr_indices=index.nbr_indices,
        nbr_weights=index.nbr_weights,
    )
    d_s = sgr_distances(graph, p)
    ranking_source = dqg.values if nc_rank_raw else d_s.values
    nc = cross_knn(ranking_source, p.k_q, dqg.rows)
    d_m = _mnnr_from_matrix(nc, index.rstar_matrix)
    s_values = _minmax_rows(d_s.values) if normalize_sgr else d_s.values
    if normalize_sgr:
        s_values.flags.writeable = False
        d_s = SgrMatrix(s_values)
    d_sim = p.alpha * s_values + (1.0 - p.alpha) * d_m.values
    d_sim.flags.writeable = False
    return SimResult(
        d_sim=d_sim,
        d_s=d_s,
        d_m=d_m,
        params=p,
        rankings=rank_rows(d_sim),
    )


def _mnnr_from_matrix(nc: Sequence[NeighborSet], setmat: np.ndarray) -> MnnrMatrix:
    """Overlap distances against a prebuilt reciprocal membership matrix."""
    n_g = setmat.shape[0]
    members = np.array([s.members for s in nc], dtype=np.int64)
    inter = np.empty((len(nc), n_g), dtype=np.int64)
    run_rows(
        lambda r0, r1: kernels.overlap_counts(members, setmat, inter, r0, r1), len(nc)
    )
    union = members.shape[1] + setmat.sum(axis=1, dtype=np.int64)[None, :] - inter
    values = 1.0 - inter / union
    values.flags.writeable = False
    return MnnrMatrix(values)


def rank_rows(values: np.ndarray) -> np.ndarray:
    """Per-row ascending argsort with ties broken by ascending index."""
    return np.argsort(values, axis=1, kind="stable")


def run_sim(
    dqg: DistanceMatrix,
    dgg: DistanceMatrix,
    p: SimParams,
    *,
    nc_rank_raw: bool = False,
    normalize_sgr: bool = False,
) -> SimResult:
    """Full pipeline: graph build, both reasoning stages, blend, rankings."""
    index = precompute_gallery(dgg, p)
    return rerank(index, dqg, nc_rank_raw=nc_rank_raw, normalize_sgr=normalize_sgr)


def run_baseline(dqg: DistanceMatrix) -> SimResult:
    """Rank by the raw query-gallery distances, the pre-reasoning reference.

    Equivalent to run_sim with prune_k=1, big_k=1, alpha=1, which the
    recorded params reflect.
    """
    values = dqg.values
    zeros = np.zeros_like(values)
    zeros.flags.writeable = False
    return SimResult(
        d_sim=values,
        d_s=SgrMatrix(values),
        d_m=MnnrMatrix(zeros),
        params=SimParams(lam=0.0, big_k=1, alpha=1.0, k_q=1, k_g=1, prune_k=1),
        rankings=rank_rows(values),
    )


def run_variant(
    dqg: DistanceMatrix, dgg: DistanceMatrix, p: SimParams, variant: str
) -> SimResult:
    """One of the four ablation variants.

    baseline ranks raw distances; sgr is the blend endpoint alpha=1; mnnr is
    alpha=0 with neighbor sets ranked by raw distances; sim runs p as given.
    """
    if variant == "baseline":
        return run_baseline(dqg)
    if variant == "sgr":
        return run_sim(dqg, dgg, replace(p, alpha=1.0))
    if variant == "mnnr":
        return run_sim(dqg, dgg, replace(p, alpha=0.0), nc_rank_raw=True)
    if variant == "sim":
        return run_sim(dqg, dgg, p)
    raise ValidationError(f"unknown variant {variant!r} (expected one of {VARIANTS})")
