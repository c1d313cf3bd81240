"""Similarity-graph construction and graph-reasoning (SGR) distances.

The graph connects every query to every gallery node with the raw
query-gallery distance, and gallery nodes to each other with their distance
scaled by lam. Gallery adjacency is pruned to each node's prune_k nearest
gallery neighbors (self always kept, weight zero). The SGR distance from a
query to a target is the mean of the big_k cheapest one-stop paths
query -> intermediate -> target, where the intermediate ranges over the
target's pruned adjacency; the self edge makes the direct query-target
distance one of the candidates.

Multi-hop routes are never enumerated in this production path. With a
metric gallery matrix and lam <= 1 they cannot beat the best one-stop
path; oracle_shortest_path exists to verify exactly that claim and plays
no role in production.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from . import kernels
from ._parallel import run_rows
from .types import DistanceMatrix, SimParams, ValidationError, validate_params


@dataclass(frozen=True)
class SimilarityGraph:
    """Pruned edge structure over query and gallery nodes.

    cross_edges is the dense query-gallery distance matrix. Gallery
    adjacency is stored in fixed-width arrays: nbr_indices[j] lists the
    neighbors of gallery node j (self first) and nbr_weights[j] the scaled
    edge weights, sorted ascending by (weight, index) after the self entry.
    Width is min(prune_k, n_gallery).
    """

    n_query: int
    n_gallery: int
    cross_edges: np.ndarray
    nbr_indices: np.ndarray
    nbr_weights: np.ndarray

    def gallery_adjacency(self, j: int) -> list[tuple[int, float]]:
        """Adjacency list of gallery node j as (neighbor, weight) pairs."""
        return list(zip(self.nbr_indices[j].tolist(), self.nbr_weights[j].tolist()))


@dataclass(frozen=True)
class SgrMatrix:
    """Query-gallery matrix of graph-reasoning distances."""

    values: np.ndarray


def gallery_adjacency_arrays(
    dgg_values: np.ndarray, lam: float, prune_k: int
) -> tuple[np.ndarray, np.ndarray]:
    """Pruned scaled adjacency of every gallery node.

    Keeps the self edge (weight exactly 0) plus the prune_k - 1 nearest
    other nodes by scaled weight, ties broken by ascending gallery index.
    """
    n_g = dgg_values.shape[0]
    width = min(prune_k, n_g)
    scaled = lam * dgg_values
    order = np.argsort(scaled, axis=1, kind="stable")
    nbr_idx = np.empty((n_g, width), dtype=np.int64)
    nbr_idx[:, 0] = np.arange(n_g)
    for j in range(n_g):
        row = order[j]
        nbr_idx[j, 1:] = row[row != j][: width - 1]
    nbr_w = np.take_along_axis(scaled, nbr_idx, axis=1)
    nbr_w[:, 0] = 0.0
    return nbr_idx, np.ascontiguousarray(nbr_w)


def build_graph(
    dqg: DistanceMatrix, dgg: DistanceMatrix, p: SimParams
) -> SimilarityGraph:
    """Initialize the similarity graph from the two distance matrices."""
    if dqg.cols != dgg.rows:
        raise ValidationError("query-gallery columns do not match the gallery registry")
    validate_params(p, len(dgg.rows))
    nbr_idx, nbr_w = gallery_adjacency_arrays(dgg.values, p.lam, p.prune_k)
    return SimilarityGraph(
        n_query=dqg.shape[0],
        n_gallery=dqg.shape[1],
        cross_edges=dqg.values,
        nbr_indices=nbr_idx,
        nbr_weights=nbr_w,
    )


def sgr_distances(g: SimilarityGraph, p: SimParams) -> SgrMatrix:
    """Mean of the big_k cheapest one-stop paths for every query-gallery pair.

    Candidate costs for target j are cross_edges[i, t] + weight(t -> j) over
    the adjacency of j; the big_k smallest (ties by ascending gallery index,
    which never changes the mean) are averaged. Rows are computed by
    independent workers and assembled deterministically.
    """
    width = g.nbr_indices.shape[1]
    if p.big_k > width:
        raise ValidationError(
            f"bigK={p.big_k} exceeds the {width} path candidates per node"
        )
    cross, nbr_idx, nbr_w = kernels.as_kernel_inputs(
        g.cross_edges, g.nbr_indices, g.nbr_weights
    )
    out = np.empty((g.n_query, g.n_gallery), dtype=np.float64)
    run_rows(
        lambda r0, r1: kernels.sgr_path_means(cross, nbr_idx, nbr_w, p.big_k, out, r0, r1),
        g.n_query,
    )
    out.flags.writeable = False
    return SgrMatrix(out)


def oracle_shortest_path(
    dqg: DistanceMatrix, dgg: DistanceMatrix, lam: float
) -> np.ndarray:
    """True shortest-path costs on the unpruned graph, multi-hop allowed.

    Runs Dijkstra from each query over the complete gallery graph (every
    gallery-gallery edge present at weight lam * distance). Test oracle
    only; quadratic per query and independent of the production kernel.
    """
    cross = dqg.values
    gallery = lam * dgg.values
    n_q, n_g = cross.shape
    out = np.empty((n_q, n_g), dtype=np.float64)
    for i in range(n_q):
        best = cross[i].copy()
        done = np.zeros(n_g, dtype=bool)
        heap = [(best[t], t) for t in range(n_g)]
        heapq.heapify(heap)
        remaining = n_g
        while heap and remaining:
            d, t = heapq.heappop(heap)
            if done[t]:
                continue
            done[t] = True
            remaining -= 1
            row = gallery[t]
            for u in range(n_g):
                nd = d + row[u]
                if not done[u] and nd < best[u]:
                    best[u] = nd
                    heapq.heappush(heap, (nd, u))
        out[i] = best
    return out
