"""Pairwise Euclidean distances between embedding sets.

Distances are accumulated in double precision regardless of the input dtype
so that downstream triangle-inequality reasoning stays numerically stable.
"""

from __future__ import annotations

import numpy as np

from .types import DistanceMatrix, EmbeddingSet, ValidationError


def _l2_values(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    sq = (
        np.einsum("ij,ij->i", x, x)[:, None]
        + np.einsum("ij,ij->i", y, y)[None, :]
        - 2.0 * (x @ y.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.sqrt(sq)


def pairwise_l2(a: EmbeddingSet, b: EmbeddingSet) -> DistanceMatrix:
    """Distance matrix between the rows of a and the rows of b.

    values[i, j] is the Euclidean norm of a.vectors[i] - b.vectors[j]; the
    row registry is a.samples and the column registry b.samples.
    """
    if a.dim != b.dim:
        raise ValidationError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return DistanceMatrix(a.samples, b.samples, _l2_values(a.vectors, b.vectors))


def self_distances(g: EmbeddingSet) -> DistanceMatrix:
    """Gallery-gallery distance matrix with exact symmetry and zero diagonal.

    Symmetry is enforced by averaging the raw values with their transpose;
    the diagonal is set to exactly zero (pairwise_l2 of a set against itself
    carries the usual float noise, so it cannot satisfy the square-matrix
    invariants directly).
    """
    v = _l2_values(g.vectors, g.vectors)
    sym = (v + v.T) / 2.0
    np.fill_diagonal(sym, 0.0)
    return DistanceMatrix(g.samples, g.samples, sym)


def unit_normalize(g: EmbeddingSet) -> EmbeddingSet:
    """Scale every vector to unit L2 norm (zero vectors are left unchanged).

    Off by default everywhere; offered for embeddings trained to live on the
    unit sphere.
    """
    norms = np.linalg.norm(g.vectors, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return EmbeddingSet(g.samples, g.vectors / norms)
