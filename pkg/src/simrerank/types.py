"""Domain types shared by every stage: sample registries, distance matrices,
and the re-ranking parameter record.

All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np


class ValidationError(ValueError):
    """A constraint on inputs or parameters was violated."""


class Modality(str, enum.Enum):
    IR = "IR"
    RGB = "RGB"


@dataclass(frozen=True)
class SampleId:
    """Identity of one sample: position in its set, person label, modality,
    optional camera label. Person labels are opaque integers; string labels
    are mapped to integers at ingestion (see matrixio.read_registry).
    """

    index: int
    person: int
    modality: Modality
    camera: int | None = None


def _check_registry(samples: Sequence[SampleId], what: str) -> tuple[SampleId, ...]:
    samples = tuple(samples)
    if not samples:
        raise ValidationError(f"{what}: empty sample registry")
    indices = [s.index for s in samples]
    if len(set(indices)) != len(indices):
        raise ValidationError(f"{what}: sample indices not unique")
    modalities = {s.modality for s in samples}
    if len(modalities) != 1:
        raise ValidationError(f"{what}: mixed modalities within one set")
    return samples


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class EmbeddingSet:
    """Per-sample feature vectors with their registry.

    vectors is a row-major |samples| x dim float64 matrix; all entries must
    be finite.
    """

    samples: tuple[SampleId, ...]
    vectors: np.ndarray

    def __post_init__(self):
        samples = _check_registry(self.samples, "EmbeddingSet")
        vectors = np.asarray(self.vectors, dtype=np.float64)
        if vectors.ndim != 2:
            raise ValidationError("EmbeddingSet: vectors must be 2-D")
        if vectors.shape[0] != len(samples):
            raise ValidationError(
                f"EmbeddingSet: {vectors.shape[0]} rows for {len(samples)} samples"
            )
        if vectors.shape[1] < 1:
            raise ValidationError("EmbeddingSet: dim must be positive")
        if not np.all(np.isfinite(vectors)):
            raise ValidationError("EmbeddingSet: vectors contain NaN or Inf")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "vectors", _freeze(vectors))

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def persons(self) -> np.ndarray:
        return np.array([s.person for s in self.samples], dtype=np.int64)

    def subset(self, indices: Sequence[int]) -> "EmbeddingSet":
        """New set holding the given rows, reindexed from 0 in the given order."""
        idx = list(indices)
        samples = tuple(
            replace(self.samples[j], index=i) for i, j in enumerate(idx)
        )
        return EmbeddingSet(samples, self.vectors[idx])


@dataclass(frozen=True)
class DistanceMatrix:
    """Dense rectangular matrix of nonnegative distances with row/column
    registries.

    When rows and cols are the same registry (the gallery-gallery case) the
    values must be exactly symmetric with a zero diagonal; construct such
    matrices through distance.self_distances or from_square, which enforce
    this. The triangle-inequality property is not checked here (cubic cost);
    use check_metric where it matters.
    """

    rows: tuple[SampleId, ...]
    cols: tuple[SampleId, ...]
    values: np.ndarray

    def __post_init__(self):
        rows = _check_registry(self.rows, "DistanceMatrix rows")
        cols = _check_registry(self.cols, "DistanceMatrix cols")
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (len(rows), len(cols)):
            raise ValidationError(
                f"DistanceMatrix: shape {values.shape} does not match registries "
                f"({len(rows)} x {len(cols)})"
            )
        if not np.all(np.isfinite(values)):
            raise ValidationError("DistanceMatrix: values contain NaN or Inf")
        if np.any(values < 0):
            raise ValidationError("DistanceMatrix: negative distances")
        if rows == cols:
            if np.any(values != values.T):
                raise ValidationError("DistanceMatrix: self-distances not symmetric")
            if np.any(np.diagonal(values) != 0.0):
                raise ValidationError("DistanceMatrix: nonzero self-distance diagonal")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "values", _freeze(values))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def square(self) -> bool:
        return self.rows == self.cols

    @classmethod
    def from_square(
        cls, values: np.ndarray, registry: Sequence[SampleId], tol: float = 1e-5
    ) -> "DistanceMatrix":
        """Build a gallery-gallery matrix from data that may carry float noise.

        Near-symmetric input (within tol) is symmetrized exactly and the
        diagonal zeroed; anything worse is rejected.
        """
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValidationError("from_square: values must be a square matrix")
        scale = max(1.0, float(np.abs(values).max(initial=0.0)))
        if np.abs(values - values.T).max(initial=0.0) > tol * scale:
            raise ValidationError("from_square: matrix is not symmetric")
        if np.abs(np.diagonal(values)).max(initial=0.0) > tol * scale:
            raise ValidationError("from_square: diagonal is not zero")
        sym = (values + values.T) / 2.0
        np.fill_diagonal(sym, 0.0)
        registry = tuple(registry)
        return cls(registry, registry, sym)


def check_metric(dm: DistanceMatrix, tol: float = 1e-6) -> None:
    """Verify the triangle inequality on a square distance matrix.

    Checks every (i, j, t) triple within tol; cubic in the matrix size, so
    meant for validation at test scale, not production galleries.
    """
    if not dm.square:
        raise ValidationError("check_metric: matrix is not square")
    v = dm.values
    # min_j (v[i,j] + v[j,t]) >= v[i,t] - tol for all i, t
    n = v.shape[0]
    for j in range(n):
        through_j = v[:, j][:, None] + v[j, :][None, :]
        if np.any(through_j < v - tol):
            i, t = np.unravel_index(np.argmin(through_j - v), v.shape)
            raise ValidationError(
                f"check_metric: triangle inequality violated at ({i}, {j}, {t})"
            )


@dataclass(frozen=True)
class SimParams:
    """Full configuration surface of the re-ranking metric.

    lam scales gallery-gallery edges, big_k is the number of cheapest paths
    averaged into the graph distance, alpha blends the graph distance with
    the neighbor-overlap distance. k_q and k_g size the cross-modality and
    intra-modality neighbor sets; their defaults (10) are this library's
    choice, not a tuned reference value. prune_k is the per-node gallery
    adjacency size and defaults to big_k so the averaged paths always exist.
    """

    lam: float = 0.01
    big_k: int = 9
    alpha: float = 0.3
    k_q: int = 10
    k_g: int = 10
    prune_k: int | None = None
    expand_reciprocal: bool = False

    def __post_init__(self):
        if self.prune_k is None:
            object.__setattr__(self, "prune_k", self.big_k)


def validate_params(p: SimParams, n_gallery: int) -> SimParams:
    """Check every parameter constraint against a gallery of n_gallery items.

    Returns p unchanged when valid; raises ValidationError naming the first
    violated constraint otherwise.
    """
    if n_gallery < 1:
        raise ValidationError("n_gallery must be positive")
    if not 0.0 <= p.lam <= 1.0:
        raise ValidationError("lambda outside [0,1]")
    if not 0.0 <= p.alpha <= 1.0:
        raise ValidationError("alpha outside [0,1]")
    if p.big_k < 1:
        raise ValidationError("bigK must be positive")
    if p.k_q < 1:
        raise ValidationError("k_q must be positive")
    if p.k_g < 1:
        raise ValidationError("k_g must be positive")
    if p.prune_k < 1:
        raise ValidationError("prune_k must be positive")
    if p.big_k > p.prune_k:
        raise ValidationError("bigK exceeds prune_k")
    if p.big_k > n_gallery:
        raise ValidationError("bigK exceeds gallery size")
    if p.k_q > n_gallery:
        raise ValidationError("k_q exceeds gallery size")
    if p.k_g > n_gallery:
        raise ValidationError("k_g exceeds gallery size")
    return p
