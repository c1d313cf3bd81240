"""Mutual nearest-neighbor reasoning (MNNR).

A query's cross-modality k-NN set (ranked by the graph distance) is compared
against each gallery item's intra-modality k-reciprocal set with a Jaccard
distance: more shared neighbors means a smaller distance. Reciprocal sets
may optionally be expanded with the half-k rule used by k-reciprocal
re-ranking encodings; the unexpanded mutual sets are the default.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from ._parallel import run_rows
from .graph import SgrMatrix
from .types import DistanceMatrix, SampleId, ValidationError


@dataclass(frozen=True)
class NeighborSet:
    """Gallery-index membership set owned by one sample.

    members is kept sorted ascending and duplicate-free.
    """

    owner: SampleId
    members: tuple[int, ...]

    def __post_init__(self):
        members = tuple(sorted(set(int(m) for m in self.members)))
        if any(m < 0 for m in members):
            raise ValidationError("NeighborSet: negative gallery index")
        object.__setattr__(self, "members", members)

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class MnnrMatrix:
    """Query-gallery matrix of neighbor-overlap distances, entries in [0, 1]."""

    values: np.ndarray


def _knn_indices(values: np.ndarray, k: int) -> np.ndarray:
    """Row-wise k nearest columns with self forced first.

    values must be square with row i describing distances from item i; ties
    break by ascending column index.
    """
    n = values.shape[0]
    order = np.argsort(values, axis=1, kind="stable")
    idx = np.empty((n, k), dtype=np.int64)
    idx[:, 0] = np.arange(n)
    for j in range(n):
        row = order[j]
        idx[j, 1:] = row[row != j][: k - 1]
    return idx


def _bool_from_indices(idx: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros((idx.shape[0], n), dtype=bool)
    np.put_along_axis(out, idx, True, axis=1)
    return out


def _mutual_rows(values: np.ndarray, k: int) -> np.ndarray:
    """Boolean rows of the unexpanded k-reciprocal sets."""
    nb = _bool_from_indices(_knn_indices(values, k), values.shape[0])
    return nb & nb.T


def cross_knn(
    ds: SgrMatrix | np.ndarray, k_q: int, owners: Sequence[SampleId]
) -> list[NeighborSet]:
    """Per-query sets of the k_q gallery items nearest by graph distance.

    Ties break by ascending gallery index. owners supplies the query
    registry for the returned sets.
    """
    values = ds.values if isinstance(ds, SgrMatrix) else np.asarray(ds)
    n_q, n_g = values.shape
    if not 1 <= k_q <= n_g:
        raise ValidationError(f"k_q={k_q} out of range for gallery of {n_g}")
    if len(owners) != n_q:
        raise ValidationError("cross_knn: owner registry does not match rows")
    order = np.argsort(values, axis=1, kind="stable")[:, :k_q]
    return [
        NeighborSet(owner, tuple(row)) for owner, row in zip(owners, order.tolist())
    ]


def reciprocal_neighbors(
    dgg: DistanceMatrix, k_g: int, expand: bool = False
) -> list[NeighborSet]:
    """Per-gallery k-reciprocal neighbor sets over the gallery distances.

    The base set of g holds every x in g's k_g-NN whose own k_g-NN contains
    g (self-distances are zero, so g is always a member). With expand=True,
    for each member x the half-k reciprocal set R(x, ceil(k_g/2)) is merged
    in when at least two thirds of it already overlaps the base set.
    """
    if not dgg.square:
        raise ValidationError("reciprocal_neighbors: gallery matrix must be square")
    n_g = dgg.shape[0]
    if not 1 <= k_g <= n_g:
        raise ValidationError(f"k_g={k_g} out of range for gallery of {n_g}")
    base = _mutual_rows(dgg.values, k_g)
    if not expand:
        rows = base
    else:
        half = _mutual_rows(dgg.values, (k_g + 1) // 2)
        rows = base.copy()
        for g in range(n_g):
            base_row = base[g]
            for x in np.flatnonzero(base_row):
                candidate = half[x]
                # at least 2/3 of the candidate set already overlaps
                if 3 * int(np.count_nonzero(candidate & base_row)) >= 2 * int(
                    np.count_nonzero(candidate)
                ):
                    rows[g] |= candidate
    return [
        NeighborSet(owner, tuple(np.flatnonzero(row).tolist()))
        for owner, row in zip(dgg.rows, rows)
    ]


def membership_matrix(sets: Sequence[NeighborSet], n_gallery: int) -> np.ndarray:
    """Stack neighbor sets into a (len(sets), n_gallery) uint8 matrix."""
    out = np.zeros((len(sets), n_gallery), dtype=np.uint8)
    for i, s in enumerate(sets):
        if s.members and s.members[-1] >= n_gallery:
            raise ValidationError(
                f"NeighborSet member {s.members[-1]} outside gallery of {n_gallery}"
            )
        out[i, list(s.members)] = 1
    return out


def mnnr_distances(
    nc: Sequence[NeighborSet], rstar: Sequence[NeighborSet]
) -> MnnrMatrix:
    """Jaccard distance between every query set and every gallery set.

    d[i, j] = 1 - |nc_i ∩ rstar_j| / |nc_i ∪ rstar_j|. The union is never
    empty because every reciprocal set contains its owner.
    """
    n_g = len(rstar)
    r_sizes = np.array([len(s) for s in rstar], dtype=np.int64)
    if np.any(r_sizes == 0):
        raise ValidationError("mnnr_distances: empty gallery neighbor set")
    setmat = membership_matrix(rstar, n_g)
    nc_sizes = np.array([len(s) for s in nc], dtype=np.int64)
    n_q = len(nc)
    inter = np.empty((n_q, n_g), dtype=np.int64)
    sizes = set(nc_sizes.tolist())
    if len(sizes) == 1 and nc_sizes[0] > 0:
        members = np.array([s.members for s in nc], dtype=np.int64)
        if members.max(initial=0) >= n_g:
            raise ValidationError("mnnr_distances: query set member outside gallery")
        run_rows(lambda r0, r1: kernels.overlap_counts(members, setmat, inter, r0, r1), n_q)
    else:
        # ragged sets: exact integer counts through a float32 product
        ncmat = membership_matrix(nc, n_g).astype(np.float32)
        inter[:] = (ncmat @ setmat.astype(np.float32).T).astype(np.int64)
    union = nc_sizes[:, None] + r_sizes[None, :] - inter
    values = 1.0 - inter / union
    values.flags.writeable = False
    return MnnrMatrix(values)
