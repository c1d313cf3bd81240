"""Pure-numpy implementations of the hot kernels.

These are the fallback selected when the compiled extension is unavailable
(or SIM_FORCE_PYTHON is set). Both backends must produce bit-identical
output: the path mean sums the k cheapest costs in ascending order with a
strictly sequential reduction (cumsum here, a scalar loop in the native
kernel), and the overlap counts are exact integer sums.
"""

from __future__ import annotations

import numpy as np

# Cap scratch memory per block at ~64 MB of float64.
_BLOCK_BUDGET = 8_000_000


def sgr_path_means(cross, nbr_idx, nbr_w, big_k, out, row0, row1):
    """Fill out[row0:row1] with the mean of the big_k cheapest one-stop paths.

    For query row i and gallery target j the candidate costs are
    cross[i, nbr_idx[j, a]] + nbr_w[j, a] over the adjacency slots a.
    """
    n_gallery, width = nbr_idx.shape
    rows_per_block = max(1, _BLOCK_BUDGET // max(1, n_gallery * width))
    for r0 in range(row0, row1, rows_per_block):
        r1 = min(r0 + rows_per_block, row1)
        costs = cross[r0:r1][:, nbr_idx] + nbr_w[None, :, :]
        costs.sort(axis=2)
        out[r0:r1] = np.cumsum(costs[:, :, :big_k], axis=2)[:, :, -1] / big_k


def overlap_counts(members, setmat, out, row0, row1):
    """Fill out[row0:row1] with intersection sizes.

    out[i, j] = |members[i] ∩ set j| where setmat[j, t] != 0 marks t as a
    member of set j. members holds gallery indices, one fixed-width row per
    query.
    """
    k = members.shape[1]
    n_sets = setmat.shape[0]
    rows_per_block = max(1, _BLOCK_BUDGET // max(1, k * n_sets))
    lookup = setmat.T  # (n_gallery, n_sets)
    for r0 in range(row0, row1, rows_per_block):
        r1 = min(r0 + rows_per_block, row1)
        picked = lookup[members[r0:r1]]  # (rows, k, n_sets) uint8
        out[r0:r1] = picked.sum(axis=1, dtype=np.int64)
