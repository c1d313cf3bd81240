"""Hot-kernel backend selection.

The compiled extension is preferred when importable; the pure-numpy
implementation is the fallback. Setting SIM_FORCE_PYTHON=1 forces the
fallback (used by the benchmark and the parity tests). Both backends
produce bit-identical results, so the choice never changes output.
"""

from __future__ import annotations

import importlib
import os

import numpy as np

from . import pyimpl

_native = None
if os.environ.get("SIM_FORCE_PYTHON", "").strip().lower() not in {"1", "true", "yes"}:
    try:
        _native = importlib.import_module("._native", __package__)
    except ImportError:
        _native = None

_impl = _native if _native is not None else pyimpl


def backend() -> str:
    """Name of the active backend: "native" or "python"."""
    return "native" if _impl is not pyimpl else "python"


def sgr_path_means(cross, nbr_idx, nbr_w, big_k, out, row0=0, row1=None):
    """out[i, j] = mean of the big_k cheapest cross[i, t] + nbr_w[j, a] costs,
    t = nbr_idx[j, a], for rows row0 <= i < row1."""
    if row1 is None:
        row1 = cross.shape[0]
    _impl.sgr_path_means(cross, nbr_idx, nbr_w, int(big_k), out, row0, row1)


def overlap_counts(members, setmat, out, row0=0, row1=None):
    """out[i, j] = |{t in members[i]} ∩ {t : setmat[j, t] != 0}| for rows
    row0 <= i < row1."""
    if row1 is None:
        row1 = members.shape[0]
    _impl.overlap_counts(members, setmat, out, row0, row1)


def as_kernel_inputs(cross, nbr_idx, nbr_w):
    """Coerce graph arrays to the layouts both backends accept."""
    return (
        np.ascontiguousarray(cross, dtype=np.float64),
        np.ascontiguousarray(nbr_idx, dtype=np.int64),
        np.ascontiguousarray(nbr_w, dtype=np.float64),
    )
