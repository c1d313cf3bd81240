"""Worker-count resolution and deterministic row-parallel execution.

SIM_THREADS caps the worker count; 0 or unset means auto (one worker per
CPU). Workers write disjoint row ranges of a preallocated output, so the
result is identical for any worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

from .types import ValidationError


def worker_count(n_rows: int) -> int:
    raw = os.environ.get("SIM_THREADS", "0").strip() or "0"
    try:
        requested = int(raw)
    except ValueError:
        raise ValidationError(f"SIM_THREADS must be an integer, got {raw!r}")
    if requested < 0:
        raise ValidationError("SIM_THREADS must be >= 0")
    if requested == 0:
        requested = os.cpu_count() or 1
    return max(1, min(requested, n_rows))


def run_rows(fn, n_rows: int) -> None:
    """Call fn(row0, row1) over a partition of range(n_rows), possibly from
    multiple threads. fn must only write rows in its own range."""
    workers = worker_count(n_rows)
    if workers == 1 or n_rows < 2:
        fn(0, n_rows)
        return
    step = -(-n_rows // workers)
    bounds = [(r, min(r + step, n_rows)) for r in range(0, n_rows, step)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for future in [pool.submit(fn, r0, r1) for r0, r1 in bounds]:
            future.result()
