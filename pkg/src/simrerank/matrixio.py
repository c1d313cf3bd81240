"""File formats: the SIMM binary matrix, registry sidecars, rankings, and
evaluation reports.

SIMM layout, all little-endian: magic "SIMM", version u16 = 1, rows u32,
cols u32, then rows*cols row-major float32 values. The binary format is
authoritative; CSV import (header line "rows,cols", then one row per line)
exists for interoperability. All text output uses fixed 6-decimal
formatting, never locale-dependent.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Sequence

import numpy as np

from .evaluation import EvalReport
from .types import EmbeddingSet, Modality, SampleId, ValidationError

MAGIC = b"SIMM"
VERSION = 1
_HEADER = struct.Struct("<4sHII")


class FormatError(ValueError):
    """A file does not conform to its declared format."""


def write_matrix(path: str | Path, values: np.ndarray) -> None:
    """Write a 2-D array as a SIMM file (values stored as float32)."""
    values = np.atleast_2d(np.asarray(values))
    rows, cols = values.shape
    payload = np.ascontiguousarray(values, dtype="<f4").tobytes()
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, VERSION, rows, cols))
        f.write(payload)


def read_matrix(path: str | Path) -> np.ndarray:
    """Read a SIMM file back as float32, bit-exact with what was stored."""
    with open(path, "rb") as f:
        header = f.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise FormatError(f"bad matrix header: {path}")
        magic, version, rows, cols = _HEADER.unpack(header)
        if magic != MAGIC or version != VERSION:
            raise FormatError(f"bad matrix header: {path}")
        payload = f.read()
    expected = rows * cols * 4
    if len(payload) != expected:
        raise FormatError(
            f"matrix payload of {path} is {len(payload)} bytes, expected {expected}"
        )
    return np.frombuffer(payload, dtype="<f4").reshape(rows, cols).copy()


def read_matrix_csv(path: str | Path) -> np.ndarray:
    """CSV import: header "rows,cols", then comma-separated decimal rows."""
    with open(path, "r", encoding="utf-8") as f:
        lines = [ln.strip() for ln in f if ln.strip()]
    if not lines:
        raise FormatError(f"empty csv matrix: {path}")
    try:
        rows, cols = (int(x) for x in lines[0].split(","))
    except ValueError:
        raise FormatError(f"bad csv matrix header of {path}: {lines[0]!r}")
    if len(lines) - 1 != rows:
        raise FormatError(f"csv matrix {path} has {len(lines) - 1} rows, header says {rows}")
    try:
        values = np.array(
            [[float(x) for x in ln.split(",")] for ln in lines[1:]], dtype=np.float64
        )
    except ValueError:
        raise FormatError(f"non-numeric value in csv matrix {path}")
    if values.size and values.shape[1] != cols:
        raise FormatError(f"csv matrix {path} row width does not match header")
    return values


def load_matrix(path: str | Path) -> np.ndarray:
    """Load a matrix by sniffing: SIMM magic first, .csv extension second."""
    p = Path(path)
    with open(p, "rb") as f:
        head = f.read(4)
    if head == MAGIC:
        return read_matrix(p).astype(np.float64)
    if p.suffix.lower() == ".csv":
        return read_matrix_csv(p)
    raise FormatError(f"bad matrix header: {p}")


def write_registry(path: str | Path, samples: Sequence[SampleId]) -> None:
    """One line per sample: index,person,modality,camera (camera may be empty)."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for s in samples:
            camera = "" if s.camera is None else str(s.camera)
            f.write(f"{s.index},{s.person},{s.modality.value},{camera}\n")


def read_registry(path: str | Path) -> tuple[SampleId, ...]:
    """Parse a registry file; non-integer person labels are mapped to integers
    by first appearance order."""
    samples = []
    label_map: dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) not in (3, 4):
                raise FormatError(f"{path}:{lineno}: expected 3 or 4 fields")
            idx_s, person_s, modality_s = parts[0], parts[1], parts[2]
            camera_s = parts[3] if len(parts) == 4 else ""
            try:
                index = int(idx_s)
            except ValueError:
                raise FormatError(f"{path}:{lineno}: bad index {idx_s!r}")
            try:
                person = int(person_s)
            except ValueError:
                person = label_map.setdefault(person_s, len(label_map))
            try:
                modality = Modality(modality_s)
            except ValueError:
                raise FormatError(f"{path}:{lineno}: bad modality {modality_s!r}")
            camera = None
            if camera_s:
                try:
                    camera = int(camera_s)
                except ValueError:
                    raise FormatError(f"{path}:{lineno}: bad camera {camera_s!r}")
            samples.append(SampleId(index, person, modality, camera))
    if not samples:
        raise FormatError(f"empty registry: {path}")
    return tuple(samples)


def placeholder_registry(n: int, modality: Modality) -> tuple[SampleId, ...]:
    """Registry for matrices supplied without identity labels (person -1)."""
    return tuple(SampleId(i, -1, modality) for i in range(n))


def load_embeddings(
    matrix_path: str | Path, registry_path: str | Path | None, modality: Modality
) -> EmbeddingSet:
    """Embeddings from a SIMM matrix plus an optional registry sidecar."""
    vectors = load_matrix(matrix_path)
    if registry_path is None:
        samples = placeholder_registry(vectors.shape[0], modality)
    else:
        samples = read_registry(registry_path)
        if len(samples) != vectors.shape[0]:
            raise FormatError(
                f"registry {registry_path} has {len(samples)} lines for "
                f"{vectors.shape[0]} matrix rows"
            )
    return EmbeddingSet(samples, vectors)


def write_rankings(path: str | Path, rankings: np.ndarray) -> None:
    """Per query: its index followed by gallery indices in rank order."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for i, row in enumerate(np.asarray(rankings)):
            f.write(" ".join([str(i)] + [str(int(g)) for g in row]) + "\n")


def format_report(report: EvalReport, ranks: Sequence[int] = (1, 5, 10, 20)) -> str:
    lines = [f"mAP: {report.map:.6f}"]
    for r in ranks:
        if r <= len(report.cmc):
            lines.append(f"rank-{r}: {report.cmc[r - 1]:.6f}")
    lines.append(f"trials: {report.trials}")
    lines.append(f"seed: {report.seed}")
    lines.append(f"excluded-queries: {report.excluded}")
    return "\n".join(lines) + "\n"


def write_report(path: str | Path, report: EvalReport) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(format_report(report))


def write_sweep_csv(path: str | Path, rows: Sequence[tuple[str, float, float, float]]) -> None:
    """Sweep table: param,value,map,rank1 with fixed 6-decimal formatting."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("param,value,map,rank1\n")
        for param, value, map_, rank1 in rows:
            f.write(f"{param},{value:g},{map_:.6f},{rank1:.6f}\n")
