"""Writer for the .sseb embedding format.

Little-endian header (magic "SSEB", u32 version, u32 dim, u64 count)
followed by row-major float32 data; ids go in a companion text file,
one per line, aligned with the rows. The layout matches what the
curation pipeline loads, byte for byte.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Sequence

import numpy as np

MAGIC = b"SSEB"
VERSION = 1
_HEADER = struct.Struct("<4sIIQ")


def write_sseb(data_path, ids_path, ids: Sequence[str], rows: np.ndarray, dim: int) -> None:
    """Write rows and ids. `dim` is passed separately so an empty job
    still produces a well-formed header."""
    rows = np.asarray(rows, dtype="<f4")
    if rows.size == 0:
        rows = rows.reshape(0, dim)
    if rows.ndim != 2 or rows.shape[1] != dim:
        raise ValueError(f"expected rows of dim {dim}, got shape {rows.shape}")
    if len(ids) != rows.shape[0]:
        raise ValueError(f"{len(ids)} ids for {rows.shape[0]} rows")
    header = _HEADER.pack(MAGIC, VERSION, dim, rows.shape[0])
    Path(data_path).write_bytes(header + rows.tobytes(order="C"))
    Path(ids_path).write_text("".join(f"{i}\n" for i in ids), encoding="utf-8")


def read_rows(data_path) -> np.ndarray:
    """Read back the raw float32 rows, mainly for checks in tests."""
    blob = Path(data_path).read_bytes()
    magic, version, dim, count = _HEADER.unpack_from(blob)
    if magic != MAGIC or version != VERSION:
        raise ValueError(f"{data_path}: not a readable .sseb file")
    return np.frombuffer(blob, dtype="<f4", offset=_HEADER.size).reshape(count, dim)
