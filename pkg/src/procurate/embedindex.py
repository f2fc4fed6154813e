"""Embedding storage and exact nearest-neighbor retrieval.

The on-disk format (.sseb) is a little-endian header followed by raw
float32 rows:

    magic   4 bytes  "SSEB"
    version u32      currently 1
    dim     u32      columns per row
    count   u64      number of rows
    data    count * dim * f32, row major

Ids live in a companion text file, UTF-8, one id per line, aligned with
the rows. Rows are L2-normalized at load time and similarities are
plain dot products, accumulated dimension by dimension in float64 so
results do not depend on BLAS reduction order. Retrieval is exact brute
force; ties are broken by id ascending, which keeps output stable
across machines and worker counts.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

MAGIC = b"SSEB"
VERSION = 1
_HEADER = struct.Struct("<4sIIQ")


class EmbeddingFormatError(ValueError):
    """The .sseb file or its id companion is unusable."""


@dataclass(frozen=True)
class NeighborHit:
    id: str
    similarity: float


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    """Unit-norm float32 rows with aligned string ids."""

    ids: tuple[str, ...]
    rows: np.ndarray  # (count, dim) float32, L2-normalized
    id_rank: np.ndarray = field(repr=False, default=None)  # rank of each row's id

    def __post_init__(self):
        if self.id_rank is None:
            order = sorted(range(len(self.ids)), key=lambda i: self.ids[i])
            rank = np.empty(len(self.ids), dtype=np.int64)
            for r, i in enumerate(order):
                rank[i] = r
            object.__setattr__(self, "id_rank", rank)

    @property
    def dim(self) -> int:
        return int(self.rows.shape[1])

    @property
    def count(self) -> int:
        return int(self.rows.shape[0])

    def row_for(self, id: str) -> np.ndarray:
        try:
            return self.rows[self.ids.index(id)]
        except ValueError:
            raise KeyError(id) from None

    def select(self, wanted: Sequence[str]) -> "EmbeddingMatrix":
        """Sub-matrix for the given ids, in the given order."""
        index = {id: i for i, id in enumerate(self.ids)}
        missing = [w for w in wanted if w not in index]
        if missing:
            raise KeyError(f"ids not in matrix: {missing[:5]}{'...' if len(missing) > 5 else ''}")
        picks = [index[w] for w in wanted]
        return EmbeddingMatrix(ids=tuple(wanted), rows=self.rows[picks])


def _normalize_rows(raw: np.ndarray, source: str) -> np.ndarray:
    rows = raw.astype(np.float64)
    norms = np.zeros(rows.shape[0], dtype=np.float64)
    for d in range(rows.shape[1]):
        norms += rows[:, d] * rows[:, d]
    norms = np.sqrt(norms)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise EmbeddingFormatError(f"{source}: zero vector at row {int(zero[0])}")
    return (rows / norms[:, None]).astype(np.float32)


def load_embeddings(data_path, ids_path) -> EmbeddingMatrix:
    """Read a .sseb file plus its id list and normalize the rows."""
    data_path = Path(data_path)
    ids_path = Path(ids_path)
    blob = data_path.read_bytes()
    if len(blob) < _HEADER.size:
        raise EmbeddingFormatError(f"{data_path.name}: truncated header")
    magic, version, dim, count = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise EmbeddingFormatError(f"{data_path.name}: bad magic {magic!r}")
    if version != VERSION:
        raise EmbeddingFormatError(f"{data_path.name}: unsupported version {version}")
    if dim == 0:
        raise EmbeddingFormatError(f"{data_path.name}: dim must be positive")
    expected = _HEADER.size + count * dim * 4
    if len(blob) != expected:
        raise EmbeddingFormatError(
            f"{data_path.name}: expected {expected} bytes for {count}x{dim}, found {len(blob)}"
        )

    ids = ids_path.read_text(encoding="utf-8").splitlines()
    if len(ids) != count:
        raise EmbeddingFormatError(
            f"{ids_path.name}: {len(ids)} ids for {count} rows"
        )
    if len(set(ids)) != len(ids):
        raise EmbeddingFormatError(f"{ids_path.name}: duplicate ids")

    raw = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size).reshape(count, dim)
    if count:
        rows = _normalize_rows(raw, data_path.name)
    else:
        rows = raw.reshape(0, dim).astype(np.float32)
    return EmbeddingMatrix(ids=tuple(ids), rows=rows)


def write_embeddings(data_path, ids_path, ids: Sequence[str], rows: np.ndarray) -> None:
    """Write rows as .sseb plus the id companion. Rows are stored as
    given; normalization happens on load."""
    rows = np.asarray(rows, dtype=np.float32)
    if rows.ndim != 2:
        raise ValueError("rows must be a 2d array")
    if len(ids) != rows.shape[0]:
        raise ValueError(f"{len(ids)} ids for {rows.shape[0]} rows")
    header = _HEADER.pack(MAGIC, VERSION, rows.shape[1], rows.shape[0])
    Path(data_path).write_bytes(header + rows.astype("<f4").tobytes())
    Path(ids_path).write_text("".join(f"{i}\n" for i in ids), encoding="utf-8")


def query(matrix: EmbeddingMatrix, vector: np.ndarray, k: int) -> list[NeighborHit]:
    """Exact top-k rows by cosine similarity.

    The query is normalized first (zero vectors are rejected), then
    dotted against every stored row with per-dimension float64
    accumulation. Results are sorted by similarity descending, ties by
    id ascending; k larger than the corpus returns everything.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    q = np.asarray(vector, dtype=np.float64).reshape(-1)
    if q.shape[0] != matrix.dim:
        raise ValueError(f"query dim {q.shape[0]} does not match matrix dim {matrix.dim}")
    norm = 0.0
    for d in range(q.shape[0]):
        norm += q[d] * q[d]
    if norm == 0.0:
        raise ValueError("query vector has zero norm")
    q = q / np.sqrt(norm)

    sims = np.zeros(matrix.count, dtype=np.float64)
    for d in range(matrix.dim):
        sims += matrix.rows[:, d].astype(np.float64) * q[d]

    take = min(k, matrix.count)
    if take == 0:
        return []
    # lexsort uses the last key as primary: similarity desc, then id rank
    order = np.lexsort((matrix.id_rank, -sims))[:take]
    return [NeighborHit(id=matrix.ids[i], similarity=float(sims[i])) for i in order]
