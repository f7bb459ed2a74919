"""Persistent embedding store with exact parallel top-k cosine retrieval.

One append-only segment per modality; vectors live in a contiguous float32
block so a query is a single tensor product.  Search is exact brute force:
the scan may be partitioned across worker threads, and the merged result is
identical to the sequential scan (per-row scores do not depend on the
partitioning; ties break by insertion index).
"""
from __future__ import annotations

import struct
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fingerprints import DIMS, Embedding
from .media import MODALITY_BY_TAG, Modality

MAGIC = b"URIX"
VERSION = 1


class StoreError(Exception):
    pass


class DimMismatch(StoreError):
    pass


class EmptySegment(StoreError):
    pass


class BadStoreMagic(StoreError):
    pass


class VersionMismatch(StoreError):
    pass


class CorruptStore(StoreError):
    pass


@dataclass
class QueryResult:
    """Ranked (uri, cosine score) pairs, scores non-increasing."""

    hits: list[tuple[str, float]] = field(default_factory=list)

    def uris(self) -> list[str]:
        return [u for u, _ in self.hits]


def _scan(block: np.ndarray, q: np.ndarray) -> np.ndarray:
    return np.einsum("nd,d->n", block, q)


class _Segment:
    def __init__(self, dim: int):
        self.dim = dim
        self.count = 0
        self._buf = np.empty((16, dim), dtype=np.float32)
        self.uris: list[str] = []

    @property
    def matrix(self) -> np.ndarray:
        return self._buf[: self.count]

    def append(self, vec: np.ndarray, uri: str) -> int:
        if self.count == self._buf.shape[0]:
            grown = np.empty((self._buf.shape[0] * 2, self.dim), dtype=np.float32)
            grown[: self.count] = self._buf[: self.count]
            self._buf = grown
        self._buf[self.count] = vec
        self.uris.append(uri)
        self.count += 1
        return self.count - 1

    def truncate(self, count: int) -> None:
        self.count = min(self.count, count)
        del self.uris[self.count :]


class EmbeddingStore:
    """Per-modality vector segments with aligned URI lists."""

    def __init__(self):
        self._segments = {m: _Segment(d) for m, d in DIMS.items()}
        self._lock = threading.Lock()

    def segment_count(self, modality: Modality) -> int:
        return self._segments[modality].count

    def vector(self, modality: Modality, index: int) -> np.ndarray:
        seg = self._segments[modality]
        if not 0 <= index < seg.count:
            raise IndexError(index)
        return seg.matrix[index].copy()

    def uri_at(self, modality: Modality, index: int) -> str:
        return self._segments[modality].uris[index]

    def put(self, uri: str, embedding: Embedding) -> int:
        seg = self._segments[embedding.modality]
        if embedding.values.shape != (seg.dim,):
            raise DimMismatch(
                f"{embedding.values.shape[0]}-dim vector into {seg.dim}-dim segment"
            )
        with self._lock:
            return seg.append(embedding.values, uri)

    def set_uri(self, modality: Modality, index: int, uri: str) -> None:
        self._segments[modality].uris[index] = uri

    def truncate(self, modality: Modality, count: int) -> None:
        self._segments[modality].truncate(count)

    def topk(self, query: Embedding, k: int, workers: int = 1) -> QueryResult:
        """Exact top-k by cosine (dot product on unit vectors).

        Degenerate (zero) vectors score 0 against everything by construction.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        seg = self._segments[query.modality]
        with self._lock:
            count = seg.count
            matrix = seg.matrix  # snapshot view; appends only grow past `count`
            uris = list(seg.uris)
        if count == 0:
            raise EmptySegment(f"no {query.modality.value} vectors stored")
        q = query.values
        # einsum keeps each row's accumulation independent of the chunk shape,
        # so any partitioning reproduces the sequential scores bitwise
        if workers <= 1 or count < workers:
            scores = _scan(matrix, q)
        else:
            bounds = [(i * count) // workers for i in range(workers + 1)]
            chunks = [matrix[a:b] for a, b in zip(bounds, bounds[1:]) if a < b]
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(lambda block: _scan(block, q), chunks))
            scores = np.concatenate(parts)
        order = np.argsort(-scores, kind="stable")[:k]
        return QueryResult([(uris[i], float(scores[i])) for i in order])


# ---------------------------------------------------------------------------
# Serialization: URIX header + fixed-order segments of little-endian floats.


def save_store(store: EmbeddingStore, path: str | Path) -> None:
    path = Path(path)
    parts = [MAGIC, struct.pack("<I", VERSION)]
    for modality in sorted(DIMS, key=lambda m: m.tag):
        seg = store._segments[modality]
        parts.append(struct.pack("<BIQ", modality.tag, seg.dim, seg.count))
        parts.append(seg.matrix.astype("<f4").tobytes())
    path.write_bytes(b"".join(parts))


def load_store(path: str | Path) -> EmbeddingStore:
    """Rebuild vectors bit-exactly; URIs come from the registry sidecar."""
    data = Path(path).read_bytes()
    if len(data) < 8:
        raise CorruptStore("file shorter than header")
    if data[:4] != MAGIC:
        raise BadStoreMagic(f"magic {data[:4]!r}")
    (version,) = struct.unpack("<I", data[4:8])
    if version != VERSION:
        raise VersionMismatch(f"version {version}")
    store = EmbeddingStore()
    pos = 8
    for modality in sorted(DIMS, key=lambda m: m.tag):
        if pos + 13 > len(data):
            raise CorruptStore("truncated segment header")
        tag, dim, count = struct.unpack("<BIQ", data[pos : pos + 13])
        pos += 13
        if MODALITY_BY_TAG.get(tag) != modality:
            raise CorruptStore(f"unexpected segment tag {tag}")
        if dim != DIMS[modality]:
            raise CorruptStore(f"dim {dim} for {modality.value}")
        nbytes = count * dim * 4
        block = data[pos : pos + nbytes]
        if len(block) < nbytes:
            raise CorruptStore("vector block length mismatch")
        pos += nbytes
        seg = store._segments[modality]
        vecs = np.frombuffer(block, dtype="<f4").reshape(count, dim)
        for i in range(count):
            seg.append(vecs[i], "")
    if pos != len(data):
        raise CorruptStore("trailing bytes after last segment")
    return store
