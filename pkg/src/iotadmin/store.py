"""Chunk-vector store with exact top-k cosine retrieval and JSONL persistence.

Retrieval is an exact linear scan (desk-scale corpora; correctness over
throughput). Ties break by ascending chunk id. Persistence is one JSON
object per line behind a header line ``{"schema": 1, "dim": N}``; floats
round-trip exactly through repr.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .corpus import Chunk
from .errors import DegenerateInputError, IntegrityError, StoreFormatError

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class StoredEntry:
    chunk: Chunk
    vector: np.ndarray


@dataclass(frozen=True)
class Hit:
    chunk_id: str
    score: float


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """dot(u, v) / (|u| |v|), clipped into [-1, 1]."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise IntegrityError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise DegenerateInputError("cosine undefined for zero vectors")
    return float(np.clip(float(u @ v) / (nu * nv), -1.0, 1.0))


class VectorStore:
    """In-memory store of (chunk, vector) rows keyed by chunk id.

    Concurrency: a single lock serializes writers; readers take snapshots of
    the scan matrix, so many readers or one writer behave correctly.
    """

    def __init__(self, dim: int, path: str | Path | None = None):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self.path = Path(path) if path is not None else None
        self._entries: dict[str, StoredEntry] = {}
        self._lock = threading.Lock()
        self._matrix: np.ndarray | None = None
        self._norms: np.ndarray | None = None
        self._ids: list[str] = []

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, chunk_id: str) -> bool:
        return chunk_id in self._entries

    def get_chunk(self, chunk_id: str) -> Chunk:
        return self._entries[chunk_id].chunk

    # -- writes ------------------------------------------------------------

    def upsert(self, entries: list[StoredEntry]) -> int:
        """Add entries whose chunk id is new; existing ids are left untouched.

        The batch is validated before any mutation, so a dimension error
        rejects it atomically. Returns the number of ids added; persists
        after the batch when the store is bound to a path.
        """
        for e in entries:
            vec = np.asarray(e.vector, dtype=np.float64)
            if vec.shape != (self.dim,):
                raise IntegrityError(
                    f"vector for {e.chunk.id} has dim {vec.shape}, store dim is {self.dim}")
            if not np.all(np.isfinite(vec)):
                raise IntegrityError(f"vector for {e.chunk.id} has non-finite values")
            if float(np.linalg.norm(vec)) == 0.0:
                raise IntegrityError(f"vector for {e.chunk.id} is all zeros")
        added = 0
        with self._lock:
            for e in entries:
                if e.chunk.id in self._entries:
                    continue
                vec = np.asarray(e.vector, dtype=np.float64).copy()
                self._entries[e.chunk.id] = StoredEntry(e.chunk, vec)
                added += 1
            if added:
                self._matrix = None
            if self.path is not None:
                self._persist_locked(self.path)
        return added

    # -- reads -------------------------------------------------------------

    def _scan_arrays(self):
        with self._lock:
            if self._matrix is None:
                self._ids = list(self._entries.keys())
                self._matrix = np.stack([self._entries[i].vector for i in self._ids]) \
                    if self._ids else np.zeros((0, self.dim))
                self._norms = np.linalg.norm(self._matrix, axis=1) if self._ids \
                    else np.zeros(0)
            return self._ids, self._matrix, self._norms

    def top_k(self, query: np.ndarray, k: int) -> list[Hit]:
        """Exact top-k by cosine; ties break by ascending chunk id."""
        if k < 1:
            raise ValueError("k must be >= 1")
        query = np.asarray(query, dtype=np.float64)
        if query.shape != (self.dim,):
            raise IntegrityError(f"query dim {query.shape} does not match store dim {self.dim}")
        if float(np.linalg.norm(query)) == 0.0:
            raise DegenerateInputError("query vector is all zeros")
        ids, matrix, norms = self._scan_arrays()
        if not ids:
            return []
        scores = _kernels.cosine_scores(matrix, norms, query)
        order = sorted(range(len(ids)), key=lambda i: (-scores[i], ids[i]))[:k]
        return [Hit(ids[i], float(scores[i])) for i in order]

    # -- persistence ---------------------------------------------------------

    def persist(self, path: str | Path | None = None) -> Path:
        """Write the store atomically (temp file + rename)."""
        target = Path(path) if path is not None else self.path
        if target is None:
            raise ValueError("no path bound to this store")
        with self._lock:
            return self._persist_locked(target)

    def _persist_locked(self, target: Path) -> Path:
        tmp = target.with_name(target.name + ".tmp")
        with tmp.open("w", encoding="utf-8") as fh:
            fh.write(json.dumps({"schema": SCHEMA_VERSION, "dim": self.dim}) + "\n")
            for entry in self._entries.values():
                c = entry.chunk
                fh.write(json.dumps({
                    "id": c.id, "source": c.source_id, "page": c.page, "seq": c.seq,
                    "text": c.text, "span": list(c.char_span),
                    "vector": entry.vector.tolist(),
                }, ensure_ascii=False) + "\n")
        os.replace(tmp, target)
        return target

    @classmethod
    def load(cls, path: str | Path) -> "VectorStore":
        """Read a persisted store; a corrupt file names the first bad line."""
        path = Path(path)
        with path.open("r", encoding="utf-8") as fh:
            header_line = fh.readline()
            if not header_line.strip():
                raise StoreFormatError("missing header", line=1)
            try:
                header = json.loads(header_line)
                dim = int(header["dim"])
                if header.get("schema") != SCHEMA_VERSION:
                    raise KeyError("schema")
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise StoreFormatError(f"bad header: {exc}", line=1) from exc
            store = cls(dim)
            for lineno, line in enumerate(fh, start=2):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    chunk = Chunk(
                        id=rec["id"], source_id=rec["source"], page=int(rec["page"]),
                        seq=int(rec["seq"]), text=rec["text"],
                        char_span=tuple(rec.get("span", (0, len(rec["text"])))),
                    )
                    vec = np.asarray(rec["vector"], dtype=np.float64)
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise StoreFormatError(f"bad record: {exc}", line=lineno) from exc
                if vec.shape != (dim,):
                    raise StoreFormatError(
                        f"vector dim {vec.shape} does not match header dim {dim}",
                        line=lineno)
                store._entries[chunk.id] = StoredEntry(chunk, vec)
        store.path = path
        return store
