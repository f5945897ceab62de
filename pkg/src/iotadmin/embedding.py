"""Embedding gateway: a deterministic local stub and a remote HTTP client.

Both expose the same contract: ``embed`` maps texts to fixed-dimension
vectors (order preserved, deterministic per configuration) and
``embed_tokens`` yields one vector per surface token.

Wire contract (canonical):
    POST {base}/v1/embed        {"texts": [...]}  -> {"vectors": [[...], ...]}
    POST {base}/v1/embed_tokens {"text": "..."}   -> {"tokens": [...], "vectors": [[...], ...]}
"""

from __future__ import annotations

import hashlib
import logging
import time
from dataclasses import dataclass

import numpy as np
import requests

from .errors import CapabilityError, DegenerateInputError, IntegrityError, TransportError

logger = logging.getLogger(__name__)

DEFAULT_DIM = 256
MAX_BATCH = 64
RETRY_ATTEMPTS = 3
RETRY_BACKOFF_S = 0.25


@dataclass(frozen=True)
class TokenEmbedding:
    token: str
    vector: np.ndarray


def _check_texts(texts: list[str]) -> None:
    if not texts:
        raise ValueError("texts must be a non-empty list")
    if any(not t for t in texts):
        raise ValueError("every text must be non-empty")


def stub_embed(text: str, dim: int = DEFAULT_DIM) -> np.ndarray:
    """Feature-hashed bag of whitespace tokens, L2-normalized.

    Each token adds +1 or -1 (sign from the hash) to bucket sha256(token)
    mod dim. Deterministic across processes: no salted hashing.
    """
    if dim < 8:
        raise ValueError("dim must be >= 8")
    tokens = text.split()
    if not tokens:
        raise DegenerateInputError("text has no tokens to embed")
    vec = np.zeros(dim, dtype=np.float64)
    for tok in tokens:
        h = hashlib.sha256(tok.encode("utf-8")).digest()
        bucket = int.from_bytes(h[:8], "little") % dim
        sign = 1.0 if (h[8] & 1) == 0 else -1.0
        vec[bucket] += sign
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        # opposite-sign collisions cancelled every bucket
        raise DegenerateInputError("token hashes cancelled to a zero vector")
    return vec / norm


class StubEmbedder:
    """Pure-function embedder used by tests and offline runs."""

    def __init__(self, dim: int = DEFAULT_DIM):
        self.dim = dim

    def embed(self, texts: list[str]) -> list[np.ndarray]:
        _check_texts(texts)
        return [stub_embed(t, self.dim) for t in texts]

    def embed_tokens(self, text: str) -> list[TokenEmbedding]:
        if not text:
            raise ValueError("text must be non-empty")
        tokens = text.split()
        if not tokens:
            raise DegenerateInputError("text has no tokens")
        return [TokenEmbedding(tok, stub_embed(tok, self.dim)) for tok in tokens]


class RemoteEmbedder:
    """HTTP client for an inference server speaking the canonical contract.

    Transient failures are retried up to 3 attempts with exponential backoff
    starting at 250 ms; exhaustion raises TransportError with the attempt
    count. Vectors of the wrong dimension raise IntegrityError.
    """

    def __init__(self, base_url: str, dim: int, timeout: float = 30.0,
                 session: requests.Session | None = None):
        self.base_url = base_url.rstrip("/")
        self.dim = dim
        self.timeout = timeout
        self.session = session or requests.Session()

    def _post(self, path: str, payload: dict) -> dict:
        url = f"{self.base_url}{path}"
        last: Exception | None = None
        for attempt in range(1, RETRY_ATTEMPTS + 1):
            try:
                resp = self.session.post(url, json=payload, timeout=self.timeout)
            except requests.RequestException as exc:
                last = exc
            else:
                if resp.status_code in (404, 501):
                    raise CapabilityError(f"{url} not supported by endpoint")
                if resp.status_code >= 500:
                    last = RuntimeError(f"server error {resp.status_code}")
                elif resp.status_code >= 400:
                    raise IntegrityError(f"{url} rejected request: {resp.status_code} {resp.text[:200]}")
                else:
                    return resp.json()
            if attempt < RETRY_ATTEMPTS:
                time.sleep(RETRY_BACKOFF_S * (2 ** (attempt - 1)))
        raise TransportError(f"POST {url} failed: {last}", attempts=RETRY_ATTEMPTS)

    def _to_vector(self, values) -> np.ndarray:
        vec = np.asarray(values, dtype=np.float64)
        if vec.shape != (self.dim,):
            raise IntegrityError(f"endpoint returned dim {vec.shape}, expected {self.dim}")
        if not np.all(np.isfinite(vec)):
            raise IntegrityError("endpoint returned non-finite values")
        return vec

    def embed(self, texts: list[str]) -> list[np.ndarray]:
        _check_texts(texts)
        out: list[np.ndarray] = []
        for i in range(0, len(texts), MAX_BATCH):
            batch = texts[i:i + MAX_BATCH]
            body = self._post("/v1/embed", {"texts": batch})
            vectors = body.get("vectors")
            if not isinstance(vectors, list) or len(vectors) != len(batch):
                raise IntegrityError("embed response must carry one vector per text")
            out.extend(self._to_vector(v) for v in vectors)
        return out

    def embed_tokens(self, text: str) -> list[TokenEmbedding]:
        if not text:
            raise ValueError("text must be non-empty")
        body = self._post("/v1/embed_tokens", {"text": text})
        tokens, vectors = body.get("tokens"), body.get("vectors")
        if not isinstance(tokens, list) or not isinstance(vectors, list) \
                or len(tokens) != len(vectors):
            raise IntegrityError("embed_tokens response must pair tokens with vectors")
        return [TokenEmbedding(t, self._to_vector(v)) for t, v in zip(tokens, vectors)]


def make_embedder(endpoint: str, dim: int = DEFAULT_DIM):
    """"stub" selects the local embedder; anything else is a base URL."""
    if endpoint == "stub":
        return StubEmbedder(dim)
    return RemoteEmbedder(endpoint, dim)
