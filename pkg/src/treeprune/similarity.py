"""Sentence embeddings behind a pluggable backend, and cosine scoring.

Three interchangeable backends satisfy the same laws (determinism, non-zero
vectors for non-empty text, fixed dimension): a word-vector-average backend
over a user-supplied vector file, a remote HTTP service client, and a
deterministic character-n-gram feature-hashing backend for offline use.
"""

from __future__ import annotations

import threading
import zlib
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Sequence

import numpy as np
import requests

from .errors import DegenerateVectorError, EmbeddingServiceError
from .validation import check_non_empty_text


class EmbeddingBackend(ABC):
    """Maps text to a fixed-dimension vector; deterministic within a run."""

    name: str = "backend"

    @property
    @abstractmethod
    def dimension(self) -> int | None:
        """Vector dimension; None only before a remote backend's first call."""

    @abstractmethod
    def embed(self, text: str) -> np.ndarray:
        """Embed one non-empty text."""

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        return [self.embed(t) for t in texts]


class HashingBackend(EmbeddingBackend):
    """Character n-gram counts hashed to a fixed dimension.

    Fully offline and stable across runs and platforms (crc32, not the
    salted builtin hash), which makes decoding runs reproducible.
    """

    name = "hash"

    def __init__(self, dimension: int = 256, ngram_sizes: Sequence[int] = (1, 2, 3)):
        if dimension < 1:
            raise ValueError("dimension must be positive")
        self._dimension = int(dimension)
        self.ngram_sizes = tuple(ngram_sizes)

    @property
    def dimension(self) -> int:
        return self._dimension

    def embed(self, text: str) -> np.ndarray:
        check_non_empty_text(text)
        vec = np.zeros(self._dimension, dtype=np.float64)
        data = text.encode("utf-8")
        for n in self.ngram_sizes:
            if len(data) < n:
                continue
            seed = zlib.crc32(bytes([n]))
            for i in range(len(data) - n + 1):
                vec[zlib.crc32(data[i : i + n], seed) % self._dimension] += 1.0
        if not vec.any():  # every text shorter than the smallest n-gram
            vec[zlib.crc32(data) % self._dimension] = 1.0
        return vec


class WordVectorBackend(EmbeddingBackend):
    """Arithmetic mean of per-word vectors; OOV words contribute nothing.

    A text whose words are all out of vocabulary embeds to the zero vector,
    which downstream scoring treats as similarity 0.
    """

    name = "wordvec"

    def __init__(self, vectors: dict[str, np.ndarray]):
        if not vectors:
            raise ValueError("vector table is empty")
        dims = {len(v) for v in vectors.values()}
        if len(dims) != 1:
            raise ValueError(f"inconsistent vector dimensions: {sorted(dims)}")
        self._dimension = dims.pop()
        self.vectors = {w: np.asarray(v, dtype=np.float64) for w, v in vectors.items()}

    @classmethod
    def from_file(cls, path: str | Path) -> "WordVectorBackend":
        """Load "word v1 v2 ... vd" lines; an optional "count dim" header is skipped."""
        vectors: dict[str, np.ndarray] = {}
        with open(path, encoding="utf-8") as fh:
            first = fh.readline()
            parts = first.split()
            if len(parts) == 2 and all(p.isdigit() for p in parts):
                pass  # header line
            elif parts:
                vectors[parts[0]] = np.array([float(x) for x in parts[1:]])
            for line in fh:
                parts = line.split()
                if not parts:
                    continue
                vectors[parts[0]] = np.array([float(x) for x in parts[1:]])
        return cls(vectors)

    @property
    def dimension(self) -> int:
        return self._dimension

    def embed(self, text: str) -> np.ndarray:
        check_non_empty_text(text)
        known = [self.vectors[w] for w in text.split() if w in self.vectors]
        if not known:
            return np.zeros(self._dimension, dtype=np.float64)
        return np.mean(known, axis=0)


class HttpEmbeddingBackend(EmbeddingBackend):
    """Client for a remote embedding service.

    Protocol: POST {base_url}/embed with {"texts": [...]}; the service
    answers 200 with {"vectors": [[...], ...]}. Any transport failure or
    non-200 status raises a retryable EmbeddingServiceError carrying the
    cause.
    """

    name = "http"

    def __init__(
        self,
        base_url: str,
        timeout: float = 10.0,
        dimension: int | None = None,
        session: requests.Session | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._dimension = dimension
        self._session = session or requests.Session()

    @property
    def dimension(self) -> int | None:
        return self._dimension

    def embed(self, text: str) -> np.ndarray:
        return self.embed_batch([text])[0]

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        for t in texts:
            check_non_empty_text(t)
        try:
            resp = self._session.post(
                f"{self.base_url}/embed", json={"texts": list(texts)}, timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise EmbeddingServiceError(f"embedding request failed: {exc}") from exc
        if resp.status_code != 200:
            raise EmbeddingServiceError(
                f"embedding service returned status {resp.status_code}"
            )
        try:
            vectors = resp.json()["vectors"]
        except (ValueError, KeyError) as exc:
            raise EmbeddingServiceError(
                f"malformed embedding response: {exc}", retryable=False
            ) from exc
        if len(vectors) != len(texts):
            raise EmbeddingServiceError(
                f"expected {len(texts)} vectors, got {len(vectors)}", retryable=False
            )
        out = [np.asarray(v, dtype=np.float64) for v in vectors]
        for v in out:
            if self._dimension is None:
                self._dimension = len(v)
            if len(v) != self._dimension:
                raise EmbeddingServiceError(
                    f"vector dimension {len(v)} != declared {self._dimension}",
                    retryable=False,
                )
        return out


class CachingBackend(EmbeddingBackend):
    """Memoizing wrapper keyed by the exact text; safe for concurrent use."""

    def __init__(self, inner: EmbeddingBackend):
        self.inner = inner
        self.name = inner.name
        self._cache: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    @property
    def dimension(self) -> int | None:
        return self.inner.dimension

    def embed(self, text: str) -> np.ndarray:
        with self._lock:
            hit = self._cache.get(text)
        if hit is not None:
            return hit
        vec = self.inner.embed(text)
        with self._lock:
            self._cache[text] = vec
        return vec

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        with self._lock:
            missing = [t for t in texts if t not in self._cache]
        missing = list(dict.fromkeys(missing))
        if missing:
            fresh = self.inner.embed_batch(missing)
            with self._lock:
                self._cache.update(zip(missing, fresh))
        with self._lock:
            return [self._cache[t] for t in texts]


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine of two same-dimension vectors, in [-1, 1].

    Raises DegenerateVectorError for an all-zero vector; the similarity
    scorer substitutes 0 for that case.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise DegenerateVectorError("cosine undefined for a zero vector")
    value = float(np.dot(u, v)) / (nu * nv)
    return max(-1.0, min(1.0, value))


def similarity_score(backend: EmbeddingBackend, original: str, candidate: str) -> float:
    """Clamped cosine similarity of two texts, in [0, 1].

    Negative cosine clamps to 0; zero-vector embeddings score 0. Identical
    strings score exactly 1.0 (float square roots do not guarantee that).
    """
    check_non_empty_text(original, "original")
    check_non_empty_text(candidate, "candidate")
    if original == candidate:
        return 1.0
    e_orig, e_cand = backend.embed_batch([original, candidate])
    try:
        value = cosine(e_orig, e_cand)
    except DegenerateVectorError:
        return 0.0
    return max(0.0, value)
