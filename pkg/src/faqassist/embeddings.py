"""Embedding providers and the vector sidecar file format.

Production setups precompute vectors with external encoders and ship them
in a plain-text sidecar:

    dim=<d>
    faq:<id> f1 f2 ... fd
    silence  f1 f2 ... fd
    query:<sha256-of-query-text> f1 f2 ... fd

SidecarEmbeddingProvider serves those vectors. HashedBagOfWordsProvider is
a deterministic, dependency-free stand-in that hashes tokens into a fixed
number of buckets; it exercises the dense ranking path without any neural
encoder.
"""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import NO_SUGGESTION, FaqDatabase
from .errors import DataError
from .retrieval import CandidateClass, EmbeddingProvider, build_passage, tokenize

SILENCE_KEY = "silence"

#: Surrogate text standing in for the silence candidate wherever a text is
#: required (hashed embeddings, exported training pairs).
SILENCE_TEXT = NO_SUGGESTION


def query_key(text: str) -> str:
    """Sidecar key for a query: 'query:' plus the SHA-256 of its text."""
    return "query:" + hashlib.sha256(text.encode("utf-8")).hexdigest()


def faq_key(faq_id: int) -> str:
    return f"faq:{faq_id}"


def write_embedding_sidecar(
    path: str | Path, dimension: int, entries: Mapping[str, Sequence[float]]
) -> None:
    with Path(path).open("w", encoding="utf-8") as handle:
        handle.write(f"dim={dimension}\n")
        for key, vector in entries.items():
            if len(vector) != dimension:
                raise DataError(
                    f"vector for {key!r} has {len(vector)} components, "
                    f"expected {dimension}"
                )
            handle.write(key + " " + " ".join(repr(float(x)) for x in vector) + "\n")


def read_embedding_sidecar(path: str | Path) -> tuple[int, dict[str, np.ndarray]]:
    vectors: dict[str, np.ndarray] = {}
    with Path(path).open("r", encoding="utf-8") as handle:
        header = handle.readline().strip()
        if not header.startswith("dim="):
            raise DataError(f"{path}:1: expected 'dim=<d>' header, got {header!r}")
        try:
            dimension = int(header[4:])
        except ValueError:
            raise DataError(f"{path}:1: bad dimension in {header!r}") from None
        if dimension <= 0:
            raise DataError(f"{path}:1: dimension must be positive")
        for lineno, line in enumerate(handle, start=2):
            parts = line.split()
            if not parts:
                continue
            key, raw = parts[0], parts[1:]
            if len(raw) != dimension:
                raise DataError(
                    f"{path}:{lineno}: {key!r} has {len(raw)} components, "
                    f"expected {dimension}"
                )
            try:
                vectors[key] = np.array([float(x) for x in raw])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: bad float: {exc}") from exc
    return dimension, vectors


class SidecarEmbeddingProvider(EmbeddingProvider):
    """Serves precomputed vectors keyed by FAQ id, silence, or query hash."""

    def __init__(self, dimension: int, vectors: Mapping[str, np.ndarray]):
        self._dimension = dimension
        self._vectors = dict(vectors)

    @classmethod
    def load(cls, path: str | Path) -> "SidecarEmbeddingProvider":
        dimension, vectors = read_embedding_sidecar(path)
        return cls(dimension, vectors)

    @property
    def dimension(self) -> int:
        return self._dimension

    def _get(self, key: str, what: str) -> np.ndarray:
        try:
            return self._vectors[key]
        except KeyError:
            raise DataError(f"no embedding for {what} (sidecar key {key!r})") from None

    def embed_query(self, text: str) -> np.ndarray:
        return self._get(query_key(text), f"query {text!r}")

    def embed_candidate(self, candidate: CandidateClass) -> np.ndarray:
        if candidate == NO_SUGGESTION:
            return self._get(SILENCE_KEY, "the silence candidate")
        return self._get(faq_key(candidate), f"FAQ {candidate}")


class StaticEmbeddingProvider(EmbeddingProvider):
    """In-memory provider for tests and fixtures.

    Candidate vectors are keyed by class; query vectors by exact text, with
    an optional default for unseen texts.
    """

    def __init__(
        self,
        dimension: int,
        candidates: Mapping[CandidateClass, Sequence[float]],
        queries: Mapping[str, Sequence[float]] | None = None,
        default_query: Sequence[float] | None = None,
    ):
        self._dimension = dimension
        self._candidates = {k: np.asarray(v, dtype=float) for k, v in candidates.items()}
        self._queries = {
            k: np.asarray(v, dtype=float) for k, v in (queries or {}).items()
        }
        self._default = (
            None if default_query is None else np.asarray(default_query, dtype=float)
        )

    @property
    def dimension(self) -> int:
        return self._dimension

    def embed_query(self, text: str) -> np.ndarray:
        vec = self._queries.get(text, self._default)
        if vec is None:
            raise DataError(f"no embedding for query {text!r}")
        return vec

    def embed_candidate(self, candidate: CandidateClass) -> np.ndarray:
        try:
            return self._candidates[candidate]
        except KeyError:
            raise DataError(f"no embedding for candidate {candidate!r}") from None


class HashedBagOfWordsProvider(EmbeddingProvider):
    """Feature-hashed bag-of-words vectors, L2-normalized.

    Token buckets and signs come from BLAKE2 digests, so vectors are stable
    across processes. FAQ candidates embed their passage text; the silence
    candidate embeds the constant silence surrogate.
    """

    def __init__(self, faqs: FaqDatabase, dimension: int = 256):
        if dimension <= 0:
            raise DataError("dimension must be positive")
        self._dimension = dimension
        self._faqs = faqs
        self._cache: dict[CandidateClass, np.ndarray] = {}

    @property
    def dimension(self) -> int:
        return self._dimension

    def _vector(self, text: str) -> np.ndarray:
        vec = np.zeros(self._dimension)
        for token in tokenize(text):
            digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
            value = int.from_bytes(digest, "big")
            bucket = (value >> 1) % self._dimension
            sign = 1.0 if value & 1 else -1.0
            vec[bucket] += sign
        norm = np.linalg.norm(vec)
        return vec / norm if norm > 0 else vec

    def embed_query(self, text: str) -> np.ndarray:
        return self._vector(text)

    def embed_candidate(self, candidate: CandidateClass) -> np.ndarray:
        if candidate not in self._cache:
            if candidate == NO_SUGGESTION:
                text = SILENCE_TEXT
            else:
                text = build_passage(self._faqs[candidate]).text
            self._cache[candidate] = self._vector(text)
        return self._cache[candidate]
