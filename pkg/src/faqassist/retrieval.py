"""Query/passage construction and the four FAQ rankers.

A query is the concatenation of up to four consecutive sender-prefixed
utterances; a passage is the concatenated question and answer of one FAQ.
Rankers turn a query into a list of at most ten RankedSuggestion entries
over the FAQ ids plus the reserved silence class:

  dumb    silence first, then FAQ ids 1..9
  random  ten distinct classes drawn uniformly
  bm25    Okapi BM25 over an inverted index of the FAQ passages
  dense   inner product between query and candidate embedding vectors
"""

from __future__ import annotations

import abc
import math
import random
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .corpus import NO_SUGGESTION, FaqDatabase, FaqItem, Utterance
from .errors import DataError

#: A ranking candidate: a FAQ id or the silence class NO_SUGGESTION.
CandidateClass = int | str

#: Default number of utterances concatenated into one query.
QUERY_WINDOW = 4

# Word segmentation: letters and digits form tokens, punctuation
# (including the underscore) splits them.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Case-folded Unicode word tokens; digits kept, punctuation dropped."""
    return _TOKEN_RE.findall(text.casefold())


@dataclass(frozen=True)
class Query:
    """A sender-prefixed utterance window rendered to one string."""

    text: str
    window: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if not 1 <= len(self.window) <= QUERY_WINDOW:
            raise DataError(
                f"query window must hold 1..{QUERY_WINDOW} utterances, "
                f"got {len(self.window)}"
            )


@dataclass(frozen=True)
class Passage:
    """The document unit for ranking: one FAQ's question plus answer."""

    faq_id: int
    text: str

    def __post_init__(self):
        if not self.text.strip():
            raise DataError(f"passage for FAQ {self.faq_id} is empty")


@dataclass(frozen=True)
class RankedSuggestion:
    """One ranked candidate with its raw score and display percent."""

    candidate: CandidateClass
    score: float
    percent: int


def query_from_pairs(
    pairs: Sequence[tuple[str, str]], window: int = QUERY_WINDOW
) -> Query:
    """Build a query from (sender, text) pairs, keeping the last `window`."""
    tail = tuple(pairs[-window:])
    text = " ".join(f"{sender}: {text}" for sender, text in tail)
    return Query(text=text, window=tail)


def build_query(
    history: Sequence[Utterance], position: int, window: int = QUERY_WINDOW
) -> Query:
    """Query for the utterance at `position`: up to `window` utterances
    ending there, each rendered as "<sender>: <text>" and joined by spaces.
    The window shrinks at the start of a conversation instead of padding.
    """
    if not 0 <= position < len(history):
        raise DataError(f"position {position} outside history of {len(history)}")
    start = max(0, position - window + 1)
    pairs = [(u.sender, u.text) for u in history[start : position + 1]]
    return query_from_pairs(pairs, window)


def build_passage(faq: FaqItem) -> Passage:
    return Passage(faq_id=faq.id, text=f"{faq.question} {faq.answer}")


def _class_sort_key(candidate: CandidateClass) -> tuple[int, int]:
    # silence orders before any FAQ id, FAQ ids ascend
    if candidate == NO_SUGGESTION:
        return (0, 0)
    return (1, candidate)


def score_to_percent(scores: Sequence[float]) -> list[int]:
    """Softmax over a descending score list, times 100, rounded half-up."""
    if not scores:
        return []
    for left, right in zip(scores, scores[1:]):
        if right > left:
            raise DataError("scores must be sorted descending")
    peak = max(scores)
    exps = [math.exp(s - peak) for s in scores]
    total = sum(exps)
    return [math.floor(100.0 * e / total + 0.5) for e in exps]


def _to_suggestions(
    ranked: Sequence[tuple[CandidateClass, float]],
) -> list[RankedSuggestion]:
    percents = score_to_percent([score for _, score in ranked])
    return [
        RankedSuggestion(candidate, score, percent)
        for (candidate, score), percent in zip(ranked, percents)
    ]


# ---------------------------------------------------------------------------
# BM25


@dataclass(frozen=True)
class Bm25Index:
    """Inverted index over the FAQ passages.

    vocabulary maps each term to its document frequency, postings to the
    (faq_id, term frequency) pairs of the passages containing it.
    """

    k1: float
    b: float
    faq_ids: tuple[int, ...]
    doc_lengths: dict[int, int]
    avg_doc_length: float
    vocabulary: dict[str, int]
    postings: dict[str, tuple[tuple[int, int], ...]]

    @property
    def num_passages(self) -> int:
        return len(self.faq_ids)


def build_bm25_index(faqs: FaqDatabase, k1: float = 1.2, b: float = 0.75) -> Bm25Index:
    """Index the passage of every FAQ. The silence class is never indexed."""
    if len(faqs) == 0:
        raise DataError("cannot build a BM25 index over an empty FAQ database")
    if k1 < 0 or not 0.0 <= b <= 1.0:
        raise DataError(f"invalid BM25 parameters k1={k1}, b={b}")
    doc_lengths: dict[int, int] = {}
    postings: dict[str, list[tuple[int, int]]] = {}
    for faq in faqs:
        tokens = tokenize(build_passage(faq).text)
        doc_lengths[faq.id] = len(tokens)
        for term, freq in sorted(Counter(tokens).items()):
            postings.setdefault(term, []).append((faq.id, freq))
    return Bm25Index(
        k1=k1,
        b=b,
        faq_ids=faqs.ids(),
        doc_lengths=doc_lengths,
        avg_doc_length=sum(doc_lengths.values()) / len(doc_lengths),
        vocabulary={term: len(posts) for term, posts in postings.items()},
        postings={term: tuple(posts) for term, posts in postings.items()},
    )


def rank_bm25(index: Bm25Index, query: Query, top_k: int = 10) -> list[RankedSuggestion]:
    """Okapi BM25 ranking with the non-negative smoothed idf
    ln(1 + (N - df + 0.5) / (df + 0.5)). Ties break by ascending FAQ id and
    zero-scored passages still fill the list up to top_k. The output never
    contains the silence class: text search always returns something.
    """
    n = index.num_passages
    scores = {faq_id: 0.0 for faq_id in index.faq_ids}
    for term in tokenize(query.text):
        posts = index.postings.get(term)
        if not posts:
            continue
        df = index.vocabulary[term]
        idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
        for faq_id, freq in posts:
            length_norm = 1.0 - index.b + index.b * index.doc_lengths[faq_id] / index.avg_doc_length
            scores[faq_id] += idf * freq * (index.k1 + 1.0) / (freq + index.k1 * length_norm)
    order = sorted(index.faq_ids, key=lambda fid: (-scores[fid], fid))[:top_k]
    return _to_suggestions([(fid, scores[fid]) for fid in order])


# ---------------------------------------------------------------------------
# Baselines


def rank_dumb() -> list[RankedSuggestion]:
    """Constant baseline: silence at the top, then FAQ ids 1 to 9."""
    classes: list[CandidateClass] = [NO_SUGGESTION, *range(1, 10)]
    return _to_suggestions([(c, 0.0) for c in classes])


def rank_random(
    classes: Iterable[CandidateClass], rng_seed: int
) -> list[RankedSuggestion]:
    """Ten distinct classes sampled uniformly without replacement."""
    pool = sorted(set(classes), key=_class_sort_key)
    if len(pool) < 10:
        raise DataError(f"random ranking needs at least 10 classes, got {len(pool)}")
    picked = random.Random(rng_seed).sample(pool, 10)
    return _to_suggestions([(c, 0.0) for c in picked])


# ---------------------------------------------------------------------------
# Dense retrieval


class EmbeddingProvider(abc.ABC):
    """Maps query texts and ranking candidates to fixed-size vectors.

    The encoders themselves live outside this package; implementations
    typically serve precomputed vectors (see faqassist.embeddings).
    """

    @property
    @abc.abstractmethod
    def dimension(self) -> int: ...

    @abc.abstractmethod
    def embed_query(self, text: str) -> np.ndarray: ...

    @abc.abstractmethod
    def embed_candidate(self, candidate: CandidateClass) -> np.ndarray:
        """Vector for a FAQ id, or for the silence candidate when called
        with NO_SUGGESTION."""


def _checked_vector(vector, dimension: int, what: str) -> np.ndarray:
    arr = np.asarray(vector, dtype=float)
    if arr.shape != (dimension,):
        raise DataError(
            f"embedding provider returned shape {arr.shape} for {what}, "
            f"expected ({dimension},)"
        )
    return arr


def rank_dense(
    provider: EmbeddingProvider,
    faqs: FaqDatabase,
    query: Query,
    include_silence: bool = False,
    silence_threshold: float | None = None,
    top_k: int = 10,
) -> list[RankedSuggestion]:
    """Rank FAQ passages by inner product with the query vector.

    With include_silence the provider's reserved silence candidate competes
    like any passage. Alternatively silence_threshold inserts the silence
    class at the top whenever the best passage score falls below the
    threshold; both mechanisms together are refused.
    """
    if include_silence and silence_threshold is not None:
        raise DataError("choose either the silence candidate or a threshold, not both")
    dim = provider.dimension
    query_vec = _checked_vector(provider.embed_query(query.text), dim, "query")
    entries: list[tuple[CandidateClass, float]] = []
    for faq in faqs:
        vec = _checked_vector(provider.embed_candidate(faq.id), dim, f"faq {faq.id}")
        entries.append((faq.id, float(np.dot(query_vec, vec))))
    if include_silence:
        vec = _checked_vector(provider.embed_candidate(NO_SUGGESTION), dim, "silence")
        entries.append((NO_SUGGESTION, float(np.dot(query_vec, vec))))
    elif silence_threshold is not None:
        best = max((score for _, score in entries), default=0.0)
        if best < silence_threshold:
            entries.append((NO_SUGGESTION, float(silence_threshold)))
    entries.sort(key=lambda e: (-e[1], _class_sort_key(e[0])))
    return _to_suggestions(entries[:top_k])


# ---------------------------------------------------------------------------
# Ranker objects: one uniform `rank(query)` surface for evaluation and the
# suggestion service.

RANKER_NAMES = ("dumb", "random", "bm25", "dense")


class DumbRanker:
    name = "dumb"

    def rank(self, query: Query) -> list[RankedSuggestion]:
        return rank_dumb()


class RandomRanker:
    """Draws a fresh seeded sample per call; deterministic per instance."""

    name = "random"

    def __init__(self, classes: Iterable[CandidateClass], seed: int):
        self._classes = tuple(sorted(set(classes), key=_class_sort_key))
        self._rng = random.Random(seed)

    def rank(self, query: Query) -> list[RankedSuggestion]:
        return rank_random(self._classes, self._rng.randrange(2**32))


class Bm25Ranker:
    name = "bm25"

    def __init__(self, index: Bm25Index, top_k: int = 10):
        self.index = index
        self.top_k = top_k

    def rank(self, query: Query) -> list[RankedSuggestion]:
        return rank_bm25(self.index, query, self.top_k)


class DenseRanker:
    name = "dense"

    def __init__(
        self,
        provider: EmbeddingProvider,
        faqs: FaqDatabase,
        include_silence: bool = True,
        silence_threshold: float | None = None,
        top_k: int = 10,
    ):
        if include_silence and silence_threshold is not None:
            raise DataError(
                "choose either the silence candidate or a threshold, not both"
            )
        self.provider = provider
        self.faqs = faqs
        self.include_silence = include_silence
        self.silence_threshold = silence_threshold
        self.top_k = top_k

    def rank(self, query: Query) -> list[RankedSuggestion]:
        return rank_dense(
            self.provider,
            self.faqs,
            query,
            include_silence=self.include_silence,
            silence_threshold=self.silence_threshold,
            top_k=self.top_k,
        )


def make_ranker(
    name: str,
    faqs: FaqDatabase,
    seed: int = 0,
    provider: EmbeddingProvider | None = None,
    include_silence: bool = True,
    silence_threshold: float | None = None,
    k1: float = 1.2,
    b: float = 0.75,
):
    """Construct a ranker from its selection string (dumb|random|bm25|dense)."""
    if name == "dumb":
        return DumbRanker()
    if name == "random":
        classes = [NO_SUGGESTION, *faqs.ids()]
        return RandomRanker(classes, seed)
    if name == "bm25":
        return Bm25Ranker(build_bm25_index(faqs, k1=k1, b=b))
    if name == "dense":
        if provider is None:
            raise DataError("dense ranking needs an embedding provider")
        return DenseRanker(
            provider,
            faqs,
            include_silence=include_silence,
            silence_threshold=silence_threshold,
        )
    raise DataError(f"unknown ranker {name!r}, expected one of {RANKER_NAMES}")
