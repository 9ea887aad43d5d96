"""Independent reference implementations and fixture generators.

Everything here is deliberately written without the library's index or
ranking code paths: plain brute-force loops the tests compare against.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from datetime import datetime, timedelta

from faqassist.corpus import Conversation, FaqDatabase, FaqItem, Utterance

# ---------------------------------------------------------------------------
# BM25 reference: per-passage loop, document frequencies recomputed from
# scratch for every query term.


def reference_bm25_scores(
    passage_tokens: dict[int, list[str]],
    query_tokens: list[str],
    k1: float = 1.2,
    b: float = 0.75,
) -> dict[int, float]:
    n = len(passage_tokens)
    avgdl = sum(len(toks) for toks in passage_tokens.values()) / n
    scores: dict[int, float] = {}
    for faq_id, tokens in passage_tokens.items():
        tf = Counter(tokens)
        dl = len(tokens)
        total = 0.0
        for term in query_tokens:
            if term not in tf:
                continue
            df = sum(1 for other in passage_tokens.values() if term in other)
            idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
            freq = tf[term]
            total += idf * freq * (k1 + 1.0) / (freq + k1 * (1.0 - b + b * dl / avgdl))
        scores[faq_id] = total
    return scores


def reference_bm25_order(
    passage_tokens: dict[int, list[str]], query_tokens: list[str],
    k1: float = 1.2, b: float = 0.75,
) -> list[int]:
    scores = reference_bm25_scores(passage_tokens, query_tokens, k1, b)
    return sorted(scores, key=lambda fid: (-scores[fid], fid))


# ---------------------------------------------------------------------------
# Reciprocal rank reference: a plain linear scan.


def linear_scan_reciprocal_rank(classes: list, gold, cutoff: int) -> float:
    position = 0
    for entry in classes[:cutoff]:
        position += 1
        if entry == gold:
            return 1.0 / position
    return 0.0


# ---------------------------------------------------------------------------
# Random fixtures.

_VOCAB = [f"wort{i}" for i in range(30)]


def random_faq_database(rng: random.Random, max_faqs: int = 20) -> FaqDatabase:
    """FAQ databases with pairwise distinct passage token multisets.

    Distinct multisets keep reference and library scores from colliding on
    mathematically tied passages, which would make tie order float-noise
    dependent.
    """
    n = rng.randint(2, max_faqs)
    items = []
    seen: set[tuple] = set()
    faq_id = 0
    while len(items) < n:
        faq_id += 1
        q_tokens = rng.choices(_VOCAB, k=rng.randint(1, 8))
        a_tokens = rng.choices(_VOCAB, k=rng.randint(1, 12))
        signature = tuple(sorted(q_tokens + a_tokens))
        if signature in seen:
            continue
        seen.add(signature)
        items.append(
            FaqItem(
                id=faq_id,
                theme=f"thema{faq_id}",
                question=" ".join(q_tokens),
                answer=" ".join(a_tokens),
            )
        )
    return FaqDatabase(items)


def random_query_tokens(rng: random.Random, max_len: int = 30) -> list[str]:
    pool = _VOCAB + ["fremdwort", "unbekannt"]
    return rng.choices(pool, k=rng.randint(1, max_len))


_SENDERS = ["Mitarbeiter", "KundeEins", "KundeZwei", "Anna Berg"]
_WORDS = [
    "hallo", "danke", "projekt", "anmeldung", "frage", "gerne",
    "natürlich", "vielleicht", "übermorgen", "straße", "zertifikat",
]


def random_conversation(
    rng: random.Random, conv_id: str, max_utterances: int = 8
) -> Conversation:
    """Synthetic conversations safe for export round-trips: senders without
    ': ', text lines that cannot look like message headers, minute-precision
    non-decreasing timestamps. Messages may span multiple lines, including
    empty interior lines."""
    when = datetime(2019, 3, 12, 9, 0) + timedelta(minutes=rng.randint(0, 5000))
    utterances = []
    for index in range(rng.randint(1, max_utterances)):
        lines = []
        for _ in range(rng.randint(1, 3)):
            if rng.random() < 0.15:
                lines.append("")
            else:
                lines.append(" ".join(rng.choices(_WORDS, k=rng.randint(1, 6))))
        if not "".join(lines).strip():
            lines.append(rng.choice(_WORDS))
        utterances.append(
            Utterance(
                conversation_id=conv_id,
                index=index,
                timestamp=when,
                sender=rng.choice(_SENDERS),
                text="\n".join(lines),
            )
        )
        when += timedelta(minutes=rng.randint(0, 120))
    return Conversation(conv_id, tuple(utterances))
