"""Rebalancing of silence-gold utterances for train/dev construction.

Roughly four out of five utterances carry no FAQ annotation, so training
inputs calibrate how many silence utterances to keep. Every FAQ-gold
utterance is always kept; the silence target T depends on the setting:

  mean          round(mean of the FAQ class counts)
  highest-freq  count of the most frequent FAQ class
  sum           total number of FAQ-gold utterances
  original      everything (keeps the natural class imbalance)

Training pairs for external encoder fine-tuning are exported as JSONL with
uniformly drawn random negatives.
"""

from __future__ import annotations

import json
import math
import random
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import NO_SUGGESTION, FaqDatabase, Utterance
from .errors import DataError
from .retrieval import CandidateClass, build_passage, build_query

#: Positive surrogate text exported for silence-gold utterances.
SILENCE_TEXT = NO_SUGGESTION


class SamplingSetting(str, Enum):
    MEAN = "mean"
    HIGHEST_FREQ = "highest-freq"
    SUM = "sum"
    ORIGINAL = "original"


#: (conversation_id, utterance index) pointing into a split.
UtteranceRef = tuple[str, int]


@dataclass(frozen=True)
class SamplingPlan:
    setting: SamplingSetting
    seed: int
    kept_faq: tuple[UtteranceRef, ...]
    kept_silence: tuple[UtteranceRef, ...]


@dataclass(frozen=True)
class TrainingPair:
    query: str
    positive: str
    negatives: tuple[str, ...]

    def __post_init__(self):
        if self.positive in self.negatives:
            raise DataError("positive passage also appears among the negatives")
        if len(set(self.negatives)) != len(self.negatives):
            raise DataError("negative passages must be distinct")


def class_counts(split: Sequence[Utterance]) -> dict[CandidateClass, int]:
    """Exact histogram of gold classes over a split."""
    return dict(Counter(utt.gold for utt in split))


def _silence_target(setting: SamplingSetting, faq_counts: Mapping[int, int],
                    num_silence: int) -> int:
    if setting is SamplingSetting.ORIGINAL:
        return num_silence
    if not faq_counts:
        raise DataError(
            f"setting {setting.value!r} needs at least one FAQ-gold utterance"
        )
    counts = list(faq_counts.values())
    if setting is SamplingSetting.MEAN:
        return math.floor(sum(counts) / len(counts) + 0.5)  # round half-up
    if setting is SamplingSetting.HIGHEST_FREQ:
        return max(counts)
    if setting is SamplingSetting.SUM:
        return sum(counts)
    raise DataError(f"unknown sampling setting {setting!r}")


def plan_sampling(
    split: Sequence[Utterance], setting: SamplingSetting, seed: int
) -> SamplingPlan:
    """Select which utterances of a split enter training.

    All FAQ-gold utterances are kept. min(T, available) silence utterances
    are drawn uniformly without replacement with the given seed, where T is
    the setting's silence target; the selection is returned in corpus order.
    """
    if not split:
        raise DataError("cannot plan sampling over an empty split")
    setting = SamplingSetting(setting)
    faq_refs = [(u.conversation_id, u.index) for u in split if u.is_annotated]
    silence_refs = [(u.conversation_id, u.index) for u in split if not u.is_annotated]
    faq_counts = {
        cls: n for cls, n in class_counts(split).items() if cls != NO_SUGGESTION
    }
    target = _silence_target(setting, faq_counts, len(silence_refs))
    keep = min(target, len(silence_refs))
    chosen = sorted(random.Random(seed).sample(range(len(silence_refs)), keep))
    return SamplingPlan(
        setting=setting,
        seed=seed,
        kept_faq=tuple(faq_refs),
        kept_silence=tuple(silence_refs[i] for i in chosen),
    )


def export_training_pairs(
    plan: SamplingPlan,
    split: Sequence[Utterance],
    faqs: FaqDatabase,
    num_negatives: int = 1,
    seed: int = 0,
) -> list[TrainingPair]:
    """One training pair per kept utterance.

    The query is the utterance's window text; the positive is the gold
    FAQ's passage (or the silence surrogate); negatives are num_negatives
    FAQs drawn uniformly from the database minus the gold, deterministic
    under the seed. FAQ-gold pairs come first, then silence pairs, both in
    corpus order.
    """
    if num_negatives >= len(faqs):
        raise DataError(
            f"num_negatives={num_negatives} must be smaller than the "
            f"{len(faqs)} FAQs"
        )
    if num_negatives < 0:
        raise DataError("num_negatives must be >= 0")

    by_conv: dict[str, list[Utterance]] = {}
    for utt in split:
        by_conv.setdefault(utt.conversation_id, []).append(utt)
    position: dict[UtteranceRef, tuple[list[Utterance], int]] = {}
    for conv_id, utts in by_conv.items():
        utts.sort(key=lambda u: u.index)
        for pos, utt in enumerate(utts):
            position[(conv_id, utt.index)] = (utts, pos)

    passages = {faq.id: build_passage(faq).text for faq in faqs}
    all_ids = list(faqs.ids())
    rng = random.Random(seed)
    pairs: list[TrainingPair] = []
    for ref in plan.kept_faq + plan.kept_silence:
        if ref not in position:
            raise DataError(f"planned utterance {ref} not present in the split")
        history, pos = position[ref]
        utt = history[pos]
        query = build_query(history, pos)
        if utt.is_annotated:
            positive = passages[utt.gold]
            candidates = [fid for fid in all_ids if fid != utt.gold]
        else:
            positive = SILENCE_TEXT
            candidates = all_ids
        negatives = tuple(passages[fid] for fid in rng.sample(candidates, num_negatives))
        pairs.append(TrainingPair(query=query.text, positive=positive, negatives=negatives))
    return pairs


def write_training_pairs(pairs: Sequence[TrainingPair], path: str | Path) -> None:
    """Write pairs as JSONL: {"query", "positive", "negatives"} per line."""
    with Path(path).open("w", encoding="utf-8") as handle:
        for pair in pairs:
            handle.write(
                json.dumps(
                    {
                        "query": pair.query,
                        "positive": pair.positive,
                        "negatives": list(pair.negatives),
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
