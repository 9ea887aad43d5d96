"""MRR@10 evaluation with a dual-class report.

The assistant must both surface the right FAQ and stay silent when none
applies, so the mean reciprocal rank is reported separately over
silence-gold and FAQ-gold utterances. Every utterance of the test split is
evaluated; rebalancing settings only ever shape train/dev inputs.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

from .corpus import NO_SUGGESTION, FaqDatabase, Utterance
from .errors import DataError
from .retrieval import CandidateClass, RankedSuggestion, build_query

CUTOFF = 10


@dataclass(frozen=True)
class EvalReport:
    """Dual-class MRR@10 for one model/setting combination."""

    model: str
    setting: str
    mrr_no_suggestion: float
    mrr_faq: float
    n_no_suggestion: int
    n_faq: int


def reciprocal_rank(
    ranking: Sequence[RankedSuggestion],
    gold: CandidateClass,
    cutoff: int = CUTOFF,
) -> float:
    """1 / position of gold within the first `cutoff` entries, else 0."""
    classes = [suggestion.candidate for suggestion in ranking]
    if len(set(classes)) != len(classes):
        raise DataError("ranking contains duplicate classes")
    for pos, candidate in enumerate(classes[:cutoff], start=1):
        if candidate == gold:
            return 1.0 / pos
    return 0.0


def evaluate(
    ranker,
    test_split: Sequence[Utterance],
    faqs: FaqDatabase | None = None,
    window: int = 4,
    cutoff: int = CUTOFF,
    setting: str = "n/a",
) -> EvalReport:
    """Score a ranker over every utterance of a test split.

    Rankings come from each utterance's sender-prefixed window. Means use
    exact summation, so the report does not depend on evaluation order. A
    ranker failure aborts with the conversation id and utterance index.
    """
    if not test_split:
        raise DataError("cannot evaluate an empty test split")
    by_conv: dict[str, list[Utterance]] = {}
    for utt in test_split:
        if faqs is not None and utt.is_annotated and utt.gold not in faqs:
            raise DataError(
                f"gold FAQ {utt.gold} of {utt.conversation_id}:{utt.index} "
                "is not in the database"
            )
        by_conv.setdefault(utt.conversation_id, []).append(utt)

    silence_rr: list[float] = []
    faq_rr: list[float] = []
    for conv_id, utts in by_conv.items():
        utts.sort(key=lambda u: u.index)
        for pos, utt in enumerate(utts):
            query = build_query(utts, pos, window)
            try:
                ranking = ranker.rank(query)
            except Exception as exc:
                raise DataError(
                    f"ranker {getattr(ranker, 'name', ranker)!r} failed on "
                    f"{conv_id}:{utt.index}: {exc}"
                ) from exc
            rr = reciprocal_rank(ranking, utt.gold, cutoff)
            (faq_rr if utt.is_annotated else silence_rr).append(rr)

    return EvalReport(
        model=getattr(ranker, "name", type(ranker).__name__),
        setting=setting,
        mrr_no_suggestion=math.fsum(silence_rr) / len(silence_rr) if silence_rr else 0.0,
        mrr_faq=math.fsum(faq_rr) / len(faq_rr) if faq_rr else 0.0,
        n_no_suggestion=len(silence_rr),
        n_faq=len(faq_rr),
    )


_COLUMNS = (
    "model",
    "setting",
    "mrr_no_suggestion",
    "mrr_faq",
    "n_no_suggestion",
    "n_faq",
)


def _rows(reports: Sequence[EvalReport]) -> list[list[str]]:
    ordered = sorted(reports, key=lambda r: (r.model, r.setting))
    return [
        [
            r.model,
            r.setting,
            f"{r.mrr_no_suggestion:.2f}",
            f"{r.mrr_faq:.2f}",
            str(r.n_no_suggestion),
            str(r.n_faq),
        ]
        for r in ordered
    ]


def render_report(reports: Sequence[EvalReport], fmt: str = "md") -> str:
    """Deterministic result table, rows sorted by (model, setting)."""
    rows = _rows(reports)
    if fmt == "md":
        widths = [
            max(len(col), *(len(row[i]) for row in rows), 1) if rows else len(col)
            for i, col in enumerate(_COLUMNS)
        ]
        def line(cells):
            return "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"
        out = [line(_COLUMNS), line(["-" * w for w in widths])]
        out.extend(line(row) for row in rows)
        return "\n".join(out) + "\n"
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(_COLUMNS)
        writer.writerows(rows)
        return buffer.getvalue()
    raise DataError(f"unknown report format {fmt!r}, expected 'md' or 'csv'")
