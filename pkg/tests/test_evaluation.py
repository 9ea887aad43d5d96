import math
import random

import numpy as np
import pytest

from faqassist.corpus import NO_SUGGESTION, FaqDatabase
from faqassist.embeddings import StaticEmbeddingProvider
from faqassist.errors import DataError
from faqassist.evaluation import EvalReport, evaluate, reciprocal_rank, render_report
from faqassist.retrieval import (
    Bm25Ranker,
    DenseRanker,
    DumbRanker,
    RankedSuggestion,
    build_bm25_index,
    build_query,
)

from conftest import make_conversation
from oracles import linear_scan_reciprocal_rank


def _ranking(classes):
    scores = [float(len(classes) - i) for i in range(len(classes))]
    return [
        RankedSuggestion(c, s, 0) for c, s in zip(classes, scores)
    ]


class TestReciprocalRank:
    def test_gold_first(self):
        assert reciprocal_rank(_ranking([7, 1, 2]), 7) == 1.0

    def test_gold_third(self):
        assert reciprocal_rank(_ranking([1, 2, 7]), 7) == pytest.approx(1 / 3)

    def test_absent_gold_is_zero(self):
        assert reciprocal_rank(_ranking(list(range(1, 11))), 99) == 0.0

    def test_gold_beyond_cutoff_is_zero(self):
        ranking = _ranking(list(range(1, 12)))  # gold 11 at position 11
        assert reciprocal_rank(ranking, 11, cutoff=10) == 0.0
        assert reciprocal_rank(ranking, 11, cutoff=11) == pytest.approx(1 / 11)

    def test_silence_gold(self):
        assert reciprocal_rank(_ranking([NO_SUGGESTION, 1]), NO_SUGGESTION) == 1.0

    def test_duplicate_classes_rejected(self):
        with pytest.raises(DataError):
            reciprocal_rank(_ranking([1, 1]), 1)

    def test_matches_linear_scan_oracle(self):
        rng = random.Random(17)
        pool = [NO_SUGGESTION, *range(1, 40)]
        for _ in range(1000):
            classes = rng.sample(pool, rng.randint(1, 12))
            gold = rng.choice(pool)
            cutoff = rng.randint(1, 12)
            expected = linear_scan_reciprocal_rank(classes, gold, cutoff)
            assert reciprocal_rank(_ranking(classes), gold, cutoff) == expected


def _uniform_corpus(faq_ids, silence_between=2):
    """One conversation per FAQ id: silence padding plus one gold utterance."""
    convs = []
    for faq_id in faq_ids:
        entries = [("K", f"plausch {i}") for i in range(silence_between)]
        entries.append(("K", f"frage zu thema {faq_id}", faq_id))
        entries.append(("M", "alles klar"))
        convs.append(make_conversation(f"conv{faq_id}", entries))
    return [u for c in convs for u in c.utterances]


class TestEvaluate:
    def test_dumb_has_perfect_silence_mrr(self):
        split = _uniform_corpus(range(1, 10))
        report = evaluate(DumbRanker(), split)
        assert report.mrr_no_suggestion == 1.0

    def test_dumb_faq_mrr_matches_brute_force(self):
        split = _uniform_corpus(range(1, 10))
        report = evaluate(DumbRanker(), split)
        # the constant list [silence, 1..9] puts gold g at position g+1
        expected = math.fsum(1 / (g + 1) for g in range(1, 10)) / 9
        assert abs(report.mrr_faq - expected) < 1e-12

    def test_bm25_never_silent(self, faq_db):
        split = _uniform_corpus(faq_db.ids()[:5])
        report = evaluate(Bm25Ranker(build_bm25_index(faq_db)), split, faq_db)
        assert report.mrr_no_suggestion == 0.0

    def test_perfect_ranker_scores_one_in_both_classes(self, faq_db):
        split = _uniform_corpus(faq_db.ids())
        dim = len(faq_db) + 1
        basis = np.eye(dim)
        candidates = {f.id: basis[i] for i, f in enumerate(faq_db)}
        candidates[NO_SUGGESTION] = basis[dim - 1]
        queries = {}
        by_conv = {}
        for utt in split:
            by_conv.setdefault(utt.conversation_id, []).append(utt)
        for utts in by_conv.values():
            for pos, utt in enumerate(utts):
                queries[build_query(utts, pos).text] = candidates[utt.gold]
        provider = StaticEmbeddingProvider(dim, candidates, queries)
        report = evaluate(DenseRanker(provider, faq_db, include_silence=True), split, faq_db)
        assert report.mrr_no_suggestion == 1.0
        assert report.mrr_faq == 1.0

    def test_counts_cover_split(self, faq_db):
        split = _uniform_corpus(faq_db.ids()[:4], silence_between=3)
        report = evaluate(DumbRanker(), split, faq_db)
        assert report.n_no_suggestion + report.n_faq == len(split)
        assert report.n_faq == 4

    def test_order_invariance(self, faq_db):
        split = _uniform_corpus(faq_db.ids())
        shuffled = list(split)
        random.Random(3).shuffle(shuffled)
        a = evaluate(Bm25Ranker(build_bm25_index(faq_db)), split, faq_db)
        b = evaluate(Bm25Ranker(build_bm25_index(faq_db)), shuffled, faq_db)
        assert abs(a.mrr_faq - b.mrr_faq) < 1e-12
        assert abs(a.mrr_no_suggestion - b.mrr_no_suggestion) < 1e-12

    def test_ranker_failure_carries_context(self):
        class Broken:
            name = "broken"

            def rank(self, query):
                raise RuntimeError("kaputt")

        split = _uniform_corpus([3])
        with pytest.raises(DataError, match="conv3:0"):
            evaluate(Broken(), split)

    def test_empty_split_rejected(self):
        with pytest.raises(DataError):
            evaluate(DumbRanker(), [])

    def test_unknown_gold_rejected(self, faq_db):
        split = _uniform_corpus([999])
        with pytest.raises(DataError, match="999"):
            evaluate(DumbRanker(), split, faq_db)


class TestRenderReport:
    def _report(self, **overrides):
        values = dict(
            model="bm25",
            setting="n/a",
            mrr_no_suggestion=0.0,
            mrr_faq=1 / 3,
            n_no_suggestion=4,
            n_faq=2,
        )
        values.update(overrides)
        return EvalReport(**values)

    def test_markdown_single_row(self):
        table = render_report([self._report()])
        lines = table.splitlines()
        assert len(lines) == 3
        assert "bm25" in lines[2]
        assert "0.33" in lines[2]

    def test_csv(self):
        table = render_report([self._report()], fmt="csv")
        assert table.splitlines()[0] == (
            "model,setting,mrr_no_suggestion,mrr_faq,n_no_suggestion,n_faq"
        )
        assert table.splitlines()[1] == "bm25,n/a,0.00,0.33,4,2"

    def test_deterministic(self):
        reports = [self._report(), self._report(model="dumb")]
        assert render_report(reports) == render_report(reports)

    def test_rows_sorted_by_model_and_setting(self):
        reports = [
            self._report(model="dense", setting="sum"),
            self._report(model="bm25"),
            self._report(model="dense", setting="mean"),
        ]
        table = render_report(reports, fmt="csv")
        rows = [line.split(",")[0:2] for line in table.splitlines()[1:]]
        assert rows == [["bm25", "n/a"], ["dense", "mean"], ["dense", "sum"]]

    def test_unknown_format(self):
        with pytest.raises(DataError):
            render_report([self._report()], fmt="html")
