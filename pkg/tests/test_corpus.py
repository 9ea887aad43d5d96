import random
from collections import Counter
from datetime import datetime

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from faqassist.corpus import (
    Conversation,
    FaqDatabase,
    FaqItem,
    Utterance,
    attach_annotations,
    corpus_stats,
    load_annotations,
    load_corpus,
    load_faqs,
    parse_whatsapp_export,
    pseudonymize,
    render_whatsapp_export,
    save_corpus,
    select_conversations,
    split_dataset,
)
from faqassist.errors import DataError, ParseError

from conftest import make_conversation
from oracles import random_conversation

EXPORT = """\
12.03.19, 14:05 - Mitarbeiter: Hallo!
12.03.19, 14:06 - KundeEins: Guten Tag, ich habe eine Frage.
12.03.19, 14:06 - KundeEins: zur Anmeldung
"""


class TestParseWhatsappExport:
    def test_single_header_line(self):
        conv = parse_whatsapp_export("12.03.19, 14:05 - Mitarbeiter: Hallo!", "c1")
        assert len(conv.utterances) == 1
        utt = conv.utterances[0]
        assert utt.sender == "Mitarbeiter"
        assert utt.text == "Hallo!"
        assert utt.timestamp == datetime(2019, 3, 12, 14, 5)
        assert utt.gold == "no-suggestion"

    def test_two_headers_are_two_utterances(self):
        conv = parse_whatsapp_export(EXPORT, "c1")
        assert len(conv.utterances) == 3
        assert [u.index for u in conv.utterances] == [0, 1, 2]

    def test_continuation_line_embeds_newline(self):
        raw = "12.03.19, 14:05 - Mitarbeiter: erste Zeile\nzweite Zeile"
        conv = parse_whatsapp_export(raw, "c1")
        assert len(conv.utterances) == 1
        assert conv.utterances[0].text == "erste Zeile\nzweite Zeile"

    def test_system_message_without_sender_is_dropped(self):
        raw = (
            "12.03.19, 14:04 - Nachrichten sind Ende-zu-Ende-verschlüsselt.\n"
            "12.03.19, 14:05 - Mitarbeiter: Hallo!"
        )
        conv = parse_whatsapp_export(raw, "c1")
        assert [u.sender for u in conv.utterances] == ["Mitarbeiter"]
        assert conv.utterances[0].index == 0

    def test_continuation_of_system_message_is_dropped_too(self):
        raw = (
            "12.03.19, 14:04 - Gruppe wurde erstellt\n"
            "noch eine Systemzeile\n"
            "12.03.19, 14:05 - Mitarbeiter: Hallo!"
        )
        conv = parse_whatsapp_export(raw, "c1")
        assert [u.text for u in conv.utterances] == ["Hallo!"]

    def test_malformed_first_line_reports_line_number(self):
        with pytest.raises(ParseError) as err:
            parse_whatsapp_export("kein Header hier", "c1")
        assert err.value.line == 1
        assert "line 1" in str(err.value)

    def test_invalid_date_reports_line_number(self):
        raw = "12.03.19, 14:05 - A: ok\n99.13.19, 14:06 - A: kaputt"
        with pytest.raises(ParseError) as err:
            parse_whatsapp_export(raw, "c1")
        assert err.value.line == 2

    def test_media_placeholder_is_kept_as_text(self):
        raw = "12.03.19, 14:05 - KundeEins: <Medien ausgeschlossen>"
        conv = parse_whatsapp_export(raw, "c1")
        assert conv.utterances[0].text == "<Medien ausgeschlossen>"

    def test_export_with_only_system_messages_fails(self):
        with pytest.raises(ParseError):
            parse_whatsapp_export("12.03.19, 14:04 - Gruppe erstellt", "c1")


# Render -> parse -> render must be a fixed point and preserve the
# sender/text/timestamp sequence.

_sender_st = st.sampled_from(["Mitarbeiter", "KundeEins", "KundeZwei", "Anna Berg"])
_line_st = st.text(alphabet="abcdefghijklmnopqrstuvwxyzäöüß ?!,.", max_size=18)
_text_st = (
    st.lists(_line_st, min_size=1, max_size=3)
    .map("\n".join)
    .filter(lambda t: t.strip())
)


@st.composite
def _conversations(draw):
    entries = draw(st.lists(st.tuples(_sender_st, _text_st), min_size=1, max_size=6))
    deltas = draw(
        st.lists(
            st.integers(min_value=0, max_value=90),
            min_size=len(entries),
            max_size=len(entries),
        )
    )
    start = datetime(2019, 3, 12, 9, 0)
    utterances = []
    minutes = 0
    for index, ((sender, text), delta) in enumerate(zip(entries, deltas)):
        minutes += delta
        from datetime import timedelta

        utterances.append(
            Utterance(
                conversation_id="c1",
                index=index,
                timestamp=start + timedelta(minutes=minutes),
                sender=sender,
                text=text,
            )
        )
    return Conversation("c1", tuple(utterances))


class TestRoundTrip:
    @settings(max_examples=60, deadline=None)
    @given(_conversations())
    def test_parse_recovers_sender_text_timestamp(self, conv):
        parsed = parse_whatsapp_export(render_whatsapp_export(conv), "c1")
        assert [(u.sender, u.text, u.timestamp) for u in parsed.utterances] == [
            (u.sender, u.text, u.timestamp) for u in conv.utterances
        ]

    @settings(max_examples=60, deadline=None)
    @given(_conversations())
    def test_render_parse_render_fixed_point(self, conv):
        rendered = render_whatsapp_export(conv)
        again = render_whatsapp_export(parse_whatsapp_export(rendered, "c1"))
        assert again == rendered

    def test_seeded_generator_round_trips(self):
        rng = random.Random(7)
        for i in range(25):
            conv = random_conversation(rng, f"conv{i}")
            rendered = render_whatsapp_export(conv)
            assert render_whatsapp_export(parse_whatsapp_export(rendered, f"conv{i}")) == rendered


class TestPseudonymize:
    def test_maps_sender_names(self):
        conv = make_conversation("c1", [("Anna", "Hallo"), ("Mitarbeiter", "Hi")])
        out = pseudonymize(conv, {"Anna": "KundeEins", "Mitarbeiter": "Mitarbeiter"})
        assert [u.sender for u in out.utterances] == ["KundeEins", "Mitarbeiter"]
        assert [u.text for u in out.utterances] == ["Hallo", "Hi"]

    def test_identity_mapping_is_noop(self):
        conv = make_conversation("c1", [("Anna", "Hallo")])
        assert pseudonymize(conv, {"Anna": "Anna"}) == conv

    def test_idempotent_on_aliases(self):
        conv = make_conversation("c1", [("Anna", "Hallo"), ("Bob", "Hi")])
        mapping = {"Anna": "KundeEins", "Bob": "KundeZwei"}
        once = pseudonymize(conv, mapping)
        identity = {"KundeEins": "KundeEins", "KundeZwei": "KundeZwei"}
        assert pseudonymize(once, identity) == once

    def test_missing_sender_is_named(self):
        conv = make_conversation("c1", [("Anna", "Hallo"), ("Bob", "Hi")])
        with pytest.raises(DataError, match="'Bob'"):
            pseudonymize(conv, {"Anna": "KundeEins"})


class TestAttachAnnotations:
    def test_empty_annotations_means_all_silence(self, faq_db):
        conv = make_conversation("c1", [("A", "x"), ("B", "y")])
        out = attach_annotations(conv, [], faq_db)
        assert all(u.gold == "no-suggestion" for u in out.utterances)

    def test_sets_gold_on_listed_indices(self, faq_db):
        conv = make_conversation("c1", [("A", f"t{i}") for i in range(5)])
        out = attach_annotations(conv, [(3, 7)], faq_db)
        assert out.utterances[3].gold == 7
        assert [u.gold for i, u in enumerate(out.utterances) if i != 3] == [
            "no-suggestion"
        ] * 4

    def test_out_of_range_index(self, faq_db):
        conv = make_conversation("c1", [("A", f"t{i}") for i in range(5)])
        with pytest.raises(DataError, match="out of range"):
            attach_annotations(conv, [(9, 7)], faq_db)

    def test_unknown_faq_id(self, faq_db):
        conv = make_conversation("c1", [("A", "x")])
        with pytest.raises(DataError, match="unknown FAQ"):
            attach_annotations(conv, [(0, 999)], faq_db)

    def test_duplicate_index_rejected(self, faq_db):
        conv = make_conversation("c1", [("A", "x")])
        with pytest.raises(DataError, match="twice"):
            attach_annotations(conv, [(0, 1), (0, 2)], faq_db)

    def test_reannotation_resets_previous_golds(self, faq_db):
        conv = make_conversation("c1", [("A", "x", 3), ("B", "y")])
        out = attach_annotations(conv, [(1, 5)], faq_db)
        assert [u.gold for u in out.utterances] == ["no-suggestion", 5]


def _corpus_of(n):
    return [make_conversation(f"c{i:03d}", [("A", "hallo")]) for i in range(n)]


class TestSplitDataset:
    def test_26_conversations_split_17_3_6(self):
        splits = split_dataset(_corpus_of(26), (0.70, 0.10, 0.20), seed=1)
        assert (len(splits.train), len(splits.dev), len(splits.test)) == (17, 3, 6)

    def test_degenerate_ratio_all_train(self):
        splits = split_dataset(_corpus_of(10), (1.0, 0.0, 0.0), seed=1)
        assert len(splits.train) == 10
        assert not splits.dev and not splits.test

    def test_same_seed_same_splits(self):
        convs = _corpus_of(30)
        assert split_dataset(convs, (0.7, 0.1, 0.2), 9) == split_dataset(
            convs, (0.7, 0.1, 0.2), 9
        )

    def test_different_seed_differs(self):
        convs = _corpus_of(30)
        assert split_dataset(convs, (0.7, 0.1, 0.2), 1) != split_dataset(
            convs, (0.7, 0.1, 0.2), 2
        )

    def test_order_of_input_does_not_matter(self):
        convs = _corpus_of(20)
        assert split_dataset(convs, (0.7, 0.1, 0.2), 5) == split_dataset(
            list(reversed(convs)), (0.7, 0.1, 0.2), 5
        )

    def test_too_few_conversations(self):
        with pytest.raises(DataError):
            split_dataset(_corpus_of(2), (0.7, 0.1, 0.2), 1)

    def test_bad_ratios(self):
        convs = _corpus_of(5)
        with pytest.raises(DataError):
            split_dataset(convs, (0.5, 0.2, 0.2), 1)
        with pytest.raises(DataError):
            split_dataset(convs, (-0.1, 0.6, 0.5), 1)

    def test_tiny_corpus_with_tiny_train_ratio(self):
        # ceil(1.35) + ceil(1.35) would leave train negative on 3 conversations
        with pytest.raises(DataError, match="train"):
            split_dataset(_corpus_of(3), (0.1, 0.45, 0.45), 1)

    @settings(max_examples=60, deadline=None)
    @given(
        n=st.integers(min_value=3, max_value=40),
        ratios=st.sampled_from(
            [(0.7, 0.1, 0.2), (0.6, 0.2, 0.2), (0.34, 0.33, 0.33), (0.5, 0.25, 0.25)]
        ),
        seed=st.integers(min_value=0, max_value=999),
    )
    def test_partition_properties(self, n, ratios, seed):
        convs = _corpus_of(n)
        splits = split_dataset(convs, ratios, seed)
        ids = {c.id for c in convs}
        assert splits.train | splits.dev | splits.test == ids
        assert not splits.train & splits.dev
        assert not splits.train & splits.test
        assert not splits.dev & splits.test

    def test_select_conversations(self):
        convs = _corpus_of(4)
        picked = select_conversations(convs, {"c001", "c003"})
        assert [c.id for c in picked] == ["c001", "c003"]


class TestCorpusStats:
    def test_empty_corpus(self):
        stats = corpus_stats([])
        assert stats.num_conversations == 0
        assert stats.num_utterances == 0
        assert stats.annotated_fraction == 0.0
        assert stats.min_conversation_length == 0

    def test_min_max_lengths(self):
        short = make_conversation("a", [("A", f"t{i}") for i in range(22)])
        long = make_conversation("b", [("A", f"t{i}") for i in range(607)])
        stats = corpus_stats([short, long])
        assert stats.min_conversation_length == 22
        assert stats.max_conversation_length == 607
        assert stats.mean_conversation_length == pytest.approx(629 / 2)

    def test_annotated_fraction(self):
        entries = [("A", f"t{i}") for i in range(8)]
        entries += [("A", "x", 3), ("A", "y", 3)]
        stats = corpus_stats([make_conversation("c", entries)])
        assert stats.annotated_fraction == pytest.approx(0.2)
        assert stats.per_faq_counts == {3: 2}

    def test_per_faq_counts_sum_to_annotated(self):
        rng = random.Random(3)
        convs = []
        expected = Counter()
        for ci in range(6):
            entries = []
            for ui in range(rng.randint(1, 15)):
                if rng.random() < 0.3:
                    gold = rng.randint(1, 5)
                    expected[gold] += 1
                    entries.append(("A", f"t{ui}", gold))
                else:
                    entries.append(("A", f"t{ui}"))
            convs.append(make_conversation(f"c{ci}", entries))
        stats = corpus_stats(convs)
        assert stats.per_faq_counts == dict(expected)
        assert sum(stats.per_faq_counts.values()) == sum(expected.values())


class TestInvariants:
    def test_indices_must_be_contiguous(self):
        good = make_conversation("c1", [("A", "x"), ("A", "y")])
        with pytest.raises(DataError, match="contiguous"):
            Conversation("c1", (good.utterances[1],))

    def test_timestamps_must_not_decrease(self):
        first, second = make_conversation("c1", [("A", "x"), ("A", "y")]).utterances
        from dataclasses import replace

        bad = replace(second, timestamp=datetime(2001, 1, 1))
        with pytest.raises(DataError, match="decrease"):
            Conversation("c1", (first, bad))

    def test_empty_text_rejected(self):
        with pytest.raises(DataError, match="empty text"):
            Utterance("c1", 0, datetime(2019, 1, 1), "A", "   ")

    def test_gold_must_be_positive_or_silence(self):
        with pytest.raises(DataError):
            Utterance("c1", 0, datetime(2019, 1, 1), "A", "x", gold=0)
        with pytest.raises(DataError):
            Utterance("c1", 0, datetime(2019, 1, 1), "A", "x", gold="maybe")


class TestFileFormats:
    def test_corpus_jsonl_round_trip(self, tmp_path, faq_db):
        convs = [
            make_conversation("c1", [("A", "Hallo\nzweite Zeile", 3), ("B", "Hi")]),
            make_conversation("c2", [("A", "Guten Tag")]),
        ]
        path = tmp_path / "corpus.jsonl"
        save_corpus(convs, path)
        assert load_corpus(path, faq_db) == convs

    def test_gold_serialization(self, tmp_path):
        convs = [make_conversation("c1", [("A", "x", 7), ("B", "y")])]
        path = tmp_path / "corpus.jsonl"
        save_corpus(convs, path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert '"gold": 7' in lines[0]
        assert '"gold": "no-suggestion"' in lines[1]

    def test_load_rejects_unknown_gold(self, tmp_path, faq_db):
        convs = [make_conversation("c1", [("A", "x", 999)])]
        path = tmp_path / "corpus.jsonl"
        save_corpus(convs, path)
        with pytest.raises(DataError, match="999"):
            load_corpus(path, faq_db)

    def test_load_reports_bad_line(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text('{"conversation_id": "c1"}\n', encoding="utf-8")
        with pytest.raises(DataError, match=":1:"):
            load_corpus(path)

    def test_faq_database_json(self, tmp_path):
        path = tmp_path / "faqs.json"
        path.write_text(
            '[{"id": 71, "theme": "Anmeldung", "question": "Wie?", "answer": "So."}]',
            encoding="utf-8",
        )
        faqs = load_faqs(path)
        assert faqs[71].theme == "Anmeldung"
        assert 71 in faqs and 72 not in faqs

    def test_faq_duplicate_id_rejected(self):
        with pytest.raises(DataError, match="duplicate"):
            FaqDatabase(
                [
                    FaqItem(id=1, theme="", question="q", answer="a"),
                    FaqItem(id=1, theme="", question="q2", answer="a2"),
                ]
            )

    def test_annotation_csv(self, tmp_path):
        path = tmp_path / "annotations.csv"
        path.write_text(
            "conversation_id,utterance_index,faq_id\nc1,3,71\nc1,5,2\nc2,0,1\n",
            encoding="utf-8",
        )
        grouped = load_annotations(path)
        assert grouped == {"c1": [(3, 71), (5, 2)], "c2": [(0, 1)]}

    def test_annotation_csv_needs_columns(self, tmp_path):
        path = tmp_path / "annotations.csv"
        path.write_text("a,b\n1,2\n", encoding="utf-8")
        with pytest.raises(DataError, match="columns"):
            load_annotations(path)
