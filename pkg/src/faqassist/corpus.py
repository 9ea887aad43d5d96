"""Chat corpus handling.

Parses WhatsApp-style text exports into conversations, applies sender
pseudonymization and gold FAQ annotations, computes corpus statistics and
produces conversation-level train/dev/test splits.

The on-disk canonical corpus is JSONL with one utterance per line
(fields: conversation_id, index, timestamp, sender, text, gold). The FAQ
database is a JSON array of {id, theme, question, answer}. Annotations
travel in a CSV sidecar with columns conversation_id, utterance_index,
faq_id.
"""

from __future__ import annotations

import csv
import json
import math
import random
import re
from collections import Counter
from dataclasses import dataclass, replace
from datetime import datetime
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import DataError, ParseError

#: Reserved gold/candidate class meaning "the assistant should stay silent".
NO_SUGGESTION = "no-suggestion"

#: Gold annotation of an utterance: a FAQ id or the silence class.
Gold = int | str

# Export line grammar: "DD.MM.YY, HH:MM - Sender: text". Lines that do not
# match are continuations of the previous message; header lines whose
# remainder carries no "Sender: " part are system messages and get dropped.
_HEADER_RE = re.compile(r"^(\d{2})\.(\d{2})\.(\d{2}), (\d{2}):(\d{2}) - (.*)$")


@dataclass(frozen=True)
class Utterance:
    """One chat message, the unit of annotation and evaluation."""

    conversation_id: str
    index: int
    timestamp: datetime
    sender: str
    text: str
    gold: Gold = NO_SUGGESTION

    def __post_init__(self):
        if self.index < 0:
            raise DataError(f"utterance index must be >= 0, got {self.index}")
        if not self.text.strip():
            raise DataError(
                f"utterance {self.conversation_id}:{self.index} has empty text"
            )
        if not self.sender:
            raise DataError(
                f"utterance {self.conversation_id}:{self.index} has no sender"
            )
        if isinstance(self.gold, bool) or (
            isinstance(self.gold, int) and self.gold <= 0
        ):
            raise DataError(f"gold FAQ id must be a positive integer, got {self.gold!r}")
        if isinstance(self.gold, str) and self.gold != NO_SUGGESTION:
            raise DataError(f"gold must be a FAQ id or {NO_SUGGESTION!r}, got {self.gold!r}")

    @property
    def is_annotated(self) -> bool:
        return self.gold != NO_SUGGESTION


@dataclass(frozen=True)
class Conversation:
    """An ordered, immutable sequence of utterances sharing one id."""

    id: str
    utterances: tuple[Utterance, ...]

    def __post_init__(self):
        object.__setattr__(self, "utterances", tuple(self.utterances))
        if not self.utterances:
            raise DataError(f"conversation {self.id!r} has no utterances")
        for i, utt in enumerate(self.utterances):
            if utt.conversation_id != self.id:
                raise DataError(
                    f"utterance {i} belongs to {utt.conversation_id!r}, "
                    f"not {self.id!r}"
                )
            if utt.index != i:
                raise DataError(
                    f"conversation {self.id!r}: utterance indices must be "
                    f"contiguous from 0 (position {i} has index {utt.index})"
                )
        for prev, cur in zip(self.utterances, self.utterances[1:]):
            if cur.timestamp < prev.timestamp:
                raise DataError(
                    f"conversation {self.id!r}: timestamps decrease at "
                    f"utterance {cur.index}"
                )

    def __len__(self) -> int:
        return len(self.utterances)

    def __iter__(self) -> Iterator[Utterance]:
        return iter(self.utterances)


@dataclass(frozen=True)
class FaqItem:
    """One knowledge-base entry: the retrieval candidate unit."""

    id: int
    theme: str
    question: str
    answer: str

    def __post_init__(self):
        if not isinstance(self.id, int) or isinstance(self.id, bool) or self.id <= 0:
            raise DataError(f"FAQ id must be a positive integer, got {self.id!r}")
        if not self.question.strip():
            raise DataError(f"FAQ {self.id} has an empty question")
        if not self.answer.strip():
            raise DataError(f"FAQ {self.id} has an empty answer")


class FaqDatabase:
    """The candidate set of FAQ items, indexed by id."""

    def __init__(self, items: Iterable[FaqItem]):
        self.items: tuple[FaqItem, ...] = tuple(
            sorted(items, key=lambda f: f.id)
        )
        self.by_id: dict[int, FaqItem] = {}
        for item in self.items:
            if item.id in self.by_id:
                raise DataError(f"duplicate FAQ id {item.id}")
            self.by_id[item.id] = item

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[FaqItem]:
        return iter(self.items)

    def __contains__(self, faq_id: int) -> bool:
        return faq_id in self.by_id

    def __getitem__(self, faq_id: int) -> FaqItem:
        try:
            return self.by_id[faq_id]
        except KeyError:
            raise DataError(f"unknown FAQ id {faq_id}") from None

    def ids(self) -> tuple[int, ...]:
        return tuple(f.id for f in self.items)


@dataclass(frozen=True)
class CorpusStats:
    num_conversations: int
    num_utterances: int
    annotated_fraction: float
    per_faq_counts: Mapping[int, int]
    min_conversation_length: int
    max_conversation_length: int
    mean_conversation_length: float

    def as_dict(self) -> dict:
        return {
            "num_conversations": self.num_conversations,
            "num_utterances": self.num_utterances,
            "annotated_fraction": self.annotated_fraction,
            "per_faq_counts": {str(k): v for k, v in sorted(self.per_faq_counts.items())},
            "min_conversation_length": self.min_conversation_length,
            "max_conversation_length": self.max_conversation_length,
            "mean_conversation_length": self.mean_conversation_length,
        }


@dataclass(frozen=True)
class Splits:
    """Disjoint conversation-id sets covering a corpus."""

    train: frozenset[str]
    dev: frozenset[str]
    test: frozenset[str]


def parse_whatsapp_export(raw_text: str, conversation_id: str) -> Conversation:
    """Parse a WhatsApp text export into one conversation.

    Each header line starts a message; lines that do not match the header
    pattern are appended to the previous message with a newline. Header
    lines without a "Sender: " part are system messages and are dropped
    together with their continuation lines.

    Raises ParseError (with the offending line number) if the export does
    not start with a parsable header or a date/time field is invalid.
    """
    raw_text = raw_text.lstrip("﻿")
    # (timestamp, sender or None, text lines, header line number)
    messages: list[tuple[datetime, str | None, list[str], int]] = []
    for lineno, line in enumerate(raw_text.splitlines(), start=1):
        match = _HEADER_RE.match(line)
        if match is None:
            if not messages:
                raise ParseError(
                    f"line {lineno}: expected a message header "
                    f'("DD.MM.YY, HH:MM - Sender: text"), got {line!r}',
                    line=lineno,
                )
            messages[-1][2].append(line)
            continue
        day, month, year, hour, minute, rest = match.groups()
        try:
            when = datetime(
                2000 + int(year), int(month), int(day), int(hour), int(minute)
            )
        except ValueError as exc:
            raise ParseError(f"line {lineno}: invalid date/time: {exc}", line=lineno)
        sender, sep, text = rest.partition(": ")
        if not sep:
            sender = None  # system message, e.g. encryption notice
            text = rest
        messages.append((when, sender, [text], lineno))

    utterances = []
    for when, sender, text_lines, lineno in messages:
        if sender is None:
            continue
        text = "\n".join(text_lines)
        if not text.strip():
            raise ParseError(
                f"line {lineno}: message from {sender!r} has no text", line=lineno
            )
        utterances.append(
            Utterance(
                conversation_id=conversation_id,
                index=len(utterances),
                timestamp=when,
                sender=sender,
                text=text,
            )
        )
    if not utterances:
        raise ParseError("export contains no sender-attributed messages")
    return Conversation(conversation_id, tuple(utterances))


def render_whatsapp_export(conv: Conversation) -> str:
    """Render a conversation back to the export line format.

    Inverse of parse_whatsapp_export for conversations whose senders do not
    contain ": " and whose text lines do not themselves look like headers.
    """
    lines: list[str] = []
    for utt in conv.utterances:
        first, *rest = utt.text.split("\n")
        ts = utt.timestamp
        lines.append(
            f"{ts.day:02d}.{ts.month:02d}.{ts.year % 100:02d}, "
            f"{ts.hour:02d}:{ts.minute:02d} - {utt.sender}: {first}"
        )
        lines.extend(rest)
    return "\n".join(lines) + "\n"


def pseudonymize(conv: Conversation, mapping: Mapping[str, str]) -> Conversation:
    """Replace every sender name according to mapping; text stays untouched.

    Raises DataError naming all senders that have no mapping entry.
    """
    senders = {utt.sender for utt in conv.utterances}
    missing = sorted(senders - set(mapping))
    if missing:
        raise DataError(
            "no alias for sender(s): " + ", ".join(repr(s) for s in missing)
        )
    return Conversation(
        conv.id,
        tuple(replace(utt, sender=mapping[utt.sender]) for utt in conv.utterances),
    )


def attach_annotations(
    conv: Conversation,
    annotations: Iterable[tuple[int, int]],
    faqs: FaqDatabase,
) -> Conversation:
    """Set gold FAQ ids on the listed utterances, silence on all others."""
    golds: dict[int, int] = {}
    for index, faq_id in annotations:
        if not 0 <= index < len(conv.utterances):
            raise DataError(
                f"annotation index {index} out of range for conversation "
                f"{conv.id!r} with {len(conv.utterances)} utterances"
            )
        if faq_id not in faqs:
            raise DataError(f"annotation references unknown FAQ id {faq_id}")
        if index in golds:
            raise DataError(
                f"conversation {conv.id!r}: utterance {index} annotated twice"
            )
        golds[index] = faq_id
    return Conversation(
        conv.id,
        tuple(
            replace(utt, gold=golds.get(utt.index, NO_SUGGESTION))
            for utt in conv.utterances
        ),
    )


def split_dataset(
    convs: Sequence[Conversation],
    ratios: tuple[float, float, float],
    seed: int,
) -> Splits:
    """Partition conversations into train/dev/test at conversation level.

    Dev and test sizes are ceil(ratio * N); train takes the remainder, so
    26 conversations at (0.70, 0.10, 0.20) come out as 17/3/6. The
    assignment shuffles conversation ids with the given seed and is
    deterministic.
    """
    if len(ratios) != 3:
        raise DataError(f"need (train, dev, test) ratios, got {len(ratios)}")
    if any(r < 0 for r in ratios):
        raise DataError(f"ratios must be non-negative, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise DataError(f"ratios must sum to 1, got {sum(ratios)}")
    ids = [c.id for c in convs]
    if len(set(ids)) != len(ids):
        raise DataError("conversation ids are not unique")
    nonzero = sum(1 for r in ratios if r > 0)
    if len(ids) < nonzero:
        raise DataError(
            f"{len(ids)} conversations cannot fill {nonzero} non-empty splits"
        )

    def _count(ratio: float) -> int:
        if ratio == 0:
            return 0
        target = ratio * len(ids)
        nearest = round(target)
        # guard against float noise like 0.1 * 30 == 3.0000000000000004
        return nearest if abs(target - nearest) < 1e-9 else math.ceil(target)

    n_dev = _count(ratios[1])
    n_test = _count(ratios[2])
    n_train = len(ids) - n_dev - n_test
    if n_train < 0 or (ratios[0] > 0 and n_train == 0):
        raise DataError(f"ratios {ratios} leave no conversations for train")

    shuffled = sorted(ids)
    random.Random(seed).shuffle(shuffled)
    return Splits(
        train=frozenset(shuffled[:n_train]),
        dev=frozenset(shuffled[n_train : n_train + n_dev]),
        test=frozenset(shuffled[n_train + n_dev :]),
    )


def select_conversations(
    convs: Sequence[Conversation], ids: Iterable[str]
) -> list[Conversation]:
    wanted = set(ids)
    return [c for c in convs if c.id in wanted]


def corpus_stats(convs: Sequence[Conversation]) -> CorpusStats:
    """Summary statistics over a corpus; all zero for an empty corpus."""
    lengths = [len(c.utterances) for c in convs]
    num_utterances = sum(lengths)
    per_faq: Counter[int] = Counter()
    for conv in convs:
        for utt in conv.utterances:
            if utt.is_annotated:
                per_faq[utt.gold] += 1
    annotated = sum(per_faq.values())
    return CorpusStats(
        num_conversations=len(convs),
        num_utterances=num_utterances,
        annotated_fraction=annotated / num_utterances if num_utterances else 0.0,
        per_faq_counts=dict(per_faq),
        min_conversation_length=min(lengths) if lengths else 0,
        max_conversation_length=max(lengths) if lengths else 0,
        mean_conversation_length=num_utterances / len(lengths) if lengths else 0.0,
    )


def all_utterances(convs: Iterable[Conversation]) -> list[Utterance]:
    return [utt for conv in convs for utt in conv.utterances]


# ---------------------------------------------------------------------------
# File formats


def save_corpus(convs: Iterable[Conversation], path: str | Path) -> None:
    """Write conversations as canonical JSONL, one utterance per line."""
    with Path(path).open("w", encoding="utf-8") as handle:
        for conv in convs:
            for utt in conv.utterances:
                record = {
                    "conversation_id": utt.conversation_id,
                    "index": utt.index,
                    "timestamp": utt.timestamp.isoformat(),
                    "sender": utt.sender,
                    "text": utt.text,
                    "gold": utt.gold,
                }
                handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_corpus(path: str | Path, faqs: FaqDatabase | None = None) -> list[Conversation]:
    """Read canonical JSONL back into conversations.

    Utterances are grouped by conversation_id in order of first appearance;
    gold FAQ ids are checked against faqs when a database is given.
    """
    grouped: dict[str, list[Utterance]] = {}
    with Path(path).open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                gold = record["gold"]
                if isinstance(gold, int) and faqs is not None and gold not in faqs:
                    raise DataError(f"unknown gold FAQ id {gold}")
                utt = Utterance(
                    conversation_id=record["conversation_id"],
                    index=record["index"],
                    timestamp=datetime.fromisoformat(record["timestamp"]),
                    sender=record["sender"],
                    text=record["text"],
                    gold=gold,
                )
            except (KeyError, ValueError, TypeError, DataError) as exc:
                raise DataError(f"{path}:{lineno}: bad corpus record: {exc}") from exc
            grouped.setdefault(utt.conversation_id, []).append(utt)
    return [
        Conversation(cid, tuple(sorted(utts, key=lambda u: u.index)))
        for cid, utts in grouped.items()
    ]


def load_faqs(path: str | Path) -> FaqDatabase:
    """Read the FAQ database (JSON array of id/theme/question/answer)."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise DataError(f"{path}: expected a JSON array of FAQ objects")
    items = []
    for entry in data:
        try:
            items.append(
                FaqItem(
                    id=entry["id"],
                    theme=entry.get("theme", ""),
                    question=entry["question"],
                    answer=entry["answer"],
                )
            )
        except (KeyError, TypeError) as exc:
            raise DataError(f"{path}: bad FAQ entry {entry!r}: {exc}") from exc
    return FaqDatabase(items)


def load_annotations(path: str | Path) -> dict[str, list[tuple[int, int]]]:
    """Read the annotation sidecar CSV, grouped by conversation id."""
    grouped: dict[str, list[tuple[int, int]]] = {}
    with Path(path).open("r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        expected = {"conversation_id", "utterance_index", "faq_id"}
        if reader.fieldnames is None or not expected <= set(reader.fieldnames):
            raise DataError(
                f"{path}: annotation CSV needs columns "
                "conversation_id, utterance_index, faq_id"
            )
        for row in reader:
            try:
                grouped.setdefault(row["conversation_id"], []).append(
                    (int(row["utterance_index"]), int(row["faq_id"]))
                )
            except ValueError as exc:
                raise DataError(f"{path}: bad annotation row {row!r}: {exc}") from exc
    return grouped
