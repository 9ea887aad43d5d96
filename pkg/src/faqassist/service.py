"""Suggestion service: per-conversation sessions behind an HTTP JSON API.

Sessions are event-sourced. Every accepted operation appends one event to
a JSONL log and state transitions happen exclusively in apply_event, so
replaying a log reconstructs counters and slot contents exactly. Posted
utterances trigger a fresh ranking (when AI support is on); the agent sees
at most two suggestion slots and can page through up to four additional
suggestions via discard. Copy-to-chat adds a counter point, discard
subtracts one. Feedback is persisted but never changes the models.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Literal, Mapping, Sequence

from pydantic import BaseModel

from .corpus import NO_SUGGESTION, FaqDatabase, FaqItem
from .errors import DataError
from .retrieval import RankedSuggestion, query_from_pairs, tokenize

#: Slots visible to the agent at any time.
VISIBLE_SLOTS = 2
#: Additional suggestions reachable through discard paging.
EXTRA_SUGGESTIONS = 4
#: Upper bound of the reserve cursor (2 initial + 4 additional).
MAX_CURSOR = VISIBLE_SLOTS + EXTRA_SUGGESTIONS

EVENT_TYPES = (
    "session-created",
    "settings",
    "utterance",
    "copy-to-chat",
    "discard",
    "get-more-info",
    "feedback",
)


class UnknownSessionError(LookupError):
    pass


class SlotError(ValueError):
    pass


@dataclass(frozen=True)
class SessionMessage:
    sender: str
    text: str
    role: str  # "customer" or "agent"


@dataclass(frozen=True)
class Project:
    id: int
    title: str
    keywords: frozenset[str]
    description: str

    def __post_init__(self):
        object.__setattr__(
            self, "keywords", frozenset(k.lower() for k in self.keywords)
        )
        if not self.keywords:
            raise DataError(f"project {self.id} has no keywords")


@dataclass
class SessionSettings:
    ai_support: bool = True
    learning_behavior: bool = False  # persisted yet inert: no online learning


@dataclass
class SessionState:
    session_id: str
    messages: list[SessionMessage] = field(default_factory=list)
    ranking: list[RankedSuggestion] = field(default_factory=list)
    slots: list[RankedSuggestion | None] = field(
        default_factory=lambda: [None] * VISIBLE_SLOTS
    )
    cursor: int = VISIBLE_SLOTS
    counter: int = 0
    settings: SessionSettings = field(default_factory=SessionSettings)


def visible_queue(ranking: Sequence[RankedSuggestion]) -> list[RankedSuggestion]:
    """Suggestions the agent may ever see for this ranking.

    Silence at the top means the assistant stays quiet: nothing is shown.
    Otherwise the queue is the non-silence entries of the first six ranks
    (two visible slots plus four discard replacements); a silence entry
    further down is noise, not a card.
    """
    if not ranking or ranking[0].candidate == NO_SUGGESTION:
        return []
    return [r for r in ranking[:MAX_CURSOR] if r.candidate != NO_SUGGESTION]


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _ranking_payload(ranking: Sequence[RankedSuggestion]) -> list[dict]:
    return [
        {"class": r.candidate, "score": r.score, "percent": r.percent}
        for r in ranking
    ]


def _ranking_from_payload(payload: Iterable[Mapping]) -> list[RankedSuggestion]:
    return [
        RankedSuggestion(entry["class"], entry["score"], entry["percent"])
        for entry in payload
    ]


def apply_event(state: SessionState, event: Mapping) -> SessionState:
    """The single state transition function, shared by live ops and replay."""
    kind = event["type"]
    if kind == "session-created":
        return state
    if kind == "settings":
        state.settings.ai_support = bool(event["ai_support"])
        state.settings.learning_behavior = bool(event["learning_behavior"])
        return state
    if kind == "utterance":
        state.messages.append(
            SessionMessage(event["sender"], event["text"], event["role"])
        )
        if event.get("ranking") is not None:
            state.ranking = _ranking_from_payload(event["ranking"])
            queue = visible_queue(state.ranking)
            state.slots = [
                queue[i] if i < len(queue) else None for i in range(VISIBLE_SLOTS)
            ]
            state.cursor = VISIBLE_SLOTS
        return state
    if kind == "discard":
        slot = event["slot"]
        queue = visible_queue(state.ranking)
        if state.cursor < min(len(queue), MAX_CURSOR):
            state.slots[slot] = queue[state.cursor]
            state.cursor += 1
        else:
            state.slots[slot] = None
        state.counter -= 1
        return state
    if kind == "copy-to-chat":
        state.counter += 1
        return state
    if kind in ("get-more-info", "feedback"):
        return state
    raise DataError(f"unknown event type {kind!r}")


def replay_events(events: Iterable[Mapping]) -> dict[str, SessionState]:
    """Rebuild every session found in an event stream."""
    sessions: dict[str, SessionState] = {}
    for event in events:
        sid = event["session_id"]
        if sid not in sessions:
            sessions[sid] = SessionState(session_id=sid)
        apply_event(sessions[sid], event)
    return sessions


def read_event_log(path: str | Path) -> list[dict]:
    events = []
    with Path(path).open("r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                events.append(json.loads(line))
    return events


def match_projects(
    messages: Sequence[SessionMessage], projects: Sequence[Project]
) -> list[Project]:
    """Projects whose keywords intersect the customer's message tokens.

    Only customer messages count. Ordered by descending keyword match
    count, ties by ascending project id.
    """
    tokens: set[str] = set()
    for message in messages:
        if message.role == "customer":
            tokens.update(tokenize(message.text))
    hits = []
    for project in projects:
        overlap = len(project.keywords & tokens)
        if overlap > 0:
            hits.append((overlap, project))
    hits.sort(key=lambda pair: (-pair[0], pair[1].id))
    return [project for _, project in hits]


class SessionStore:
    """Owns all sessions, the ranker, and the append-only event log.

    Mutations on one session are serialized behind a per-session lock;
    the ranker and FAQ database are immutable and shared.
    """

    def __init__(
        self,
        faqs: FaqDatabase,
        ranker,
        projects: Sequence[Project] = (),
        event_log_path: str | Path | None = None,
        window: int = 4,
    ):
        self.faqs = faqs
        self.ranker = ranker
        self.projects = tuple(projects)
        self.window = window
        self._sessions: dict[str, SessionState] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self._log_path = Path(event_log_path) if event_log_path else None
        if self._log_path is not None:
            self._log_path.parent.mkdir(parents=True, exist_ok=True)
        self.events: list[dict] = []

    # -- event plumbing ----------------------------------------------------

    def _record(self, state: SessionState, event: dict) -> None:
        self.events.append(event)
        if self._log_path is not None:
            with self._log_path.open("a", encoding="utf-8") as handle:
                handle.write(json.dumps(event, ensure_ascii=False) + "\n")
        apply_event(state, event)

    def _get(self, session_id: str) -> tuple[SessionState, threading.Lock]:
        with self._registry_lock:
            if session_id not in self._sessions:
                raise UnknownSessionError(f"unknown session {session_id!r}")
            return self._sessions[session_id], self._locks[session_id]

    def _slot(self, state: SessionState, slot: int) -> RankedSuggestion:
        if not 0 <= slot < VISIBLE_SLOTS:
            raise SlotError(f"slot must be 0..{VISIBLE_SLOTS - 1}, got {slot}")
        suggestion = state.slots[slot]
        if suggestion is None:
            raise SlotError(f"slot {slot} is empty")
        return suggestion

    # -- operations ---------------------------------------------------------

    def create_session(self) -> str:
        session_id = uuid.uuid4().hex
        state = SessionState(session_id=session_id)
        with self._registry_lock:
            self._sessions[session_id] = state
            self._locks[session_id] = threading.Lock()
        self._record(
            state,
            {"type": "session-created", "session_id": session_id, "ts": _now()},
        )
        return session_id

    def post_utterance(
        self, session_id: str, sender: str, text: str, role: str
    ) -> SessionState:
        state, lock = self._get(session_id)
        with lock:
            ranking_payload = None
            if state.settings.ai_support:
                pairs = [(m.sender, m.text) for m in state.messages]
                pairs.append((sender, text))
                query = query_from_pairs(pairs, self.window)
                ranking_payload = _ranking_payload(self.ranker.rank(query))
            self._record(
                state,
                {
                    "type": "utterance",
                    "session_id": session_id,
                    "ts": _now(),
                    "sender": sender,
                    "text": text,
                    "role": role,
                    "ranking": ranking_payload,
                },
            )
            return state

    def discard(self, session_id: str, slot: int) -> SessionState:
        state, lock = self._get(session_id)
        with lock:
            suggestion = self._slot(state, slot)
            self._record(
                state,
                {
                    "type": "discard",
                    "session_id": session_id,
                    "ts": _now(),
                    "slot": slot,
                    "class": suggestion.candidate,
                },
            )
            return state

    def copy_to_chat(self, session_id: str, slot: int) -> tuple[SessionState, str]:
        state, lock = self._get(session_id)
        with lock:
            suggestion = self._slot(state, slot)
            answer = self.faqs[suggestion.candidate].answer
            self._record(
                state,
                {
                    "type": "copy-to-chat",
                    "session_id": session_id,
                    "ts": _now(),
                    "slot": slot,
                    "class": suggestion.candidate,
                },
            )
            return state, answer

    def get_more_info(self, session_id: str, slot: int) -> FaqItem:
        state, lock = self._get(session_id)
        with lock:
            suggestion = self._slot(state, slot)
            item = self.faqs[suggestion.candidate]
            self._record(
                state,
                {
                    "type": "get-more-info",
                    "session_id": session_id,
                    "ts": _now(),
                    "slot": slot,
                    "class": suggestion.candidate,
                },
            )
            return item

    def submit_feedback(
        self, session_id: str, search_terms: str, faq_id: int
    ) -> None:
        state, lock = self._get(session_id)
        with lock:
            if faq_id not in self.faqs:
                raise DataError(f"unknown FAQ id {faq_id}")
            window = [(m.sender, m.text) for m in state.messages[-self.window :]]
            self._record(
                state,
                {
                    "type": "feedback",
                    "session_id": session_id,
                    "ts": _now(),
                    "search_terms": search_terms,
                    "faq_id": faq_id,
                    "window": window,
                },
            )

    def matched_projects(self, session_id: str) -> list[Project]:
        state, _ = self._get(session_id)
        return match_projects(state.messages, self.projects)

    def update_settings(
        self, session_id: str, ai_support: bool, learning_behavior: bool
    ) -> None:
        state, lock = self._get(session_id)
        with lock:
            self._record(
                state,
                {
                    "type": "settings",
                    "session_id": session_id,
                    "ts": _now(),
                    "ai_support": ai_support,
                    "learning_behavior": learning_behavior,
                },
            )


def load_projects(path: str | Path) -> list[Project]:
    """Read the project database (JSON array of id/title/keywords/description)."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise DataError(f"{path}: expected a JSON array of projects")
    projects = []
    for entry in data:
        try:
            projects.append(
                Project(
                    id=entry["id"],
                    title=entry["title"],
                    keywords=frozenset(entry["keywords"]),
                    description=entry.get("description", ""),
                )
            )
        except (KeyError, TypeError) as exc:
            raise DataError(f"{path}: bad project entry {entry!r}: {exc}") from exc
    return projects


# ---------------------------------------------------------------------------
# HTTP layer


class UtteranceIn(BaseModel):
    sender: str
    text: str
    role: Literal["customer", "agent"]


class FeedbackIn(BaseModel):
    search_terms: str
    faq_id: int


class SettingsIn(BaseModel):
    ai_support: bool
    learning_behavior: bool


def _suggestion_payload(
    suggestion: RankedSuggestion, faqs: FaqDatabase
) -> dict:
    if suggestion.candidate == NO_SUGGESTION:
        theme = ""
    else:
        theme = faqs[suggestion.candidate].theme
    return {
        "class": suggestion.candidate,
        "theme": theme,
        "percent": suggestion.percent,
    }


def _slots_payload(state: SessionState, faqs: FaqDatabase) -> list[dict | None]:
    return [
        _suggestion_payload(s, faqs) if s is not None else None for s in state.slots
    ]


def create_app(store: SessionStore):
    """Build the FastAPI application around a session store."""
    from fastapi import FastAPI, HTTPException
    from fastapi.middleware.cors import CORSMiddleware

    app = FastAPI(title="faqassist suggestion service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store

    def _wrap(func, *args):
        try:
            return func(*args)
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except (SlotError, DataError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.get("/api/v1/health")
    def health():
        return {"status": "ok"}

    @app.post("/api/v1/sessions")
    def create_session():
        return {"session_id": store.create_session()}

    @app.post("/api/v1/sessions/{session_id}/utterances")
    def post_utterance(session_id: str, body: UtteranceIn):
        state = _wrap(
            store.post_utterance, session_id, body.sender, body.text, body.role
        )
        return {
            "suggestions": [
                _suggestion_payload(s, store.faqs) for s in state.ranking
            ],
            "slots": _slots_payload(state, store.faqs),
        }

    @app.post("/api/v1/sessions/{session_id}/slots/{slot}/discard")
    def discard(session_id: str, slot: int):
        state = _wrap(store.discard, session_id, slot)
        return {
            "slots": _slots_payload(state, store.faqs),
            "counter": state.counter,
        }

    @app.post("/api/v1/sessions/{session_id}/slots/{slot}/copy")
    def copy_to_chat(session_id: str, slot: int):
        state, answer = _wrap(store.copy_to_chat, session_id, slot)
        return {"answer_text": answer, "counter": state.counter}

    @app.get("/api/v1/sessions/{session_id}/slots/{slot}/info")
    def get_more_info(session_id: str, slot: int):
        item = _wrap(store.get_more_info, session_id, slot)
        return {
            "id": item.id,
            "theme": item.theme,
            "question": item.question,
            "answer": item.answer,
        }

    @app.post("/api/v1/sessions/{session_id}/feedback")
    def feedback(session_id: str, body: FeedbackIn):
        _wrap(store.submit_feedback, session_id, body.search_terms, body.faq_id)
        return {"ok": True}

    @app.get("/api/v1/sessions/{session_id}/projects")
    def projects(session_id: str):
        matched = _wrap(store.matched_projects, session_id)
        return [
            {
                "id": p.id,
                "title": p.title,
                "keywords": sorted(p.keywords),
                "description": p.description,
            }
            for p in matched
        ]

    @app.put("/api/v1/sessions/{session_id}/settings")
    def settings(session_id: str, body: SettingsIn):
        _wrap(
            store.update_settings, session_id, body.ai_support, body.learning_behavior
        )
        return {"ok": True}

    return app
