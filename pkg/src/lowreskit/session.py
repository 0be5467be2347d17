"""Append-only session event store for the interactive editor.

Each editor session is a timestamp-ordered stream of events
(suggest_shown, accepted, overridden, finished). Appends are acknowledged
with a per-session monotonically increasing sequence number; replaying an
already-stored event returns the original ack, so clients can retry
safely. Replaying a session's accepted and overridden tokens reconstructs
the typed sentence exactly.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from . import records

EVENT_SUGGEST_SHOWN = "suggest_shown"
EVENT_ACCEPTED = "accepted"
EVENT_OVERRIDDEN = "overridden"
EVENT_FINISHED = "finished"
EVENT_TYPES = frozenset(
    {EVENT_SUGGEST_SHOWN, EVENT_ACCEPTED, EVENT_OVERRIDDEN, EVENT_FINISHED}
)


@dataclass(frozen=True)
class SessionEvent:
    session_id: str
    event: str
    payload: Mapping = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.event not in EVENT_TYPES:
            raise ValueError(f"unknown event type {self.event!r}")
        if not self.session_id:
            raise ValueError("session_id must be non-empty")

    def dedup_key(self) -> str:
        body = records.dumps_canonical({"event": self.event, "payload": dict(self.payload)})
        return hashlib.sha256(body.encode("utf-8")).hexdigest()

    def to_record(self) -> dict:
        return {
            "session_id": self.session_id,
            "event": self.event,
            "payload": dict(self.payload),
        }

    @classmethod
    def from_record(cls, row: Mapping) -> "SessionEvent":
        return cls(
            session_id=str(row["session_id"]),
            event=str(row["event"]),
            payload=dict(row.get("payload", {})),
        )


class SessionStore:
    """In-memory event streams with optional per-session JSONL persistence."""

    def __init__(self, root: str | Path | None = None):
        self._root = Path(root) if root is not None else None
        if self._root is not None:
            self._root.mkdir(parents=True, exist_ok=True)
        self._events: dict[str, list[SessionEvent]] = {}
        self._acks: dict[str, dict[str, int]] = {}
        self._lock = threading.Lock()

    def _load_session(self, session_id: str) -> None:
        if session_id in self._events:
            return
        self._events[session_id] = []
        self._acks[session_id] = {}
        if self._root is None:
            return
        path = self._root / f"{session_id}.jsonl"
        if not path.exists():
            return
        for row in records.read_jsonl(path):
            event = SessionEvent.from_record(row)
            self._events[session_id].append(event)
            self._acks[session_id][event.dedup_key()] = int(row["seq"])

    def append(self, event: SessionEvent) -> dict:
        """Store the event; returns ``{"session_id", "seq", "duplicate"}``.

        A byte-identical replay of a stored event gets back the original
        sequence number with ``duplicate`` set.
        """
        with self._lock:
            self._load_session(event.session_id)
            acks = self._acks[event.session_id]
            key = event.dedup_key()
            if key in acks:
                return {
                    "session_id": event.session_id,
                    "seq": acks[key],
                    "duplicate": True,
                }
            seq = len(self._events[event.session_id]) + 1
            self._events[event.session_id].append(event)
            acks[key] = seq
            if self._root is not None:
                path = self._root / f"{event.session_id}.jsonl"
                with open(path, "a", encoding="utf-8") as handle:
                    handle.write(
                        records.dumps_canonical({**event.to_record(), "seq": seq})
                    )
                    handle.write("\n")
            return {"session_id": event.session_id, "seq": seq, "duplicate": False}

    def events(self, session_id: str) -> list[SessionEvent]:
        with self._lock:
            self._load_session(session_id)
            return list(self._events[session_id])

    def replay_tokens(self, session_id: str) -> list[str]:
        return replay_tokens(self.events(session_id))

    def replay_sentence(self, session_id: str) -> str:
        return " ".join(self.replay_tokens(session_id))


def replay_tokens(events: Iterable[SessionEvent]) -> list[str]:
    """Reconstruct the typed sentence: every accepted or overridden token,
    in stream order, up to the first finish."""
    tokens: list[str] = []
    for event in events:
        if event.event in (EVENT_ACCEPTED, EVENT_OVERRIDDEN):
            word = event.payload.get("word")
            if word is not None:
                tokens.append(str(word))
        elif event.event == EVENT_FINISHED:
            break
    return tokens
