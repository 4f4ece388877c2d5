"""Append-only pseudonymized event log plus content table and snapshots.

One JSON object per line, UTF-8, append-only. Message bodies live in a
separate content table keyed by ``payload_ref`` so the event log stays
compact and free of user text. The log is the single substrate for replay,
rewards, and analytics.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, Iterable, Iterator

INBOUND = "inbound"
OUTBOUND = "outbound"

# Feature tags; the documented record schema is a compatibility contract
# for the analytics CLI.
ACTIONS = frozenset(
    {
        "freeform",
        "continue_reading",
        "better_answer",
        "menu",
        "trending_view",
        "trending_select",
        "recent_view",
        "recent_select",
        "followup_view",
        "followup_full_list",
        "followup_select",
        "leaderboard_view",
        "mypoints_view",
        "topq_sent",
        "topq_answer_view",
        "register",
        "opt_out",
    }
)

_RAW_PHONE = re.compile(r"^\+?\d{7,15}$")


class StoreError(Exception):
    pass


class InvalidRecord(StoreError):
    pass


def utc_ms(dt: datetime) -> int:
    """Epoch milliseconds of a timezone-aware datetime."""
    if dt.tzinfo is None:
        raise ValueError("naive datetime; store timestamps must be UTC-aware")
    return int(dt.timestamp() * 1000)


def from_utc_ms(ms: int) -> datetime:
    return datetime.fromtimestamp(ms / 1000, tz=timezone.utc)


@dataclass(frozen=True)
class EventRecord:
    """One pseudonymized interaction-log row."""

    seq: int
    at: datetime
    user_code: str
    direction: str
    action: str
    payload_ref: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "seq": self.seq,
                "at": utc_ms(self.at),
                "user_code": self.user_code,
                "direction": self.direction,
                "action": self.action,
                "payload_ref": self.payload_ref,
            },
            ensure_ascii=False,
            separators=(",", ":"),
        )

    @staticmethod
    def from_json(line: str) -> "EventRecord":
        data = json.loads(line)
        return EventRecord(
            seq=data["seq"],
            at=from_utc_ms(data["at"]),
            user_code=data["user_code"],
            direction=data["direction"],
            action=data["action"],
            payload_ref=data.get("payload_ref", ""),
        )


def validate_record(record: EventRecord) -> None:
    if record.direction not in (INBOUND, OUTBOUND):
        raise InvalidRecord(f"bad direction {record.direction!r}")
    if record.action not in ACTIONS:
        raise InvalidRecord(f"unknown action {record.action!r}")
    if _RAW_PHONE.match(record.user_code):
        raise InvalidRecord("user_code looks like a raw phone number; pseudonymize first")
    if record.at.tzinfo is None:
        raise InvalidRecord("naive timestamp")


@dataclass
class ReplayState:
    """State deterministically rebuildable from the event log alone."""

    registered: set[str] = field(default_factory=set)
    opted_out: set[str] = field(default_factory=set)
    action_counts: dict[str, dict[str, int]] = field(default_factory=dict)
    last_seq: int = 0

    def digest(self) -> str:
        payload = json.dumps(
            {
                "registered": sorted(self.registered),
                "opted_out": sorted(self.opted_out),
                "action_counts": {
                    u: dict(sorted(c.items())) for u, c in sorted(self.action_counts.items())
                },
                "last_seq": self.last_seq,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()


def replay(events: Iterable[EventRecord]) -> ReplayState:
    """Rebuild log-derived state; idempotent for a given event sequence."""
    state = ReplayState()
    for ev in events:
        state.last_seq = max(state.last_seq, ev.seq)
        if ev.direction == INBOUND:
            counts = state.action_counts.setdefault(ev.user_code, {})
            counts[ev.action] = counts.get(ev.action, 0) + 1
            if ev.action == "register":
                state.registered.add(ev.user_code)
            elif ev.action == "opt_out":
                state.opted_out.add(ev.user_code)
    return state


class EventStore:
    """Single-writer append-only store.

    With paths, every append is flushed to disk before it returns; without
    paths the store is purely in-memory (used by the simulator and tests).
    """

    def __init__(
        self,
        log_path: str | Path | None = None,
        content_path: str | Path | None = None,
        snapshot_dir: str | Path | None = None,
    ) -> None:
        self._events: list[EventRecord] = []
        self._content: dict[str, str] = {}
        self._next_seq = 1
        self._next_ref = 1
        self._log_file: IO[str] | None = None
        self._content_file: IO[str] | None = None
        self.snapshot_dir = Path(snapshot_dir) if snapshot_dir else None

        if log_path is not None:
            path = Path(log_path)
            path.parent.mkdir(parents=True, exist_ok=True)
            if path.exists():
                for line in path.read_text(encoding="utf-8").splitlines():
                    if line.strip():
                        self._events.append(EventRecord.from_json(line))
                if self._events:
                    self._next_seq = self._events[-1].seq + 1
            self._log_file = path.open("a", encoding="utf-8")
        if content_path is not None:
            cpath = Path(content_path)
            cpath.parent.mkdir(parents=True, exist_ok=True)
            if cpath.exists():
                for line in cpath.read_text(encoding="utf-8").splitlines():
                    if line.strip():
                        row = json.loads(line)
                        self._content[row["ref"]] = row["text"]
                if self._content:
                    self._next_ref = len(self._content) + 1
            self._content_file = cpath.open("a", encoding="utf-8")

    def close(self) -> None:
        if self._log_file:
            self._log_file.close()
            self._log_file = None
        if self._content_file:
            self._content_file.close()
            self._content_file = None

    # -- content table ----------------------------------------------------

    def put_content(self, text: str) -> str:
        """Store a message body, returning its payload_ref."""
        ref = f"c{self._next_ref}"
        self._next_ref += 1
        self._content[ref] = text
        if self._content_file:
            self._content_file.write(
                json.dumps({"ref": ref, "text": text}, ensure_ascii=False) + "\n"
            )
            self._content_file.flush()
        return ref

    def get_content(self, ref: str) -> str:
        return self._content.get(ref, "")

    # -- event log ---------------------------------------------------------

    def append(
        self, at: datetime, user_code: str, direction: str, action: str, text: str = ""
    ) -> EventRecord:
        """Validate, sequence, and durably append one event."""
        ref = self.put_content(text) if text else ""
        record = EventRecord(
            seq=self._next_seq,
            at=at,
            user_code=user_code,
            direction=direction,
            action=action,
            payload_ref=ref,
        )
        validate_record(record)
        self._events.append(record)
        self._next_seq += 1
        if self._log_file:
            self._log_file.write(record.to_json() + "\n")
            self._log_file.flush()
        return record

    def events(self) -> list[EventRecord]:
        return list(self._events)

    def load_range(self, start: datetime, end: datetime) -> list[EventRecord]:
        """Records with at in the half-open interval [start, end), seq order."""
        if start > end:
            raise ValueError("start must be <= end")
        return [ev for ev in self._events if start <= ev.at < end]

    def replay_state(self) -> ReplayState:
        return replay(self._events)

    # -- snapshots ----------------------------------------------------------

    def save_snapshot(self, name: str, data: dict) -> Path:
        if self.snapshot_dir is None:
            raise StoreError("no snapshot directory configured")
        self.snapshot_dir.mkdir(parents=True, exist_ok=True)
        path = self.snapshot_dir / f"{name}.json"
        path.write_text(json.dumps(data, ensure_ascii=False, indent=2), encoding="utf-8")
        return path

    def load_snapshot(self, name: str) -> dict | None:
        if self.snapshot_dir is None:
            return None
        path = self.snapshot_dir / f"{name}.json"
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))


def read_log(path: str | Path) -> list[EventRecord]:
    """Read a full event log file in seq order."""
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            records.append(EventRecord.from_json(line))
    return records


def iter_log(path: str | Path) -> Iterator[EventRecord]:
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield EventRecord.from_json(line)
