"""Recent and Trending question lists plus the daily featured-question broadcast.

Every accepted freeform query runs through: question filter → rephrase →
Recent insertion → answer prefetch → broad-appeal rating → Trending
insertion above the threshold. Duplicate questions refresh recency instead
of duplicating.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from datetime import date, datetime
from zoneinfo import ZoneInfo

from wabot.config import CurationConfig
from wabot.countries import flag
from wabot.gateway.messages import ListMenu, ListRow, ListSection, OutboundMessage, preview
from wabot.llm.pipeline import CriteriaScores, LlmPipeline, MalformedScores
from wabot.llm.provider import ProviderFailure

log = logging.getLogger(__name__)

PREFETCH_TIER = "curation"


class NothingToFeature(Exception):
    pass


@dataclass
class CuratedEntry:
    """A rephrased community question with prefetched answers and counters."""

    entry_id: int
    display_text: str
    author_country: str
    author_code: str
    created_at: datetime
    scores: CriteriaScores | None = None
    prefetched: dict[str, str] = field(default_factory=dict)
    times_selected: int = 0
    featured: bool = False


@dataclass(frozen=True)
class TopQBroadcast:
    sent_at: datetime
    entry_id: int
    recipients: tuple[str, ...]
    message_id: str


_NORMALIZE = re.compile(r"[^a-z0-9 ]+")


def normalize_question(text: str) -> str:
    """Key for duplicate detection: lowercase alphanumeric words only."""
    lowered = _NORMALIZE.sub(" ", text.casefold())
    return " ".join(lowered.split())


class CurationService:
    def __init__(self, pipeline: LlmPipeline, config: CurationConfig | None = None) -> None:
        self.pipeline = pipeline
        self.config = config or CurationConfig()
        self.entries: dict[int, CuratedEntry] = {}
        self.recent_ids: list[int] = []  # newest first
        self.trending_ids: list[int] = []  # (score desc, created desc)
        self.broadcasts: list[TopQBroadcast] = []
        self.last_attempt_day: date | None = None
        self._next_id = 1
        self._by_norm: dict[str, int] = {}

    # -- intake -----------------------------------------------------------------

    def on_new_query(self, query: str, author_code: str, author_country: str, at: datetime) -> None:
        """Run the curation pipeline for a newly answered freeform query.

        Never raises toward the engine; curation failures only lose a
        candidate.
        """
        try:
            self._ingest(query, author_code, author_country, at)
        except Exception:  # noqa: BLE001 -- engine turns must not fail on curation
            log.exception("curation pipeline failed for a query")

    def _ingest(self, query: str, author_code: str, author_country: str, at: datetime) -> None:
        filtered = self.pipeline.recent_filter(query)
        if filtered is None:
            return
        rephrased = self.pipeline.rephrase_question(filtered).strip()
        if not rephrased or len(rephrased.split()) > 150:
            rephrased = filtered

        norm = normalize_question(rephrased)
        existing_id = self._by_norm.get(norm)
        if existing_id is not None:
            self._refresh(existing_id, at)
            return

        entry = CuratedEntry(
            entry_id=self._next_id,
            display_text=rephrased,
            author_country=author_country,
            author_code=author_code,
            created_at=at,
        )
        self._next_id += 1
        self.entries[entry.entry_id] = entry
        self._by_norm[norm] = entry.entry_id

        self.recent_ids.insert(0, entry.entry_id)
        del self.recent_ids[self.config.recent_capacity :]

        try:
            entry.prefetched[PREFETCH_TIER] = self.pipeline.prefetch_answer(rephrased)
        except ProviderFailure as exc:
            log.warning("prefetch failed, entry stays answerless: %s", exc)

        try:
            entry.scores = self.pipeline.trending_rate(rephrased, original_query=query)
        except (MalformedScores, ProviderFailure) as exc:
            log.warning("trending rating unavailable: %s", exc)
            return
        if entry.scores.total >= self.config.trending_threshold:
            self.trending_ids.append(entry.entry_id)
            self._sort_trending()
            del self.trending_ids[self.config.trending_capacity :]

    def _refresh(self, entry_id: int, at: datetime) -> None:
        entry = self.entries[entry_id]
        entry.created_at = at
        if entry_id in self.recent_ids:
            self.recent_ids.remove(entry_id)
        self.recent_ids.insert(0, entry_id)
        del self.recent_ids[self.config.recent_capacity :]
        self._sort_trending()

    def _sort_trending(self) -> None:
        self.trending_ids.sort(
            key=lambda eid: (
                -(self.entries[eid].scores.total if self.entries[eid].scores else 0),
                -self.entries[eid].created_at.timestamp(),
                eid,
            )
        )

    # -- reads ---------------------------------------------------------------------

    def get_entry(self, entry_id: int) -> CuratedEntry | None:
        return self.entries.get(entry_id)

    def get_list(self, kind: str, limit: int) -> list[CuratedEntry]:
        """Ordered slice of the Recent or Trending list."""
        if limit > 9:
            raise ValueError("limit capped at 9; one row is reserved for navigation")
        if kind == "recent":
            ids = self.recent_ids[:limit]
        elif kind == "trending":
            ids = self.trending_ids[:limit]
        else:
            raise ValueError(f"unknown list kind {kind!r}")
        return [self.entries[eid] for eid in ids]

    def render_list(self, kind: str, recipient: str) -> OutboundMessage:
        """The list as a ListMenu message; friendly placeholder when empty."""
        entries = self.get_list(kind, self.config.list_rows)
        title = "Trending Questions" if kind == "trending" else "Recent Questions"
        origin = "trending_view" if kind == "trending" else "recent_view"
        if not entries:
            return OutboundMessage(
                recipient=recipient,
                text=f"Nothing in {title} yet. Ask a question and it might appear here! ✨",
                origin=origin,
            )
        prefix = "trend" if kind == "trending" else "recent"
        rows = [
            ListRow(
                id=f"{prefix}:{entry.entry_id}",
                title=preview(f"{flag(entry.author_country)} {entry.display_text}", 24),
                description=preview(entry.display_text, 72),
            )
            for entry in entries
        ]
        rows.append(ListRow(id="menu:main", title="Main Menu", description="Back to all features"))
        menu = ListMenu(
            button_label="View questions",
            sections=(ListSection(title=title, rows=tuple(rows)),),
        )
        return OutboundMessage(
            recipient=recipient,
            text=f"{title} — tap one to see its answer.",
            interactive=menu,
            origin=origin,
        )

    def select_entry(self, entry_id: int) -> tuple[CuratedEntry, str | None]:
        """Record a selection and return the cached answer if prefetched."""
        entry = self.entries[entry_id]
        entry.times_selected += 1
        return entry, entry.prefetched.get(PREFETCH_TIER)

    def fill_answer(self, entry_id: int, answer: str) -> None:
        self.entries[entry_id].prefetched[PREFETCH_TIER] = answer

    # -- top question of the day ------------------------------------------------------

    def select_topq(self, now: datetime) -> CuratedEntry:
        """Deterministic featured-question rule.

        Highest-scoring trending entry not yet featured (ties: newest),
        falling back to the newest unfeatured recent entry.
        """
        for eid in self.trending_ids:
            if not self.entries[eid].featured:
                entry = self.entries[eid]
                entry.featured = True
                return entry
        for eid in self.recent_ids:
            if not self.entries[eid].featured:
                entry = self.entries[eid]
                entry.featured = True
                return entry
        raise NothingToFeature(now.isoformat())

    def build_topq_message(self, entry: CuratedEntry, recipient: str) -> OutboundMessage:
        """The broadcast message: question, author flag, answer access, menu, opt-out."""
        menu = ListMenu(
            button_label="Options",
            sections=(
                ListSection(
                    title="Top Question of the Day",
                    rows=(
                        ListRow(
                            id=f"topq:answer:{entry.entry_id}",
                            title="View the answer",
                            description=preview(entry.display_text, 72),
                        ),
                        ListRow(id="menu:main", title="Main Menu", description="All features"),
                        ListRow(
                            id="optout:confirm",
                            title="Stop daily messages",
                            description="Opt out of chatbot-initiated messages",
                        ),
                    ),
                ),
            ),
        )
        text = (
            f"\U0001F31F *Top Question of the Day*\n\n"
            f"{flag(entry.author_country)} {entry.display_text}"
        )
        return OutboundMessage(recipient=recipient, text=text, interactive=menu, origin="topq_sent")

    def due_for_broadcast(self, now: datetime, tz: str, send_hour: int) -> bool:
        """True when today's broadcast (configured timezone) has not run yet."""
        local = now.astimezone(ZoneInfo(tz))
        if local.hour < send_hour:
            return False
        return self.last_attempt_day != local.date()

    def mark_attempt(self, now: datetime, tz: str) -> None:
        self.last_attempt_day = now.astimezone(ZoneInfo(tz)).date()

    def record_broadcast(self, broadcast: TopQBroadcast) -> None:
        self.broadcasts.append(broadcast)

    # -- persistence ---------------------------------------------------------------------

    def to_snapshot(self) -> dict:
        return {
            "next_id": self._next_id,
            "recent_ids": self.recent_ids,
            "trending_ids": self.trending_ids,
            "last_attempt_day": self.last_attempt_day.isoformat() if self.last_attempt_day else None,
            "entries": [
                {
                    "entry_id": e.entry_id,
                    "display_text": e.display_text,
                    "author_country": e.author_country,
                    "author_code": e.author_code,
                    "created_at": e.created_at.isoformat(),
                    "scores": list(e.scores.bits) if e.scores else None,
                    "prefetched": e.prefetched,
                    "times_selected": e.times_selected,
                    "featured": e.featured,
                }
                for e in self.entries.values()
            ],
            "broadcasts": [
                {
                    "sent_at": b.sent_at.isoformat(),
                    "entry_id": b.entry_id,
                    "recipients": list(b.recipients),
                    "message_id": b.message_id,
                }
                for b in self.broadcasts
            ],
        }

    @classmethod
    def from_snapshot(
        cls, data: dict, pipeline: LlmPipeline, config: CurationConfig | None = None
    ) -> "CurationService":
        service = cls(pipeline, config)
        service._next_id = data.get("next_id", 1)
        service.recent_ids = list(data.get("recent_ids", []))
        service.trending_ids = list(data.get("trending_ids", []))
        raw_day = data.get("last_attempt_day")
        service.last_attempt_day = date.fromisoformat(raw_day) if raw_day else None
        for row in data.get("entries", []):
            entry = CuratedEntry(
                entry_id=row["entry_id"],
                display_text=row["display_text"],
                author_country=row["author_country"],
                author_code=row["author_code"],
                created_at=datetime.fromisoformat(row["created_at"]),
                scores=CriteriaScores(bits=tuple(row["scores"])) if row.get("scores") else None,
                prefetched=dict(row.get("prefetched", {})),
                times_selected=row.get("times_selected", 0),
                featured=row.get("featured", False),
            )
            service.entries[entry.entry_id] = entry
            service._by_norm[normalize_question(entry.display_text)] = entry.entry_id
        for row in data.get("broadcasts", []):
            service.broadcasts.append(
                TopQBroadcast(
                    sent_at=datetime.fromisoformat(row["sent_at"]),
                    entry_id=row["entry_id"],
                    recipients=tuple(row["recipients"]),
                    message_id=row["message_id"],
                )
            )
        return service
