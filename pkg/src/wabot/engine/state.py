"""Conversation state and answer chunking."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime

from wabot.llm.pipeline import FollowupSet

MIN_CHUNK_LIMIT = 64


@dataclass(frozen=True)
class Exchange:
    """The last (query, answer) pair and the tier that produced the answer."""

    query: str
    answer: str
    tier_name: str


@dataclass
class ConversationState:
    """Everything the engine tracks for one user between turns."""

    address: str
    user_code: str
    country: str
    registered: bool = False
    opted_out: bool = False
    pending_chunks: list[str] = field(default_factory=list)
    last_exchange: Exchange | None = None
    followups: FollowupSet | None = None
    followup_answers: dict[str, str] = field(default_factory=dict)
    first_seen: datetime | None = None


@dataclass(frozen=True)
class ChunkPlan:
    """Ordered message segments whose concatenation equals the source text."""

    chunks: tuple[str, ...]
    chunk_limit: int


def chunk_text(text: str, chunk_limit: int) -> ChunkPlan:
    """Split text into chunks of at most chunk_limit characters.

    Splits happen at a paragraph break, then a line break, then a space,
    whenever one exists inside the budget window; otherwise mid-word. The
    concatenation of the chunks is exactly the input.
    """
    if chunk_limit < MIN_CHUNK_LIMIT:
        raise ValueError(f"chunk_limit must be >= {MIN_CHUNK_LIMIT}")
    if len(text) <= chunk_limit:
        return ChunkPlan(chunks=(text,), chunk_limit=chunk_limit)

    chunks: list[str] = []
    rest = text
    while len(rest) > chunk_limit:
        window = rest[:chunk_limit]
        cut = _cut_position(window)
        chunks.append(rest[:cut])
        rest = rest[cut:]
    chunks.append(rest)
    return ChunkPlan(chunks=tuple(chunks), chunk_limit=chunk_limit)


def _cut_position(window: str) -> int:
    para = window.rfind("\n\n")
    if para > 0:
        return para + 2
    line = window.rfind("\n")
    if line > 0:
        return line + 1
    space = window.rfind(" ")
    if space > 0:
        return space + 1
    return len(window)
