"""Canonical inbound/outbound message types and their platform limits."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime

KIND_TEXT = "text"
KIND_BUTTON_REPLY = "button_reply"
KIND_LIST_REPLY = "list_reply"
KIND_SYSTEM = "system"

REPLY_KINDS = (KIND_BUTTON_REPLY, KIND_LIST_REPLY)

MAX_BUTTONS = 3
MAX_BUTTON_TITLE = 20
MAX_LIST_ROWS = 10
MAX_ROW_TITLE = 24
MAX_ROW_DESCRIPTION = 72
DEFAULT_TEXT_LIMIT = 4096


class ConstraintViolation(Exception):
    """An outbound message violates a platform limit; never truncate silently."""


@dataclass(frozen=True)
class InboundMessage:
    """One user message decoded from a webhook batch."""

    sender: str
    received_at: datetime
    kind: str
    body: str = ""
    reply_id: str = ""
    message_id: str = ""
    raw_type: str = ""

    def is_reply(self) -> bool:
        return self.kind in REPLY_KINDS


@dataclass(frozen=True)
class Button:
    id: str
    title: str


@dataclass(frozen=True)
class ButtonSet:
    buttons: tuple[Button, ...]


@dataclass(frozen=True)
class ListRow:
    id: str
    title: str
    description: str = ""


@dataclass(frozen=True)
class ListSection:
    title: str
    rows: tuple[ListRow, ...]


@dataclass(frozen=True)
class ListMenu:
    button_label: str
    sections: tuple[ListSection, ...]

    def rows(self) -> list[ListRow]:
        return [row for section in self.sections for row in section.rows]


@dataclass(frozen=True)
class OutboundMessage:
    """A reply ready for rendering: text plus optional interactive affordances."""

    recipient: str
    text: str
    interactive: ButtonSet | ListMenu | None = None
    origin: str = "answer_chunk"


def validate_outbound(msg: OutboundMessage, text_limit: int = DEFAULT_TEXT_LIMIT) -> None:
    """Check every platform limit; raise ConstraintViolation on the first breach."""
    if not msg.recipient:
        raise ConstraintViolation("empty recipient")
    if len(msg.text) > text_limit:
        raise ConstraintViolation(f"text length {len(msg.text)} exceeds limit {text_limit}")
    if isinstance(msg.interactive, ButtonSet):
        buttons = msg.interactive.buttons
        if not 1 <= len(buttons) <= MAX_BUTTONS:
            raise ConstraintViolation(f"button count {len(buttons)} outside 1..{MAX_BUTTONS}")
        _check_action_ids([b.id for b in buttons])
        for b in buttons:
            if not b.title:
                raise ConstraintViolation(f"empty button title for id {b.id!r}")
            if len(b.title) > MAX_BUTTON_TITLE:
                raise ConstraintViolation(
                    f"button title {b.title!r} longer than {MAX_BUTTON_TITLE} characters"
                )
        if not msg.text:
            raise ConstraintViolation("button message requires body text")
    elif isinstance(msg.interactive, ListMenu):
        menu = msg.interactive
        if not menu.button_label or len(menu.button_label) > MAX_BUTTON_TITLE:
            raise ConstraintViolation("list button label empty or over-length")
        rows = menu.rows()
        if not rows:
            raise ConstraintViolation("list menu has no rows")
        if len(rows) > MAX_LIST_ROWS:
            raise ConstraintViolation(f"list has {len(rows)} rows, limit {MAX_LIST_ROWS}")
        _check_action_ids([row.id for row in rows])
        for row in rows:
            if not row.title:
                raise ConstraintViolation(f"empty row title for id {row.id!r}")
            if len(row.title) > MAX_ROW_TITLE:
                raise ConstraintViolation(
                    f"row title {row.title!r} longer than {MAX_ROW_TITLE} characters"
                )
            if len(row.description) > MAX_ROW_DESCRIPTION:
                raise ConstraintViolation(
                    f"row description longer than {MAX_ROW_DESCRIPTION} characters"
                )
        if not msg.text:
            raise ConstraintViolation("list message requires body text")
    elif msg.interactive is not None:
        raise ConstraintViolation(f"unknown interactive payload {type(msg.interactive)!r}")
    elif not msg.text:
        raise ConstraintViolation("text message requires a body")


def _check_action_ids(ids: list[str]) -> None:
    if any(not i for i in ids):
        raise ConstraintViolation("empty action id")
    if len(set(ids)) != len(ids):
        raise ConstraintViolation("duplicate action ids")


def preview(text: str, limit: int) -> str:
    """Truncation-safe single-line preview for row/button titles."""
    flat = " ".join(text.split())
    if len(flat) <= limit:
        return flat
    return flat[: limit - 1].rstrip() + "…"
