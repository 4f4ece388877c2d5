"""Decoder for platform webhook payloads plus the verification handshake.

Two envelopes share one message schema: the platform envelope
(``entry -> changes -> value -> messages``) and the local sandbox envelope
(``{"object": "sandbox", "messages": [...]}``) used by tests and the
web-chat UI.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from typing import Any

from wabot.gateway.messages import (
    KIND_BUTTON_REPLY,
    KIND_LIST_REPLY,
    KIND_SYSTEM,
    KIND_TEXT,
    InboundMessage,
)

PLATFORM_OBJECT = "whatsapp_business_account"
SANDBOX_OBJECT = "sandbox"


class MalformedPayload(Exception):
    """Webhook body does not parse as the expected structure; reject the batch."""


class UnknownSchemaVersion(Exception):
    """Webhook body declares an envelope this gateway does not speak."""


class VerificationFailed(Exception):
    """Subscription handshake with a wrong mode or token."""


def verify_subscription(mode: str, token: str, challenge: str, expected_token: str) -> str:
    """Echo the challenge iff this is a 'subscribe' call with the right token."""
    if mode == "subscribe" and expected_token and token == expected_token:
        return challenge
    raise VerificationFailed(f"mode={mode!r}")


def parse_webhook(payload: str | bytes | dict) -> list[InboundMessage]:
    """Decode one webhook batch into InboundMessages, in payload order."""
    if isinstance(payload, (str, bytes)):
        try:
            data = json.loads(payload)
        except json.JSONDecodeError as exc:
            raise MalformedPayload(f"invalid JSON: {exc}") from None
    else:
        data = payload
    if not isinstance(data, dict):
        raise MalformedPayload("webhook body must be a JSON object")

    envelope = data.get("object")
    if envelope == PLATFORM_OBJECT:
        raw_messages = _platform_messages(data)
    elif envelope == SANDBOX_OBJECT:
        raw_messages = data.get("messages", [])
        if not isinstance(raw_messages, list):
            raise MalformedPayload("sandbox envelope 'messages' must be a list")
    elif envelope is None:
        raise MalformedPayload("missing 'object' envelope key")
    else:
        raise UnknownSchemaVersion(f"unsupported webhook object {envelope!r}")

    messages = [_decode_message(m) for m in raw_messages]
    _check_monotone(messages)
    return messages


def _platform_messages(data: dict) -> list[dict]:
    try:
        out: list[dict] = []
        for entry in data.get("entry", []):
            for change in entry.get("changes", []):
                value = change.get("value", {})
                out.extend(value.get("messages", []))
        return out
    except AttributeError as exc:
        raise MalformedPayload(f"unexpected nesting: {exc}") from None


def _decode_message(msg: Any) -> InboundMessage:
    if not isinstance(msg, dict):
        raise MalformedPayload("message object must be a JSON object")
    sender = msg.get("from", "")
    if not sender:
        raise MalformedPayload("message missing 'from'")
    received_at = _decode_timestamp(msg)
    message_id = msg.get("id", "")
    mtype = msg.get("type", "")

    if mtype == "text":
        body = msg.get("text", {}).get("body", "")
        if not body:
            return InboundMessage(
                sender=sender,
                received_at=received_at,
                kind=KIND_SYSTEM,
                message_id=message_id,
                raw_type="text:empty",
            )
        return InboundMessage(
            sender=sender,
            received_at=received_at,
            kind=KIND_TEXT,
            body=body,
            message_id=message_id,
        )
    if mtype == "interactive":
        inter = msg.get("interactive", {})
        itype = inter.get("type", "")
        if itype == "button_reply":
            reply = inter.get("button_reply", {})
            kind = KIND_BUTTON_REPLY
        elif itype == "list_reply":
            reply = inter.get("list_reply", {})
            kind = KIND_LIST_REPLY
        else:
            return InboundMessage(
                sender=sender,
                received_at=received_at,
                kind=KIND_SYSTEM,
                message_id=message_id,
                raw_type=f"interactive:{itype or 'unknown'}",
            )
        reply_id = reply.get("id", "")
        if not reply_id:
            raise MalformedPayload(f"{itype} without an id")
        return InboundMessage(
            sender=sender,
            received_at=received_at,
            kind=kind,
            body=reply.get("title", ""),
            reply_id=reply_id,
            message_id=message_id,
        )
    # Unknown media and system notifications map to a system message with
    # the raw type recorded so the engine can send a text-only notice.
    return InboundMessage(
        sender=sender,
        received_at=received_at,
        kind=KIND_SYSTEM,
        message_id=message_id,
        raw_type=mtype or "unknown",
    )


def _decode_timestamp(msg: dict) -> datetime:
    if "timestamp_ms" in msg:
        try:
            return datetime.fromtimestamp(int(msg["timestamp_ms"]) / 1000, tz=timezone.utc)
        except (TypeError, ValueError) as exc:
            raise MalformedPayload(f"bad timestamp_ms: {exc}") from None
    try:
        return datetime.fromtimestamp(int(msg.get("timestamp", 0)), tz=timezone.utc)
    except (TypeError, ValueError) as exc:
        raise MalformedPayload(f"bad timestamp: {exc}") from None


def _check_monotone(messages: list[InboundMessage]) -> None:
    last_seen: dict[str, datetime] = {}
    for m in messages:
        prev = last_seen.get(m.sender)
        if prev is not None and m.received_at < prev:
            raise MalformedPayload(
                f"timestamps for sender {m.sender!r} not monotone within batch"
            )
        last_seen[m.sender] = m.received_at


# -- payload builders (sandbox channel, tests, transcript replay) -----------


def make_text_payload(
    sender: str, text: str, at: datetime, message_id: str, envelope: str = SANDBOX_OBJECT
) -> dict:
    """Build a webhook payload carrying one text message."""
    return _wrap(
        {
            "from": sender,
            "id": message_id,
            "timestamp_ms": int(at.timestamp() * 1000),
            "type": "text",
            "text": {"body": text},
        },
        envelope,
    )


def make_reply_payload(
    sender: str,
    reply_id: str,
    title: str,
    at: datetime,
    message_id: str,
    kind: str = KIND_BUTTON_REPLY,
    envelope: str = SANDBOX_OBJECT,
) -> dict:
    """Build a webhook payload carrying one button/list reply echo."""
    reply_key = "button_reply" if kind == KIND_BUTTON_REPLY else "list_reply"
    return _wrap(
        {
            "from": sender,
            "id": message_id,
            "timestamp_ms": int(at.timestamp() * 1000),
            "type": "interactive",
            "interactive": {"type": reply_key, reply_key: {"id": reply_id, "title": title}},
        },
        envelope,
    )


def _wrap(message: dict, envelope: str) -> dict:
    if envelope == SANDBOX_OBJECT:
        return {"object": SANDBOX_OBJECT, "messages": [message]}
    return {
        "object": PLATFORM_OBJECT,
        "entry": [
            {
                "id": "0",
                "changes": [
                    {
                        "field": "messages",
                        "value": {"messaging_product": "whatsapp", "messages": [message]},
                    }
                ],
            }
        ],
    }
