"""Outbound message → platform send-request body, deterministically."""

from __future__ import annotations

import json

from wabot.gateway.messages import (
    DEFAULT_TEXT_LIMIT,
    ButtonSet,
    ListMenu,
    OutboundMessage,
    validate_outbound,
)


def build_send_request(msg: OutboundMessage, text_limit: int = DEFAULT_TEXT_LIMIT) -> dict:
    """Validate and build the send-request body as a plain dict."""
    validate_outbound(msg, text_limit=text_limit)
    body: dict = {
        "messaging_product": "whatsapp",
        "recipient_type": "individual",
        "to": msg.recipient,
    }
    if msg.interactive is None:
        body["type"] = "text"
        body["text"] = {"body": msg.text, "preview_url": False}
    elif isinstance(msg.interactive, ButtonSet):
        body["type"] = "interactive"
        body["interactive"] = {
            "type": "button",
            "body": {"text": msg.text},
            "action": {
                "buttons": [
                    {"type": "reply", "reply": {"id": b.id, "title": b.title}}
                    for b in msg.interactive.buttons
                ]
            },
        }
    else:
        menu: ListMenu = msg.interactive
        body["type"] = "interactive"
        body["interactive"] = {
            "type": "list",
            "body": {"text": msg.text},
            "action": {
                "button": menu.button_label,
                "sections": [
                    {
                        "title": section.title,
                        "rows": [
                            {"id": r.id, "title": r.title, "description": r.description}
                            for r in section.rows
                        ],
                    }
                    for section in menu.sections
                ],
            },
        }
    return body


def render_outbound(msg: OutboundMessage, text_limit: int = DEFAULT_TEXT_LIMIT) -> str:
    """Serialize the send-request body with stable key order (byte-identical
    across runs for equal inputs)."""
    return json.dumps(
        build_send_request(msg, text_limit=text_limit),
        sort_keys=True,
        ensure_ascii=False,
        separators=(",", ":"),
    )
