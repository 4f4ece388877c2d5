"""Wire-format gateway: platform webhook codec and canonical message types."""

from wabot.gateway.messages import (
    Button,
    ButtonSet,
    ConstraintViolation,
    InboundMessage,
    ListMenu,
    ListRow,
    ListSection,
    OutboundMessage,
    validate_outbound,
)
from wabot.gateway.render import build_send_request, render_outbound
from wabot.gateway.webhook import (
    MalformedPayload,
    UnknownSchemaVersion,
    VerificationFailed,
    make_reply_payload,
    make_text_payload,
    parse_webhook,
    verify_subscription,
)

__all__ = [
    "Button",
    "ButtonSet",
    "ConstraintViolation",
    "InboundMessage",
    "ListMenu",
    "ListRow",
    "ListSection",
    "MalformedPayload",
    "OutboundMessage",
    "UnknownSchemaVersion",
    "VerificationFailed",
    "build_send_request",
    "make_reply_payload",
    "make_text_payload",
    "parse_webhook",
    "render_outbound",
    "validate_outbound",
    "verify_subscription",
]
