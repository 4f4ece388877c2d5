"""Delivery of rendered send-requests: live platform HTTP or a local collector."""

from __future__ import annotations

import json
import logging
import os

import httpx

from wabot.gateway.messages import OutboundMessage
from wabot.gateway.render import build_send_request

log = logging.getLogger(__name__)


class SendFailed(Exception):
    pass


class Transport:
    """Delivery interface; send returns a platform message id."""

    def send(self, msg: OutboundMessage) -> str:
        raise NotImplementedError


class CollectingTransport(Transport):
    """Keeps every send in memory; used by the simulator, tests, and sandbox."""

    def __init__(self) -> None:
        self.sent: list[OutboundMessage] = []
        self._counter = 0

    def send(self, msg: OutboundMessage) -> str:
        self._counter += 1
        self.sent.append(msg)
        return f"out-{self._counter}"

    def drain(self) -> list[OutboundMessage]:
        out, self.sent = self.sent, []
        return out


class PlatformTransport(Transport):
    """POSTs send-requests to the configured platform base URL with bearer auth."""

    def __init__(self, base_url: str, token_env: str, text_limit: int = 4096) -> None:
        self.base_url = base_url.rstrip("/")
        self.token_env = token_env
        self.text_limit = text_limit
        self._client = httpx.Client(timeout=30.0)

    def send(self, msg: OutboundMessage) -> str:
        token = os.environ.get(self.token_env, "")
        if not token:
            raise SendFailed(f"missing platform token in ${self.token_env}")
        body = build_send_request(msg, text_limit=self.text_limit)
        try:
            resp = self._client.post(
                f"{self.base_url}/messages",
                content=json.dumps(body, ensure_ascii=False).encode("utf-8"),
                headers={
                    "Authorization": f"Bearer {token}",
                    "Content-Type": "application/json",
                },
            )
        except httpx.HTTPError as exc:
            raise SendFailed(str(exc)) from exc
        if resp.status_code >= 400:
            raise SendFailed(f"platform returned {resp.status_code}: {resp.text[:200]}")
        data = resp.json()
        messages = data.get("messages") or [{}]
        return messages[0].get("id", "")
