"""HTTP service: webhook ingress/handshake, health, and the sandbox channel.

The sandbox channel is a WebSocket carrying the same structured-text schema
as the platform path inside a "sandbox" envelope; the bundled web-chat UI
and the tests drive the engine through it without platform credentials.
"""

from __future__ import annotations

import asyncio
import json
import logging
import os
import queue
from contextlib import asynccontextmanager
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Query, Request, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from wabot.deployment import Deployment
from wabot.gateway.messages import OutboundMessage
from wabot.gateway.render import build_send_request
from wabot.gateway.transport import Transport
from wabot.gateway.webhook import (
    MalformedPayload,
    UnknownSchemaVersion,
    VerificationFailed,
    make_reply_payload,
    make_text_payload,
    verify_subscription,
)

log = logging.getLogger(__name__)

SCHEDULER_INTERVAL_S = 60.0


class SandboxHub(Transport):
    """Routes outbound messages to live sandbox connections, falling back to
    the real transport for everyone else."""

    def __init__(self, fallback: Transport, text_limit: int = 4096) -> None:
        self.fallback = fallback
        self.text_limit = text_limit
        self._queues: dict[str, queue.Queue] = {}
        self._counter = 0

    def register(self, persona: str) -> queue.Queue:
        q = self._queues.setdefault(persona, queue.Queue())
        return q

    def unregister(self, persona: str) -> None:
        self._queues.pop(persona, None)

    def send(self, msg: OutboundMessage) -> str:
        q = self._queues.get(msg.recipient)
        if q is None:
            return self.fallback.send(msg)
        self._counter += 1
        frame = json.dumps(
            {
                "object": "sandbox",
                "to": msg.recipient,
                "payload": build_send_request(msg, self.text_limit),
            },
            sort_keys=True,
            ensure_ascii=False,
            separators=(",", ":"),
        )
        q.put(frame)
        return f"sandbox-{self._counter}"


def create_app(
    deployment: Deployment,
    run_scheduler: bool = False,
    frontend_dir: str | Path | None = None,
) -> FastAPI:
    hub = SandboxHub(deployment.transport, deployment.config.gateway.text_limit)
    deployment.transport = hub

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        task = None
        if run_scheduler:
            task = asyncio.create_task(_scheduler_loop(deployment))
        yield
        if task:
            task.cancel()
        deployment.close()

    app = FastAPI(title="wabot", lifespan=lifespan)
    app.state.deployment = deployment
    app.state.hub = hub

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ready", "mock": deployment.config.llm.mock}

    @app.get("/webhook")
    def webhook_verify(
        mode: str = Query(default="", alias="hub.mode"),
        token: str = Query(default="", alias="hub.verify_token"),
        challenge: str = Query(default="", alias="hub.challenge"),
    ):
        expected = os.environ.get(deployment.config.gateway.verify_token_env, "")
        try:
            return PlainTextResponse(verify_subscription(mode, token, challenge, expected))
        except VerificationFailed:
            return JSONResponse({"error": "verification failed"}, status_code=403)

    @app.post("/webhook")
    async def webhook_ingress(request: Request):
        body = await request.body()
        try:
            outbounds = await asyncio.to_thread(deployment.handle_payload, body)
        except MalformedPayload as exc:
            return JSONResponse({"error": f"malformed payload: {exc}"}, status_code=400)
        except UnknownSchemaVersion as exc:
            return JSONResponse({"error": f"unknown schema: {exc}"}, status_code=400)
        return {"status": "ok", "replies": len(outbounds)}

    @app.websocket("/sandbox/ws")
    async def sandbox_ws(ws: WebSocket, persona: str = Query(default="")):
        if not persona:
            await ws.close(code=4000, reason="persona query parameter required")
            return
        await ws.accept()
        frames = hub.register(persona)
        pump = asyncio.create_task(_pump_frames(ws, frames))
        counter = 0
        try:
            while True:
                data = await ws.receive_json()
                counter += 1
                now = datetime.now(timezone.utc)
                message_id = f"sbx-{persona}-{counter}"
                if data.get("type") == "text":
                    payload = make_text_payload(persona, data.get("body", ""), now, message_id)
                elif data.get("type") == "tap":
                    payload = make_reply_payload(
                        persona, data.get("id", ""), data.get("title", ""), now, message_id
                    )
                else:
                    await ws.send_text(json.dumps({"error": "unknown action type"}))
                    continue
                try:
                    await asyncio.to_thread(deployment.handle_payload, payload)
                except MalformedPayload as exc:
                    await ws.send_text(json.dumps({"error": str(exc)}))
        except WebSocketDisconnect:
            pass
        finally:
            pump.cancel()
            hub.unregister(persona)

    if frontend_dir and Path(frontend_dir).is_dir():
        app.mount("/sandbox", StaticFiles(directory=str(frontend_dir), html=True), name="sandbox")

    return app


async def _pump_frames(ws: WebSocket, frames: queue.Queue) -> None:
    while True:
        try:
            frame = frames.get_nowait()
        except queue.Empty:
            await asyncio.sleep(0.05)
            continue
        await ws.send_text(frame)


async def _scheduler_loop(deployment: Deployment) -> None:
    while True:
        try:
            deployment.tick(datetime.now(timezone.utc))
        except Exception:  # noqa: BLE001 -- scheduler must survive bad days
            log.exception("scheduled broadcast failed")
        await asyncio.sleep(SCHEDULER_INTERVAL_S)
