"""Wires gateway, engine, curation, rewards, and store into one runnable unit.

The same wiring backs the live service, the transcript simulator, and the
test suites; only the provider, transport, and clock differ.
"""

from __future__ import annotations

import logging
import threading
from datetime import datetime
from zoneinfo import ZoneInfo

from wabot.config import ServiceConfig
from wabot.curation import CurationService, NothingToFeature, TopQBroadcast
from wabot.engine.core import Engine
from wabot.gateway.messages import OutboundMessage
from wabot.gateway.transport import CollectingTransport, SendFailed, Transport
from wabot.gateway.webhook import parse_webhook
from wabot.llm.mock import MockProvider
from wabot.llm.pipeline import LlmPipeline
from wabot.llm.provider import ChatProvider, HttpProvider, ModelTier
from wabot.rewards import RewardsService
from wabot.store import OUTBOUND, EventStore

log = logging.getLogger(__name__)


def build_tiers(config: ServiceConfig) -> dict[str, ModelTier]:
    return {
        name: ModelTier(
            name=name, model=tier.model, base_url=tier.base_url, api_key_env=tier.api_key_env
        )
        for name, tier in config.llm.tiers.items()
    }


class Deployment:
    def __init__(
        self,
        config: ServiceConfig | None = None,
        provider: ChatProvider | None = None,
        transport: Transport | None = None,
        store: EventStore | None = None,
    ) -> None:
        self.config = config or ServiceConfig()
        if provider is None:
            if self.config.llm.mock:
                provider = MockProvider(
                    seed=self.config.llm.mock_seed,
                    malformed_rate=self.config.llm.mock_malformed_rate,
                )
            else:
                provider = HttpProvider()
        self.provider = provider
        self.transport = transport or CollectingTransport()
        self.store = store or EventStore()
        self.pipeline = LlmPipeline(provider, build_tiers(self.config))
        self.curation = CurationService(self.pipeline, self.config.curation)
        self.rewards = RewardsService(self.config.rewards.points)
        self.engine = Engine(
            config=self.config,
            pipeline=self.pipeline,
            curation=self.curation,
            rewards=self.rewards,
            store=self.store,
        )
        # One turn at a time keeps the store single-writer and per-user
        # ordering strict even when the HTTP layer handles requests in
        # parallel threads.
        self._turn_lock = threading.Lock()
        for name, tier in sorted(self.pipeline.tiers.items()):
            log.info(
                "tier %s -> model=%s base_url=%s (decoding left to provider defaults)",
                name, tier.model, tier.base_url,
            )

    # -- message path ---------------------------------------------------------

    def handle_payload(self, payload: str | bytes | dict) -> list[OutboundMessage]:
        """Decode a webhook batch, run each message, deliver the replies."""
        outbounds: list[OutboundMessage] = []
        with self._turn_lock:
            for msg in parse_webhook(payload):
                outbounds.extend(self.engine.process(msg))
        for out in outbounds:
            self._send_with_retry(out)
        return outbounds

    def _send_with_retry(self, msg: OutboundMessage) -> None:
        try:
            self.transport.send(msg)
        except SendFailed as first:
            try:
                self.transport.send(msg)
            except SendFailed as exc:
                log.error("delivery failed twice for %s: %s / %s", msg.recipient, first, exc)

    # -- daily broadcast -------------------------------------------------------

    def tick(self, now: datetime) -> TopQBroadcast | None:
        """Scheduler heartbeat; runs at most one broadcast per calendar day."""
        topq = self.config.topq
        if not self.curation.due_for_broadcast(now, topq.timezone, topq.send_hour):
            return None
        with self._turn_lock:
            return self._broadcast(now)

    def broadcast_now(self, now: datetime) -> TopQBroadcast | None:
        """Operator override: ignore the send hour, keep once-per-day semantics."""
        local_day = now.astimezone(ZoneInfo(self.config.topq.timezone)).date()
        if self.curation.last_attempt_day == local_day:
            return None
        with self._turn_lock:
            return self._broadcast(now)

    def _broadcast(self, now: datetime) -> TopQBroadcast | None:
        self.curation.mark_attempt(now, self.config.topq.timezone)
        try:
            entry = self.curation.select_topq(now)
        except NothingToFeature:
            log.info("nothing to feature on %s; skipping the day", now.date())
            return None
        local_day = now.astimezone(ZoneInfo(self.config.topq.timezone)).date()
        sent_codes: list[str] = []
        for state in self.engine.broadcast_recipients():
            message = self.curation.build_topq_message(entry, state.address)
            self.store.append(
                at=now,
                user_code=state.user_code,
                direction=OUTBOUND,
                action="topq_sent",
                text=message.text,
            )
            self._send_with_retry(message)
            sent_codes.append(state.user_code)
        broadcast = TopQBroadcast(
            sent_at=now,
            entry_id=entry.entry_id,
            recipients=tuple(sent_codes),
            message_id=f"topq-{local_day.isoformat()}",
        )
        self.curation.record_broadcast(broadcast)
        return broadcast

    # -- persistence -------------------------------------------------------------

    def save_snapshots(self) -> None:
        if self.store.snapshot_dir is None:
            return
        self.store.save_snapshot("curation", self.curation.to_snapshot())
        self.store.save_snapshot("rewards", self.rewards.to_snapshot())
        self.store.save_snapshot(
            "users",
            {
                "users": [
                    {
                        "address": s.address,
                        "user_code": s.user_code,
                        "country": s.country,
                        "registered": s.registered,
                        "opted_out": s.opted_out,
                    }
                    for s in self.engine.states.values()
                ]
            },
        )

    def load_snapshots(self) -> None:
        curation_snap = self.store.load_snapshot("curation")
        if curation_snap:
            self.curation = CurationService.from_snapshot(
                curation_snap, self.pipeline, self.config.curation
            )
            self.engine.curation = self.curation
        rewards_snap = self.store.load_snapshot("rewards")
        if rewards_snap:
            self.rewards = RewardsService.from_snapshot(rewards_snap)
            self.engine.rewards = self.rewards
        users_snap = self.store.load_snapshot("users")
        if users_snap:
            from wabot.engine.state import ConversationState

            for row in users_snap.get("users", []):
                state = ConversationState(
                    address=row["address"],
                    user_code=row["user_code"],
                    country=row["country"],
                    registered=row["registered"],
                    opted_out=row["opted_out"],
                )
                self.engine.states[state.address] = state

    def close(self) -> None:
        self.save_snapshots()
        self.store.close()
