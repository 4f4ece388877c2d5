"""Per-conversation orchestration: registration, answering, navigation.

Turn contract: one inbound message produces zero or more outbound messages;
every turn's events are appended to the store before the outbounds are
handed back for delivery, so no message can be sent without its record.
"""

from __future__ import annotations

import hashlib
import logging

from wabot.config import ServiceConfig
from wabot.countries import country_of
from wabot.curation import CurationService
from wabot.engine.state import ConversationState, Exchange, chunk_text
from wabot.gateway.messages import (
    KIND_TEXT,
    Button,
    ButtonSet,
    InboundMessage,
    ListMenu,
    ListRow,
    ListSection,
    OutboundMessage,
    preview,
)
from wabot.llm.pipeline import LlmPipeline, MalformedFollowups
from wabot.llm.provider import ProviderFailure
from wabot.rewards import RewardsService
from wabot.store import INBOUND, OUTBOUND, EventStore

log = logging.getLogger(__name__)

BTN_CONTINUE = Button(id="continue:next", title="Continue Reading")
BTN_BETTER = Button(id="better:answer", title="Get Better Answer")
BTN_FOLLOWUPS = Button(id="followups:show", title="Suggest Follow-ups")
BTN_MENU = Button(id="menu:main", title="Menu")
BTN_ACCEPT = Button(id="terms:accept", title="Accept")

APOLOGY_TEXT = (
    "Sorry, I couldn't reach the answering service just now. "
    "Please try again in a moment. \U0001F64F"
)
MEDIA_NOTICE = (
    "I can only read text messages for now. \U0001F4DD "
    "Type a question and I'll do my best to answer it!"
)

# Inbound reply-id prefix → event action tag.
_REPLY_ACTIONS = {
    "terms": "register",
    "continue": "continue_reading",
    "better": "better_answer",
    "followups": "followup_view",
    "followup": "followup_select",
    "trend": "trending_select",
    "recent": "recent_select",
    "menu": "menu",
    "rewards": "leaderboard_view",
    "topq": "topq_answer_view",
    "optout": "opt_out",
}


def pseudonym(address: str, salt: str) -> str:
    """Stable opaque user code; raw addresses never reach the event log."""
    return "u" + hashlib.sha256(f"{salt}|{address}".encode()).hexdigest()[:10]


class Engine:
    def __init__(
        self,
        config: ServiceConfig,
        pipeline: LlmPipeline,
        curation: CurationService,
        rewards: RewardsService,
        store: EventStore,
    ) -> None:
        self.config = config
        self.pipeline = pipeline
        self.curation = curation
        self.rewards = rewards
        self.store = store
        self.states: dict[str, ConversationState] = {}
        self._seen_message_ids: set[str] = set()

    # -- state access ------------------------------------------------------------

    def get_state(self, address: str) -> ConversationState:
        state = self.states.get(address)
        if state is None:
            state = ConversationState(
                address=address,
                user_code=pseudonym(address, self.config.pseudonym_salt),
                country=country_of(address),
            )
            self.states[address] = state
        return state

    def broadcast_recipients(self) -> list[ConversationState]:
        """Registered users who have not opted out of chatbot-initiated messages."""
        return [s for s in self.states.values() if s.registered and not s.opted_out]

    # -- turn entry point -----------------------------------------------------------

    def process(self, msg: InboundMessage) -> list[OutboundMessage]:
        """Deduplicate, load state, run the transition, persist the turn."""
        if msg.message_id:
            if msg.message_id in self._seen_message_ids:
                return []
            self._seen_message_ids.add(msg.message_id)
        state = self.get_state(msg.sender)
        if state.first_seen is None:
            state.first_seen = msg.received_at
        _, outbounds = self.handle_inbound(state, msg)
        return outbounds

    def handle_inbound(
        self, state: ConversationState, msg: InboundMessage
    ) -> tuple[ConversationState, list[OutboundMessage]]:
        """One conversational turn; events are appended before returning."""
        if msg.kind == "system":
            outbounds = [OutboundMessage(state.address, MEDIA_NOTICE, origin="menu")]
            self._log_outbounds(state, msg, outbounds)
            return state, outbounds

        if not state.registered:
            outbounds = self._registration_turn(state, msg)
            return state, outbounds

        if msg.kind == KIND_TEXT:
            self._log_inbound(state, msg, "freeform", msg.body)
            outbounds = self._freeform_turn(state, msg)
        else:
            action = _REPLY_ACTIONS.get(msg.reply_id.split(":", 1)[0], "menu")
            if msg.reply_id == "rewards:mypoints":
                action = "mypoints_view"
            elif msg.reply_id == "menu:trending":
                action = "trending_view"
            elif msg.reply_id == "menu:recent":
                action = "recent_view"
            elif msg.reply_id == "followups:full":
                action = "followup_full_list"
            self._log_inbound(state, msg, action, msg.reply_id)
            outbounds = self._dispatch_reply(state, msg)

        self._log_outbounds(state, msg, outbounds)
        return state, outbounds

    # -- registration ------------------------------------------------------------------

    def _registration_turn(self, state: ConversationState, msg: InboundMessage) -> list[OutboundMessage]:
        if msg.is_reply() and msg.reply_id == "terms:accept":
            state.registered = True
            self._log_inbound(state, msg, "register", msg.reply_id)
            self.rewards.ensure_user(state.user_code, state.address, state.country)
            outbounds = [
                self._menu_message(
                    state,
                    body=(
                        "Welcome aboard! \U0001F389 Ask me anything by typing a "
                        "question, or explore the features below."
                    ),
                )
            ]
        else:
            # Any pre-acceptance message, intro keyword or not, re-sends the terms.
            self._log_inbound(state, msg, "register", msg.body or msg.reply_id)
            outbounds = [self._terms_message(state)]
        self._log_outbounds(state, msg, outbounds)
        return outbounds

    def _terms_message(self, state: ConversationState) -> OutboundMessage:
        text = (
            "\U0001F44B Hi! I'm a free question-answering assistant.\n\n"
            "Before we start, please accept the terms of service: your "
            "messages are logged under a pseudonymous code for research on "
            "improving the service, and you can opt out of daily messages "
            "at any time. By tapping Accept you confirm you are 18 or older."
        )
        return OutboundMessage(
            recipient=state.address,
            text=text,
            interactive=ButtonSet(buttons=(BTN_ACCEPT,)),
            origin="register",
        )

    # -- freeform pipeline -----------------------------------------------------------------

    def _freeform_turn(self, state: ConversationState, msg: InboundMessage) -> list[OutboundMessage]:
        query = msg.body
        context = None
        if state.last_exchange is not None:
            context = (state.last_exchange.query, state.last_exchange.answer)
        try:
            answer = self.pipeline.answer_query(query, context=context, tier_name="standard")
        except ProviderFailure as exc:
            log.warning("standard answer failed: %s", exc)
            return [self._notice(state, APOLOGY_TEXT)]

        state.last_exchange = Exchange(query=query, answer=answer, tier_name="standard")
        first = self._stage_answer(state, answer, origin="freeform")

        self._prepare_followups(state, query, answer)
        self.rewards.award(state.user_code, "freeform_query", msg.received_at)
        self.curation.on_new_query(
            query,
            author_code=state.user_code,
            author_country=state.country,
            at=msg.received_at,
        )
        return [first]

    def _stage_answer(self, state: ConversationState, answer: str, origin: str) -> OutboundMessage:
        """Chunk an answer, queue the remainder, and build the first message."""
        plan = chunk_text(answer, self.config.engine.chunk_limit)
        state.pending_chunks = list(plan.chunks[1:])
        return OutboundMessage(
            recipient=state.address,
            text=plan.chunks[0],
            interactive=self._bar(state),
            origin=origin,
        )

    def _prepare_followups(self, state: ConversationState, query: str, answer: str) -> None:
        try:
            state.followups = self.pipeline.suggest_followups(query, answer)
        except (MalformedFollowups, ProviderFailure) as exc:
            log.warning("follow-ups degraded for this turn: %s", exc)
            state.followups = None
            return
        for question in state.followups.questions:
            if question in state.followup_answers:
                continue
            try:
                state.followup_answers[question] = self.pipeline.prefetch_answer(question)
            except ProviderFailure as exc:
                log.warning("follow-up prefetch failed, will fill lazily: %s", exc)

    # -- reply routing ---------------------------------------------------------------------

    def _dispatch_reply(self, state: ConversationState, msg: InboundMessage) -> list[OutboundMessage]:
        reply_id = msg.reply_id
        if reply_id == "continue:next":
            return self._continue_reading(state)
        if reply_id == "better:answer":
            return self._get_better_answer(state, msg)
        if reply_id == "followups:show":
            return self._followups_two_up(state)
        if reply_id == "followups:full":
            return self._followups_full_list(state)
        if reply_id.startswith("followup:"):
            return self._followup_select(state, msg, reply_id)
        if reply_id.startswith(("trend:", "recent:")):
            return self._curated_select(state, msg, reply_id)
        if reply_id.startswith("topq:answer:"):
            return self._topq_answer(state, msg, reply_id)
        if reply_id == "menu:main":
            return [self._menu_message(state)]
        if reply_id == "menu:trending":
            return [self.curation.render_list("trending", state.address)]
        if reply_id == "menu:recent":
            return [self.curation.render_list("recent", state.address)]
        if reply_id == "menu:rewards":
            return [self._rewards_chooser(state)]
        if reply_id == "menu:about":
            return [self._about(state)]
        if reply_id == "rewards:leaderboard":
            return [self._leaderboard_view(state, msg)]
        if reply_id == "rewards:mypoints":
            return [self._my_points_view(state, msg)]
        if reply_id == "optout:confirm":
            return self._opt_out(state)
        if reply_id == "terms:accept":
            return [self._menu_message(state, body="You're already set up! \U0001F44D")]
        return [
            self._menu_message(
                state, body="Sorry, that button has expired. Here's the menu instead:"
            )
        ]

    def _continue_reading(self, state: ConversationState) -> list[OutboundMessage]:
        if not state.pending_chunks:
            return [
                self._menu_message(
                    state, body="Nothing left to read — you're all caught up! ✨"
                )
            ]
        chunk = state.pending_chunks.pop(0)
        return [
            OutboundMessage(
                recipient=state.address,
                text=chunk,
                interactive=self._bar(state),
                origin="continue_reading",
            )
        ]

    def _get_better_answer(self, state: ConversationState, msg: InboundMessage) -> list[OutboundMessage]:
        if state.last_exchange is None:
            return [self._notice(state, "Ask a question first and I can fetch a deeper answer. \U0001F4AC")]
        exchange = state.last_exchange
        try:
            answer = self.pipeline.answer_query(
                exchange.query,
                context=(exchange.query, exchange.answer),
                tier_name="premium",
            )
        except ProviderFailure as exc:
            log.warning("premium answer failed, prior answer retained: %s", exc)
            return [self._notice(state, APOLOGY_TEXT)]
        state.last_exchange = Exchange(
            query=exchange.query, answer=answer, tier_name="premium"
        )
        return [self._stage_answer(state, answer, origin="better_answer")]

    def _followups_two_up(self, state: ConversationState) -> list[OutboundMessage]:
        if state.followups is None:
            return [
                self._notice(
                    state,
                    "I couldn't prepare follow-up suggestions for that one. "
                    "Try asking another question! \U0001F331",
                )
            ]
        q1, q2 = state.followups.top_two
        buttons = ButtonSet(
            buttons=(
                Button(id="followup:1", title="Ask question 1"),
                Button(id="followup:2", title="Ask question 2"),
                Button(id="followups:full", title="See all 6"),
            )
        )
        text = f"You could ask next:\n\n1⃣ {q1}\n\n2⃣ {q2}"
        return [
            OutboundMessage(
                recipient=state.address, text=text, interactive=buttons, origin="followup_view"
            )
        ]

    def _followups_full_list(self, state: ConversationState) -> list[OutboundMessage]:
        if state.followups is None:
            return [self._notice(state, "No follow-up suggestions right now. \U0001F331")]
        rows = [
            ListRow(
                id=f"followup:{i}",
                title=preview(question, 24),
                description=preview(question, 72),
            )
            for i, question in enumerate(state.followups.questions, start=1)
        ]
        rows.append(ListRow(id="menu:main", title="Main Menu", description="Back to all features"))
        menu = ListMenu(
            button_label="Pick a question",
            sections=(ListSection(title="Suggested follow-ups", rows=tuple(rows)),),
        )
        return [
            OutboundMessage(
                recipient=state.address,
                text="All six suggestions — tap one to get its answer.",
                interactive=menu,
                origin="followup_full_list",
            )
        ]

    def _followup_select(
        self, state: ConversationState, msg: InboundMessage, reply_id: str
    ) -> list[OutboundMessage]:
        if state.followups is None:
            return [self._notice(state, "Those suggestions have expired. \U0001F331")]
        try:
            index = int(reply_id.split(":", 1)[1])
            question = state.followups.questions[index - 1]
        except (ValueError, IndexError):
            return [self._menu_message(state, body="Sorry, that button has expired.")]
        answer = state.followup_answers.get(question)
        if answer is None:
            try:
                answer = self.pipeline.prefetch_answer(question)
            except ProviderFailure:
                return [self._notice(state, APOLOGY_TEXT)]
            state.followup_answers[question] = answer
        state.last_exchange = Exchange(query=question, answer=answer, tier_name="curation")
        self.rewards.award(state.user_code, "followup_select", msg.received_at)
        return [self._stage_answer(state, answer, origin="followup_select")]

    def _curated_select(
        self, state: ConversationState, msg: InboundMessage, reply_id: str
    ) -> list[OutboundMessage]:
        prefix, _, raw_id = reply_id.partition(":")
        try:
            entry_id = int(raw_id)
        except ValueError:
            return [self._menu_message(state, body="Sorry, that button has expired.")]
        if self.curation.get_entry(entry_id) is None:
            return [self._menu_message(state, body="Sorry, that question is gone from the list.")]
        entry, answer = self.curation.select_entry(entry_id)
        if answer is None:
            try:
                answer = self.pipeline.prefetch_answer(entry.display_text)
            except ProviderFailure:
                return [self._notice(state, APOLOGY_TEXT)]
            self.curation.fill_answer(entry_id, answer)
        state.last_exchange = Exchange(
            query=entry.display_text, answer=answer, tier_name="curation"
        )
        kind = "trending_select" if prefix == "trend" else "recent_select"
        self.rewards.award(state.user_code, kind, msg.received_at)
        return [self._stage_answer(state, answer, origin=kind)]

    def _topq_answer(
        self, state: ConversationState, msg: InboundMessage, reply_id: str
    ) -> list[OutboundMessage]:
        try:
            entry_id = int(reply_id.rsplit(":", 1)[1])
        except ValueError:
            return [self._menu_message(state, body="Sorry, that button has expired.")]
        if self.curation.get_entry(entry_id) is None:
            return [self._menu_message(state, body="Sorry, that question is gone.")]
        entry, answer = self.curation.select_entry(entry_id)
        if answer is None:
            try:
                answer = self.pipeline.prefetch_answer(entry.display_text)
            except ProviderFailure:
                return [self._notice(state, APOLOGY_TEXT)]
            self.curation.fill_answer(entry_id, answer)
        state.last_exchange = Exchange(
            query=entry.display_text, answer=answer, tier_name="curation"
        )
        return [self._stage_answer(state, answer, origin="topq_answer_view")]

    def _opt_out(self, state: ConversationState) -> list[OutboundMessage]:
        state.opted_out = True
        return [
            self._notice(
                state,
                "Done — no more chatbot-initiated messages for you. ✅ "
                "You can still ask questions any time.",
                origin="opt_out",
            )
        ]

    # -- views -----------------------------------------------------------------------------

    def _leaderboard_view(self, state: ConversationState, msg: InboundMessage) -> OutboundMessage:
        view = self.rewards.leaderboard(msg.received_at, viewer=state.user_code)
        return OutboundMessage(
            recipient=state.address,
            text=self.rewards.render_leaderboard(view),
            interactive=self._bar(state),
            origin="leaderboard_view",
        )

    def _my_points_view(self, state: ConversationState, msg: InboundMessage) -> OutboundMessage:
        summary = self.rewards.my_points(state.user_code, msg.received_at)
        return OutboundMessage(
            recipient=state.address,
            text=self.rewards.render_my_points(summary),
            interactive=self._bar(state),
            origin="mypoints_view",
        )

    def _rewards_chooser(self, state: ConversationState) -> OutboundMessage:
        buttons = ButtonSet(
            buttons=(
                Button(id="rewards:leaderboard", title="Leaderboard"),
                Button(id="rewards:mypoints", title="My Points"),
                BTN_MENU,
            )
        )
        return OutboundMessage(
            recipient=state.address,
            text="\U0001F3C5 Rewards — you earn a point for every question you "
            "ask or pick from the lists.",
            interactive=buttons,
            origin="menu",
        )

    def _about(self, state: ConversationState) -> OutboundMessage:
        text = (
            "\U0001F916 I'm a free question-answering assistant. Ask anything by "
            "typing a message. Answers come from AI language models and can be "
            "wrong — double-check anything important.\n\n"
            "Explore Trending and Recent questions from the community, earn "
            "points, and watch for the Top Question of the Day!"
        )
        return OutboundMessage(
            recipient=state.address, text=text, interactive=self._bar(state), origin="menu"
        )

    def _menu_message(self, state: ConversationState, body: str | None = None) -> OutboundMessage:
        rows = (
            ListRow(
                id="menu:trending",
                title="Trending Questions",
                description="Popular questions from the community",
            ),
            ListRow(
                id="menu:recent",
                title="Recent Questions",
                description="The latest questions people asked",
            ),
            ListRow(
                id="menu:rewards",
                title="Rewards",
                description="Leaderboard and your points",
            ),
            ListRow(
                id="menu:about",
                title="About this service",
                description="What I am and how I work",
            ),
        )
        menu = ListMenu(
            button_label="Menu", sections=(ListSection(title="Features", rows=rows),)
        )
        return OutboundMessage(
            recipient=state.address,
            text=body or "What would you like to explore? \U0001F9ED",
            interactive=menu,
            origin="menu",
        )

    def _notice(self, state: ConversationState, text: str, origin: str = "menu") -> OutboundMessage:
        return OutboundMessage(
            recipient=state.address,
            text=text,
            interactive=ButtonSet(buttons=(BTN_MENU,)),
            origin=origin,
        )

    def _bar(self, state: ConversationState) -> ButtonSet:
        """The three-button navigation bar; bottom is always Menu."""
        top = BTN_CONTINUE if state.pending_chunks else BTN_BETTER
        return ButtonSet(buttons=(top, BTN_FOLLOWUPS, BTN_MENU))

    # -- event logging -----------------------------------------------------------------------

    def _log_inbound(self, state: ConversationState, msg: InboundMessage, action: str, text: str) -> None:
        self.store.append(
            at=msg.received_at,
            user_code=state.user_code,
            direction=INBOUND,
            action=action,
            text=text,
        )

    def _log_outbounds(
        self, state: ConversationState, msg: InboundMessage, outbounds: list[OutboundMessage]
    ) -> None:
        for out in outbounds:
            self.store.append(
                at=msg.received_at,
                user_code=state.user_code,
                direction=OUTBOUND,
                action=out.origin,
                text=out.text,
            )
