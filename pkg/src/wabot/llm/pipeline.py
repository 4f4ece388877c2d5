"""Prompt pipelines: fill a template, call the provider, parse the output.

Structured outputs get one automatic re-ask after a malformed completion,
then the feature degrades for the turn. Parsers never raise anything but
their typed errors.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass

from wabot.llm.provider import ChatProvider, CompletionRequest, ModelTier, ProviderFailure
from wabot.llm.templates import (
    TASK_ANSWER,
    TASK_BETTER_ANSWER,
    TASK_FOLLOWUPS,
    TASK_PREFETCH_ANSWER,
    TASK_RECENT_FILTER,
    TASK_REPHRASE,
    TASK_TRENDING_RATE,
    get_template,
)

log = logging.getLogger(__name__)

FOLLOWUP_COUNT = 6
CRITERIA_COUNT = 10
RECENT_MAX_WORDS = 125
REPHRASE_MAX_WORDS = 150


class MalformedFollowups(Exception):
    pass


class MalformedScores(Exception):
    pass


@dataclass(frozen=True)
class FollowupSet:
    """Six ordered follow-up questions; the first two dig deeper into the topic."""

    questions: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.questions) != FOLLOWUP_COUNT or any(not q for q in self.questions):
            raise MalformedFollowups(f"need {FOLLOWUP_COUNT} non-empty questions")

    @property
    def top_two(self) -> tuple[str, str]:
        return self.questions[0], self.questions[1]


@dataclass(frozen=True)
class CriteriaScores:
    """Ten binary broad-appeal scores and their sum."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.bits) != CRITERIA_COUNT or any(b not in (0, 1) for b in self.bits):
            raise MalformedScores(f"need {CRITERIA_COUNT} binary scores")

    @property
    def total(self) -> int:
        return sum(self.bits)


_FENCE = re.compile(r"^```[a-zA-Z]*\n(.*)\n```$", re.DOTALL)
_TRAILING_COMMA = re.compile(r",(\s*[}\]])")


def repair_text(text: str) -> str:
    """Strip code fences and surrounding noise before parsing."""
    stripped = text.strip()
    match = _FENCE.match(stripped)
    if match:
        stripped = match.group(1).strip()
    return stripped


def parse_followups(completion: str) -> FollowupSet:
    """Parse the six-question structured completion, repairing light damage."""
    text = repair_text(completion)
    text = _TRAILING_COMMA.sub(r"\1", text)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedFollowups(f"not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise MalformedFollowups("completion is not an object")
    keys = [f"q{i}" for i in range(1, FOLLOWUP_COUNT + 1)]
    if sorted(data.keys()) != sorted(keys):
        raise MalformedFollowups(f"keys {sorted(data.keys())} != {keys}")
    questions = tuple(str(data[k]).strip() for k in keys)
    if any(not q for q in questions):
        raise MalformedFollowups("empty question statement")
    return FollowupSet(questions=questions)


def parse_scores(completion: str) -> CriteriaScores:
    """Parse the comma-separated 10-score line."""
    text = repair_text(completion).rstrip(".")
    tokens = [t.strip() for t in text.split(",")]
    if len(tokens) != CRITERIA_COUNT:
        raise MalformedScores(f"{len(tokens)} tokens, expected {CRITERIA_COUNT}")
    bits = []
    for token in tokens:
        if token not in ("0", "1"):
            raise MalformedScores(f"non-binary token {token!r}")
        bits.append(int(token))
    return CriteriaScores(bits=tuple(bits))


def _word_count(text: str) -> int:
    return len(text.split())


class LlmPipeline:
    """The shipped prompt pipelines bound to a provider and tier table."""

    def __init__(self, provider: ChatProvider, tiers: dict[str, ModelTier]) -> None:
        self.provider = provider
        self.tiers = tiers

    def _call(
        self,
        task: str,
        tier_name: str,
        history: tuple[tuple[str, str], ...] = (),
        **slots: str,
    ) -> str:
        template = get_template(task)
        return self.provider.complete(
            CompletionRequest(
                task=task,
                system=template.system_text,
                user=template.fill(**slots),
                tier=self.tiers[tier_name],
                history=history,
            )
        )

    # -- question answering --------------------------------------------------

    def answer_query(
        self,
        query: str,
        context: tuple[str, str] | None = None,
        tier_name: str = "standard",
    ) -> str:
        """Answer a freeform query; context is the prior (query, answer) turn."""
        if not query.strip():
            raise ValueError("empty query")
        task = TASK_BETTER_ANSWER if tier_name == "premium" else TASK_ANSWER
        history: tuple[tuple[str, str], ...] = ()
        if context is not None:
            history = (("user", context[0]), ("assistant", context[1]))
        return self._call(task, tier_name, history=history, user_query=query)

    def prefetch_answer(self, question: str) -> str:
        """Concise answer for a curated or suggested question."""
        if not question.strip():
            raise ValueError("empty question")
        return self._call(TASK_PREFETCH_ANSWER, "curation", user_query=question)

    # -- follow-up suggestions ------------------------------------------------

    def suggest_followups(self, query: str, answer: str) -> FollowupSet:
        """Generate six follow-up questions; one re-ask, then MalformedFollowups."""
        if not query.strip() or not answer.strip():
            raise ValueError("query and answer must be non-empty")
        prompt_input = f"{query}\n\nOriginal response:\n{answer}"
        last_error: MalformedFollowups | None = None
        for _ in range(2):
            completion = self._call(TASK_FOLLOWUPS, "curation", user_query=prompt_input)
            try:
                return parse_followups(completion)
            except MalformedFollowups as exc:
                last_error = exc
                log.warning("malformed follow-ups, re-asking: %s", exc)
        raise last_error  # type: ignore[misc]

    # -- curation helpers -----------------------------------------------------

    def recent_filter(self, statement: str) -> str | None:
        """Rephrased question for list inclusion, or None for non-questions.

        Provider failures and over-length output degrade to None: curation
        prefers dropping a candidate over surfacing junk.
        """
        if not statement.strip():
            raise ValueError("empty statement")
        try:
            completion = self._call(TASK_RECENT_FILTER, "curation", user_query=statement)
        except ProviderFailure as exc:
            log.warning("recent filter unavailable: %s", exc)
            return None
        text = completion.strip()
        if text.casefold() == "none":
            return None
        if not text or _word_count(text) > RECENT_MAX_WORDS:
            return None
        return text

    def trending_rate(self, question: str, original_query: str | None = None) -> CriteriaScores:
        """Ten-criterion broad-appeal rating; one re-ask, then MalformedScores."""
        if not question.strip():
            raise ValueError("empty question")
        last_error: MalformedScores | None = None
        for _ in range(2):
            completion = self._call(
                TASK_TRENDING_RATE,
                "curation",
                user_query=original_query if original_query is not None else question,
                question_statement=question,
            )
            try:
                return parse_scores(completion)
            except MalformedScores as exc:
                last_error = exc
                log.warning("malformed trending scores, re-asking: %s", exc)
        raise last_error  # type: ignore[misc]

    def rephrase_question(self, question: str) -> str:
        """Typo-fixed, emoji-bearing rephrase; falls back to the original text."""
        if not question.strip():
            raise ValueError("empty question")
        try:
            completion = self._call(TASK_REPHRASE, "curation", question_statement=question)
        except ProviderFailure as exc:
            log.warning("rephrase unavailable, keeping original: %s", exc)
            return question
        text = completion.strip()
        if not text:
            return question
        return text
