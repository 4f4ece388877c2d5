"""Deterministic offline provider.

``mock_complete`` is a pure function of (task, filled prompt, seed): it
plays the model's role by reading the filled prompt, so task inputs are
recovered from the known template shapes. Output shapes match what each
pipeline parser expects; a configurable fraction of structured outputs can
be returned malformed to exercise repair and re-ask paths.
"""

from __future__ import annotations

import hashlib
import json
import random

from wabot.llm.provider import ChatProvider, CompletionRequest
from wabot.llm.templates import (
    TASK_ANSWER,
    TASK_BETTER_ANSWER,
    TASK_FOLLOWUPS,
    TASK_PREFETCH_ANSWER,
    TASK_RECENT_FILTER,
    TASK_REPHRASE,
    TASK_TRENDING_RATE,
)

_STRUCTURED_TASKS = (TASK_FOLLOWUPS, TASK_TRENDING_RATE)

_OPENERS = (
    "Great question!",
    "Happy to dig into this!",
    "Let's break it down.",
    "Here's the short version.",
    "Good one, let's see.",
)

_NOUNS = (
    "routine", "habit", "balance", "approach", "pattern", "budget", "plan",
    "mindset", "practice", "community", "resource", "skill", "method",
    "tradition", "ingredient", "schedule", "signal", "checklist",
)

_VERBS = (
    "supports", "shapes", "improves", "steadies", "anchors", "guides",
    "sharpens", "protects", "simplifies", "strengthens",
)

_ADJS = (
    "steady", "practical", "simple", "thoughtful", "gradual", "reliable",
    "flexible", "honest", "patient", "curious",
)

_EMOJIS = (
    "\U0001F4A1", "✨", "\U0001F331", "\U0001F4CC", "\U0001F50D",
    "\U0001F340", "\U0001F4DA", "\U0001F4AA", "\U0001F64C", "\U0001F3AF",
    "\U0001F30D", "☕", "\U0001F9E0", "\U0001F525", "\U0001F33F",
    "\U0001F60A", "\U0001F44D", "\U0001F389",
)

_INTERROGATIVES = frozenset(
    "what why how when where who whom whose which is are can do does did "
    "should could would will am was were may might must have has had".split()
)

_TYPO_FIXES = {
    "wat": "what",
    "teh": "the",
    "recieve": "receive",
    "wich": "which",
    "definately": "definitely",
    "seperate": "separate",
    "becuase": "because",
    "untill": "until",
    "occured": "occurred",
    "dont": "don't",
    "doesnt": "doesn't",
    "cant": "can't",
    "wont": "won't",
    "isnt": "isn't",
    "plz": "please",
    "thru": "through",
}

_GENERAL_INTEREST = (
    "health", "food", "diet", "money", "finance", "tech", "technology",
    "phone", "school", "education", "movie", "news", "product", "exercise",
    "sleep", "travel", "care", "work", "job", "weather", "history",
)

_RECURRING_THEMES = (
    "advice", "career", "parent", "child", "children", "marriage", "marry",
    "relationship", "hobby", "life", "friend", "family", "old age", "retire",
    "growth", "habit",
)

_LIFE_STAGES = (
    "school", "job", "marriage", "marry", "retire", "birth", "child",
    "children", "parent", "old age", "career", "graduat",
)


def _digest(*parts: object) -> bytes:
    h = hashlib.sha256()
    for part in parts:
        h.update(str(part).encode("utf-8"))
        h.update(b"\x1f")
    return h.digest()


def _rng(*parts: object) -> random.Random:
    return random.Random(int.from_bytes(_digest(*parts), "big"))


def _is_question(text: str) -> bool:
    stripped = text.strip()
    if not stripped:
        return False
    if "?" in stripped:
        return True
    first = stripped.split()[0].strip(".,!\"'").lower()
    return first in _INTERROGATIVES


def _is_english(text: str) -> bool:
    letters = [ch for ch in text if ch.isalpha()]
    if not letters:
        return False
    ascii_letters = sum(1 for ch in letters if ch.isascii())
    return ascii_letters / len(letters) > 0.7


def _fix_typos(text: str) -> str:
    words = text.split()
    fixed = []
    for word in words:
        bare = word.strip(".,!?\"'").lower()
        repl = _TYPO_FIXES.get(bare)
        if repl:
            prefix_upper = word[:1].isupper()
            repl = repl.capitalize() if prefix_upper else repl
            word = word.replace(word.strip(".,!?\"'"), repl)
        fixed.append(word)
    return " ".join(fixed)


def _as_clean_question(text: str, max_words: int) -> str:
    cleaned = _fix_typos(" ".join(text.split()))
    while cleaned and not cleaned[-1].isalnum():  # trailing punctuation and emoji
        cleaned = cleaned[:-1]
    words = cleaned.split()
    if len(words) > max_words - 1:
        cleaned = " ".join(words[: max_words - 1])
    if cleaned:
        cleaned = cleaned[0].upper() + cleaned[1:]
    return cleaned + "?"


def _sentence(rng: random.Random) -> str:
    return (
        f"A {rng.choice(_ADJS)} {rng.choice(_NOUNS)} often {rng.choice(_VERBS)} "
        f"your {rng.choice(_NOUNS)} more than any single {rng.choice(_NOUNS)}, "
        f"so start with one {rng.choice(_ADJS)} step and review it weekly."
    )


def _paragraphs(rng: random.Random, count: int, lead_opener: bool) -> str:
    paras = []
    for i in range(count):
        sentences = [_sentence(rng) for _ in range(rng.randint(3, 5))]
        if i == 0 and lead_opener:
            sentences.insert(0, rng.choice(_OPENERS))
        paras.append(" ".join(sentences) + " " + rng.choice(_EMOJIS))
    return "\n\n".join(paras)


def _extract(prompt: str, start_marker: str, end_marker: str) -> str:
    start = prompt.find(start_marker)
    if start < 0:
        return prompt
    start += len(start_marker)
    end = prompt.find(end_marker, start)
    if end < 0:
        return prompt[start:].strip()
    return prompt[start:end].strip()


def _trending_bits(question: str, rng: random.Random) -> list[int]:
    lowered = question.lower()

    def has_any(words: tuple[str, ...]) -> bool:
        return any(w in lowered for w in words)

    bits = [
        1 if _is_english(question) else 0,
        0 if (" this " in f" {lowered}" or " that " in f" {lowered}") else 1,
        1 if has_any(_GENERAL_INTEREST) else int(rng.random() < 0.3),
        1 if has_any(_RECURRING_THEMES) else int(rng.random() < 0.25),
        int(rng.random() < 0.6),
        int(rng.random() < 0.15),
        int(rng.random() < 0.75),
        1 if has_any(_LIFE_STAGES) else int(rng.random() < 0.2),
        1 if lowered.startswith(("how ", "what should", "ways to")) or "how to" in lowered
        else int(rng.random() < 0.3),
        1 if has_any(("advice", "recommend", "best way", "tips", "should"))
        or lowered.startswith(("how can", "how do", "how should"))
        else int(rng.random() < 0.3),
    ]
    return bits


def mock_complete(task: str, prompt: str, seed: int) -> str:
    """Deterministic completion for (task, filled prompt, seed)."""
    rng = _rng(task, prompt, seed)

    if task in (TASK_ANSWER, TASK_BETTER_ANSWER, TASK_PREFETCH_ANSWER):
        if task == TASK_BETTER_ANSWER:
            count = rng.randint(4, 6)
        elif task == TASK_ANSWER:
            count = 1 + rng.randrange(4)
        else:
            count = rng.randint(1, 2)
        return _paragraphs(rng, count, lead_opener=task != TASK_PREFETCH_ANSWER)

    if task == TASK_FOLLOWUPS:
        questions = {}
        for i in range(1, 7):
            noun_a, noun_b = rng.choice(_NOUNS), rng.choice(_NOUNS)
            questions[f"q{i}"] = (
                f"How does a {rng.choice(_ADJS)} {noun_a} change your {noun_b}? "
                f"{rng.choice(_EMOJIS)}"
            )
        return json.dumps(questions, ensure_ascii=False)

    if task == TASK_RECENT_FILTER:
        statement = _extract(prompt, "Statement: ", "\n\nAbove, you are provided")
        if not _is_question(statement) or not _is_english(statement):
            return "None"
        question = _as_clean_question(statement, max_words=125)
        return f"{question} {rng.choice(_EMOJIS)}"

    if task == TASK_TRENDING_RATE:
        question = _extract(prompt, "The question is: ", ". The criteria is:")
        return ",".join(str(b) for b in _trending_bits(question, rng))

    if task == TASK_REPHRASE:
        question = _extract(prompt, "", "\n\nYou are provided with a question statement")
        cleaned = _as_clean_question(question, max_words=150)
        return f"{cleaned} {rng.choice(_EMOJIS)}"

    raise ValueError(f"unknown mock task {task!r}")


def _malformed_variant(task: str, prompt: str, seed: int) -> str:
    """A deliberately broken completion: some variants are repairable, some not."""
    rng = _rng("fault-shape", task, prompt, seed)
    good = mock_complete(task, prompt, seed)
    if task == TASK_FOLLOWUPS:
        variant = rng.randrange(4)
        if variant == 0:
            return f"```json\n{good}\n```"
        if variant == 1:
            return good.rstrip("}") + ",}"
        if variant == 2:
            data = json.loads(good)
            data.pop("q6")
            return json.dumps(data, ensure_ascii=False)
        return "Sure! Here are some follow-up questions you might like."
    if task == TASK_TRENDING_RATE:
        variant = rng.randrange(3)
        if variant == 0:
            return f"```\n{good}\n```"
        if variant == 1:
            return ",".join(good.split(",")[:9])
        return good.replace("1", "yes", 1)
    return good


class MockProvider(ChatProvider):
    """Seeded provider for offline runs.

    Pure per call: the completion depends only on (task, prompt, seed,
    attempt), where attempt counts prior identical requests so a re-ask can
    yield a fresh completion, exactly as resampling would.
    """

    def __init__(self, seed: int = 7, malformed_rate: float = 0.0) -> None:
        super().__init__()
        self.seed = seed
        self.malformed_rate = malformed_rate
        self._attempts: dict[tuple, int] = {}

    def _complete(self, request: CompletionRequest) -> str:
        prompt = request.user
        if request.history:
            context = "\n".join(f"{role}: {text}" for role, text in request.history)
            prompt = f"{context}\n{prompt}"
        key = (request.task, prompt)
        attempt = self._attempts.get(key, 0)
        self._attempts[key] = attempt + 1
        seed = self.seed + 1_000_003 * attempt
        if request.task in _STRUCTURED_TASKS and self.malformed_rate > 0:
            roll = int.from_bytes(_digest("fault", request.task, prompt, seed)[:8], "big")
            if roll / 2**64 < self.malformed_rate:
                return _malformed_variant(request.task, prompt, seed)
        return mock_complete(request.task, prompt, seed)
