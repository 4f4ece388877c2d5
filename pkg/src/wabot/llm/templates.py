"""The seven shipped prompt pipelines, loaded verbatim from package data.

Templates are plain text files with ``{user-query}`` / ``{question-statement}``
placeholder slots; substitution is plain string replacement so literal braces
in the template text (e.g. the JSON format example) survive untouched.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

TASK_ANSWER = "answer"
TASK_BETTER_ANSWER = "better_answer"
TASK_FOLLOWUPS = "followups"
TASK_RECENT_FILTER = "recent_filter"
TASK_TRENDING_RATE = "trending_rate"
TASK_REPHRASE = "rephrase"
TASK_PREFETCH_ANSWER = "prefetch_answer"

TASKS = (
    TASK_ANSWER,
    TASK_BETTER_ANSWER,
    TASK_FOLLOWUPS,
    TASK_RECENT_FILTER,
    TASK_TRENDING_RATE,
    TASK_REPHRASE,
    TASK_PREFETCH_ANSWER,
)

_SLOTS = ("{user-query}", "{question-statement}")


class UnfilledSlot(Exception):
    """A placeholder survived substitution; refusing to send a broken prompt."""


@dataclass(frozen=True)
class PromptTemplate:
    task: str
    system_text: str
    user_template: str

    def fill(self, **values: str) -> str:
        """Substitute slots ('user_query', 'question_statement') into the user prompt."""
        text = self.user_template
        for key, value in values.items():
            text = text.replace("{" + key.replace("_", "-") + "}", value)
        for slot in _SLOTS:
            if slot in text:
                raise UnfilledSlot(f"{self.task}: unfilled slot {slot}")
        return text


def _read(name: str) -> str:
    return (
        resources.files("wabot.llm").joinpath("prompts").joinpath(name).read_text(encoding="utf-8")
    )


def _load_all() -> dict[str, PromptTemplate]:
    templates = {}
    for task in TASKS:
        templates[task] = PromptTemplate(
            task=task,
            system_text=_read(f"{task}.system.txt"),
            user_template=_read(f"{task}.user.txt"),
        )
    return templates


_TEMPLATES = _load_all()


def get_template(task: str) -> PromptTemplate:
    return _TEMPLATES[task]


def all_templates() -> dict[str, PromptTemplate]:
    return dict(_TEMPLATES)
