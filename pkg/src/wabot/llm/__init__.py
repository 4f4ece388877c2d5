"""Provider abstraction, prompt pipelines, and the deterministic mock."""

from wabot.llm.mock import MockProvider, mock_complete
from wabot.llm.pipeline import (
    CriteriaScores,
    FollowupSet,
    LlmPipeline,
    MalformedFollowups,
    MalformedScores,
    parse_followups,
    parse_scores,
)
from wabot.llm.provider import (
    ChatProvider,
    CompletionRequest,
    HttpProvider,
    ModelTier,
    ProviderFailure,
    ProviderRejection,
    ProviderTimeout,
)
from wabot.llm.templates import TASKS, PromptTemplate, get_template

__all__ = [
    "ChatProvider",
    "CompletionRequest",
    "CriteriaScores",
    "FollowupSet",
    "HttpProvider",
    "LlmPipeline",
    "MalformedFollowups",
    "MalformedScores",
    "MockProvider",
    "ModelTier",
    "PromptTemplate",
    "ProviderFailure",
    "ProviderRejection",
    "ProviderTimeout",
    "TASKS",
    "get_template",
    "mock_complete",
    "parse_followups",
    "parse_scores",
]
