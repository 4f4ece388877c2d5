"""Per-conversation orchestration."""

from wabot.engine.core import Engine
from wabot.engine.state import ChunkPlan, ConversationState, Exchange, chunk_text

__all__ = ["ChunkPlan", "ConversationState", "Engine", "Exchange", "chunk_text"]
