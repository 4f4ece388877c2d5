"""LLM question-answer chatbot over WhatsApp-compatible messaging.

Subpackages: gateway (wire format), llm (provider + prompt pipelines),
engine (per-conversation orchestration), curation (recent/trending/daily
feature), rewards (points + leaderboard), store (append-only event log),
analytics (log metrics), cli (operator entry points).
"""

__version__ = "0.1.0"
