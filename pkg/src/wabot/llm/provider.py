"""Chat-completion provider interface with model tiers and call probes."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import httpx


class ProviderFailure(Exception):
    """Base for provider-side errors; the engine renders an apology."""


class ProviderTimeout(ProviderFailure):
    pass


class ProviderRejection(ProviderFailure):
    pass


@dataclass(frozen=True)
class ModelTier:
    """A named tier bound to an endpoint and model identifier."""

    name: str
    model: str
    base_url: str = ""
    api_key_env: str = ""


@dataclass(frozen=True)
class CompletionRequest:
    task: str
    system: str
    user: str
    tier: ModelTier
    history: tuple[tuple[str, str], ...] = ()  # (role, text) prior turns


class ChatProvider:
    """Base provider; records every call so tests can probe counts and tiers."""

    def __init__(self) -> None:
        self.calls: list[CompletionRequest] = []

    def complete(self, request: CompletionRequest) -> str:
        self.calls.append(request)
        return self._complete(request)

    def _complete(self, request: CompletionRequest) -> str:
        raise NotImplementedError

    def call_count(self, task: str | None = None, tier: str | None = None) -> int:
        n = 0
        for call in self.calls:
            if task is not None and call.task != task:
                continue
            if tier is not None and call.tier.name != tier:
                continue
            n += 1
        return n


class HttpProvider(ChatProvider):
    """Generic OpenAI-style chat-completions client; no vendor logic.

    The tier supplies base URL and model; credentials come from the tier's
    environment variable at call time.
    """

    def __init__(self, timeout: float = 60.0) -> None:
        super().__init__()
        self._client = httpx.Client(timeout=timeout)

    def _complete(self, request: CompletionRequest) -> str:
        tier = request.tier
        key = os.environ.get(tier.api_key_env, "") if tier.api_key_env else ""
        messages = [{"role": "system", "content": request.system}]
        for role, text in request.history:
            messages.append({"role": role, "content": text})
        messages.append({"role": "user", "content": request.user})
        try:
            resp = self._client.post(
                f"{tier.base_url.rstrip('/')}/chat/completions",
                json={"model": tier.model, "messages": messages},
                headers={"Authorization": f"Bearer {key}"} if key else {},
            )
        except httpx.TimeoutException as exc:
            raise ProviderTimeout(str(exc)) from exc
        except httpx.HTTPError as exc:
            raise ProviderRejection(str(exc)) from exc
        if resp.status_code >= 400:
            raise ProviderRejection(f"{resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, ValueError) as exc:
            raise ProviderRejection(f"unexpected completion shape: {exc}") from exc


@dataclass
class FailingProvider(ChatProvider):
    """Always fails; for degraded-path tests."""

    exception: ProviderFailure = field(default_factory=lambda: ProviderRejection("down"))

    def __post_init__(self) -> None:
        super().__init__()

    def _complete(self, request: CompletionRequest) -> str:
        raise self.exception
