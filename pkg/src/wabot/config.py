"""Service configuration: one JSON file covering every tunable constant.

Anything the message platform or the feature design leaves open lives here
with an explicit default, so a deployment's choices are auditable in one
place.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any


class ConfigInvalid(Exception):
    """Raised when a configuration file cannot be parsed or validated."""


@dataclass
class TierConfig:
    """One model tier: endpoint + model identifier."""

    model: str
    base_url: str = "http://localhost:11434/v1"
    api_key_env: str = "WABOT_PROVIDER_KEY"


@dataclass
class LlmConfig:
    mock: bool = True
    mock_seed: int = 7
    mock_malformed_rate: float = 0.0
    tiers: dict[str, TierConfig] = field(
        default_factory=lambda: {
            "standard": TierConfig(model="standard-chat"),
            "premium": TierConfig(model="premium-chat"),
            "curation": TierConfig(model="standard-chat"),
        }
    )

    def __post_init__(self) -> None:
        for name in ("standard", "premium", "curation"):
            if name not in self.tiers:
                raise ConfigInvalid(f"llm.tiers missing required tier '{name}'")
        if self.tiers["standard"].model == self.tiers["premium"].model and (
            self.tiers["standard"].base_url == self.tiers["premium"].base_url
        ):
            raise ConfigInvalid("standard and premium tiers must be distinct")


@dataclass
class GatewayConfig:
    verify_token_env: str = "WABOT_VERIFY_TOKEN"
    platform_base_url: str = "https://graph.facebook.com/v19.0/PHONE_NUMBER_ID"
    platform_token_env: str = "WABOT_PLATFORM_TOKEN"
    text_limit: int = 4096


@dataclass
class EngineConfig:
    chunk_limit: int = 1000
    intro_keyword: str = "join"

    def __post_init__(self) -> None:
        if self.chunk_limit < 64:
            raise ConfigInvalid("engine.chunk_limit must be >= 64")


@dataclass
class CurationConfig:
    trending_threshold: int = 8
    recent_capacity: int = 50
    trending_capacity: int = 25
    list_rows: int = 9

    def __post_init__(self) -> None:
        if not 0 <= self.trending_threshold <= 10:
            raise ConfigInvalid("curation.trending_threshold must be in 0..10")
        if self.list_rows > 9:
            raise ConfigInvalid("curation.list_rows capped at 9 (one row reserved for navigation)")


@dataclass
class RewardsConfig:
    points: dict[str, int] = field(
        default_factory=lambda: {
            "freeform_query": 1,
            "trending_select": 1,
            "recent_select": 1,
            "followup_select": 1,
        }
    )


@dataclass
class TopqConfig:
    send_hour: int = 9
    timezone: str = "UTC"


@dataclass
class StoreConfig:
    log_path: str = "data/events.jsonl"
    content_path: str = "data/content.jsonl"
    snapshot_dir: str = "data/snapshots"


@dataclass
class ServiceConfig:
    timezone: str = "UTC"
    pseudonym_salt: str = "wabot-v1"
    host: str = "127.0.0.1"
    port: int = 8080
    gateway: GatewayConfig = field(default_factory=GatewayConfig)
    engine: EngineConfig = field(default_factory=EngineConfig)
    llm: LlmConfig = field(default_factory=LlmConfig)
    curation: CurationConfig = field(default_factory=CurationConfig)
    rewards: RewardsConfig = field(default_factory=RewardsConfig)
    topq: TopqConfig = field(default_factory=TopqConfig)
    store: StoreConfig = field(default_factory=StoreConfig)


_SECTIONS = {
    "gateway": GatewayConfig,
    "engine": EngineConfig,
    "llm": LlmConfig,
    "curation": CurationConfig,
    "rewards": RewardsConfig,
    "topq": TopqConfig,
    "store": StoreConfig,
}


def _build_section(cls: type, data: dict[str, Any], path: str) -> Any:
    known = {f for f in cls.__dataclass_fields__}  # type: ignore[attr-defined]
    for key in data:
        if key not in known:
            raise ConfigInvalid(f"unknown key '{path}.{key}'")
    if cls is LlmConfig and "tiers" in data:
        data = dict(data)
        data["tiers"] = {
            name: TierConfig(**tier) for name, tier in data["tiers"].items()
        }
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigInvalid(f"bad section '{path}': {exc}") from None


def load_config(path: str | Path) -> ServiceConfig:
    """Parse and validate a JSON configuration file.

    Raises ConfigInvalid with line/column diagnostics on parse errors and
    with a dotted key path on validation errors.
    """
    raw = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(
            f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(data, dict):
        raise ConfigInvalid(f"{path}: top level must be an object")

    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigInvalid(f"section '{key}' must be an object")
            kwargs[key] = _build_section(_SECTIONS[key], value, key)
        elif key in ("timezone", "pseudonym_salt", "host", "port"):
            kwargs[key] = value
        else:
            raise ConfigInvalid(f"unknown key '{key}'")
    return ServiceConfig(**kwargs)
