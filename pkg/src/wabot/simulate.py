"""Scripted transcript replay against a fresh in-memory deployment.

A script drives the virtual clock and the seeded mock provider, so the
outbound transcript is byte-identical across runs and machines; golden
transcripts pin engine behavior end to end.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

from wabot.config import ServiceConfig
from wabot.deployment import Deployment
from wabot.gateway.render import build_send_request
from wabot.gateway.webhook import make_reply_payload, make_text_payload

BASE_TIME = datetime(2024, 1, 15, 8, 0, 0, tzinfo=timezone.utc)


class ScriptInvalid(Exception):
    pass


@dataclass(frozen=True)
class Step:
    at_seconds: float
    sender: str
    text: str = ""
    tap: str = ""


@dataclass(frozen=True)
class TranscriptScript:
    seed: int
    senders: dict[str, str]  # name -> user address
    steps: tuple[Step, ...]


def load_script(path: str | Path) -> TranscriptScript:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ScriptInvalid(f"cannot read script: {exc}") from None
    return parse_script(data)


def parse_script(data: dict) -> TranscriptScript:
    if not isinstance(data, dict):
        raise ScriptInvalid("script must be a JSON object")
    senders = data.get("senders")
    if not isinstance(senders, dict) or not senders:
        raise ScriptInvalid("script needs a non-empty 'senders' map")
    raw_steps = data.get("steps")
    if not isinstance(raw_steps, list) or not raw_steps:
        raise ScriptInvalid("script needs a non-empty 'steps' list")

    steps = []
    last_at = -1.0
    for i, raw in enumerate(raw_steps):
        at = raw.get("at")
        if not isinstance(at, (int, float)) or at < 0:
            raise ScriptInvalid(f"step {i}: 'at' must be a non-negative number")
        if at < last_at:
            raise ScriptInvalid(f"step {i}: offsets must be non-decreasing")
        last_at = float(at)
        sender = raw.get("sender", "")
        if sender not in senders:
            raise ScriptInvalid(f"step {i}: undeclared sender {sender!r}")
        text = raw.get("text", "")
        tap = raw.get("tap", "")
        if bool(text) == bool(tap):
            raise ScriptInvalid(f"step {i}: exactly one of 'text' or 'tap' required")
        steps.append(Step(at_seconds=float(at), sender=sender, text=text, tap=tap))
    return TranscriptScript(
        seed=int(data.get("seed", 7)), senders=dict(senders), steps=tuple(steps)
    )


def run_script(
    script: TranscriptScript, config: ServiceConfig | None = None
) -> tuple[str, Deployment]:
    """Execute every step; returns (transcript text, deployment for inspection)."""
    config = config or ServiceConfig()
    config.llm.mock = True
    config.llm.mock_seed = script.seed
    deployment = Deployment(config=config)

    lines = []
    for i, step in enumerate(script.steps):
        at = BASE_TIME + timedelta(seconds=step.at_seconds)
        address = script.senders[step.sender]
        if step.text:
            payload = make_text_payload(address, step.text, at, message_id=f"m{i}")
        else:
            payload = make_reply_payload(address, step.tap, "", at, message_id=f"m{i}")
        for out in deployment.handle_payload(payload):
            lines.append(
                json.dumps(
                    {
                        "at": at.isoformat(),
                        "to": out.recipient,
                        "body": build_send_request(out, config.gateway.text_limit),
                    },
                    sort_keys=True,
                    ensure_ascii=False,
                    separators=(",", ":"),
                )
            )
    transcript = "\n".join(lines) + "\n"
    return transcript, deployment


def run_simulate(script_path: str | Path, out_path: str | Path, seed: int | None = None) -> str:
    """CLI entry: load, run, write the transcript file."""
    script = load_script(script_path)
    if seed is not None:
        script = TranscriptScript(seed=seed, senders=script.senders, steps=script.steps)
    transcript, _ = run_script(script)
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(transcript, encoding="utf-8")
    return transcript
