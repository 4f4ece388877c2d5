from __future__ import annotations

from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

from wabot.config import ServiceConfig
from wabot.deployment import Deployment
from wabot.gateway.webhook import make_reply_payload, make_text_payload

GOLDEN_DIR = Path(__file__).parent / "golden"
SCRIPTS_DIR = Path(__file__).parent.parent / "scripts"

T0 = datetime(2024, 1, 15, 8, 0, 0, tzinfo=timezone.utc)


class Driver:
    """Thin helper that feeds a deployment sandbox-shaped payloads."""

    def __init__(self, deployment: Deployment) -> None:
        self.deployment = deployment
        self.clock = T0
        self._counter = 0

    def advance(self, seconds: float) -> None:
        self.clock += timedelta(seconds=seconds)

    def text(self, address: str, body: str, gap_s: float = 30.0):
        self.advance(gap_s)
        self._counter += 1
        payload = make_text_payload(address, body, self.clock, f"drv-{self._counter}")
        return self.deployment.handle_payload(payload)

    def tap(self, address: str, reply_id: str, gap_s: float = 30.0):
        self.advance(gap_s)
        self._counter += 1
        payload = make_reply_payload(address, reply_id, "", self.clock, f"drv-{self._counter}")
        return self.deployment.handle_payload(payload)

    def register(self, address: str):
        self.text(address, "join")
        return self.tap(address, "terms:accept")


@pytest.fixture
def deployment() -> Deployment:
    return Deployment(config=ServiceConfig())


@pytest.fixture
def driver(deployment: Deployment) -> Driver:
    return Driver(deployment)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" in nodeid:
                name = nodeid.split("::")[-1]
                lines.append((name, outcome.upper()))
    if not lines:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome in sorted(lines):
        terminalreporter.write_line(f"{outcome:6s} {name}")
