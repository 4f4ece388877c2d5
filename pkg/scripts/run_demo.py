#!/usr/bin/env python3
"""Replay the bundled demo script and pretty-print the conversation."""

from __future__ import annotations

import json
import sys
from pathlib import Path

from wabot.simulate import load_script, run_script

SCRIPT = Path(__file__).parent / "demo_script.json"


def describe(body: dict) -> str:
    if body["type"] == "text":
        return body["text"]["body"]
    inter = body["interactive"]
    text = inter["body"]["text"]
    if inter["type"] == "button":
        bar = " | ".join(b["reply"]["title"] for b in inter["action"]["buttons"])
        return f"{text}\n    [{bar}]"
    rows = ", ".join(r["title"] for s in inter["action"]["sections"] for r in s["rows"])
    return f"{text}\n    ({rows})"


def main() -> int:
    script = load_script(SCRIPT)
    transcript, deployment = run_script(script)
    steps = iter(script.steps)
    for line in transcript.splitlines():
        row = json.loads(line)
        print(f"--- {row['at']} -> {row['to']}")
        print("   ", describe(row["body"]).replace("\n", "\n    "))
    print()
    print(f"events logged: {len(deployment.store.events())}")
    print(f"curated entries: {len(deployment.curation.entries)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
