#!/usr/bin/env python3
"""Write the synthetic analytics fixtures as real log files.

Produces one directory per fixture under the output root (default:
./fixtures), each with events.jsonl + content.jsonl, ready for
`wabot report`.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from wabot.analytics.synthetic import cohort_log, funnel_log, segmentation_log, topq_ratio_log
from wabot.store import EventStore

BUILDERS = {
    "segmentation": segmentation_log,
    "topq_ratio": topq_ratio_log,
    "cohorts": cohort_log,
    "funnel": funnel_log,
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="fixtures", help="output root directory")
    args = parser.parse_args()

    root = Path(args.out)
    for name, builder in BUILDERS.items():
        target = root / name
        target.mkdir(parents=True, exist_ok=True)
        store = EventStore(
            log_path=target / "events.jsonl", content_path=target / "content.jsonl"
        )
        expected = builder(store)
        store.close()
        expected_path = target / "expected.json"
        expected_path.write_text(
            json.dumps(expected, indent=2, default=str) + "\n", encoding="utf-8"
        )
        print(f"{name}: {target}/events.jsonl ({expected_path.name} holds the constructed values)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
