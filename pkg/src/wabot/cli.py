"""Operator entry points: serve, simulate, report, topq send-now."""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from wabot.analytics.reports import (
    followup_funnel,
    leaderboard_cohorts,
    render_cohorts,
    render_funnel,
    render_topq,
    render_usage,
    topq_impact,
    usage_report,
)
from wabot.config import ConfigInvalid, ServiceConfig, load_config
from wabot.deployment import Deployment
from wabot.simulate import ScriptInvalid, run_simulate
from wabot.store import EventStore, OUTBOUND, read_log

REPORT_KINDS = ("usage", "topq", "rewards", "funnel")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wabot", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the chatbot service")
    serve.add_argument("--config", help="path to the JSON configuration file")
    serve.add_argument("--mock", action="store_true", help="force the mock provider")

    simulate = sub.add_parser("simulate", help="replay a scripted transcript")
    simulate.add_argument("--script", required=True, help="transcript script (JSON)")
    simulate.add_argument("--out", required=True, help="output transcript path")
    simulate.add_argument("--seed", type=int, default=None, help="mock provider seed override")

    report = sub.add_parser("report", help="compute metrics from an event log")
    report.add_argument("--log", required=True, help="event log (JSON lines)")
    report.add_argument("--kind", required=True, choices=REPORT_KINDS)
    report.add_argument("--content", help="content table (JSON lines), for the funnel report")
    report.add_argument("--out", help="directory for report files (default: stdout)")
    report.add_argument("--tz", default="UTC", help="timezone for day boundaries")

    topq = sub.add_parser("topq", help="daily-broadcast controls")
    topq_sub = topq.add_subparsers(dest="topq_command", required=True)
    send_now = topq_sub.add_parser("send-now", help="broadcast today's question immediately")
    send_now.add_argument("--config", required=True, help="path to the configuration file")

    return parser


def _load_config(path: str | None, force_mock: bool) -> ServiceConfig:
    config = load_config(path) if path else ServiceConfig()
    if force_mock:
        config.llm.mock = True
    return config


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from wabot.service import create_app

    try:
        config = _load_config(args.config, args.mock)
    except (ConfigInvalid, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    store = EventStore(
        log_path=config.store.log_path,
        content_path=config.store.content_path,
        snapshot_dir=config.store.snapshot_dir,
    )
    deployment = Deployment(config=config, store=store)
    deployment.load_snapshots()
    frontend = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    app = create_app(deployment, run_scheduler=True, frontend_dir=frontend)
    uvicorn.run(app, host=config.host, port=config.port)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        run_simulate(args.script, args.out, seed=args.seed)
    except ScriptInvalid as exc:
        print(f"script error: {exc}", file=sys.stderr)
        return 2
    print(args.out)
    return 0


def _broadcast_times(events) -> list[datetime]:
    seen = []
    for event in events:
        if event.direction == OUTBOUND and event.action == "topq_sent":
            if not seen or seen[-1] != event.at:
                seen.append(event.at)
    return sorted(set(seen))


def cmd_report(args: argparse.Namespace) -> int:
    try:
        events = read_log(args.log)
    except (OSError, ValueError, KeyError) as exc:
        print(f"cannot read log: {exc}", file=sys.stderr)
        return 2

    content: dict[str, str] = {}
    if args.content:
        try:
            for line in Path(args.content).read_text(encoding="utf-8").splitlines():
                if line.strip():
                    row = json.loads(line)
                    content[row["ref"]] = row["text"]
        except (OSError, ValueError, KeyError) as exc:
            print(f"cannot read content table: {exc}", file=sys.stderr)
            return 2

    if args.kind == "usage":
        data = usage_report(events, tz=args.tz)
        text = render_usage(data)
    elif args.kind == "topq":
        data = topq_impact(events, _broadcast_times(events), tz=args.tz)
        text = render_topq(data)
    elif args.kind == "rewards":
        data = leaderboard_cohorts(events, tz=args.tz)
        text = render_cohorts(data)
    else:
        lookup = (lambda ref: content.get(ref, "")) if content else None
        data = followup_funnel(events, content_lookup=lookup)
        text = render_funnel(data)

    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / f"{args.kind}.json").write_text(
            json.dumps(data, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
        (out_dir / f"{args.kind}.txt").write_text(text + "\n", encoding="utf-8")
        print(out_dir / f"{args.kind}.json")
        print(out_dir / f"{args.kind}.txt")
    else:
        print(text)
        print(json.dumps(data, indent=2, ensure_ascii=False))
    return 0


def cmd_topq_send_now(args: argparse.Namespace) -> int:
    try:
        config = _load_config(args.config, force_mock=False)
    except (ConfigInvalid, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    store = EventStore(
        log_path=config.store.log_path,
        content_path=config.store.content_path,
        snapshot_dir=config.store.snapshot_dir,
    )
    deployment = Deployment(config=config, store=store)
    deployment.load_snapshots()
    broadcast = deployment.broadcast_now(datetime.now(timezone.utc))
    if broadcast is None:
        print("no broadcast sent (nothing to feature, or already sent today)")
        store.close()  # nothing changed; never clobber live snapshots
    else:
        print(
            f"broadcast {broadcast.message_id}: entry {broadcast.entry_id} "
            f"to {len(broadcast.recipients)} recipients"
        )
        deployment.close()
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        return cmd_serve(args)
    if args.command == "simulate":
        return cmd_simulate(args)
    if args.command == "report":
        return cmd_report(args)
    if args.command == "topq":
        return cmd_topq_send_now(args)
    return 2


if __name__ == "__main__":
    sys.exit(main())
