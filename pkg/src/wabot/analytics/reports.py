"""Executable log metrics: usage table, daily-broadcast impact, leaderboard
cohorts, and the follow-up funnel.

An interaction is any inbound user event, freeform or interactive; outbound
records never count. Every report returns a plain dict (machine-readable)
with a matching ``render_*`` text formatter.
"""

from __future__ import annotations

from datetime import datetime, timedelta
from typing import Callable
from zoneinfo import ZoneInfo

from wabot.analytics.sessions import (
    GROUPS,
    Session,
    segment_users,
    sessionize,
    sort_for_sessionize,
)
from wabot.store import INBOUND, EventRecord

BROADCAST_WINDOW = timedelta(hours=24)
FREQUENT_SESSION_SHARE = 0.10


def interactions_of(events: list[EventRecord]) -> list[EventRecord]:
    return [e for e in events if e.direction == INBOUND]


def _sessions_of(events: list[EventRecord], gap_minutes: float) -> list[Session]:
    return sessionize(sort_for_sessionize(interactions_of(events)), gap_minutes)


def _mean(values: list[float]) -> float:
    return sum(values) / len(values) if values else 0.0


# -- usage table ---------------------------------------------------------------


def usage_report(
    events: list[EventRecord], tz: str = "UTC", gap_minutes: float = 15.0
) -> dict:
    """Per-group activity table; totals are the sums of the groups."""
    sessions = _sessions_of(events, gap_minutes)
    profiles = segment_users(sessions, tz=tz)

    groups: dict[str, dict] = {}
    for group in GROUPS:
        members = [p for p in profiles if p.group == group]
        idle = [p.avg_idle_hours for p in members if p.avg_idle_hours is not None]
        groups[group] = {
            "users": len(members),
            "sessions": sum(p.session_count for p in members),
            "interactions": sum(p.freeform_count + p.interactive_count for p in members),
            "freeform": sum(p.freeform_count for p in members),
            "interactive": sum(p.interactive_count for p in members),
            "avg_active_days": _mean([float(p.active_days) for p in members]),
            "avg_idle_hours": _mean([float(v) for v in idle]) if idle else None,
            "avg_session_minutes": _mean([p.avg_session_minutes for p in members]),
        }
    totals = {
        key: sum(groups[g][key] for g in GROUPS)
        for key in ("users", "sessions", "interactions", "freeform", "interactive")
    }
    return {"groups": groups, "totals": totals}


def render_usage(report: dict) -> str:
    headers = ["", "One-time", "Casual", "Regular", "Total"]
    rows = [
        ("Users", "users"),
        ("Sessions", "sessions"),
        ("Interactions", "interactions"),
        ("Freeform queries", "freeform"),
        ("Interactive queries", "interactive"),
        ("Avg active days", "avg_active_days"),
        ("Avg idle hours", "avg_idle_hours"),
        ("Avg session minutes", "avg_session_minutes"),
    ]
    lines = ["{:<22}{:>10}{:>10}{:>10}{:>10}".format(*headers)]
    for label, key in rows:
        cells = []
        for group in GROUPS:
            value = report["groups"][group][key]
            cells.append(_fmt(value))
        total = report["totals"].get(key)
        cells.append(_fmt(total) if total is not None else "")
        lines.append("{:<22}{:>10}{:>10}{:>10}{:>10}".format(label, *cells))
    return "\n".join(lines)


def _fmt(value) -> str:
    if value is None:
        return "NA"
    if isinstance(value, float):
        return f"{value:.2f}"
    return str(value)


# -- daily-broadcast impact -------------------------------------------------------


def topq_impact(
    events: list[EventRecord],
    broadcast_times: list[datetime],
    tz: str = "UTC",
    gap_minutes: float = 15.0,
) -> dict:
    """Activity around daily broadcasts.

    Covers: mean active users on broadcast vs non-broadcast days and their
    ratio; the per-user share of active days inside the 24h post-broadcast
    window; an hourly histogram of interactions across that window; and how
    sessions start (freeform vs interactive) inside vs outside the window.
    """
    if not broadcast_times:
        return {"applicable": False, "reason": "no broadcasts in log"}
    zone = ZoneInfo(tz)
    interactions = interactions_of(events)
    if not interactions:
        return {"applicable": False, "reason": "no interactions in log"}
    broadcasts = sorted(broadcast_times)

    def day_of(at: datetime):
        return at.astimezone(zone).date()

    first_day = min(day_of(e.at) for e in interactions)
    last_day = max(day_of(e.at) for e in interactions)
    all_days = [
        first_day + timedelta(days=i) for i in range((last_day - first_day).days + 1)
    ]
    broadcast_days = {day_of(b) for b in broadcasts}

    active_by_day: dict = {}
    for event in interactions:
        active_by_day.setdefault(day_of(event.at), set()).add(event.user_code)

    on_broadcast = [len(active_by_day.get(d, ())) for d in all_days if d in broadcast_days]
    off_broadcast = [len(active_by_day.get(d, ())) for d in all_days if d not in broadcast_days]
    mean_on = _mean([float(v) for v in on_broadcast])
    mean_off = _mean([float(v) for v in off_broadcast])
    ratio = (mean_on / mean_off) if mean_off > 0 else None

    def within_window(at: datetime) -> bool:
        return any(b <= at < b + BROADCAST_WINDOW for b in broadcasts)

    shares = []
    by_user_days: dict[str, dict] = {}
    for event in interactions:
        by_user_days.setdefault(event.user_code, {}).setdefault(day_of(event.at), []).append(
            event.at
        )
    for days in by_user_days.values():
        within = sum(1 for stamps in days.values() if any(within_window(t) for t in stamps))
        shares.append(within / len(days))
    mean_share = _mean(shares)

    histogram = [0] * 24
    for event in interactions:
        recent = [b for b in broadcasts if b <= event.at]
        if not recent:
            continue
        delta = event.at - recent[-1]
        if delta < BROADCAST_WINDOW:
            histogram[int(delta.total_seconds() // 3600)] += 1

    sessions = _sessions_of(events, gap_minutes)
    starts = {"inside": {"sessions": 0, "freeform": 0}, "outside": {"sessions": 0, "freeform": 0}}
    for session in sessions:
        bucket = starts["inside" if within_window(session.start) else "outside"]
        bucket["sessions"] += 1
        if session.first_action == "freeform":
            bucket["freeform"] += 1
    session_starts = {}
    for side, bucket in starts.items():
        n = bucket["sessions"]
        session_starts[side] = {
            "sessions": n,
            "freeform_share": (bucket["freeform"] / n) if n else None,
            "interactive_share": ((n - bucket["freeform"]) / n) if n else None,
        }

    return {
        "applicable": True,
        "broadcasts": len(broadcasts),
        "broadcast_days": sum(1 for d in all_days if d in broadcast_days),
        "non_broadcast_days": sum(1 for d in all_days if d not in broadcast_days),
        "mean_active_users_broadcast_days": mean_on,
        "mean_active_users_non_broadcast_days": mean_off,
        "active_user_ratio": ratio,
        "mean_share_active_days_within_24h": mean_share,
        "hourly_histogram": histogram,
        "session_starts": session_starts,
    }


def render_topq(report: dict) -> str:
    if not report.get("applicable"):
        return f"Daily-broadcast impact: not applicable ({report.get('reason', 'n/a')})"
    lines = [
        "Daily-broadcast impact",
        f"  Broadcasts: {report['broadcasts']}",
        f"  Broadcast days / other days: {report['broadcast_days']} / {report['non_broadcast_days']}",
        f"  Mean active users (broadcast days): {_fmt(report['mean_active_users_broadcast_days'])}",
        f"  Mean active users (other days):     {_fmt(report['mean_active_users_non_broadcast_days'])}",
        f"  Ratio: {_fmt(report['active_user_ratio'])}",
        f"  Mean share of active days within 24h of a broadcast: {_fmt(report['mean_share_active_days_within_24h'])}",
        "  Interactions by hour since broadcast: "
        + " ".join(str(v) for v in report["hourly_histogram"]),
    ]
    for side in ("inside", "outside"):
        row = report["session_starts"][side]
        lines.append(
            f"  Session starts {side} window: {row['sessions']}"
            f" (freeform {_fmt(row['freeform_share'])},"
            f" interactive {_fmt(row['interactive_share'])})"
        )
    return "\n".join(lines)


# -- leaderboard cohorts ---------------------------------------------------------


def leaderboard_cohorts(
    events: list[EventRecord], tz: str = "UTC", gap_minutes: float = 15.0
) -> dict:
    """Frequent vs occasional leaderboard viewers and their session behavior.

    Frequent: repeated access within at least one session, or leaderboard
    views in strictly more than 10% of the user's sessions.
    """
    zone = ZoneInfo(tz)
    sessions = _sessions_of(events, gap_minutes)
    by_user: dict[str, list[Session]] = {}
    for session in sessions:
        by_user.setdefault(session.user_code, []).append(session)

    cohorts = {"frequent": [], "occasional": []}
    for user_code, user_sessions in sorted(by_user.items()):
        view_counts = [
            sum(1 for e in s.events if e.action == "leaderboard_view") for s in user_sessions
        ]
        total_views = sum(view_counts)
        if total_views == 0:
            continue
        with_access = sum(1 for c in view_counts if c > 0)
        repeated_in_one = any(c >= 2 for c in view_counts)
        share = with_access / len(user_sessions)
        cohort = "frequent" if repeated_in_one or share > FREQUENT_SESSION_SHARE else "occasional"
        cohorts[cohort].append((user_code, user_sessions, view_counts, total_views))

    out: dict = {"cohorts": {}, "leaderboard_users": sum(len(v) for v in cohorts.values())}
    for name, members in cohorts.items():
        sessions_with = 0
        sessions_without = 0
        interactions_with = 0
        interactions_without = 0
        active_days = []
        total_sessions = 0
        total_interactions = 0
        total_views = 0
        for _, user_sessions, view_counts, views in members:
            total_views += views
            total_sessions += len(user_sessions)
            days = set()
            for session, count in zip(user_sessions, view_counts):
                size = len(session.events)
                total_interactions += size
                for event in session.events:
                    days.add(event.at.astimezone(zone).date())
                if count > 0:
                    sessions_with += 1
                    interactions_with += size
                else:
                    sessions_without += 1
                    interactions_without += size
            active_days.append(float(len(days)))
        n = len(members)
        per_with = (interactions_with / sessions_with) if sessions_with else None
        per_without = (interactions_without / sessions_without) if sessions_without else None
        out["cohorts"][name] = {
            "users": n,
            "avg_active_days": _mean(active_days),
            "avg_leaderboard_access": (total_views / n) if n else 0.0,
            "avg_sessions": (total_sessions / n) if n else 0.0,
            "avg_interactions": (total_interactions / n) if n else 0.0,
            "pct_sessions_with_access": (
                sessions_with / total_sessions if total_sessions else None
            ),
            "interactions_per_session_with_access": per_with,
            "interactions_per_session_without_access": per_without,
            "with_without_ratio": (
                per_with / per_without if per_with is not None and per_without else None
            ),
        }
    return out


def render_cohorts(report: dict) -> str:
    lines = [f"Leaderboard users: {report['leaderboard_users']}"]
    for name in ("frequent", "occasional"):
        row = report["cohorts"][name]
        lines.append(f"  {name.capitalize()} users: {row['users']}")
        lines.append(f"    Avg active days:        {_fmt(row['avg_active_days'])}")
        lines.append(f"    Avg leaderboard access: {_fmt(row['avg_leaderboard_access'])}")
        lines.append(f"    Avg sessions:           {_fmt(row['avg_sessions'])}")
        lines.append(f"    Avg interactions:       {_fmt(row['avg_interactions'])}")
        lines.append(
            f"    Sessions with access:   {_fmt(row['pct_sessions_with_access'])}"
        )
        lines.append(
            "    Interactions/session with vs without access: "
            f"{_fmt(row['interactions_per_session_with_access'])} vs "
            f"{_fmt(row['interactions_per_session_without_access'])}"
            f" (ratio {_fmt(row['with_without_ratio'])})"
        )
    return "\n".join(lines)


# -- follow-up funnel ----------------------------------------------------------------


def followup_funnel(
    events: list[EventRecord],
    content_lookup: Callable[[str], str] | None = None,
    gap_minutes: float = 15.0,
) -> dict:
    """Stage counts for suggest → full list → select, plus selection anatomy.

    The first-two share needs the stored reply ids, so it requires a content
    lookup; without one it is reported as None.
    """
    interactions = interactions_of(events)
    views = sum(1 for e in interactions if e.action == "followup_view")
    full_lists = sum(1 for e in interactions if e.action == "followup_full_list")
    selects = [e for e in interactions if e.action == "followup_select"]

    first_two: float | None = None
    if content_lookup is not None and selects:
        positions = []
        for event in selects:
            text = content_lookup(event.payload_ref)
            if text.startswith("followup:"):
                try:
                    positions.append(int(text.split(":", 1)[1]))
                except ValueError:
                    pass
        if positions:
            first_two = sum(1 for p in positions if p <= 2) / len(positions)

    # A request is "answered" when a selection follows it in the same
    # session before the next request.
    answered = 0
    requests = 0
    for session in _sessions_of(events, gap_minutes):
        pending = False
        for event in session.events:
            if event.action == "followup_view":
                requests += 1
                pending = True
            elif event.action == "followup_select" and pending:
                answered += 1
                pending = False

    followup_events = views + full_lists + len(selects)
    total_interactions = len(interactions)
    interactive = sum(1 for e in interactions if e.action != "freeform")
    return {
        "views": views,
        "full_lists": full_lists,
        "selects": len(selects),
        "view_to_select_rate": (answered / requests) if requests else None,
        "first_two_share": first_two,
        "share_of_interactions": (
            followup_events / total_interactions if total_interactions else 0.0
        ),
        "share_of_interactive": (followup_events / interactive) if interactive else None,
    }


def render_funnel(report: dict) -> str:
    return "\n".join(
        [
            "Follow-up funnel",
            f"  Suggest taps (views): {report['views']}",
            f"  Full-list views:      {report['full_lists']}",
            f"  Selections:           {report['selects']}",
            f"  View-to-select rate:  {_fmt(report['view_to_select_rate'])}",
            f"  First-two share:      {_fmt(report['first_two_share'])}",
            f"  Share of interactions:{_fmt(report['share_of_interactions'])}",
            f"  Share of interactive: {_fmt(report['share_of_interactive'])}",
        ]
    )
