"""Sessionization by inactivity gap and activity-based user segmentation.

A session is a maximal run of one user's events where every gap between
consecutive events is strictly under the threshold; a gap of exactly the
threshold opens a new session.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import timedelta
from zoneinfo import ZoneInfo

from wabot.store import EventRecord

DEFAULT_GAP_MINUTES = 15.0

GROUP_ONE_TIME = "one_time"
GROUP_CASUAL = "casual"
GROUP_REGULAR = "regular"
GROUPS = (GROUP_ONE_TIME, GROUP_CASUAL, GROUP_REGULAR)

CASUAL_MAX_SESSIONS = 100


class UnsortedInput(Exception):
    """sessionize refuses unsorted input rather than silently resorting."""


@dataclass(frozen=True)
class Session:
    """A maximal run of one user's events under the gap threshold."""

    user_code: str
    events: tuple[EventRecord, ...]

    @property
    def start(self):
        return self.events[0].at

    @property
    def end(self):
        return self.events[-1].at

    @property
    def first_action(self) -> str:
        return self.events[0].action

    @property
    def minutes(self) -> float:
        return (self.end - self.start).total_seconds() / 60.0


@dataclass(frozen=True)
class UserProfile:
    user_code: str
    session_count: int
    group: str
    active_days: int
    freeform_count: int
    interactive_count: int
    avg_idle_hours: float | None
    avg_session_minutes: float


def group_for_session_count(count: int) -> str:
    if count <= 1:
        return GROUP_ONE_TIME
    if count <= CASUAL_MAX_SESSIONS:
        return GROUP_CASUAL
    return GROUP_REGULAR


def sessionize(
    events: list[EventRecord], gap_minutes: float = DEFAULT_GAP_MINUTES
) -> list[Session]:
    """Partition (user, time)-sorted events into maximal sessions."""
    _check_sorted(events)
    gap = timedelta(minutes=gap_minutes)
    sessions: list[Session] = []
    run: list[EventRecord] = []
    for event in events:
        if run and (event.user_code != run[-1].user_code or event.at - run[-1].at >= gap):
            sessions.append(Session(user_code=run[0].user_code, events=tuple(run)))
            run = []
        run.append(event)
    if run:
        sessions.append(Session(user_code=run[0].user_code, events=tuple(run)))
    return sessions


def _check_sorted(events: list[EventRecord]) -> None:
    for prev, cur in zip(events, events[1:]):
        if (cur.user_code, cur.at) < (prev.user_code, prev.at):
            raise UnsortedInput(
                f"events not sorted by (user, time) near seq {cur.seq}"
            )


def sort_for_sessionize(events: list[EventRecord]) -> list[EventRecord]:
    return sorted(events, key=lambda e: (e.user_code, e.at, e.seq))


def segment_users(sessions: list[Session], tz: str = "UTC") -> list[UserProfile]:
    """One profile per user, grouped by session count."""
    zone = ZoneInfo(tz)
    by_user: dict[str, list[Session]] = {}
    for session in sessions:
        by_user.setdefault(session.user_code, []).append(session)

    profiles = []
    for user_code in sorted(by_user):
        user_sessions = sorted(by_user[user_code], key=lambda s: s.start)
        events = [e for s in user_sessions for e in s.events]
        active_days = {e.at.astimezone(zone).date() for e in events}
        freeform = sum(1 for e in events if e.action == "freeform")
        starts = [s.start for s in user_sessions]
        if len(starts) > 1:
            gaps = [
                (b - a).total_seconds() / 3600.0 for a, b in zip(starts, starts[1:])
            ]
            avg_idle = sum(gaps) / len(gaps)
        else:
            avg_idle = None
        profiles.append(
            UserProfile(
                user_code=user_code,
                session_count=len(user_sessions),
                group=group_for_session_count(len(user_sessions)),
                active_days=len(active_days),
                freeform_count=freeform,
                interactive_count=len(events) - freeform,
                avg_idle_hours=avg_idle,
                avg_session_minutes=(
                    sum(s.minutes for s in user_sessions) / len(user_sessions)
                ),
            )
        )
    return profiles
