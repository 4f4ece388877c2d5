"""Deterministic synthetic logs: oracle inputs and engineered metric fixtures.

Builders append through an EventStore so content refs behave exactly like
production logs; the returned dict states the values the construction
guarantees, which tests then assert against the computed reports.
"""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

from wabot.store import INBOUND, EventRecord, EventStore

BASE = datetime(2024, 3, 1, 0, 0, tzinfo=timezone.utc)

_ACTION_CYCLE = ("freeform", "menu", "trending_view", "trending_select", "recent_view")


def random_interaction_log(
    rng: random.Random, n_users: int, n_events: int, boundary_rate: float = 0.1
) -> list[EventRecord]:
    """Random inbound events with gaps straddling the 15-minute threshold.

    A slice of gaps lands exactly on 15:00.000 to pin the boundary rule.
    """
    users = [f"u_r{i:02d}" for i in range(n_users)]
    cursor = {u: BASE + timedelta(minutes=rng.randrange(600)) for u in users}
    events = []
    for seq in range(1, n_events + 1):
        user = rng.choice(users)
        roll = rng.random()
        if roll < boundary_rate:
            gap = timedelta(minutes=15)
        elif roll < 0.6:
            gap = timedelta(seconds=rng.randrange(1, 15 * 60))
        else:
            gap = timedelta(seconds=rng.randrange(15 * 60, 48 * 3600))
        cursor[user] += gap
        events.append(
            EventRecord(
                seq=seq,
                at=cursor[user],
                user_code=user,
                direction=INBOUND,
                action=rng.choice(_ACTION_CYCLE),
                payload_ref="",
            )
        )
    return events


def segmentation_log(
    store: EventStore,
    one_time: int = 17,
    casual: int = 74,
    regular: int = 6,
    regular_sessions: int = 101,
    seed: int = 11,
) -> dict:
    """Users with per-group counts pinned by construction: one_time users get
    exactly one session, casual users 2..100, regular users > 100."""
    rng = random.Random(seed)
    expected = {"one_time": 0, "casual": 0, "regular": 0}

    def add_user(code: str, session_count: int) -> None:
        at = BASE + timedelta(minutes=rng.randrange(24 * 60))
        for _ in range(session_count):
            events_in_session = rng.randint(1, 3)
            for _ in range(events_in_session):
                store.append(
                    at=at,
                    user_code=code,
                    direction=INBOUND,
                    action=rng.choice(_ACTION_CYCLE),
                    text="q",
                )
                at += timedelta(minutes=1)
            at += timedelta(hours=5)  # well over the gap threshold

    for i in range(one_time):
        add_user(f"u_one{i:02d}", 1)
        expected["one_time"] += 1
    for i in range(casual):
        add_user(f"u_cas{i:02d}", rng.randint(2, 100))
        expected["casual"] += 1
    for i in range(regular):
        add_user(f"u_reg{i:02d}", regular_sessions)
        expected["regular"] += 1
    return {"group_sizes": expected}


def topq_ratio_log(store: EventStore) -> dict:
    """Ten days; broadcasts every other day; active users engineered to 2:1.

    Broadcast days see exactly 8 distinct active users, other days exactly 4,
    so the mean-active-user ratio is exactly 2.0.
    """
    broadcast_times = []
    users_on = [f"u_t{i:02d}" for i in range(8)]
    users_off = users_on[:4]
    for day in range(10):
        day_start = BASE + timedelta(days=day)
        is_broadcast = day % 2 == 0
        if is_broadcast:
            broadcast_times.append(day_start + timedelta(hours=9))
        for user in users_on if is_broadcast else users_off:
            store.append(
                at=day_start + timedelta(hours=10),
                user_code=user,
                direction=INBOUND,
                action="freeform",
                text="q",
            )
    return {"broadcast_times": broadcast_times, "active_user_ratio": 2.0}


def cohort_log(store: EventStore) -> dict:
    """Leaderboard cohorts with the frequent cohort engineered to a 3:1
    with/without-access interactions-per-session ratio (9 vs 3)."""
    at = BASE

    def session(user: str, actions: list[str], start: datetime) -> datetime:
        t = start
        for action in actions:
            store.append(at=t, user_code=user, direction=INBOUND, action=action, text="x")
            t += timedelta(minutes=1)
        return t

    with_access = ["leaderboard_view", "leaderboard_view"] + ["freeform"] * 7  # 9 events
    without_access = ["freeform"] * 3

    for i in range(2):  # frequent: repeated access within one session
        user = f"u_freq{i}"
        t = at + timedelta(hours=i)
        for _ in range(4):
            t = session(user, with_access, t) + timedelta(hours=2)
            t = session(user, without_access, t) + timedelta(hours=2)

    for i in range(2):  # occasional: one view across 20 sessions (5% < 10%)
        user = f"u_occ{i}"
        t = at + timedelta(days=3, hours=i)
        for s in range(20):
            actions = ["leaderboard_view"] if s == 0 else ["freeform"]
            t = session(user, actions, t) + timedelta(hours=2)

    return {
        "frequent_users": 2,
        "occasional_users": 2,
        "frequent_with_without_ratio": 3.0,
        "frequent_per_with": 9.0,
        "frequent_per_without": 3.0,
    }


def funnel_log(store: EventStore) -> dict:
    """50 follow-up requests, 29 answered in-session: a 58% view-to-select rate.

    Of the 29 selections, 25 come from positions 1-2.
    """
    positions = [1] * 17 + [2] * 8 + [5] * 4  # 29 selections, 25 from the first two
    answered = len(positions)
    unanswered = 21
    users = [f"u_f{i}" for i in range(5)]
    t = BASE
    total_interactions = 0

    for i in range(answered + unanswered):
        user = users[i % len(users)]
        t += timedelta(hours=1)
        store.append(at=t, user_code=user, direction=INBOUND, action="freeform", text="q")
        store.append(
            at=t + timedelta(minutes=1),
            user_code=user,
            direction=INBOUND,
            action="followup_view",
            text="followups:show",
        )
        total_interactions += 2
        if i < answered:
            store.append(
                at=t + timedelta(minutes=2),
                user_code=user,
                direction=INBOUND,
                action="followup_select",
                text=f"followup:{positions[i]}",
            )
            total_interactions += 1

    followup_events = (answered + unanswered) + answered
    return {
        "views": answered + unanswered,
        "selects": answered,
        "view_to_select_rate": answered / (answered + unanswered),
        "first_two_share": 25 / 29,
        "share_of_interactions": followup_events / total_interactions,
    }
