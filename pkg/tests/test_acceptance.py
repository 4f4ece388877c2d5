"""Acceptance criteria, one test per criterion, at the stated scales.

The terminal summary prints one PASS/FAIL line per criterion (see
conftest.pytest_terminal_summary).
"""

from __future__ import annotations

import json
import random
import re
import time
from datetime import timedelta

import pytest

from wabot.analytics.reports import (
    followup_funnel,
    leaderboard_cohorts,
    topq_impact,
    usage_report,
)
from wabot.analytics.sessions import segment_users, sessionize, sort_for_sessionize
from wabot.analytics.synthetic import (
    cohort_log,
    funnel_log,
    random_interaction_log,
    segmentation_log,
    topq_ratio_log,
)
from wabot.config import ServiceConfig
from wabot.deployment import Deployment
from wabot.engine.state import chunk_text
from wabot.gateway.messages import (
    Button,
    ButtonSet,
    ConstraintViolation,
    ListMenu,
    ListRow,
    ListSection,
    OutboundMessage,
)
from wabot.gateway.render import render_outbound
from wabot.llm.mock import MockProvider
from wabot.llm.pipeline import LlmPipeline, MalformedFollowups, MalformedScores
from wabot.llm.provider import ModelTier
from wabot.llm.templates import TASKS, get_template
from wabot.rewards import EARNING_ACTIONS, RewardsService
from wabot.simulate import load_script, run_script
from wabot.store import EventStore

from conftest import GOLDEN_DIR, SCRIPTS_DIR, T0, Driver
from test_analytics import brute_force_partition
from test_rewards import brute_force_top10

TIERS = {n: ModelTier(name=n, model=n) for n in ("standard", "premium", "curation")}


def test_golden_transcript_byte_identical():
    """12-turn demo script at seed 7 matches the committed transcript; < 5 s."""
    started = time.monotonic()
    script = load_script(SCRIPTS_DIR / "demo_script.json")
    assert script.seed == 7
    assert len(script.steps) == 12
    transcript, _ = run_script(script)
    elapsed = time.monotonic() - started
    golden = (GOLDEN_DIR / "demo_transcript.jsonl").read_text(encoding="utf-8")
    assert transcript == golden
    assert transcript.encode("utf-8") == golden.encode("utf-8")
    assert elapsed < 5.0, f"golden replay took {elapsed:.2f}s"


def test_sessionization_oracle_100_random_logs():
    """100 random logs (≤1000 events, ≤20 users) partition exactly like the
    O(n²) oracle; a gap of exactly 15:00.000 always opens a new session; < 30 s."""
    started = time.monotonic()
    boundary_pairs_seen = 0
    for i in range(100):
        rng = random.Random(1000 + i)
        events = sort_for_sessionize(
            random_interaction_log(rng, rng.randint(1, 20), rng.randint(10, 1000))
        )
        sessions = sessionize(events, 15.0)
        got = sorted([e.seq for e in s.events] for s in sessions)
        assert got == sorted(brute_force_partition(events, 15.0))
        session_of = {e.seq: idx for idx, s in enumerate(sessions) for e in s.events}
        for prev, cur in zip(events, events[1:]):
            if prev.user_code == cur.user_code and cur.at - prev.at == timedelta(minutes=15):
                boundary_pairs_seen += 1
                assert session_of[prev.seq] != session_of[cur.seq]
    elapsed = time.monotonic() - started
    assert boundary_pairs_seen > 100  # the generator plants exact-boundary gaps
    assert elapsed < 30.0, f"oracle sweep took {elapsed:.2f}s"


def test_segmentation_thresholds_and_fixture_sizes():
    """Session counts 1/100/101 map to one_time/casual/regular; the bundled
    fixture reports group sizes 17/74/6 exactly."""
    def profile_for(count: int):
        events = [
            (f"u_x", i * 30.0) for i in range(count)
        ]
        from test_analytics import make_events

        (profile,) = segment_users(sessionize(make_events(events)))
        assert profile.session_count == count
        return profile.group

    assert profile_for(1) == "one_time"
    assert profile_for(100) == "casual"
    assert profile_for(101) == "regular"

    store = EventStore()
    segmentation_log(store)
    profiles = segment_users(sessionize(sort_for_sessionize(store.events())))
    sizes = {g: sum(1 for p in profiles if p.group == g) for g in ("one_time", "casual", "regular")}
    assert sizes == {"one_time": 17, "casual": 74, "regular": 6}
    report = usage_report(store.events())
    assert {g: report["groups"][g]["users"] for g in sizes} == sizes


def test_followup_contract_200_runs_and_injection_resilience():
    """200 mock runs each yield exactly six follow-ups; the presentation shows
    two up-front with a full-list affordance; injected malformed output never
    crashes parsing."""
    pipeline = LlmPipeline(MockProvider(seed=7), TIERS)
    for i in range(200):
        followups = pipeline.suggest_followups(f"What about topic {i}?", f"Answer {i}.")
        assert len(followups.questions) == 6
        assert all(q.strip() for q in followups.questions)

    deployment = Deployment(config=ServiceConfig())
    driver = Driver(deployment)
    driver.register("+923001234567")
    driver.text("+923001234567", "What are effective ways to teach children patience?")
    (two_up,) = driver.tap("+923001234567", "followups:show")
    titles = [b.title for b in two_up.interactive.buttons]
    assert titles == ["Ask question 1", "Ask question 2", "See all 6"]
    state = deployment.engine.get_state("+923001234567")
    assert state.followups.questions[0] in two_up.text
    assert state.followups.questions[1] in two_up.text
    (full,) = driver.tap("+923001234567", "followups:full")
    assert [r.id for r in full.interactive.rows()[:6]] == [f"followup:{i}" for i in range(1, 7)]

    for rate in (0.5, 1.0):
        faulty = LlmPipeline(MockProvider(seed=13, malformed_rate=rate), TIERS)
        for i in range(100):
            try:
                result = faulty.suggest_followups(f"q{i}?", "a")
                assert len(result.questions) == 6
            except MalformedFollowups:
                pass  # typed degradation, never a crash
            try:
                faulty.trending_rate(f"How can we handle case {i}?")
            except MalformedScores:
                pass


def _random_outbound(rng: random.Random) -> OutboundMessage:
    shape = rng.choice(["text", "buttons", "list"])
    interactive = None
    alphabet = "abcdefghijklmnopqrstuvwxyz ✨\U0001F600"
    text = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 30)))

    def rand_str(max_len: int) -> str:
        return "".join(rng.choice(alphabet) for _ in range(rng.randint(0, max_len)))

    if shape == "buttons":
        buttons = tuple(
            Button(id=rand_str(8).strip() or rng.choice(["", "btn:x"]), title=rand_str(26))
            for _ in range(rng.randint(0, 5))
        )
        interactive = ButtonSet(buttons=buttons)
    elif shape == "list":
        rows = tuple(
            ListRow(id=f"r:{i}" if rng.random() < 0.8 else "", title=rand_str(30),
                    description=rand_str(80))
            for i in range(rng.randint(0, 13))
        )
        interactive = ListMenu(button_label=rand_str(24), sections=(ListSection("S", rows),))
    return OutboundMessage(recipient="user", text=text, interactive=interactive)


def test_message_constraint_property_10000_renders():
    """10,000 randomized renders: zero payloads over platform limits; invalid
    inputs always raise ConstraintViolation."""
    rng = random.Random(42)
    rendered = 0
    rejected = 0
    for _ in range(10_000):
        msg = _random_outbound(rng)
        try:
            body = json.loads(render_outbound(msg))
        except ConstraintViolation:
            rejected += 1
            continue
        rendered += 1
        if body["type"] == "interactive":
            inter = body["interactive"]
            if inter["type"] == "button":
                buttons = inter["action"]["buttons"]
                assert 1 <= len(buttons) <= 3
                for b in buttons:
                    assert b["reply"]["id"]
                    assert 1 <= len(b["reply"]["title"]) <= 20
            else:
                rows = [r for s in inter["action"]["sections"] for r in s["rows"]]
                assert 1 <= len(rows) <= 10
                for r in rows:
                    assert r["id"]
                    assert 1 <= len(r["title"]) <= 24
                    assert len(r["description"]) <= 72
    assert rendered > 0 and rejected > 0
    assert rendered + rejected == 10_000


def test_prefetch_guarantee_50_selection_run():
    """Selecting curated entries with cached answers makes zero synchronous
    provider calls across a 50-selection randomized run."""
    deployment = Deployment(config=ServiceConfig())
    driver = Driver(deployment)
    driver.register("+923001234567")
    questions = [
        "How can we provide emotional care for our parents in their old age?",
        "How can someone find fulfillment in a job that does not seem inspiring?",
        "What are effective ways to teach children patience?",
        "What are the main reasons for divorce around the world?",
        "How do marriage and children affect a career?",
        "What are some ways to better prepare for retirement?",
    ]
    for question in questions:
        driver.text("+923001234567", question)

    assert deployment.curation.recent_ids, "fixture questions must pass the filter"
    for entry in deployment.curation.entries.values():
        assert entry.prefetched, "every curated entry should carry a cached answer"

    rng = random.Random(7)
    provider = deployment.provider
    for _ in range(50):
        kind, ids = rng.choice(
            [("trend", deployment.curation.trending_ids), ("recent", deployment.curation.recent_ids)]
        )
        if not ids:
            kind, ids = "recent", deployment.curation.recent_ids
        entry_id = rng.choice(ids)
        before = len(provider.calls)
        outs = driver.tap("+923001234567", f"{kind}:{entry_id}")
        assert len(provider.calls) == before, "selection must not call the provider"
        assert outs and outs[0].origin in ("trending_select", "recent_select")


def test_topq_calendar_62_days_with_opt_out():
    """62 simulated days produce exactly 62 broadcasts, every broadcast message
    carries an opt-out affordance, and a user opting out on day k receives
    exactly k broadcasts."""
    deployment = Deployment(config=ServiceConfig())
    driver = Driver(deployment)
    asker = "+923001234567"
    opter = "+15551234567"
    stayer = "+249911234567"
    for address in (asker, opter, stayer):
        driver.register(address)

    opter_received = 0
    for day in range(1, 63):
        driver.clock = T0 + timedelta(days=day)
        driver.text(asker, f"What is interesting fact number {day}?", gap_s=0)
        broadcast = deployment.tick(T0 + timedelta(days=day, hours=2))
        assert broadcast is not None, f"day {day} must broadcast"
        # replay of the same day stays idempotent
        assert deployment.tick(T0 + timedelta(days=day, hours=3)) is None

        opter_code = deployment.engine.get_state(opter).user_code
        if opter_code in broadcast.recipients:
            opter_received += 1
        if day == 10:
            driver.tap(opter, "optout:confirm")

    assert len(deployment.curation.broadcasts) == 62
    assert len({b.sent_at.date() for b in deployment.curation.broadcasts}) == 62
    assert opter_received == 10

    topq_messages = [m for m in deployment.transport.sent if m.origin == "topq_sent"]
    assert topq_messages
    for message in topq_messages:
        assert any(r.id == "optout:confirm" for r in message.interactive.rows())

    # the stayer and asker received all 62
    stayer_count = sum(1 for m in topq_messages if m.recipient == stayer)
    assert stayer_count == 62


def test_rewards_oracle_100_random_ledgers():
    """100 random ledgers (≤1000 users): both top-10 lists and my-points ranks
    match the full-sort oracle; no rendered leaderboard leaks digit runs; the
    24h window boundary is exact."""
    digit_run = re.compile(r"\d{5,}")
    for i in range(100):
        rng = random.Random(9000 + i)
        service = RewardsService()
        n_users = rng.randint(1, 1000)
        numbers = {}
        for u in range(n_users):
            code = f"u_{u:04d}"
            number = f"+92{rng.randint(10**9, 10**10 - 1)}"
            numbers[code] = number
            service.ensure_user(code, number, "PK")
        n_entries = rng.randint(0, 2000)
        for _ in range(n_entries):
            code = f"u_{rng.randrange(n_users):04d}"
            at = T0 - timedelta(minutes=rng.randint(0, 5000))
            service.award(code, rng.choice(EARNING_ACTIONS), at)
        # exact boundary membership: one entry precisely 24h old
        boundary_user = "u_boundary"
        service.ensure_user(boundary_user, "+920000000000", "PK")
        for _ in range(50):
            service.award(boundary_user, "freeform_query", T0 - timedelta(hours=24))

        view = service.leaderboard(T0)
        assert [(r.user_code, r.points) for r in view.alltime] == brute_force_top10(
            service.ledger, None, T0
        )
        assert [(r.user_code, r.points) for r in view.daily] == brute_force_top10(
            service.ledger, T0 - timedelta(hours=24), T0
        )
        assert any(r.user_code == boundary_user for r in view.daily)

        totals: dict[str, int] = {}
        for entry in service.ledger:
            totals[entry.user_code] = totals.get(entry.user_code, 0) + entry.points
        distinct = sorted(set(totals.values()), reverse=True)
        for code in list(totals)[:20]:
            assert service.my_points(code, T0).rank == distinct.index(totals[code]) + 1

        rendered = service.render_leaderboard(view)
        for run in digit_run.findall(rendered):
            for number in numbers.values():
                assert run not in number.lstrip("+"), "leaderboard leaked a stored number"


def test_engineered_metric_fixtures_exact():
    """The broadcast-impact fixture reproduces an active-user ratio of exactly
    2.0 and the cohort fixture a with/without interaction ratio of exactly 3:1."""
    store = EventStore()
    fixture = topq_ratio_log(store)
    report = topq_impact(store.events(), fixture["broadcast_times"])
    assert report["active_user_ratio"] == 2.0

    cohort_store = EventStore()
    cohort_fixture = cohort_log(cohort_store)
    cohorts = leaderboard_cohorts(cohort_store.events())
    frequent = cohorts["cohorts"]["frequent"]
    assert frequent["with_without_ratio"] == 3.0
    assert frequent["interactions_per_session_with_access"] == cohort_fixture["frequent_per_with"]
    assert frequent["interactions_per_session_without_access"] == (
        cohort_fixture["frequent_per_without"]
    )

    funnel_store = EventStore()
    funnel_fixture = funnel_log(funnel_store)
    funnel = followup_funnel(funnel_store.events(), content_lookup=funnel_store.get_content)
    assert funnel["view_to_select_rate"] == 0.58
    assert funnel["first_two_share"] == funnel_fixture["first_two_share"]


def test_prompt_fidelity_seven_templates():
    """The seven shipped templates byte-match the golden prompt files."""
    assert len(TASKS) == 7
    for task in TASKS:
        template = get_template(task)
        system = (GOLDEN_DIR / "prompts" / f"{task}.system.txt").read_bytes()
        user = (GOLDEN_DIR / "prompts" / f"{task}.user.txt").read_bytes()
        assert template.system_text.encode("utf-8") == system, f"{task} system prompt drifted"
        assert template.user_template.encode("utf-8") == user, f"{task} user prompt drifted"
