from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest

from wabot.store import (
    EventRecord,
    EventStore,
    InvalidRecord,
    read_log,
    replay,
)

from conftest import T0


class TestAppend:
    def test_first_record_gets_seq_one(self):
        store = EventStore()
        record = store.append(at=T0, user_code="u_a", direction="inbound", action="freeform", text="q")
        assert record.seq == 1
        assert store.append(at=T0, user_code="u_a", direction="inbound", action="menu").seq == 2

    def test_raw_phone_user_code_rejected(self):
        store = EventStore()
        with pytest.raises(InvalidRecord):
            store.append(at=T0, user_code="+923001234567", direction="inbound", action="freeform")

    def test_unknown_action_rejected(self):
        store = EventStore()
        with pytest.raises(InvalidRecord):
            store.append(at=T0, user_code="u_a", direction="inbound", action="selfie")

    def test_naive_timestamp_rejected(self):
        store = EventStore()
        with pytest.raises(InvalidRecord):
            store.append(
                at=datetime(2024, 1, 15), user_code="u_a", direction="inbound", action="menu"
            )

    def test_content_stored_separately(self):
        store = EventStore()
        record = store.append(
            at=T0, user_code="u_a", direction="inbound", action="freeform", text="What is up?"
        )
        assert record.payload_ref
        assert store.get_content(record.payload_ref) == "What is up?"


class TestLoadRange:
    def test_empty_store(self):
        store = EventStore()
        assert store.load_range(T0, T0 + timedelta(days=1)) == []

    def test_full_range_every_record_once(self):
        store = EventStore()
        for i in range(5):
            store.append(at=T0 + timedelta(minutes=i), user_code="u_a", direction="inbound", action="menu")
        got = store.load_range(T0, T0 + timedelta(hours=1))
        assert [r.seq for r in got] == [1, 2, 3, 4, 5]

    def test_half_open_boundary_excludes_end(self):
        store = EventStore()
        store.append(at=T0, user_code="u_a", direction="inbound", action="menu")
        store.append(at=T0 + timedelta(minutes=5), user_code="u_a", direction="inbound", action="menu")
        got = store.load_range(T0, T0 + timedelta(minutes=5))
        assert [r.seq for r in got] == [1]

    def test_inverted_range_rejected(self):
        store = EventStore()
        with pytest.raises(ValueError):
            store.load_range(T0, T0 - timedelta(seconds=1))


class TestDurability:
    def test_appends_flushed_to_disk_immediately(self, tmp_path):
        log = tmp_path / "events.jsonl"
        store = EventStore(log_path=log, content_path=tmp_path / "content.jsonl")
        store.append(at=T0, user_code="u_a", direction="inbound", action="freeform", text="q")
        # visible to an independent reader before close
        assert len(read_log(log)) == 1
        store.close()

    def test_reopen_resumes_sequence(self, tmp_path):
        log = tmp_path / "events.jsonl"
        store = EventStore(log_path=log)
        store.append(at=T0, user_code="u_a", direction="inbound", action="menu")
        store.close()
        reopened = EventStore(log_path=log)
        record = reopened.append(at=T0, user_code="u_a", direction="inbound", action="menu")
        assert record.seq == 2
        reopened.close()

    def test_json_round_trip_preserves_ms(self):
        at = T0 + timedelta(milliseconds=123)
        record = EventRecord(seq=1, at=at, user_code="u_a", direction="inbound",
                             action="menu", payload_ref="")
        assert EventRecord.from_json(record.to_json()) == record


class TestReplay:
    def test_rebuild_is_idempotent(self):
        store = EventStore()
        store.append(at=T0, user_code="u_a", direction="inbound", action="register")
        store.append(at=T0, user_code="u_a", direction="inbound", action="freeform", text="q")
        store.append(at=T0, user_code="u_b", direction="inbound", action="register")
        store.append(at=T0, user_code="u_b", direction="inbound", action="opt_out")
        first = replay(store.events())
        second = replay(store.events())
        assert first.digest() == second.digest()
        assert first.registered == {"u_a", "u_b"}
        assert first.opted_out == {"u_b"}
        assert first.action_counts["u_a"]["freeform"] == 1

    def test_rebuild_from_file_matches_live(self, tmp_path):
        log = tmp_path / "events.jsonl"
        store = EventStore(log_path=log)
        for i in range(20):
            store.append(
                at=T0 + timedelta(minutes=i),
                user_code=f"u_{i % 3}",
                direction="inbound" if i % 2 == 0 else "outbound",
                action="freeform" if i % 2 == 0 else "menu",
            )
        live_digest = store.replay_state().digest()
        store.close()
        assert replay(read_log(log)).digest() == live_digest


class TestSnapshots:
    def test_save_and_load(self, tmp_path):
        store = EventStore(snapshot_dir=tmp_path / "snaps")
        store.save_snapshot("users", {"users": [1, 2, 3]})
        assert store.load_snapshot("users") == {"users": [1, 2, 3]}
        assert store.load_snapshot("missing") is None
