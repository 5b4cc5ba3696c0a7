from __future__ import annotations

from datetime import datetime, timezone

import pytest

from bev import metrics as metrics_mod
from bev.ingest import StreamKind
from bev.store import BuildInFlight, TweetStore

from .conftest import make_tweet

AS_OF = datetime(2024, 1, 10, tzinfo=timezone.utc)
SCORES = {"bot": 4.5, "human": 1.0}


def batch_of(n, prefix="t", author="human", stream=StreamKind.ELECTORAL, hashtags=("x",)):
    return [
        make_tweet(
            tweet_id=f"{prefix}{i}", author=author, stream=stream, hashtags=hashtags
        )
        for i in range(n)
    ]


@pytest.fixture
def store(tmp_path):
    s = TweetStore(tmp_path / "data")
    yield s
    s.close()


def test_append_acks_distinct(store):
    result = store.append_tweets(batch_of(100))
    assert result.accepted == 100
    assert result.duplicates == 0


def test_reappend_is_idempotent(store):
    batch = batch_of(100)
    store.append_tweets(batch)
    again = store.append_tweets(batch)
    assert again.accepted == 0
    assert again.duplicates == 100


def test_append_mixed_new_and_duplicate(store):
    store.append_tweets(batch_of(50))
    mixed = batch_of(50) + batch_of(50, prefix="new")
    result = store.append_tweets(mixed)
    assert result.accepted == 50
    assert result.duplicates == 50


def test_same_id_on_other_stream_is_not_duplicate(store):
    store.append_tweets(batch_of(1))
    other = store.append_tweets(batch_of(1, stream=StreamKind.RANDOM_SAMPLE))
    assert other.accepted == 1


def test_append_durable_across_reopen(tmp_path):
    store = TweetStore(tmp_path / "data")
    store.append_tweets(batch_of(10))
    store.close()
    reopened = TweetStore(tmp_path / "data")
    try:
        assert len(list(reopened.iter_tweets())) == 10
        result = reopened.append_tweets(batch_of(10))
        assert result.duplicates == 10
    finally:
        reopened.close()


def test_build_snapshot_and_rebuild_identical(store):
    store.append_tweets(batch_of(4, author="bot"))
    store.append_tweets(batch_of(6, prefix="h", author="human"))
    store.append_tweets(
        batch_of(5, prefix="b", author="human", stream=StreamKind.RANDOM_SAMPLE)
    )
    first = store.build_snapshot(AS_OF, SCORES)
    second = store.build_snapshot(AS_OF, SCORES)
    assert first.snapshot_id == 1
    assert second.snapshot_id == 2
    assert first.days == second.days
    assert first.built_at == second.built_at


def test_snapshot_over_empty_store(store):
    snapshot = store.build_snapshot(AS_OF, {})
    assert snapshot.days == {}
    assert store.current_snapshot() is snapshot


def test_current_snapshot_warming_before_first_build(store):
    assert store.current_snapshot() is None


def test_reader_keeps_old_snapshot_view(store):
    store.append_tweets(batch_of(3, author="bot"))
    first = store.build_snapshot(AS_OF, SCORES)
    held = store.current_snapshot()
    store.append_tweets(batch_of(3, prefix="later", author="bot"))
    second = store.build_snapshot(AS_OF, SCORES)
    assert held is first
    assert held.days != second.days
    assert store.current_snapshot() is second


def test_failed_build_leaves_previous_snapshot(store, monkeypatch):
    store.append_tweets(batch_of(3, author="bot"))
    first = store.build_snapshot(AS_OF, SCORES)

    def boom(*args, **kwargs):
        raise RuntimeError("injected failure")

    monkeypatch.setattr(metrics_mod, "aggregate_day", boom)
    store.append_tweets(batch_of(3, prefix="later", author="bot"))
    with pytest.raises(RuntimeError, match="injected"):
        store.build_snapshot(AS_OF, SCORES)
    assert store.current_snapshot() is first
    monkeypatch.undo()
    recovered = store.build_snapshot(AS_OF, SCORES)
    assert recovered.snapshot_id == first.snapshot_id + 1


def test_pending_resolution_increases_tweet_count(store):
    store.append_tweets(batch_of(4, author="late"))
    before = store.build_snapshot(AS_OF, {})
    day = next(iter(before.days))
    assert before.days[day].electoral.tweet_count == 0
    assert before.days[day].electoral.pending_count == 4
    after = store.build_snapshot(AS_OF, {"late": 2.0})
    assert after.days[day].electoral.tweet_count == 4
    assert after.days[day].electoral.pending_count == 0


def test_snapshot_persisted_across_reopen(tmp_path):
    store = TweetStore(tmp_path / "data")
    store.append_tweets(batch_of(2, author="bot"))
    built = store.build_snapshot(AS_OF, SCORES)
    store.close()
    reopened = TweetStore(tmp_path / "data")
    try:
        current = reopened.current_snapshot()
        assert current is not None
        assert current.snapshot_id == built.snapshot_id
        assert current.days == built.days
        next_build = reopened.build_snapshot(AS_OF, SCORES)
        assert next_build.snapshot_id == built.snapshot_id + 1
    finally:
        reopened.close()


def test_as_of_cut_excludes_later_tweets(store):
    early = make_tweet(tweet_id="early", author="bot", when="2024-01-05T01:00:00Z")
    late = make_tweet(tweet_id="late", author="bot", when="2024-01-11T01:00:00Z")
    store.append_tweets([early, late])
    snapshot = store.build_snapshot(AS_OF, SCORES)
    assert list(snapshot.days) == [early.day]


def test_build_in_flight_guard(store):
    store._build_lock.acquire()
    try:
        with pytest.raises(BuildInFlight):
            store.build_snapshot(AS_OF, {})
    finally:
        store._build_lock.release()


def test_unscorable_excluded_from_aggregates(store):
    store.append_tweets(batch_of(3, author="ghost"))
    snapshot = store.build_snapshot(AS_OF, {}, unscorable={"ghost"})
    day = next(iter(snapshot.days))
    agg = snapshot.days[day].electoral
    assert agg.tweet_count == 0
    assert agg.pending_count == 0


def test_prune_raw_logs(store):
    old = make_tweet(tweet_id="old", when="2023-12-01T00:00:00Z")
    new = make_tweet(tweet_id="new", when="2024-01-09T00:00:00Z")
    store.append_tweets([old, new])
    removed = store.prune_raw(retain_days=7, now=AS_OF)
    assert removed == 1
    remaining = [t.tweet_id for t in store.iter_tweets()]
    assert remaining == ["new"]


def test_entities_and_cloud_inside_snapshot(store):
    tweets = [
        make_tweet(tweet_id="b1", author="bot", hashtags=("a", "b")),
        make_tweet(tweet_id="b2", author="bot", hashtags=("a",)),
        make_tweet(tweet_id="h1", author="human", hashtags=("a",)),
    ]
    store.append_tweets(tweets)
    snapshot = store.build_snapshot(AS_OF, SCORES)
    day = next(iter(snapshot.days))
    counts = {(c.value, c.count) for c in snapshot.days[day].entity_counts}
    assert counts == {("a", 2), ("b", 1)}
    cloud = snapshot.days[day].cloud
    assert [(e.value, e.weight) for e in cloud] == [("a", 2.0), ("b", 1.0)]
