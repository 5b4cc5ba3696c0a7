"""Persistence: raw tweet logs, the embedded state keyspace, and snapshots.

Raw tweets land in append-only ndjson logs partitioned by stream and UTC
date (`raw/<stream>/<date>.ndjson`).  Everything else (seen-tweet dedup
index, the score cache, published snapshots) lives in a single embedded
SQLite keyspace under `state/`.  Analysis output is published as immutable
snapshots: a build recomputes every day from the stored tweets and the
currently resolved scores, then publishes atomically; a failed build leaves
the previous snapshot live.
"""

from __future__ import annotations

import json
import logging
import sqlite3
import threading
from collections.abc import Iterator, Mapping
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

from bev import entities as entities_mod
from bev import metrics as metrics_mod
from bev.entities import DEFAULT_CLOUD_SIZE, EntityCount, EntityKind, TagCloudEntry
from bev.ingest import (
    StreamKind,
    Tweet,
    format_timestamp,
    parse_timestamp,
    read_archive,
)
from bev.metrics import BevPoint, DailyAggregate
from bev.scoring import DEFAULT_BOT_THRESHOLD

logger = logging.getLogger(__name__)

_SCHEMA = """
CREATE TABLE IF NOT EXISTS seen_tweets (
    stream TEXT NOT NULL,
    tweet_id TEXT NOT NULL,
    PRIMARY KEY (stream, tweet_id)
);
CREATE TABLE IF NOT EXISTS scores (
    account_id TEXT PRIMARY KEY,
    score REAL,
    fetched_at TEXT NOT NULL,
    source TEXT NOT NULL,
    status TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS snapshots (
    snapshot_id INTEGER PRIMARY KEY,
    built_at TEXT NOT NULL,
    payload TEXT NOT NULL
);
"""


class BuildInFlight(RuntimeError):
    """A snapshot build was requested while another one is running."""


class StateStore:
    """The embedded transactional keyspace (SQLite), safe for threaded use."""

    def __init__(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        self._conn = sqlite3.connect(str(path), check_same_thread=False)
        self._lock = threading.Lock()
        with self._lock:
            self._conn.executescript(_SCHEMA)
            self._conn.execute("PRAGMA journal_mode=WAL")
            self._conn.commit()

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    def mark_seen(self, stream: str, tweet_id: str) -> bool:
        with self._lock:
            cursor = self._conn.execute(
                "INSERT OR IGNORE INTO seen_tweets (stream, tweet_id) VALUES (?, ?)",
                (stream, tweet_id),
            )
            self._conn.commit()
            return cursor.rowcount == 1

    def score_get(self, account_id: str) -> tuple | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT score, fetched_at, source, status FROM scores WHERE account_id = ?",
                (account_id,),
            ).fetchone()
        return row

    def score_put(
        self,
        account_id: str,
        score: float | None,
        fetched_at: str,
        source: str,
        status: str,
    ) -> None:
        with self._lock:
            self._conn.execute(
                "INSERT OR REPLACE INTO scores (account_id, score, fetched_at, source, status)"
                " VALUES (?, ?, ?, ?, ?)",
                (account_id, score, fetched_at, source, status),
            )
            self._conn.commit()

    def score_all(self) -> list[tuple]:
        with self._lock:
            return self._conn.execute(
                "SELECT account_id, score, fetched_at, source, status FROM scores"
            ).fetchall()

    def snapshot_put(self, snapshot_id: int, built_at: str, payload: str) -> None:
        with self._lock:
            self._conn.execute(
                "INSERT INTO snapshots (snapshot_id, built_at, payload) VALUES (?, ?, ?)",
                (snapshot_id, built_at, payload),
            )
            self._conn.commit()

    def snapshot_latest(self) -> tuple | None:
        with self._lock:
            return self._conn.execute(
                "SELECT snapshot_id, built_at, payload FROM snapshots"
                " ORDER BY snapshot_id DESC LIMIT 1"
            ).fetchone()

    def next_snapshot_id(self) -> int:
        with self._lock:
            row = self._conn.execute(
                "SELECT COALESCE(MAX(snapshot_id), 0) FROM snapshots"
            ).fetchone()
        return row[0] + 1


@dataclass(frozen=True, slots=True)
class DayData:
    """Everything the API serves for one day, frozen inside a snapshot."""

    electoral: DailyAggregate
    baseline: DailyAggregate
    point: BevPoint
    entity_counts: tuple[EntityCount, ...]
    cloud: tuple[TagCloudEntry, ...]


@dataclass(frozen=True, slots=True)
class Snapshot:
    """One atomically published recomputation of all day-level results."""

    snapshot_id: int
    built_at: datetime
    days: Mapping[date, DayData]


@dataclass(frozen=True, slots=True)
class AppendResult:
    accepted: int
    duplicates: int


def _aggregate_payload(agg: DailyAggregate) -> dict:
    return {
        "day": agg.day.isoformat(),
        "stream": agg.stream.value,
        "tweet_count": agg.tweet_count,
        "unique_accounts": agg.unique_accounts,
        "mean_score": agg.mean_score,
        "median_score": agg.median_score,
        "bot_tweet_proportion": agg.bot_tweet_proportion,
        "pending_count": agg.pending_count,
    }


def _aggregate_from_payload(payload: dict) -> DailyAggregate:
    return DailyAggregate(
        day=date.fromisoformat(payload["day"]),
        stream=StreamKind(payload["stream"]),
        tweet_count=payload["tweet_count"],
        unique_accounts=payload["unique_accounts"],
        mean_score=payload["mean_score"],
        median_score=payload["median_score"],
        bot_tweet_proportion=payload["bot_tweet_proportion"],
        pending_count=payload["pending_count"],
    )


def snapshot_to_payload(snapshot: Snapshot) -> dict:
    days = {}
    for day, data in snapshot.days.items():
        days[day.isoformat()] = {
            "electoral": _aggregate_payload(data.electoral),
            "baseline": _aggregate_payload(data.baseline),
            "point": {
                "bev": data.point.bev,
                "bev_median": data.point.bev_median,
                "bev2": data.point.bev2,
            },
            "entities": [
                {"kind": c.kind.value, "value": c.value, "count": c.count}
                for c in data.entity_counts
            ],
            "cloud": [
                {"kind": c.kind.value, "value": c.value, "weight": c.weight}
                for c in data.cloud
            ],
        }
    return {
        "snapshot_id": snapshot.snapshot_id,
        "built_at": format_timestamp(snapshot.built_at),
        "days": days,
    }


def snapshot_from_payload(payload: dict) -> Snapshot:
    days: dict[date, DayData] = {}
    for day_text, data in payload["days"].items():
        day = date.fromisoformat(day_text)
        days[day] = DayData(
            electoral=_aggregate_from_payload(data["electoral"]),
            baseline=_aggregate_from_payload(data["baseline"]),
            point=BevPoint(
                day=day,
                bev=data["point"]["bev"],
                bev_median=data["point"]["bev_median"],
                bev2=data["point"]["bev2"],
            ),
            entity_counts=tuple(
                EntityCount(
                    day=day,
                    kind=EntityKind(c["kind"]),
                    value=c["value"],
                    count=c["count"],
                )
                for c in data["entities"]
            ),
            cloud=tuple(
                TagCloudEntry(
                    value=c["value"], kind=EntityKind(c["kind"]), weight=c["weight"]
                )
                for c in data["cloud"]
            ),
        )
    return Snapshot(
        snapshot_id=payload["snapshot_id"],
        built_at=parse_timestamp(payload["built_at"]),
        days=days,
    )


class TweetStore:
    """Raw tweet logs plus the state keyspace and the published snapshot."""

    def __init__(self, data_dir: Path) -> None:
        self.data_dir = Path(data_dir)
        self.raw_dir = self.data_dir / "raw"
        self.raw_dir.mkdir(parents=True, exist_ok=True)
        self.state = StateStore(self.data_dir / "state" / "keyspace.sqlite3")
        self._file_lock = threading.Lock()
        self._publish_lock = threading.Lock()
        self._build_lock = threading.Lock()
        self._current: Snapshot | None = None
        latest = self.state.snapshot_latest()
        if latest is not None:
            self._current = snapshot_from_payload(json.loads(latest[2]))

    def close(self) -> None:
        self.state.close()

    def _raw_path(self, stream: StreamKind, day: date) -> Path:
        return self.raw_dir / stream.value / f"{day.isoformat()}.ndjson"

    def append_tweets(self, batch: list[Tweet]) -> AppendResult:
        """Durable append; duplicates within a stream are dropped and counted."""
        if not batch:
            raise ValueError("batch must be nonempty")
        accepted = 0
        duplicates = 0
        by_file: dict[Path, list[Tweet]] = {}
        for tweet in batch:
            if not self.state.mark_seen(tweet.stream.value, tweet.tweet_id):
                duplicates += 1
                continue
            by_file.setdefault(self._raw_path(tweet.stream, tweet.day), []).append(tweet)
            accepted += 1
        with self._file_lock:
            for path, tweets in by_file.items():
                path.parent.mkdir(parents=True, exist_ok=True)
                with open(path, "a", encoding="utf-8") as handle:
                    for tweet in tweets:
                        handle.write(
                            json.dumps(tweet.to_record(), ensure_ascii=False) + "\n"
                        )
                    handle.flush()
        return AppendResult(accepted=accepted, duplicates=duplicates)

    def iter_tweets(self, upto: datetime | None = None) -> Iterator[Tweet]:
        """All stored tweets, by stream then date; `upto` gives a consistent cut."""
        for stream in StreamKind:
            stream_dir = self.raw_dir / stream.value
            if not stream_dir.is_dir():
                continue
            for path in sorted(stream_dir.glob("*.ndjson")):
                with self._file_lock:
                    tweets, _skipped = read_archive(path, stream)
                for tweet in tweets:
                    if upto is None or tweet.created_at <= upto:
                        yield tweet

    def prune_raw(self, retain_days: int, now: datetime | None = None) -> int:
        """Delete raw log files older than the retention window."""
        if retain_days < 1:
            raise ValueError("retain_days must be >= 1")
        moment = now or datetime.now(timezone.utc)
        cutoff = moment.date() - timedelta(days=retain_days)
        removed = 0
        for stream in StreamKind:
            stream_dir = self.raw_dir / stream.value
            if not stream_dir.is_dir():
                continue
            for path in sorted(stream_dir.glob("*.ndjson")):
                if date.fromisoformat(path.stem) < cutoff:
                    path.unlink()
                    removed += 1
        return removed

    def compute_days(
        self,
        resolved: Mapping[str, float],
        unscorable: set[str],
        *,
        threshold: float = DEFAULT_BOT_THRESHOLD,
        cloud_size: int = DEFAULT_CLOUD_SIZE,
        upto: datetime | None = None,
    ) -> dict[date, DayData]:
        """Recompute every day's aggregates, index point, and entity rankings."""
        grouped: dict[tuple[date, StreamKind], list[Tweet]] = {}
        for tweet in self.iter_tweets(upto=upto):
            grouped.setdefault((tweet.day, tweet.stream), []).append(tweet)
        days = sorted({day for day, _stream in grouped})
        result: dict[date, DayData] = {}
        for day in days:
            electoral_tweets = grouped.get((day, StreamKind.ELECTORAL), [])
            baseline_tweets = grouped.get((day, StreamKind.RANDOM_SAMPLE), [])
            electoral = metrics_mod.aggregate_day(
                electoral_tweets,
                resolved,
                threshold=threshold,
                unscorable=unscorable,
                day=day,
                stream=StreamKind.ELECTORAL,
            )
            baseline = metrics_mod.aggregate_day(
                baseline_tweets,
                resolved,
                threshold=threshold,
                unscorable=unscorable,
                day=day,
                stream=StreamKind.RANDOM_SAMPLE,
            )
            counts = entities_mod.extract_bot_entities(
                electoral_tweets, resolved, threshold=threshold
            )
            result[day] = DayData(
                electoral=electoral,
                baseline=baseline,
                point=metrics_mod.bev_point(electoral, baseline),
                entity_counts=tuple(counts),
                cloud=tuple(entities_mod.tag_cloud(counts, cloud_size)),
            )
        return result

    def build_snapshot(
        self,
        as_of: datetime,
        resolved: Mapping[str, float],
        unscorable: set[str] | None = None,
        *,
        threshold: float = DEFAULT_BOT_THRESHOLD,
        cloud_size: int = DEFAULT_CLOUD_SIZE,
    ) -> Snapshot:
        """Recompute all days and publish atomically (publish-or-nothing)."""
        if not self._build_lock.acquire(blocking=False):
            raise BuildInFlight("another snapshot build is running")
        try:
            days = self.compute_days(
                resolved,
                unscorable or set(),
                threshold=threshold,
                cloud_size=cloud_size,
                upto=as_of,
            )
            snapshot = Snapshot(
                snapshot_id=self.state.next_snapshot_id(),
                built_at=as_of,
                days=days,
            )
            payload = json.dumps(snapshot_to_payload(snapshot), ensure_ascii=False)
            self.state.snapshot_put(
                snapshot.snapshot_id, format_timestamp(snapshot.built_at), payload
            )
            with self._publish_lock:
                self._current = snapshot
            logger.info(
                "published snapshot %d covering %d days",
                snapshot.snapshot_id,
                len(days),
            )
            return snapshot
        finally:
            self._build_lock.release()

    def current_snapshot(self) -> Snapshot | None:
        """The latest published snapshot, or None while warming up."""
        with self._publish_lock:
            return self._current
