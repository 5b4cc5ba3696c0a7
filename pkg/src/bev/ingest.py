"""Tweet streams: the topic-filtered electoral stream and the random baseline.

Both streams are consumed through a uniform source contract with three
implementations: replay from an ndjson archive, a seeded synthetic generator,
and a stub standing in for the live platform API.  Archive records are
newline-delimited JSON objects with fields `id`, `user_id`, `user_handle`,
`created_at` (ISO-8601 UTC), `text`, `hashtags`, `mentions`, `links`,
`is_retweet`, and an optional `true_score` used by synthetic fixtures.
Unknown fields are ignored.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING
from urllib.parse import urlsplit, urlunsplit

if TYPE_CHECKING:
    from bev.expansion import HashtagSet

logger = logging.getLogger(__name__)


class MalformedRecord(ValueError):
    """An archive line that cannot be turned into a Tweet."""


class SourceOpenError(RuntimeError):
    """A source could not be opened (missing or unreadable archive)."""


class StreamKind(Enum):
    """Which of the two streams a tweet was collected from."""

    ELECTORAL = "electoral"
    RANDOM_SAMPLE = "random_sample"


def parse_timestamp(raw: str) -> datetime:
    """Parse an ISO-8601 instant into an aware UTC datetime, seconds precision."""
    if not isinstance(raw, str) or not raw:
        raise MalformedRecord(f"bad created_at: {raw!r}")
    text = raw.replace("Z", "+00:00")
    try:
        parsed = datetime.fromisoformat(text)
    except ValueError as exc:
        raise MalformedRecord(f"bad created_at: {raw!r}") from exc
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(moment: datetime) -> str:
    return moment.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def normalize_url(url: str, *, strip_fragment: bool = False) -> str:
    """Lowercase scheme and host, keep path/query case; optionally drop fragment."""
    parts = urlsplit(url.strip())
    fragment = "" if strip_fragment else parts.fragment
    return urlunsplit(
        (parts.scheme.lower(), parts.netloc.lower(), parts.path, parts.query, fragment)
    )


def _clean_tags(values: object, marker: str) -> tuple[str, ...]:
    if not isinstance(values, list):
        raise MalformedRecord(f"expected list, got {type(values).__name__}")
    cleaned = []
    for value in values:
        if not isinstance(value, str):
            raise MalformedRecord(f"non-string entry {value!r}")
        tag = value.lstrip(marker).lower().strip()
        if tag:
            cleaned.append(tag)
    return tuple(cleaned)


@dataclass(frozen=True, slots=True)
class Tweet:
    """One ingested post, normalized at construction.

    Hashtags and mentions are lowercased with any leading marker stripped;
    links carry a lowercased scheme and host.  `created_at` is an aware UTC
    datetime at seconds precision; day bucketing uses its UTC calendar date.
    `true_score` is only present on synthetic fixture records and feeds the
    mock scorer.
    """

    tweet_id: str
    author_id: str
    author_handle: str
    created_at: datetime
    text: str
    hashtags: tuple[str, ...]
    mentions: tuple[str, ...]
    links: tuple[str, ...]
    is_retweet: bool
    stream: StreamKind
    true_score: float | None = None

    @property
    def day(self) -> date:
        return self.created_at.date()

    @classmethod
    def from_record(cls, record: dict, stream: StreamKind) -> "Tweet":
        """Build a Tweet from one archive record, raising MalformedRecord on bad input."""
        if not isinstance(record, dict):
            raise MalformedRecord("record is not an object")
        tweet_id = record.get("id")
        author_id = record.get("user_id")
        if not isinstance(tweet_id, str) or not tweet_id:
            raise MalformedRecord("missing or empty id")
        if not isinstance(author_id, str) or not author_id:
            raise MalformedRecord("missing or empty user_id")
        handle = record.get("user_handle", "")
        text = record.get("text", "")
        if not isinstance(handle, str) or not isinstance(text, str):
            raise MalformedRecord("user_handle/text must be strings")
        try:
            raw_links = record.get("links", [])
            if not isinstance(raw_links, list) or any(
                not isinstance(link, str) for link in raw_links
            ):
                raise MalformedRecord("links must be a list of strings")
            links = tuple(
                normalize_url(link) for link in raw_links if link.strip()
            )
            hashtags = _clean_tags(record.get("hashtags", []), marker="#")
            mentions = _clean_tags(record.get("mentions", []), marker="@")
        except MalformedRecord as exc:
            raise MalformedRecord(f"bad entity list: {exc}") from exc
        true_score = record.get("true_score")
        if true_score is not None and not isinstance(true_score, (int, float)):
            raise MalformedRecord("true_score must be numeric")
        return cls(
            tweet_id=tweet_id,
            author_id=author_id,
            author_handle=handle,
            created_at=parse_timestamp(record.get("created_at")),
            text=text,
            hashtags=hashtags,
            mentions=mentions,
            links=links,
            is_retweet=bool(record.get("is_retweet", False)),
            stream=stream,
            true_score=float(true_score) if true_score is not None else None,
        )

    def to_record(self) -> dict:
        record = {
            "id": self.tweet_id,
            "user_id": self.author_id,
            "user_handle": self.author_handle,
            "created_at": format_timestamp(self.created_at),
            "text": self.text,
            "hashtags": list(self.hashtags),
            "mentions": list(self.mentions),
            "links": list(self.links),
            "is_retweet": self.is_retweet,
        }
        if self.true_score is not None:
            record["true_score"] = self.true_score
        return record


def matches_track(tweet: Tweet, track: "HashtagSet | Iterable[str]") -> bool:
    """True iff the tweet's hashtags intersect the tracked set."""
    tags = track.tags() if hasattr(track, "tags") else {t.lower() for t in track}
    return any(tag in tags for tag in tweet.hashtags)


@dataclass(slots=True)
class SourceConfig:
    """How to open one stream source.

    `kind` is one of replay, synthetic, live-stub.  Replay needs `path`;
    synthetic needs `seed` (plus optional `population` file and `hours`).
    The baseline stream is thinned to `rate_limit_random` tweets per hour.
    """

    kind: str
    stream: StreamKind
    path: str | None = None
    seed: int | None = None
    rate_limit_random: int = 1000
    track: "HashtagSet | set[str] | None" = None
    population: str | None = None
    hours: int = 24

    KINDS = ("replay", "synthetic", "live-stub")

    def validate(self) -> None:
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.rate_limit_random <= 0:
            raise ValueError("rate_limit_random must be positive")
        if self.kind == "replay" and not self.path:
            raise ValueError("replay source needs a path")
        if self.kind == "synthetic" and self.seed is None:
            raise ValueError("synthetic source needs a seed")


@dataclass(slots=True)
class SourceStats:
    """Counters kept by every source handle for one session."""

    yielded: int = 0
    skipped: int = 0
    filtered: int = 0
    thinned: int = 0


class TweetSource:
    """Single-consumer iterable of Tweets with session stats."""

    def __init__(self, config: SourceConfig) -> None:
        self.config = config
        self.stats = SourceStats()

    def __iter__(self) -> Iterator[Tweet]:
        raise NotImplementedError


def read_archive(path: Path, stream: StreamKind) -> tuple[list[Tweet], int]:
    """Read every parseable record of an ndjson archive.

    Returns the tweets in file order and the count of malformed lines that
    were skipped.  Blank lines are ignored without counting.
    """
    tweets: list[Tweet] = []
    skipped = 0
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                tweets.append(Tweet.from_record(record, stream))
            except (json.JSONDecodeError, MalformedRecord) as exc:
                skipped += 1
                logger.debug("skipping malformed line %d of %s: %s", lineno, path, exc)
    return tweets, skipped


class _HourlyThinner:
    """Deterministic baseline rate limit: keep the first N tweets per UTC hour."""

    def __init__(self, per_hour: int) -> None:
        self.per_hour = per_hour
        self._hour: datetime | None = None
        self._count = 0

    def admit(self, tweet: Tweet) -> bool:
        hour = tweet.created_at.replace(minute=0, second=0)
        if hour != self._hour:
            self._hour = hour
            self._count = 0
        if self._count >= self.per_hour:
            return False
        self._count += 1
        return True


class ReplaySource(TweetSource):
    """Replays an archived stream in nondecreasing timestamp order.

    Electoral replay applies the track filter (emulating server-side
    filtering); baseline replay applies the hourly rate limit.  Malformed
    records are skipped and counted, never fatal.
    """

    def __iter__(self) -> Iterator[Tweet]:
        tweets, self.stats.skipped = read_archive(Path(self.config.path), self.config.stream)
        tweets.sort(key=lambda t: t.created_at)
        thinner = None
        if self.config.stream is StreamKind.RANDOM_SAMPLE:
            thinner = _HourlyThinner(self.config.rate_limit_random)
        for tweet in tweets:
            if (
                self.config.stream is StreamKind.ELECTORAL
                and self.config.track is not None
                and not matches_track(tweet, self.config.track)
            ):
                self.stats.filtered += 1
                continue
            if thinner is not None and not thinner.admit(tweet):
                self.stats.thinned += 1
                continue
            self.stats.yielded += 1
            yield tweet


class LiveStubSource(TweetSource):
    """Placeholder for the live platform adapter: yields nothing."""

    unconfigured = True

    def __iter__(self) -> Iterator[Tweet]:
        logger.warning("live source is unconfigured; yielding no tweets")
        return iter(())


class SyntheticSource(TweetSource):
    """Deterministic generated stream for a fixed seed."""

    def __iter__(self) -> Iterator[Tweet]:
        from bev import synth  # deferred: synth builds on this module

        result = synth.for_source_config(self.config)
        tweets = (
            result.electoral
            if self.config.stream is StreamKind.ELECTORAL
            else result.baseline
        )
        for tweet in tweets:
            self.stats.yielded += 1
            yield tweet


def open_source(config: SourceConfig) -> TweetSource:
    """Open a stream handle yielding Tweets in nondecreasing created_at order."""
    config.validate()
    if config.kind == "replay":
        path = Path(config.path)
        if not path.is_file():
            raise SourceOpenError(f"archive not found: {path}")
        return ReplaySource(config)
    if config.kind == "synthetic":
        return SyntheticSource(config)
    return LiveStubSource(config)


def write_archive(tweets: Iterable[Tweet], path: Path) -> int:
    """Write tweets as one ndjson record per line; returns the record count."""
    count = 0
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        for tweet in tweets:
            handle.write(json.dumps(tweet.to_record(), ensure_ascii=False) + "\n")
            count += 1
    return count
