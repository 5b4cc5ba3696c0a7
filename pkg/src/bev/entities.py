"""Entities amplified by likely bots: extraction, ranking, tag-cloud weights.

Only tweets whose author is classified as a bot contribute.  An entity is
counted once per tweet that contains it, so copy-pasting a hashtag inside
one tweet does not inflate its count.  Links are normalized by lowercasing
scheme and host and stripping the fragment; the query string is kept because
campaign links often differ only by query.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from datetime import date
from enum import Enum

from bev.ingest import Tweet, normalize_url
from bev.scoring import DEFAULT_BOT_THRESHOLD, is_bot

DEFAULT_TOP_K = 20
DEFAULT_CLOUD_SIZE = 50


class EntityKind(Enum):
    HASHTAG = "hashtag"
    MENTION = "mention"
    LINK = "link"


@dataclass(frozen=True, slots=True)
class EntityCount:
    """Bot-tweet occurrences of one normalized entity on one day."""

    day: date
    kind: EntityKind
    value: str
    count: int


@dataclass(frozen=True, slots=True)
class TagCloudEntry:
    value: str
    kind: EntityKind
    weight: float


def normalize_link(url: str) -> str:
    return normalize_url(url, strip_fragment=True)


def _rank_key(entity: EntityCount) -> tuple:
    # Count descending, then value ascending, then kind for a total order.
    return (-entity.count, entity.value, entity.kind.value)


def extract_bot_entities(
    tweets: Iterable[Tweet],
    scores: Mapping[str, float],
    *,
    threshold: float = DEFAULT_BOT_THRESHOLD,
) -> list[EntityCount]:
    """Count entities over one day's bot-authored tweets.

    Human-authored tweets and tweets whose author score is unresolved
    contribute nothing.
    """
    counters: dict[EntityKind, Counter] = {kind: Counter() for kind in EntityKind}
    day: date | None = None
    for tweet in tweets:
        if day is None:
            day = tweet.day
        elif tweet.day != day:
            raise ValueError(f"tweet {tweet.tweet_id} is not from {day}")
        score = scores.get(tweet.author_id)
        if score is None or not is_bot(score, threshold):
            continue
        counters[EntityKind.HASHTAG].update(set(tweet.hashtags))
        counters[EntityKind.MENTION].update(set(tweet.mentions))
        counters[EntityKind.LINK].update({normalize_link(l) for l in tweet.links})
    results = [
        EntityCount(day=day, kind=kind, value=value, count=count)
        for kind, counter in counters.items()
        for value, count in counter.items()
    ]
    results.sort(key=_rank_key)
    return results


def top_entities(
    counts: Iterable[EntityCount], kind: EntityKind, k: int = DEFAULT_TOP_K
) -> list[EntityCount]:
    """Top-k of one kind: count descending, ties broken by value ascending."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = sorted((c for c in counts if c.kind is kind), key=_rank_key)
    return ranked[:k]


def tag_cloud(
    counts: Iterable[EntityCount], max_entries: int = DEFAULT_CLOUD_SIZE
) -> list[TagCloudEntry]:
    """Merge all kinds into one ranked cloud; weight equals the raw count."""
    if max_entries < 1:
        raise ValueError("max_entries must be >= 1")
    ranked = sorted(counts, key=_rank_key)[:max_entries]
    return [
        TagCloudEntry(value=c.value, kind=c.kind, weight=float(c.count)) for c in ranked
    ]
