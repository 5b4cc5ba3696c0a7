"""Per-day score summaries and the BEV index family.

The daily summary averages account scores over tweets, which weights each
account by its tweet frequency for the day.  BEV is the relative difference
between the electoral and baseline daily means; the median variant swaps in
medians, and BEV2 swaps in the proportion of tweets authored by accounts
classified as bots.  A variant is undefined (rendered as a timeline gap,
never as zero) when its baseline denominator is zero or either side has no
scored tweets.
"""

from __future__ import annotations

import math
import statistics
from collections.abc import Collection, Iterable, Mapping, Sequence
from dataclasses import dataclass
from datetime import date

from bev.ingest import StreamKind, Tweet
from bev.scoring import DEFAULT_BOT_THRESHOLD, is_bot


@dataclass(frozen=True, slots=True)
class DailyAggregate:
    """Score summary for one UTC day of one stream, over scored tweets only."""

    day: date
    stream: StreamKind
    tweet_count: int
    unique_accounts: int
    mean_score: float
    median_score: float
    bot_tweet_proportion: float
    pending_count: int

    @property
    def empty(self) -> bool:
        return self.tweet_count == 0


@dataclass(frozen=True, slots=True)
class BevPoint:
    """One day's index values; None marks an undefined variant."""

    day: date
    bev: float | None
    bev_median: float | None
    bev2: float | None

    @property
    def defined(self) -> dict[str, bool]:
        return {
            "bev": self.bev is not None,
            "bev_median": self.bev_median is not None,
            "bev2": self.bev2 is not None,
        }


def empty_aggregate(day: date, stream: StreamKind) -> DailyAggregate:
    return DailyAggregate(
        day=day,
        stream=stream,
        tweet_count=0,
        unique_accounts=0,
        mean_score=0.0,
        median_score=0.0,
        bot_tweet_proportion=0.0,
        pending_count=0,
    )


def aggregate_day(
    tweets: Iterable[Tweet],
    scores: Mapping[str, float],
    *,
    threshold: float = DEFAULT_BOT_THRESHOLD,
    unscorable: Collection[str] = frozenset(),
    day: date | None = None,
    stream: StreamKind | None = None,
) -> DailyAggregate:
    """Summarize one day of one stream against resolved account scores.

    Tweets whose author has no resolved score are counted as pending and
    excluded from every statistic; tweets by unscorable accounts are
    excluded entirely.  `day`/`stream` are only needed when `tweets` may be
    empty.
    """
    per_tweet: list[float] = []
    authors: set[str] = set()
    bot_tweets = 0
    pending = 0
    for tweet in tweets:
        if day is None:
            day = tweet.day
        elif tweet.day != day:
            raise ValueError(f"tweet {tweet.tweet_id} is not from {day}")
        if stream is None:
            stream = tweet.stream
        elif tweet.stream is not stream:
            raise ValueError(f"tweet {tweet.tweet_id} is not from stream {stream}")
        score = scores.get(tweet.author_id)
        if score is None:
            if tweet.author_id not in unscorable:
                pending += 1
            continue
        per_tweet.append(score)
        authors.add(tweet.author_id)
        if is_bot(score, threshold):
            bot_tweets += 1
    if day is None or stream is None:
        raise ValueError("day and stream are required for empty input")
    if not per_tweet:
        return DailyAggregate(
            day=day,
            stream=stream,
            tweet_count=0,
            unique_accounts=0,
            mean_score=0.0,
            median_score=0.0,
            bot_tweet_proportion=0.0,
            pending_count=pending,
        )
    # fsum is exactly rounded, so the mean is permutation-invariant; the clamp
    # keeps the final rounding inside the contributing score range.
    low, high = min(per_tweet), max(per_tweet)
    mean = min(max(math.fsum(per_tweet) / len(per_tweet), low), high)
    return DailyAggregate(
        day=day,
        stream=stream,
        tweet_count=len(per_tweet),
        unique_accounts=len(authors),
        mean_score=mean,
        median_score=statistics.median(per_tweet),
        bot_tweet_proportion=bot_tweets / len(per_tweet),
        pending_count=pending,
    )


def _relative_difference(value: float, baseline: float) -> float | None:
    if baseline == 0:
        return None
    return (value - baseline) / baseline


def bev_values(
    electoral: DailyAggregate, baseline: DailyAggregate
) -> tuple[float | None, float | None]:
    """Mean-based index and its median variant for one day; None when undefined."""
    if electoral.day != baseline.day:
        raise ValueError("aggregates are for different days")
    if electoral.empty or baseline.empty:
        return None, None
    return (
        _relative_difference(electoral.mean_score, baseline.mean_score),
        _relative_difference(electoral.median_score, baseline.median_score),
    )


def bev2_value(electoral: DailyAggregate, baseline: DailyAggregate) -> float | None:
    """Proportion-based variant; undefined when the baseline proportion is zero."""
    if electoral.day != baseline.day:
        raise ValueError("aggregates are for different days")
    if electoral.empty or baseline.empty:
        return None
    return _relative_difference(
        electoral.bot_tweet_proportion, baseline.bot_tweet_proportion
    )


def bev_point(electoral: DailyAggregate, baseline: DailyAggregate) -> BevPoint:
    """All index variants for one day."""
    mean_value, median_value = bev_values(electoral, baseline)
    return BevPoint(
        day=electoral.day,
        bev=mean_value,
        bev_median=median_value,
        bev2=bev2_value(electoral, baseline),
    )


def build_timeline(
    days: Sequence[date],
    electoral: Mapping[date, DailyAggregate],
    baseline: Mapping[date, DailyAggregate],
) -> list[BevPoint]:
    """One point per requested day, in date order, with gaps kept as undefined."""
    points = []
    for day in sorted(days):
        e_agg = electoral.get(day) or empty_aggregate(day, StreamKind.ELECTORAL)
        b_agg = baseline.get(day) or empty_aggregate(day, StreamKind.RANDOM_SAMPLE)
        points.append(bev_point(e_agg, b_agg))
    return points


def format_percent(value: float | None) -> str:
    """Render an index value as a signed one-decimal percentage, gaps as n/a."""
    if value is None:
        return "n/a"
    return f"{value * 100:+.1f}%"
