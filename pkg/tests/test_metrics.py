from __future__ import annotations

import random
import statistics
from datetime import date

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bev.ingest import StreamKind
from bev.metrics import (
    BevPoint,
    DailyAggregate,
    aggregate_day,
    bev2_value,
    bev_point,
    bev_values,
    build_timeline,
    empty_aggregate,
    format_percent,
)

from .conftest import make_tweet

DAY = date(2024, 1, 5)


def day_tweets(spec, stream=StreamKind.ELECTORAL, when="2024-01-05T12:00:00Z"):
    """spec: list of (author, tweet_count)."""
    tweets = []
    for author, count in spec:
        for index in range(count):
            tweets.append(
                make_tweet(
                    tweet_id=f"{author}-{index}", author=author, when=when, stream=stream
                )
            )
    return tweets


def test_tweet_weighted_mean_example():
    tweets = day_tweets([("a", 3), ("b", 1)])
    agg = aggregate_day(tweets, {"a": 2.0, "b": 4.0})
    # Brute force over the four per-tweet scores.
    assert agg.mean_score == pytest.approx((2.0 * 3 + 4.0 * 1) / 4, abs=1e-12)
    assert agg.mean_score == 2.5
    assert agg.tweet_count == 4
    assert agg.unique_accounts == 2


def test_single_tweet_degenerate():
    agg = aggregate_day(day_tweets([("a", 1)]), {"a": 3.7})
    assert agg.mean_score == 3.7
    assert agg.median_score == 3.7
    assert agg.bot_tweet_proportion == 0.0


def test_mixed_day_with_bots():
    tweets = day_tweets([("a", 6), ("b", 4)])
    agg = aggregate_day(tweets, {"a": 4.5, "b": 1.0}, threshold=4.0)
    assert agg.mean_score == pytest.approx(3.1, abs=1e-12)
    assert agg.bot_tweet_proportion == pytest.approx(0.6, abs=1e-12)


def test_pending_and_unscorable_excluded():
    tweets = day_tweets([("known", 2), ("pending", 3), ("gone", 1)])
    agg = aggregate_day(tweets, {"known": 2.0}, unscorable={"gone"})
    assert agg.tweet_count == 2
    assert agg.pending_count == 3  # the unscorable author is not pending
    assert agg.mean_score == 2.0


def test_empty_day_flagged():
    agg = aggregate_day([], {}, day=DAY, stream=StreamKind.ELECTORAL)
    assert agg.empty
    assert agg.tweet_count == 0
    with pytest.raises(ValueError):
        aggregate_day([], {})


def test_mixed_dates_rejected():
    tweets = day_tweets([("a", 1)]) + day_tweets([("a", 1)], when="2024-01-06T00:00:00Z")
    tweets[1] = make_tweet(tweet_id="other-day", author="a", when="2024-01-06T01:00:00Z")
    with pytest.raises(ValueError):
        aggregate_day(tweets, {"a": 1.0})


def _agg(mean, median=None, proportion=0.0, count=10, stream=StreamKind.ELECTORAL, day=DAY):
    return DailyAggregate(
        day=day,
        stream=stream,
        tweet_count=count,
        unique_accounts=count,
        mean_score=mean,
        median_score=mean if median is None else median,
        bot_tweet_proportion=proportion,
        pending_count=0,
    )


def test_bev_zero_when_streams_match():
    mean_value, median_value = bev_values(_agg(1.2), _agg(1.2, stream=StreamKind.RANDOM_SAMPLE))
    assert mean_value == 0.0
    assert median_value == 0.0


def test_bev_fixture_value():
    electoral = _agg(3.1)
    baseline = _agg(1.5, stream=StreamKind.RANDOM_SAMPLE)
    mean_value, _ = bev_values(electoral, baseline)
    assert mean_value == pytest.approx((3.1 - 1.5) / 1.5, abs=1e-12)
    assert format_percent(mean_value) == "+106.7%"


def test_bev_undefined_cases():
    empty_baseline = empty_aggregate(DAY, StreamKind.RANDOM_SAMPLE)
    assert bev_values(_agg(2.0), empty_baseline) == (None, None)
    zero_baseline = _agg(0.0, stream=StreamKind.RANDOM_SAMPLE)
    mean_value, median_value = bev_values(_agg(2.0), zero_baseline)
    assert mean_value is None
    assert median_value is None


def test_bev2_examples():
    electoral = _agg(3.0, proportion=0.6)
    baseline = _agg(1.0, proportion=0.1, stream=StreamKind.RANDOM_SAMPLE)
    assert bev2_value(electoral, baseline) == pytest.approx(5.0, abs=1e-12)
    same = _agg(1.0, proportion=0.2, stream=StreamKind.RANDOM_SAMPLE)
    assert bev2_value(_agg(2.0, proportion=0.2), same) == 0.0
    zero = _agg(1.0, proportion=0.0, stream=StreamKind.RANDOM_SAMPLE)
    assert bev2_value(_agg(2.0, proportion=0.5), zero) is None


def test_bev_point_requires_matching_days():
    other = DailyAggregate(
        day=date(2024, 1, 6),
        stream=StreamKind.RANDOM_SAMPLE,
        tweet_count=1,
        unique_accounts=1,
        mean_score=1.0,
        median_score=1.0,
        bot_tweet_proportion=0.0,
        pending_count=0,
    )
    with pytest.raises(ValueError):
        bev_point(_agg(1.0), other)


def test_build_timeline_orders_and_flags():
    days = [date(2024, 1, d) for d in range(1, 9)]
    electoral = {d: _agg(2.0, day=d) for d in days}
    baseline = {d: _agg(1.0, stream=StreamKind.RANDOM_SAMPLE, day=d) for d in days}
    del baseline[days[3]]  # one empty baseline day becomes a gap
    points = build_timeline(days, electoral, baseline)
    assert [p.day for p in points] == days
    assert [p.bev is not None for p in points] == [True] * 3 + [False] + [True] * 4


def test_format_percent_rendering():
    assert format_percent(1.0666666) == "+106.7%"
    assert format_percent(0.0) == "+0.0%"
    assert format_percent(-0.123) == "-12.3%"
    assert format_percent(None) == "n/a"


# -- properties -------------------------------------------------------------

account_days = st.dictionaries(
    st.text(alphabet="abcdefgh", min_size=1, max_size=3),
    st.tuples(
        st.floats(min_value=0.0, max_value=5.0, allow_nan=False),
        st.integers(min_value=1, max_value=6),
    ),
    min_size=1,
    max_size=6,
)


@given(accounts=account_days)
def test_tweet_weighting_equivalence(accounts):
    tweets = day_tweets([(a, n) for a, (_s, n) in accounts.items()])
    scores = {a: s for a, (s, _n) in accounts.items()}
    agg = aggregate_day(tweets, scores)
    weighted = sum(s * n for (s, n) in accounts.values()) / sum(
        n for (_s, n) in accounts.values()
    )
    assert agg.mean_score == pytest.approx(weighted, rel=1e-12)


@given(accounts=account_days)
def test_permutation_invariance(accounts):
    tweets = day_tweets([(a, n) for a, (_s, n) in accounts.items()])
    scores = {a: s for a, (s, _n) in accounts.items()}
    shuffled = list(tweets)
    random.Random(1234).shuffle(shuffled)
    assert aggregate_day(shuffled, scores) == aggregate_day(tweets, scores)


@given(
    electoral=account_days,
    baseline=account_days,
    scale=st.floats(min_value=0.05, max_value=20.0, allow_nan=False),
)
def test_scale_equivariance(electoral, baseline, scale):
    e_tweets = day_tweets([(a, n) for a, (_s, n) in electoral.items()])
    b_tweets = day_tweets(
        [(a, n) for a, (_s, n) in baseline.items()], stream=StreamKind.RANDOM_SAMPLE
    )
    e_scores = {a: s for a, (s, _n) in electoral.items()}
    b_scores = {a: s for a, (s, _n) in baseline.items()}
    plain, _ = bev_values(
        aggregate_day(e_tweets, e_scores), aggregate_day(b_tweets, b_scores)
    )
    scaled, _ = bev_values(
        aggregate_day(e_tweets, {a: s * scale for a, s in e_scores.items()}),
        aggregate_day(b_tweets, {a: s * scale for a, s in b_scores.items()}),
    )
    if plain is None:
        assert scaled is None
    else:
        assert scaled == pytest.approx(plain, rel=1e-9, abs=1e-9)


@given(electoral=account_days, baseline=account_days)
def test_sign_property(electoral, baseline):
    e_tweets = day_tweets([(a, n) for a, (_s, n) in electoral.items()])
    b_tweets = day_tweets(
        [(a, n) for a, (_s, n) in baseline.items()], stream=StreamKind.RANDOM_SAMPLE
    )
    e_agg = aggregate_day(e_tweets, {a: s for a, (s, _n) in electoral.items()})
    b_agg = aggregate_day(b_tweets, {a: s for a, (s, _n) in baseline.items()})
    mean_value, _ = bev_values(e_agg, b_agg)
    if mean_value is not None:
        assert (mean_value > 0) == (e_agg.mean_score > b_agg.mean_score)
    bev2 = bev2_value(e_agg, b_agg)
    if bev2 is not None:
        assert (bev2 > 0) == (e_agg.bot_tweet_proportion > b_agg.bot_tweet_proportion)


@settings(max_examples=30)
@given(
    scores=st.lists(
        st.floats(min_value=0.0, max_value=5.0, allow_nan=False), min_size=1, max_size=400
    )
)
def test_median_matches_sort_oracle(scores):
    tweets = [
        make_tweet(tweet_id=f"t{i}", author=f"a{i}") for i in range(len(scores))
    ]
    lookup = {f"a{i}": s for i, s in enumerate(scores)}
    agg = aggregate_day(tweets, lookup)
    ordered = sorted(scores)
    middle = len(ordered) // 2
    if len(ordered) % 2:
        expected = ordered[middle]
    else:
        expected = (ordered[middle - 1] + ordered[middle]) / 2
    assert agg.median_score == pytest.approx(expected, rel=1e-15)
    assert statistics.median(scores) == agg.median_score


@given(accounts=account_days)
def test_mean_median_within_contributing_range(accounts):
    tweets = day_tweets([(a, n) for a, (_s, n) in accounts.items()])
    scores = {a: s for a, (s, _n) in accounts.items()}
    agg = aggregate_day(tweets, scores)
    low, high = min(scores.values()), max(scores.values())
    assert low <= agg.mean_score <= high
    assert low <= agg.median_score <= high
