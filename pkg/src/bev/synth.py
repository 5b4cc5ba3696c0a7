"""Seeded synthetic tweet traffic for fixtures and desk-scale runs.

One population of accounts produces a single merged traffic pool; the
electoral stream is the track-matching part of that pool and the baseline
stream is the pool thinned to the hourly rate limit, mirroring how the live
platform filters would see the same underlying traffic.  Everything is
deterministic for a fixed seed.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, replace
from datetime import datetime, timedelta, timezone
from pathlib import Path

from bev.ingest import (
    SourceConfig,
    StreamKind,
    Tweet,
    matches_track,
    write_archive,
)

DEFAULT_START = datetime(2024, 1, 1, tzinfo=timezone.utc)
DEFAULT_TRACK = ("topicvote", "topicpoll")


@dataclass(frozen=True, slots=True)
class AccountSpec:
    """One synthetic account: its ground-truth score, rate, and vocabulary."""

    account_id: str
    true_score: float
    tweets_per_hour: float
    hashtags: tuple[str, ...]
    participates: bool = True
    handle: str = ""
    mentions: tuple[str, ...] = ()
    links: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not 0.0 <= self.true_score <= 5.0:
            raise ValueError(
                f"{self.account_id}: true_score {self.true_score} outside [0, 5]"
            )
        if self.tweets_per_hour <= 0:
            raise ValueError(f"{self.account_id}: tweets_per_hour must be positive")


@dataclass(slots=True)
class SynthResult:
    """Both generated streams plus the ground-truth score table."""

    electoral: list[Tweet]
    baseline: list[Tweet]
    truth: dict[str, float]
    traffic_count: int


def load_population(path: Path) -> list[AccountSpec]:
    """Load account specs from a JSON list; invalid entries raise ValueError."""
    with open(path, encoding="utf-8") as handle:
        raw = json.load(handle)
    if not isinstance(raw, list) or not raw:
        raise ValueError("population file must be a non-empty JSON list")
    specs = []
    for entry in raw:
        specs.append(
            AccountSpec(
                account_id=str(entry["account_id"]),
                true_score=float(entry["true_score"]),
                tweets_per_hour=float(entry["tweets_per_hour"]),
                hashtags=tuple(str(t).lower() for t in entry.get("hashtags", [])),
                participates=bool(entry.get("participates", True)),
                handle=str(entry.get("handle", entry["account_id"])),
                mentions=tuple(str(m).lower() for m in entry.get("mentions", [])),
                links=tuple(entry.get("links", [])),
            )
        )
    return specs


def default_population(seed: int, track: tuple[str, ...] = DEFAULT_TRACK) -> list[AccountSpec]:
    """A small mixed population derived from the seed: half on-topic, half background."""
    rng = random.Random(f"population:{seed}")
    specs = []
    for index in range(20):
        on_topic = index < 10
        specs.append(
            AccountSpec(
                account_id=f"acct-{index:02d}",
                handle=f"user{index:02d}",
                true_score=round(rng.uniform(0.0, 5.0), 2),
                tweets_per_hour=rng.choice([1, 2, 3, 5]),
                hashtags=tuple(track) if on_topic else (f"offtopic{index}", "chatter"),
                participates=on_topic,
            )
        )
    return specs


def _hourly_counts(rate: float, hours: int) -> list[int]:
    # Accumulator spread: after h hours exactly floor(rate * h) tweets emitted.
    return [math.floor(rate * (h + 1)) - math.floor(rate * h) for h in range(hours)]


def synthesize(
    population: list[AccountSpec],
    hours: int,
    seed: int,
    *,
    rate_limit_random: int = 1000,
    track: set[str] | tuple[str, ...] | None = None,
    start: datetime = DEFAULT_START,
) -> SynthResult:
    """Generate both streams from one traffic pool.

    Participating accounts tweet tracked hashtags; others use their own
    vocabulary.  The electoral stream keeps the track-matching tweets; the
    baseline keeps the first `rate_limit_random` tweets of each UTC hour.
    """
    if hours <= 0:
        raise ValueError("hours must be positive")
    if rate_limit_random <= 0:
        raise ValueError("rate_limit_random must be positive")
    if track is None:
        tracked = {t for spec in population if spec.participates for t in spec.hashtags}
        if not tracked:
            tracked = set(DEFAULT_TRACK)
    elif hasattr(track, "tags"):
        tracked = set(track.tags())
    else:
        tracked = {t.lower() for t in track}

    events: list[tuple[datetime, str, int, AccountSpec]] = []
    for spec in population:
        rng = random.Random(f"{seed}:{spec.account_id}")
        seq = 0
        for hour, count in enumerate(_hourly_counts(spec.tweets_per_hour, hours)):
            # A fresh phase per hour keeps accounts evenly interleaved, so the
            # baseline keep-first-N thinning samples the population fairly.
            phase = rng.random()
            for j in range(count):
                offset = int((j + phase) / count * 3600)
                moment = start + timedelta(hours=hour, seconds=min(offset, 3599))
                events.append((moment, spec.account_id, seq, spec))
                seq += 1
    events.sort(key=lambda e: (e[0], e[1], e[2]))

    traffic: list[Tweet] = []
    per_account_rng = {
        spec.account_id: random.Random(f"{seed}:content:{spec.account_id}")
        for spec in population
    }
    for index, (moment, account_id, _seq, spec) in enumerate(events):
        rng = per_account_rng[account_id]
        pool = sorted(tracked) if spec.participates else list(spec.hashtags)
        if not pool:
            pool = sorted(tracked)
        tags = tuple(rng.sample(pool, k=min(len(pool), rng.choice((1, 2)))))
        mentions = ()
        if spec.mentions and rng.random() < 0.3:
            mentions = (rng.choice(spec.mentions),)
        links = ()
        if spec.links and rng.random() < 0.3:
            links = (rng.choice(spec.links),)
        traffic.append(
            Tweet(
                tweet_id=f"syn-{index:08d}",
                author_id=spec.account_id,
                author_handle=spec.handle or spec.account_id,
                created_at=moment,
                text="post " + " ".join("#" + t for t in tags),
                hashtags=tags,
                mentions=mentions,
                links=links,
                is_retweet=rng.random() < 0.1,
                stream=StreamKind.ELECTORAL,
                true_score=spec.true_score,
            )
        )

    electoral = [t for t in traffic if matches_track(t, tracked)]
    baseline = []
    hour_marker: datetime | None = None
    kept_this_hour = 0
    for tweet in traffic:
        hour = tweet.created_at.replace(minute=0, second=0)
        if hour != hour_marker:
            hour_marker = hour
            kept_this_hour = 0
        if kept_this_hour < rate_limit_random:
            kept_this_hour += 1
            baseline.append(replace(tweet, stream=StreamKind.RANDOM_SAMPLE))

    truth = {spec.account_id: spec.true_score for spec in population}
    return SynthResult(
        electoral=electoral,
        baseline=baseline,
        truth=truth,
        traffic_count=len(traffic),
    )


def for_source_config(config: SourceConfig) -> SynthResult:
    """Generate the streams a synthetic SourceConfig describes."""
    if config.population:
        population = load_population(Path(config.population))
    else:
        track = config.track
        tags = tuple(sorted(track.tags())) if hasattr(track, "tags") else (
            tuple(sorted(track)) if track else DEFAULT_TRACK
        )
        population = default_population(config.seed, tags)
    return synthesize(
        population,
        hours=config.hours,
        seed=config.seed,
        rate_limit_random=config.rate_limit_random,
        track=config.track if config.track is not None else None,
    )


def write_streams(result: SynthResult, out_dir: Path) -> dict[str, Path]:
    """Write electoral/baseline archives and the ground-truth table."""
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "electoral": out_dir / "electoral.ndjson",
        "baseline": out_dir / "baseline.ndjson",
        "truth": out_dir / "truth.json",
    }
    write_archive(result.electoral, paths["electoral"])
    write_archive(result.baseline, paths["baseline"])
    with open(paths["truth"], "w", encoding="utf-8") as handle:
        json.dump(result.truth, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return paths
