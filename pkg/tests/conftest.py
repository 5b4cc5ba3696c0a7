from __future__ import annotations

import json
from datetime import timezone
from pathlib import Path

import pytest

from bev.ingest import StreamKind, Tweet, parse_timestamp


def make_tweet(
    tweet_id: str = "t1",
    author: str = "a1",
    when: str = "2024-01-05T12:00:00Z",
    stream: StreamKind = StreamKind.ELECTORAL,
    hashtags: tuple[str, ...] = (),
    mentions: tuple[str, ...] = (),
    links: tuple[str, ...] = (),
    text: str = "",
    is_retweet: bool = False,
    true_score: float | None = None,
) -> Tweet:
    return Tweet(
        tweet_id=tweet_id,
        author_id=author,
        author_handle=author,
        created_at=parse_timestamp(when),
        text=text,
        hashtags=tuple(h.lower() for h in hashtags),
        mentions=tuple(m.lower() for m in mentions),
        links=tuple(links),
        is_retweet=is_retweet,
        stream=stream,
        true_score=true_score,
    )


def write_ndjson(path: Path, records: list) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            if isinstance(record, str):
                handle.write(record + "\n")
            else:
                handle.write(json.dumps(record) + "\n")
    return path


def record(
    tweet_id: str = "t1",
    author: str = "a1",
    when: str = "2024-01-05T12:00:00Z",
    hashtags: list[str] | None = None,
    mentions: list[str] | None = None,
    links: list[str] | None = None,
    **extra,
) -> dict:
    payload = {
        "id": tweet_id,
        "user_id": author,
        "user_handle": author,
        "created_at": when,
        "text": extra.pop("text", ""),
        "hashtags": hashtags or [],
        "mentions": mentions or [],
        "links": links or [],
        "is_retweet": extra.pop("is_retweet", False),
    }
    payload.update(extra)
    return payload


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion.
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        outcome = "PASS" if report.passed else "FAIL"
        print(f"\n[{outcome}] {name}", flush=True)


@pytest.fixture
def utc():
    return timezone.utc
