"""Account bot scores: external scoring-service clients, cache, and quota.

Scores live on a 0-5 scale; an account is classified as a likely bot when
its score is strictly above the threshold (default 4).  Lookups hit a
persistent cache first, then the configured service, bounded by a daily
request budget.  Accounts that cannot be resolved right now are `pending`
and queued for the next refresh cycle; accounts the service rejects with a
client error (nonexistent, protected) are `unscorable` and are never
retried.
"""

from __future__ import annotations

import hashlib
import logging
import threading
from collections import OrderedDict
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from enum import Enum
from typing import Callable, Protocol

import httpx

from bev.ingest import Tweet, format_timestamp, parse_timestamp

logger = logging.getLogger(__name__)

DEFAULT_BOT_THRESHOLD = 4.0


def utcnow() -> datetime:
    return datetime.now(timezone.utc).replace(microsecond=0)


class UnscorableAccount(Exception):
    """The service rejected the account; it has no defined score."""


class ScorerUnavailable(Exception):
    """Transient failure: the account stays pending and will be retried."""


class ScoreStatus(Enum):
    RESOLVED = "resolved"
    PENDING = "pending"
    UNSCORABLE = "unscorable"


@dataclass(frozen=True, slots=True)
class BotScore:
    """A per-account automation likelihood plus fetch metadata."""

    account_id: str
    score: float
    fetched_at: datetime
    source: str  # service | cache | mock

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 5.0:
            raise ValueError(f"score {self.score} outside the 0-5 scale")


@dataclass(slots=True)
class ScorerConfig:
    """Client settings; an empty endpoint selects the mock scorer."""

    endpoint: str = ""
    cache_ttl: timedelta = timedelta(days=7)
    max_requests_per_day: int = 10_000
    bot_threshold: float = DEFAULT_BOT_THRESHOLD

    def validate(self) -> None:
        if not 0.0 < self.bot_threshold < 5.0:
            raise ValueError("bot_threshold must be inside (0, 5)")
        if self.cache_ttl <= timedelta(0):
            raise ValueError("cache_ttl must be positive")
        if self.max_requests_per_day < 1:
            raise ValueError("max_requests_per_day must be positive")


def is_bot(score: BotScore | float, threshold: float = DEFAULT_BOT_THRESHOLD) -> bool:
    """Strictly above the threshold counts as a bot; the boundary is human."""
    value = score.score if isinstance(score, BotScore) else score
    return value > threshold


class ScorerClient(Protocol):
    def fetch(self, account_id: str, hint: float | None = None) -> float: ...


class MockScorerClient:
    """Fixture scorer: returns primed ground truth, else a stable pseudo-score.

    The fallback hashes the account id into [0, 5] so unknown accounts stay
    deterministic across runs.
    """

    def __init__(self, truth: dict[str, float] | None = None) -> None:
        self.truth = dict(truth or {})

    def fetch(self, account_id: str, hint: float | None = None) -> float:
        if account_id in self.truth:
            return self.truth[account_id]
        if hint is not None:
            return hint
        digest = hashlib.sha256(account_id.encode("utf-8")).digest()
        return int.from_bytes(digest[:4], "big") / 0xFFFFFFFF * 5.0


class HttpScorerClient:
    """Live scoring-service client: GET {endpoint}/score?user_id=<id>."""

    def __init__(
        self,
        endpoint: str,
        client: httpx.Client | None = None,
        timeout: float = 10.0,
    ) -> None:
        self.endpoint = endpoint.rstrip("/")
        self._client = client or httpx.Client(timeout=timeout)

    def fetch(self, account_id: str, hint: float | None = None) -> float:
        try:
            response = self._client.get(
                f"{self.endpoint}/score", params={"user_id": account_id}
            )
        except httpx.HTTPError as exc:
            raise ScorerUnavailable(str(exc)) from exc
        if response.status_code == 200:
            payload = response.json()
            return float(payload["score"])
        if 400 <= response.status_code < 500:
            raise UnscorableAccount(f"status {response.status_code}")
        raise ScorerUnavailable(f"status {response.status_code}")


class RequestBudget:
    """Atomic per-UTC-day request counter shared by all fetch workers."""

    def __init__(self, max_per_day: int, clock: Callable[[], datetime] = utcnow) -> None:
        self.max_per_day = max_per_day
        self._clock = clock
        self._lock = threading.Lock()
        self._day: date | None = None
        self._used = 0

    def try_acquire(self) -> bool:
        with self._lock:
            today = self._clock().date()
            if today != self._day:
                self._day = today
                self._used = 0
            if self._used >= self.max_per_day:
                return False
            self._used += 1
            return True

    @property
    def used_today(self) -> int:
        with self._lock:
            return self._used if self._day == self._clock().date() else 0


@dataclass(frozen=True, slots=True)
class CachedScore:
    account_id: str
    score: float | None
    fetched_at: datetime
    source: str
    status: ScoreStatus


class ScoreStateBackend(Protocol):
    """The slice of the embedded keyspace the cache persists through."""

    def score_get(self, account_id: str) -> tuple | None: ...
    def score_put(
        self, account_id: str, score: float | None, fetched_at: str, source: str, status: str
    ) -> None: ...
    def score_all(self) -> list[tuple]: ...


class ScoreCache:
    """Persistent account-score cache backed by the embedded keyspace."""

    def __init__(self, state: ScoreStateBackend) -> None:
        self._state = state

    def get(self, account_id: str) -> CachedScore | None:
        row = self._state.score_get(account_id)
        if row is None:
            return None
        score, fetched_at, source, status = row
        return CachedScore(
            account_id=account_id,
            score=score,
            fetched_at=parse_timestamp(fetched_at),
            source=source,
            status=ScoreStatus(status),
        )

    def put(self, entry: CachedScore) -> None:
        self._state.score_put(
            entry.account_id,
            entry.score,
            format_timestamp(entry.fetched_at),
            entry.source,
            entry.status.value,
        )

    def all_entries(self) -> list[CachedScore]:
        return [
            CachedScore(
                account_id=account_id,
                score=score,
                fetched_at=parse_timestamp(fetched_at),
                source=source,
                status=ScoreStatus(status),
            )
            for account_id, score, fetched_at, source, status in self._state.score_all()
        ]


@dataclass(slots=True)
class ScoreView:
    """Immutable read model for one aggregation pass."""

    resolved: dict[str, float]
    unscorable: set[str]
    threshold: float


class ScoreResolver:
    """Resolves account ids to scores through cache, service, and retry queue."""

    def __init__(
        self,
        config: ScorerConfig,
        cache: ScoreCache,
        client: ScorerClient | None = None,
        clock: Callable[[], datetime] = utcnow,
    ) -> None:
        config.validate()
        self.config = config
        self.cache = cache
        self.client = client or (
            HttpScorerClient(config.endpoint) if config.endpoint else MockScorerClient()
        )
        self.budget = RequestBudget(config.max_requests_per_day, clock)
        self._clock = clock
        self._lock = threading.Lock()
        self._queue: OrderedDict[str, None] = OrderedDict()
        self._hints: dict[str, float] = {}

    @property
    def pending_depth(self) -> int:
        with self._lock:
            return len(self._queue)

    @property
    def unscorable_count(self) -> int:
        return sum(
            1 for e in self.cache.all_entries() if e.status is ScoreStatus.UNSCORABLE
        )

    def _fresh(self, entry: CachedScore) -> bool:
        return entry.fetched_at + self.config.cache_ttl > self._clock()

    def enqueue(self, account_id: str, hint: float | None = None) -> None:
        with self._lock:
            if hint is not None:
                self._hints.setdefault(account_id, hint)
            self._queue.setdefault(account_id, None)

    def observe_tweet(self, tweet: Tweet) -> None:
        """Queue an unseen author for scoring, keeping any fixture ground truth."""
        entry = self.cache.get(tweet.author_id)
        if entry is not None and (
            entry.status is ScoreStatus.UNSCORABLE or self._fresh(entry)
        ):
            if tweet.true_score is not None:
                with self._lock:
                    self._hints.setdefault(tweet.author_id, tweet.true_score)
            return
        self.enqueue(tweet.author_id, hint=tweet.true_score)

    def status(self, account_id: str) -> ScoreStatus:
        entry = self.cache.get(account_id)
        if entry is None:
            return ScoreStatus.PENDING
        if entry.status is ScoreStatus.UNSCORABLE:
            return ScoreStatus.UNSCORABLE
        return ScoreStatus.RESOLVED if self._fresh(entry) else ScoreStatus.PENDING

    def get_score(self, account_id: str) -> BotScore | None:
        """Resolve one account now if possible; None means pending or unscorable.

        Cache hits younger than the TTL are served without a request.  A
        miss issues at most one service request; on quota exhaustion or a
        transient failure the account is queued for the next refresh cycle.
        """
        if not account_id:
            raise ValueError("account_id must be non-empty")
        entry = self.cache.get(account_id)
        if entry is not None:
            if entry.status is ScoreStatus.UNSCORABLE:
                return None
            if self._fresh(entry):
                return BotScore(
                    account_id=account_id,
                    score=entry.score,
                    fetched_at=entry.fetched_at,
                    source="cache",
                )
        return self._fetch(account_id)

    def _fetch(self, account_id: str) -> BotScore | None:
        if not self.budget.try_acquire():
            self.enqueue(account_id)
            return None
        try:
            value = self.client.fetch(account_id, hint=self._hints.get(account_id))
        except UnscorableAccount as exc:
            logger.info("account %s is unscorable: %s", account_id, exc)
            self.cache.put(
                CachedScore(
                    account_id=account_id,
                    score=None,
                    fetched_at=self._clock(),
                    source=self._source_name(),
                    status=ScoreStatus.UNSCORABLE,
                )
            )
            with self._lock:
                self._queue.pop(account_id, None)
            return None
        except ScorerUnavailable as exc:
            logger.warning("scorer unavailable for %s: %s", account_id, exc)
            self.enqueue(account_id)
            return None
        fetched_at = self._clock()
        self.cache.put(
            CachedScore(
                account_id=account_id,
                score=value,
                fetched_at=fetched_at,
                source=self._source_name(),
                status=ScoreStatus.RESOLVED,
            )
        )
        with self._lock:
            self._queue.pop(account_id, None)
        return BotScore(
            account_id=account_id,
            score=value,
            fetched_at=fetched_at,
            source=self._source_name(),
        )

    def _source_name(self) -> str:
        return "mock" if isinstance(self.client, MockScorerClient) else "service"

    def process_queue(self, max_items: int | None = None) -> int:
        """Resolve queued accounts within the daily budget; returns resolved count."""
        with self._lock:
            batch = list(self._queue.keys())
        if max_items is not None:
            batch = batch[:max_items]
        resolved = 0
        for account_id in batch:
            if self.status(account_id) is ScoreStatus.RESOLVED:
                with self._lock:
                    self._queue.pop(account_id, None)
                continue
            if self._fetch(account_id) is not None:
                resolved += 1
        return resolved

    def requeue_expired(self) -> int:
        """Put accounts whose cached score aged past the TTL back on the queue."""
        requeued = 0
        for entry in self.cache.all_entries():
            if entry.status is ScoreStatus.RESOLVED and not self._fresh(entry):
                self.enqueue(entry.account_id)
                requeued += 1
        return requeued

    def view(self) -> ScoreView:
        """Resolved scores and unscorable ids for one aggregation pass."""
        resolved: dict[str, float] = {}
        unscorable: set[str] = set()
        for entry in self.cache.all_entries():
            if entry.status is ScoreStatus.UNSCORABLE:
                unscorable.add(entry.account_id)
            elif self._fresh(entry):
                resolved[entry.account_id] = entry.score
        return ScoreView(
            resolved=resolved,
            unscorable=unscorable,
            threshold=self.config.bot_threshold,
        )
