"""The long-running process: sources -> store -> scorer -> snapshots -> HTTP API.

Ingestion workers append both streams to the store and queue unseen authors
for scoring; a scheduler rebuilds the snapshot every refresh interval; the
read-only JSON API serves whatever snapshot is currently published.  Nothing
the API does can mutate state, and no handler ever blocks ingestion or a
build.
"""

from __future__ import annotations

import logging
import os
import re
import signal
import threading
from collections.abc import Mapping
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from urllib.parse import quote

import yaml
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from bev.entities import DEFAULT_TOP_K, EntityKind, top_entities
from bev.expansion import HashtagSet
from bev.ingest import SourceConfig, StreamKind, open_source
from bev.metrics import BevPoint, format_percent
from bev.scoring import ScoreCache, ScorerClient, ScorerConfig, ScoreResolver, utcnow
from bev.store import BuildInFlight, Snapshot, TweetStore

logger = logging.getLogger(__name__)

ENV_PREFIX = "BEV_"
DEFAULT_EXPLORER_TEMPLATE = "https://explorer.example.org/search?kind={kind}&q={value}"

_DURATION_RE = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*(s|m|h|d)?\s*$")
_DURATION_UNITS = {"s": 1, "m": 60, "h": 3600, "d": 86400}


def parse_duration(value: object) -> timedelta:
    """Accept seconds as a number or compact strings like '4h', '30m', '90s', '7d'."""
    if isinstance(value, timedelta):
        return value
    if isinstance(value, (int, float)):
        return timedelta(seconds=float(value))
    match = _DURATION_RE.match(str(value))
    if not match:
        raise ValueError(f"cannot parse duration {value!r}")
    amount, unit = match.groups()
    return timedelta(seconds=float(amount) * _DURATION_UNITS[unit or "s"])


@dataclass(slots=True)
class ServiceConfig:
    """Everything the service process needs, loadable from YAML plus env vars."""

    data_dir: Path
    listen: str = "127.0.0.1:8321"
    refresh_interval: timedelta = timedelta(hours=4)
    timeline_days: int = 8
    explorer_url_template: str = DEFAULT_EXPLORER_TEMPLATE
    track_file: Path | None = None
    retain_days: int | None = None
    cors_origins: tuple[str, ...] = ("*",)
    static_dir: Path | None = None
    scorer: ScorerConfig = field(default_factory=ScorerConfig)
    sources: dict[str, SourceConfig] = field(default_factory=dict)

    def validate(self) -> None:
        if self.refresh_interval <= timedelta(0):
            raise ValueError("refresh_interval must be positive")
        if self.timeline_days < 1:
            raise ValueError("timeline_days must be >= 1")
        for placeholder in ("{kind}", "{value}"):
            if placeholder not in self.explorer_url_template:
                raise ValueError(f"explorer_url_template must contain {placeholder}")
        if self.retain_days is not None and self.retain_days < 1:
            raise ValueError("retain_days must be >= 1")
        self.scorer.validate()
        for source in self.sources.values():
            source.validate()


_STREAM_BY_SOURCE_NAME = {
    "electoral": StreamKind.ELECTORAL,
    "baseline": StreamKind.RANDOM_SAMPLE,
}


def _apply_env_overrides(raw: dict, env: Mapping[str, str]) -> dict:
    """Overlay BEV_-prefixed variables; '__' descends into nested sections."""
    for key, value in env.items():
        if not key.startswith(ENV_PREFIX):
            continue
        path = key[len(ENV_PREFIX) :].lower().split("__")
        node = raw
        for part in path[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ValueError(f"env override {key} conflicts with a scalar setting")
        node[path[-1]] = yaml.safe_load(value)
    return raw


def config_from_dict(raw: dict, base_dir: Path | None = None) -> ServiceConfig:
    """Build and validate a ServiceConfig from parsed YAML content."""
    if "data_dir" not in raw:
        raise ValueError("config needs data_dir")

    def _path(value: object) -> Path:
        path = Path(str(value))
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return path

    scorer_raw = raw.get("scorer", {}) or {}
    scorer = ScorerConfig(
        endpoint=str(scorer_raw.get("endpoint", "") or ""),
        cache_ttl=parse_duration(scorer_raw.get("cache_ttl", timedelta(days=7))),
        max_requests_per_day=int(scorer_raw.get("max_requests_per_day", 10_000)),
        bot_threshold=float(scorer_raw.get("bot_threshold", 4.0)),
    )
    sources: dict[str, SourceConfig] = {}
    for name, source_raw in (raw.get("sources", {}) or {}).items():
        if name not in _STREAM_BY_SOURCE_NAME:
            raise ValueError(f"unknown source name {name!r} (use electoral/baseline)")
        source_raw = source_raw or {}
        sources[name] = SourceConfig(
            kind=str(source_raw.get("kind", "live-stub")),
            stream=_STREAM_BY_SOURCE_NAME[name],
            path=str(_path(source_raw["path"])) if source_raw.get("path") else None,
            seed=int(source_raw["seed"]) if "seed" in source_raw else None,
            rate_limit_random=int(source_raw.get("rate_limit_random", 1000)),
            population=(
                str(_path(source_raw["population"]))
                if source_raw.get("population")
                else None
            ),
            hours=int(source_raw.get("hours", 24)),
        )
    config = ServiceConfig(
        data_dir=_path(raw["data_dir"]),
        listen=str(raw.get("listen", "127.0.0.1:8321")),
        refresh_interval=parse_duration(raw.get("refresh_interval", timedelta(hours=4))),
        timeline_days=int(raw.get("timeline_days", 8)),
        explorer_url_template=str(
            raw.get("explorer_url_template", DEFAULT_EXPLORER_TEMPLATE)
        ),
        track_file=_path(raw["track_file"]) if raw.get("track_file") else None,
        retain_days=int(raw["retain_days"]) if raw.get("retain_days") else None,
        cors_origins=tuple(raw.get("cors_origins", ("*",))),
        static_dir=_path(raw["static_dir"]) if raw.get("static_dir") else None,
        scorer=scorer,
        sources=sources,
    )
    config.validate()
    return config


def load_config(path: Path, env: Mapping[str, str] | None = None) -> ServiceConfig:
    """Load the YAML config file and apply BEV_* environment overrides."""
    raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    if not isinstance(raw, dict):
        raise ValueError("config file must hold a mapping")
    raw = _apply_env_overrides(raw, env if env is not None else os.environ)
    return config_from_dict(raw, base_dir=Path(path).resolve().parent)


def explorer_url(template: str, kind: EntityKind, value: str) -> str:
    return template.replace("{kind}", kind.value).replace(
        "{value}", quote(value, safe="")
    )


def point_payload(point: BevPoint) -> dict:
    """Wire form of one timeline point; shared by the API and `bev compute`."""
    return {
        "date": point.day.isoformat(),
        "bev": point.bev,
        "bev_median": point.bev_median,
        "bev2": point.bev2,
        "bev_pct": format_percent(point.bev),
        "bev_median_pct": format_percent(point.bev_median),
        "bev2_pct": format_percent(point.bev2),
        "defined": point.defined,
    }


def timeline_window(snapshot: Snapshot, days_requested: int) -> list[BevPoint]:
    """The trailing window ending at the most recent day with data.

    Days inside the window that hold no data at all are omitted, so the
    result never exceeds the request and may be shorter.
    """
    if not snapshot.days:
        return []
    end = max(snapshot.days)
    window = [end - timedelta(days=offset) for offset in range(days_requested)]
    return [snapshot.days[day].point for day in reversed(window) if day in snapshot.days]


def _error(status_code: int, message: str, **extra: object) -> JSONResponse:
    return JSONResponse(status_code=status_code, content={"error": message, **extra})


def create_app(service: "Service") -> FastAPI:
    """The read-only JSON API over the currently published snapshot."""
    app = FastAPI(title="bev", docs_url=None, redoc_url=None)

    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(service.config.cors_origins),
        allow_methods=["GET"],
        allow_headers=["*"],
    )

    def _snapshot_or_none() -> Snapshot | None:
        return service.store.current_snapshot()

    def _warming() -> JSONResponse:
        retry = max(1, int(service.config.refresh_interval.total_seconds() // 4))
        response = _error(503, "warming up: no snapshot published yet",
                          status="warming", retry_after_seconds=retry)
        response.headers["Retry-After"] = str(retry)
        return response

    @app.get("/api/timeline")
    def timeline(request: Request) -> JSONResponse:
        snapshot = _snapshot_or_none()
        if snapshot is None:
            return _warming()
        raw_days = request.query_params.get("days")
        if raw_days is None:
            days_requested = service.config.timeline_days
        else:
            try:
                days_requested = int(raw_days)
            except ValueError:
                return _error(400, f"days must be an integer, got {raw_days!r}")
        if not 1 <= days_requested <= 366:
            return _error(400, "days must be between 1 and 366")
        points = timeline_window(snapshot, days_requested)
        return JSONResponse(content=[point_payload(point) for point in points])

    @app.get("/api/day/{day_text}/entities")
    def day_entities(day_text: str, request: Request) -> JSONResponse:
        snapshot = _snapshot_or_none()
        if snapshot is None:
            return _warming()
        try:
            day = date.fromisoformat(day_text)
        except ValueError:
            return _error(400, f"bad date {day_text!r}")
        raw_kind = request.query_params.get("kind", EntityKind.HASHTAG.value)
        try:
            kind = EntityKind(raw_kind)
        except ValueError:
            return _error(400, f"bad kind {raw_kind!r}")
        raw_k = request.query_params.get("k")
        try:
            k = int(raw_k) if raw_k is not None else DEFAULT_TOP_K
        except ValueError:
            return _error(400, f"k must be an integer, got {raw_k!r}")
        if k < 1:
            return _error(400, "k must be >= 1")
        data = snapshot.days.get(day)
        if data is None:
            return _error(404, f"no data for {day_text}")
        entries = [
            {
                "value": entity.value,
                "kind": entity.kind.value,
                "count": entity.count,
                "explorer_url": explorer_url(
                    service.config.explorer_url_template, entity.kind, entity.value
                ),
            }
            for entity in top_entities(data.entity_counts, kind, k)
        ]
        return JSONResponse(content=entries)

    @app.get("/api/day/{day_text}/tagcloud")
    def day_tagcloud(day_text: str) -> JSONResponse:
        snapshot = _snapshot_or_none()
        if snapshot is None:
            return _warming()
        try:
            day = date.fromisoformat(day_text)
        except ValueError:
            return _error(400, f"bad date {day_text!r}")
        data = snapshot.days.get(day)
        if data is None:
            return _error(404, f"no data for {day_text}")
        return JSONResponse(
            content=[
                {"value": entry.value, "kind": entry.kind.value, "weight": entry.weight}
                for entry in data.cloud
            ]
        )

    @app.get("/api/health")
    def health() -> JSONResponse:
        snapshot = _snapshot_or_none()
        payload = {
            "status": "ok" if snapshot is not None else "warming",
            "snapshot_id": snapshot.snapshot_id if snapshot else None,
            "built_at": snapshot.built_at.isoformat() if snapshot else None,
            "build_age_seconds": (
                max(0.0, (utcnow() - snapshot.built_at).total_seconds())
                if snapshot
                else None
            ),
            "pending_scores": service.resolver.pending_depth,
        }
        return JSONResponse(content=payload)

    static_dir = service.config.static_dir
    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="static")

    return app


class Service:
    """Wires sources, store, scorer, scheduler, and the API into one process."""

    def __init__(
        self, config: ServiceConfig, scorer_client: ScorerClient | None = None
    ) -> None:
        config.validate()
        self.config = config
        self.store = TweetStore(config.data_dir)
        self.cache = ScoreCache(self.store.state)
        self.resolver = ScoreResolver(config.scorer, self.cache, client=scorer_client)
        self.track: HashtagSet | None = (
            HashtagSet.load(config.track_file) if config.track_file else None
        )
        if self.track is not None and "electoral" in config.sources:
            config.sources["electoral"].track = self.track
        self.app = create_app(self)
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []
        self._http_server = None

    # -- pipeline steps ----------------------------------------------------

    def ingest_once(self) -> dict[str, dict]:
        """Drain every configured source once; returns per-source counters."""
        report: dict[str, dict] = {}
        for name, source_config in self.config.sources.items():
            source = open_source(source_config)
            batch = []
            accepted = 0
            duplicates = 0
            for tweet in source:
                self.resolver.observe_tweet(tweet)
                batch.append(tweet)
                if len(batch) >= 500:
                    result = self.store.append_tweets(batch)
                    accepted += result.accepted
                    duplicates += result.duplicates
                    batch = []
            if batch:
                result = self.store.append_tweets(batch)
                accepted += result.accepted
                duplicates += result.duplicates
            report[name] = {
                "yielded": source.stats.yielded,
                "skipped": source.stats.skipped,
                "filtered": source.stats.filtered,
                "thinned": source.stats.thinned,
                "accepted": accepted,
                "duplicates": duplicates,
            }
        return report

    def refresh(self) -> Snapshot:
        """One analysis cycle: resolve queued scores, rebuild, publish."""
        self.resolver.requeue_expired()
        self.resolver.process_queue()
        view = self.resolver.view()
        snapshot = self.store.build_snapshot(
            utcnow(), view.resolved, view.unscorable, threshold=view.threshold
        )
        if self.config.retain_days is not None:
            self.store.prune_raw(self.config.retain_days)
        return snapshot

    # -- workers -----------------------------------------------------------

    def _ingest_worker(self, name: str, source_config: SourceConfig) -> None:
        backoff = 1.0
        while not self._stop.is_set():
            try:
                source = open_source(source_config)
                batch = []
                for tweet in source:
                    if self._stop.is_set():
                        break
                    self.resolver.observe_tweet(tweet)
                    batch.append(tweet)
                    if len(batch) >= 500:
                        self.store.append_tweets(batch)
                        batch = []
                if batch:
                    self.store.append_tweets(batch)
                logger.info("source %s exhausted after %d tweets", name, source.stats.yielded)
                return
            except Exception:
                logger.exception("source %s failed; retrying in %.1fs", name, backoff)
                self._stop.wait(backoff)
                backoff = min(backoff * 2, 60.0)

    def _scoring_worker(self) -> None:
        while not self._stop.is_set():
            resolved = self.resolver.process_queue(max_items=200)
            if resolved == 0:
                self._stop.wait(0.05)

    def _scheduler(self) -> None:
        interval = self.config.refresh_interval.total_seconds()
        while not self._stop.is_set():
            try:
                self.refresh()
            except BuildInFlight:
                logger.warning("previous build still running; skipping this cycle")
            except Exception:
                logger.exception("snapshot build failed; previous snapshot stays live")
            self._stop.wait(interval)

    # -- lifecycle ----------------------------------------------------------

    def start(self, serve_http: bool = True) -> None:
        for name, source_config in self.config.sources.items():
            thread = threading.Thread(
                target=self._ingest_worker,
                args=(name, source_config),
                name=f"ingest-{name}",
                daemon=True,
            )
            thread.start()
            self._threads.append(thread)
        for target, name in (
            (self._scoring_worker, "scoring"),
            (self._scheduler, "scheduler"),
        ):
            thread = threading.Thread(target=target, name=name, daemon=True)
            thread.start()
            self._threads.append(thread)
        if serve_http:
            self._start_http()

    def _start_http(self) -> None:
        import uvicorn

        host, _, port = self.config.listen.rpartition(":")
        server = uvicorn.Server(
            uvicorn.Config(self.app, host=host or "127.0.0.1", port=int(port), log_level="warning")
        )
        self._http_server = server
        thread = threading.Thread(target=server.run, name="http", daemon=True)
        thread.start()
        self._threads.append(thread)

    def stop(self) -> None:
        self._stop.set()
        if self._http_server is not None:
            self._http_server.should_exit = True
        for thread in self._threads:
            thread.join(timeout=10)
        self.store.close()

    def run(self) -> None:
        """Run until SIGINT/SIGTERM; replay sources may exhaust, serving continues."""
        done = threading.Event()

        def _handle(_signum, _frame):
            done.set()

        signal.signal(signal.SIGINT, _handle)
        signal.signal(signal.SIGTERM, _handle)
        self.start(serve_http=True)
        logger.info("serving on %s", self.config.listen)
        done.wait()
        logger.info("shutting down")
        self.stop()
