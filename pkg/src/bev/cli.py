"""Operator entry points: expand, ingest, synth, compute, serve.

Every command honors `--format json|text` and the exit-code contract:
0 success, 1 runtime error, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import json
import logging
import socket
import sys
from datetime import date
from pathlib import Path

from bev import __version__
from bev.expansion import ExpansionConfig, HashtagSet, expand
from bev.ingest import StreamKind, read_archive
from bev.metrics import format_percent
from bev.scoring import ScoreCache, ScoreResolver
from bev.service import (
    Service,
    load_config,
    parse_duration,
    point_payload,
)
from bev.store import TweetStore
from bev.synth import load_population, synthesize, write_streams


class UsageError(Exception):
    """Bad flags, missing files, invalid config: exit code 2."""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bev", description="Bot-activity analytics pipeline"
    )
    parser.add_argument("--version", action="version", version=f"bev {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_expand = sub.add_parser("expand", help="grow the tracked hashtag set from a corpus")
    p_expand.add_argument("--seeds", required=True, help="seed tag list (.txt) or tracked set (.json)")
    p_expand.add_argument("--corpus", required=True, help="ndjson tweet archive")
    p_expand.add_argument("--min-cooccurrence", type=int, default=10)
    p_expand.add_argument("--min-rate", type=float, default=0.5)
    p_expand.add_argument("--max-rounds", type=int, default=3)
    p_expand.add_argument("--out", default=None, help="output prefix (default: tracked, next to seeds)")
    p_expand.add_argument("--format", choices=("text", "json"), default="text")

    p_ingest = sub.add_parser("ingest", help="drain configured sources into the store")
    p_ingest.add_argument("--config", required=True)
    p_ingest.add_argument("--once", action="store_true")
    p_ingest.add_argument("--retain-days", type=int, default=None)
    p_ingest.add_argument("--format", choices=("text", "json"), default="text")

    p_synth = sub.add_parser("synth", help="generate synthetic stream archives")
    p_synth.add_argument("--population", required=True, help="JSON account spec list")
    p_synth.add_argument("--hours", type=int, required=True)
    p_synth.add_argument("--seed", type=int, required=True)
    p_synth.add_argument("--out", default=".", help="output directory")
    p_synth.add_argument("--rate-limit", type=int, default=1000, help="baseline tweets per hour")
    p_synth.add_argument("--track", default=None, help="tracked set file; default derives from participants")
    p_synth.add_argument("--format", choices=("text", "json"), default="text")

    p_compute = sub.add_parser("compute", help="print daily aggregates and index values")
    p_compute.add_argument("--config", default=None)
    p_compute.add_argument("--data-dir", default=None)
    p_compute.add_argument("--date-range", default=None, help="A..B inclusive ISO dates")
    p_compute.add_argument("--format", choices=("text", "json"), default="text")

    p_serve = sub.add_parser("serve", help="run the full service")
    p_serve.add_argument("--config", required=True)
    p_serve.add_argument("--refresh-interval", default=None, help="override, e.g. 30m or 1s")
    p_serve.add_argument("--format", choices=("text", "json"), default="text")

    return parser


def _require_file(raw: str, what: str) -> Path:
    path = Path(raw)
    if not path.is_file():
        raise UsageError(f"{what} not found: {path}")
    return path


def cmd_expand(args: argparse.Namespace) -> int:
    seeds_path = _require_file(args.seeds, "seeds file")
    corpus_path = _require_file(args.corpus, "corpus archive")
    try:
        config = ExpansionConfig(
            min_cooccurrence=args.min_cooccurrence,
            min_cooccurrence_rate=args.min_rate,
            max_rounds=args.max_rounds,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    seeds = HashtagSet.load(seeds_path)
    if not seeds.entries:
        raise UsageError(f"no seed tags in {seeds_path}")
    corpus, skipped = read_archive(corpus_path, StreamKind.RANDOM_SAMPLE)
    result = expand(seeds, corpus, config)
    prefix = Path(args.out) if args.out else seeds_path.parent / "tracked"
    text_path, json_path = result.tag_set.save(prefix)
    if args.format == "json":
        print(
            json.dumps(
                {
                    "rounds": result.rounds,
                    "tags": sorted(result.tag_set.tags()),
                    "warning": result.warning,
                    "skipped_corpus_lines": skipped,
                    "files": {"text": str(text_path), "structured": str(json_path)},
                },
                indent=2,
            )
        )
    else:
        for number, added in enumerate(result.rounds, start=1):
            print(f"round {number}: +{len(added)}: {', '.join(added)}")
        if not result.rounds:
            print("no tags admitted")
        if result.warning:
            print(f"warning: {result.warning}", file=sys.stderr)
        print(f"tracked set: {len(result.tag_set.entries)} tags -> {text_path}")
    return 0


def cmd_ingest(args: argparse.Namespace) -> int:
    if not args.once:
        raise UsageError("continuous ingest runs under 'bev serve'; pass --once")
    config = _load_config_or_usage_error(args.config)
    if args.retain_days is not None:
        config.retain_days = args.retain_days
    service = Service(config)
    try:
        report = service.ingest_once()
        resolved = service.resolver.process_queue()
        pruned = (
            service.store.prune_raw(config.retain_days)
            if config.retain_days is not None
            else 0
        )
    finally:
        service.store.close()
    if args.format == "json":
        print(
            json.dumps(
                {"sources": report, "scores_resolved": resolved, "pruned_files": pruned},
                indent=2,
            )
        )
    else:
        for name, stats in report.items():
            print(
                f"{name}: appended {stats['accepted']}"
                f" (duplicates {stats['duplicates']}, skipped {stats['skipped']},"
                f" filtered {stats['filtered']}, thinned {stats['thinned']})"
            )
        print(f"scores resolved: {resolved}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    population_path = _require_file(args.population, "population file")
    try:
        population = load_population(population_path)
        track = None
        if args.track:
            track = HashtagSet.load(_require_file(args.track, "track file")).tags()
        result = synthesize(
            population,
            hours=args.hours,
            seed=args.seed,
            rate_limit_random=args.rate_limit,
            track=track,
        )
    except (ValueError, KeyError) as exc:
        raise UsageError(f"invalid population: {exc}") from exc
    paths = write_streams(result, Path(args.out))
    if args.format == "json":
        print(
            json.dumps(
                {
                    "electoral": len(result.electoral),
                    "baseline": len(result.baseline),
                    "traffic": result.traffic_count,
                    "files": {name: str(path) for name, path in paths.items()},
                },
                indent=2,
            )
        )
    else:
        print(
            f"wrote {len(result.electoral)} electoral and {len(result.baseline)}"
            f" baseline tweets to {args.out}"
        )
    return 0


def _parse_date_range(raw: str | None) -> tuple[date, date] | None:
    if raw is None:
        return None
    try:
        start_text, _, end_text = raw.partition("..")
        start = date.fromisoformat(start_text)
        end = date.fromisoformat(end_text or start_text)
    except ValueError as exc:
        raise UsageError(f"bad --date-range {raw!r} (use A..B)") from exc
    if end < start:
        raise UsageError("--date-range end precedes start")
    return start, end


def _load_config_or_usage_error(raw: str):
    try:
        return load_config(_require_file(raw, "config file"))
    except (ValueError, KeyError) as exc:
        raise UsageError(f"invalid config: {exc}") from exc


def cmd_compute(args: argparse.Namespace) -> int:
    if args.config:
        config = _load_config_or_usage_error(args.config)
        data_dir = config.data_dir
        scorer_config = config.scorer
    elif args.data_dir:
        from bev.scoring import ScorerConfig

        data_dir = Path(args.data_dir)
        scorer_config = ScorerConfig()
    else:
        raise UsageError("pass --config or --data-dir")
    if not data_dir.is_dir():
        raise UsageError(f"data dir not found: {data_dir}")
    date_range = _parse_date_range(args.date_range)
    store = TweetStore(data_dir)
    try:
        resolver = ScoreResolver(scorer_config, ScoreCache(store.state))
        view = resolver.view()
        days = store.compute_days(
            view.resolved, view.unscorable, threshold=view.threshold
        )
    finally:
        store.close()
    if date_range is not None:
        start, end = date_range
        days = {day: data for day, data in days.items() if start <= day <= end}
    if not days:
        print("no stored tweets in range", file=sys.stderr)
        return 1
    ordered = sorted(days)
    if args.format == "json":
        payload = {
            "aggregates": [
                {
                    "date": day.isoformat(),
                    "electoral": _aggregate_json(days[day].electoral),
                    "baseline": _aggregate_json(days[day].baseline),
                }
                for day in ordered
            ],
            "timeline": [point_payload(days[day].point) for day in ordered],
        }
        print(json.dumps(payload, ensure_ascii=False, separators=(",", ":")))
    else:
        for day in ordered:
            data = days[day]
            print(
                f"{day.isoformat()}  electoral n={data.electoral.tweet_count}"
                f" mean={data.electoral.mean_score:.4f}"
                f" | baseline n={data.baseline.tweet_count}"
                f" mean={data.baseline.mean_score:.4f}"
                f" | BEV {format_percent(data.point.bev)}"
                f" BEV2 {format_percent(data.point.bev2)}"
            )
    return 0


def _aggregate_json(agg) -> dict:
    return {
        "stream": agg.stream.value,
        "tweet_count": agg.tweet_count,
        "unique_accounts": agg.unique_accounts,
        "mean_score": agg.mean_score,
        "median_score": agg.median_score,
        "bot_tweet_proportion": agg.bot_tweet_proportion,
        "pending_count": agg.pending_count,
    }


def cmd_serve(args: argparse.Namespace) -> int:
    config = _load_config_or_usage_error(args.config)
    if args.refresh_interval:
        try:
            config.refresh_interval = parse_duration(args.refresh_interval)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        config.validate()
    host, _, port = config.listen.rpartition(":")
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as probe:
        try:
            probe.bind((host or "127.0.0.1", int(port)))
        except OSError as exc:
            print(f"cannot listen on {config.listen}: {exc}", file=sys.stderr)
            return 1
    if args.format == "json":
        print(json.dumps({"listening": config.listen}), flush=True)
    else:
        print(f"serving on {config.listen}", flush=True)
    Service(config).run()
    return 0


_HANDLERS = {
    "expand": cmd_expand,
    "ingest": cmd_ingest,
    "synth": cmd_synth,
    "compute": cmd_compute,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=logging.INFO, format="%(asctime)s %(name)s %(levelname)s %(message)s"
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 1
    except Exception as exc:  # runtime failures map to exit 1
        logging.getLogger("bev.cli").error("%s", exc, exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
