"""Tracked-hashtag list construction: seeds, co-occurrence expansion, manual edits.

The tracked set starts from seed tags and grows by rounds: a candidate tag is
admitted when it co-occurs with the current set in enough corpus tweets, both
in absolute count and as a fraction of the candidate's own tweets.  Manually
removed tags act as a permanent blocklist.
"""

from __future__ import annotations

import json
from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path

from bev.ingest import Tweet

SEED = "seed"
EXPANDED = "expanded"
MANUAL_ADD = "manual_add"


@dataclass(frozen=True, slots=True)
class TrackedTag:
    tag: str
    provenance: str
    round: int = 0


@dataclass(frozen=True, slots=True)
class RemovedTag:
    tag: str
    reason: str


@dataclass(slots=True)
class HashtagSet:
    """The tracked tag list with provenance, plus the removal blocklist."""

    entries: list[TrackedTag] = field(default_factory=list)
    removed: list[RemovedTag] = field(default_factory=list)

    @classmethod
    def from_seeds(cls, seeds: Iterable[str]) -> "HashtagSet":
        tags = []
        seen = set()
        for seed in seeds:
            tag = seed.lstrip("#").lower().strip()
            if tag and tag not in seen:
                seen.add(tag)
                tags.append(TrackedTag(tag, SEED, round=0))
        return cls(entries=tags)

    def tags(self) -> set[str]:
        return {entry.tag for entry in self.entries}

    def removed_tags(self) -> set[str]:
        return {entry.tag for entry in self.removed}

    def copy(self) -> "HashtagSet":
        return HashtagSet(entries=list(self.entries), removed=list(self.removed))

    def to_payload(self) -> dict:
        return {
            "entries": [
                {"tag": e.tag, "provenance": e.provenance, "round": e.round}
                for e in self.entries
            ],
            "removed": [{"tag": r.tag, "reason": r.reason} for r in self.removed],
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "HashtagSet":
        return cls(
            entries=[
                TrackedTag(e["tag"], e.get("provenance", SEED), e.get("round", 0))
                for e in payload.get("entries", [])
            ],
            removed=[
                RemovedTag(r["tag"], r.get("reason", ""))
                for r in payload.get("removed", [])
            ],
        )

    def save(self, prefix: Path) -> tuple[Path, Path]:
        """Write the plain-text tag list and the structured sidecar."""
        prefix.parent.mkdir(parents=True, exist_ok=True)
        text_path = prefix.with_suffix(".txt")
        json_path = prefix.with_suffix(".json")
        text_path.write_text(
            "".join(f"{entry.tag}\n" for entry in self.entries), encoding="utf-8"
        )
        json_path.write_text(
            json.dumps(self.to_payload(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        return text_path, json_path

    @classmethod
    def load(cls, path: Path) -> "HashtagSet":
        """Load from a structured .json sidecar or a plain text tag list."""
        if path.suffix == ".json":
            return cls.from_payload(json.loads(path.read_text(encoding="utf-8")))
        seeds = [
            line.strip()
            for line in path.read_text(encoding="utf-8").splitlines()
            if line.strip() and not line.lstrip().startswith("#!")
        ]
        return cls.from_seeds(seeds)


@dataclass(frozen=True, slots=True)
class ExpansionConfig:
    """Admission thresholds for one expansion run."""

    min_cooccurrence: int = 10
    min_cooccurrence_rate: float = 0.5
    max_rounds: int = 3

    def __post_init__(self) -> None:
        if self.min_cooccurrence < 1:
            raise ValueError("min_cooccurrence must be >= 1")
        if not 0.0 < self.min_cooccurrence_rate <= 1.0:
            raise ValueError("min_cooccurrence_rate must be in (0, 1]")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")


@dataclass(slots=True)
class ExpansionResult:
    tag_set: HashtagSet
    rounds: list[list[str]]
    warning: str | None = None


def expand(
    seeds: HashtagSet,
    corpus: Iterable[Tweet],
    config: ExpansionConfig = ExpansionConfig(),
) -> ExpansionResult:
    """Grow the tracked set by repeated co-occurrence rounds over a corpus.

    Candidates are judged against the set frozen at round start, so a chain
    of tags each co-occurring only with the previous link needs one round
    per link.  Tags on the removal blocklist are never admitted.  Stops at
    a fixed point or after max_rounds.
    """
    if not seeds.entries:
        raise ValueError("seed set is empty")
    tweet_tags = [set(tweet.hashtags) for tweet in corpus if tweet.hashtags]
    result = seeds.copy()
    if not tweet_tags:
        return ExpansionResult(result, rounds=[], warning="corpus is empty")

    blocked = result.removed_tags()
    totals: dict[str, int] = {}
    for tags in tweet_tags:
        for tag in tags:
            totals[tag] = totals.get(tag, 0) + 1

    rounds: list[list[str]] = []
    for round_number in range(1, config.max_rounds + 1):
        current = result.tags()
        cooccur: dict[str, int] = {}
        for tags in tweet_tags:
            if tags & current:
                for tag in tags:
                    if tag not in current and tag not in blocked:
                        cooccur[tag] = cooccur.get(tag, 0) + 1
        admitted = sorted(
            tag
            for tag, count in cooccur.items()
            if count >= config.min_cooccurrence
            and count / totals[tag] >= config.min_cooccurrence_rate
        )
        if not admitted:
            break
        for tag in admitted:
            result.entries.append(TrackedTag(tag, EXPANDED, round=round_number))
        rounds.append(admitted)
    return ExpansionResult(result, rounds=rounds)


def apply_manual_edits(
    tag_set: HashtagSet,
    removals: Iterable[tuple[str, str]] = (),
    additions: Iterable[str] = (),
) -> HashtagSet:
    """Apply operator removals (with reasons) and additions to a tracked set.

    Removals are idempotent and also pre-block tags never seen before.
    Adding a removed tag is rejected; it must be explicitly un-removed first.
    """
    result = tag_set.copy()
    for raw, reason in removals:
        tag = raw.lstrip("#").lower().strip()
        if not tag:
            continue
        result.entries = [entry for entry in result.entries if entry.tag != tag]
        if tag not in result.removed_tags():
            result.removed.append(RemovedTag(tag, reason))
    blocked = result.removed_tags()
    tracked = result.tags()
    for raw in additions:
        tag = raw.lstrip("#").lower().strip()
        if not tag:
            continue
        if tag in blocked:
            raise ValueError(
                f"tag {tag!r} was manually removed; un-remove it explicitly first"
            )
        if tag not in tracked:
            result.entries.append(TrackedTag(tag, MANUAL_ADD, round=0))
            tracked.add(tag)
    return result
