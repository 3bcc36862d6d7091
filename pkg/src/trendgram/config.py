"""Corpus configuration and timeline bucketing.

A corpus timeline is a contiguous range of equal-resolution calendar
buckets.  Bucket arithmetic is calendar-unit based: the first bucket is
the calendar unit containing `start`, the last the unit containing
`end`, and a document is accepted whenever its date falls inside one of
those units.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Iterable, Mapping

RESOLUTIONS = ("hourly", "daily", "monthly", "quarterly", "yearly")

# Normalization rules applied to whitespace-split tokens, in configured
# order.  "stem" is a hook only: no stemmer ships with the package.
NORMALIZATION_RULES = ("lowercase", "strip_punctuation", "stem")

MAX_NGRAM_ORDER = 5


class ConfigError(ValueError):
    """Raised for an invalid corpus configuration."""


def parse_date(text: str) -> datetime:
    """Parse an ISO-8601 date or datetime; a bare year means Jan 1."""
    text = text.strip()
    if text.isdigit() and len(text) == 4:
        return datetime(int(text), 1, 1)
    try:
        return datetime.fromisoformat(text)
    except ValueError as exc:
        raise ConfigError(f"unparseable date {text!r}") from exc


@dataclass(frozen=True)
class CorpusConfig:
    corpus_id: str
    resolution: str
    start: datetime
    end: datetime
    n_max: int = 3
    normalization: tuple[str, ...] = ("lowercase", "strip_punctuation")
    title: str = ""

    def __post_init__(self) -> None:
        if not self.corpus_id:
            raise ConfigError("corpus_id must be non-empty")
        if self.resolution not in RESOLUTIONS:
            raise ConfigError(
                f"resolution must be one of {RESOLUTIONS}, got {self.resolution!r}"
            )
        if not 1 <= self.n_max <= MAX_NGRAM_ORDER:
            raise ConfigError(f"n_max must be in [1, {MAX_NGRAM_ORDER}]")
        if self.start >= self.end:
            raise ConfigError("start must precede end")
        for rule in self.normalization:
            if rule not in NORMALIZATION_RULES:
                raise ConfigError(f"unknown normalization rule {rule!r}")
        if not self.title:
            object.__setattr__(self, "title", self.corpus_id)

    @property
    def buckets(self) -> int:
        """Timeline length: number of buckets from start through end."""
        return self._raw_index(self.end) + 1

    def _raw_index(self, when: datetime) -> int:
        s = self.start
        if self.resolution == "yearly":
            return when.year - s.year
        if self.resolution == "quarterly":
            return (when.year - s.year) * 4 + (when.month - 1) // 3 - (s.month - 1) // 3
        if self.resolution == "monthly":
            return (when.year - s.year) * 12 + when.month - s.month
        if self.resolution == "daily":
            return (when.date() - s.date()).days
        origin = s.replace(minute=0, second=0, microsecond=0)
        return int((when - origin).total_seconds() // 3600)

    def bucket_of(self, when: datetime) -> int:
        """Bucket index for a date, or ValueError when off the timeline."""
        index = self._raw_index(when)
        if not 0 <= index < self.buckets:
            raise ValueError(
                f"date {when.isoformat()} outside corpus timeline "
                f"[{self.start.isoformat()}, {self.end.isoformat()}]"
            )
        return index

    def bucket_label(self, index: int) -> str:
        if not 0 <= index < self.buckets:
            raise IndexError(f"bucket {index} out of range [0, {self.buckets})")
        s = self.start
        if self.resolution == "yearly":
            return f"{s.year + index:04d}"
        if self.resolution == "quarterly":
            q = (s.month - 1) // 3 + index
            return f"{s.year + q // 4:04d}-Q{q % 4 + 1}"
        if self.resolution == "monthly":
            m = s.month - 1 + index
            return f"{s.year + m // 12:04d}-{m % 12 + 1:02d}"
        if self.resolution == "daily":
            return (s.date() + timedelta(days=index)).isoformat()
        origin = s.replace(minute=0, second=0, microsecond=0)
        moment = origin + timedelta(hours=index)
        return moment.strftime("%Y-%m-%dT%H")

    def timeline(self) -> list[str]:
        return [self.bucket_label(i) for i in range(self.buckets)]

    def to_mapping(self) -> dict[str, str]:
        return {
            "corpus_id": self.corpus_id,
            "title": self.title,
            "resolution": self.resolution,
            "start": self.start.isoformat(),
            "end": self.end.isoformat(),
            "n_max": str(self.n_max),
            "normalization": ",".join(self.normalization),
        }

    @classmethod
    def from_mapping(cls, fields: Mapping[str, str]) -> "CorpusConfig":
        known = {"corpus_id", "title", "resolution", "start", "end", "n_max", "normalization"}
        unknown = set(fields) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        missing = {"corpus_id", "resolution", "start", "end"} - set(fields)
        if missing:
            raise ConfigError(f"missing config keys: {sorted(missing)}")
        norm = fields.get("normalization", "lowercase,strip_punctuation")
        rules = tuple(r.strip() for r in norm.split(",") if r.strip())
        try:
            n_max = int(fields.get("n_max", "3"))
        except ValueError as exc:
            raise ConfigError("n_max must be an integer") from exc
        return cls(
            corpus_id=fields["corpus_id"].strip(),
            title=fields.get("title", "").strip(),
            resolution=fields["resolution"].strip(),
            start=parse_date(fields["start"]),
            end=parse_date(fields["end"]),
            n_max=n_max,
            normalization=rules,
        )


def parse_config_text(text: str) -> CorpusConfig:
    """Parse a key=value corpus config file (blank lines and # comments ok)."""
    fields: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    return CorpusConfig.from_mapping(fields)


def load_config(path) -> CorpusConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())
