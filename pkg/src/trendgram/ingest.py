"""Corpus ingestion: NDJSON records -> normalized tokens -> n-gram counts.

Input is newline-delimited JSON, one document per line, with fields
id, date, source, text.  Malformed lines and documents dated off the
corpus timeline are counted and skipped, never fatal.  A repeated
document id is skipped so that re-running an ingest is idempotent.
"""

from __future__ import annotations

import json
import string
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from trendgram.config import ConfigError, CorpusConfig, parse_date

_STRIP_CHARS = string.punctuation + "‘’“”–—"


def _strip_punctuation(token: str) -> str:
    # Leading/trailing punctuation only; interior hyphens and
    # apostrophes survive ("hoop-ball", "don't").
    return token.strip(_STRIP_CHARS)


def _stem(token: str) -> str:
    # Hook for a future stemmer; identity by design.
    return token


_RULES = {
    "lowercase": str.lower,
    "strip_punctuation": _strip_punctuation,
    "stem": _stem,
}


def tokenize(text: str, normalization: Iterable[str] = ("lowercase", "strip_punctuation")) -> list[str]:
    """Whitespace-split, then apply normalization rules in order.

    Tokens that normalize to the empty string are dropped.
    """
    steps = [_RULES[name] for name in normalization]
    out: list[str] = []
    for raw in text.split():
        token = raw
        for step in steps:
            token = step(token)
        if token:
            out.append(token)
    return out


def extract_ngrams(tokens: list[str], n_max: int) -> Counter[tuple[str, ...]]:
    """Count all contiguous n-grams of order 1..n_max as token tuples."""
    counts: Counter[tuple[str, ...]] = Counter()
    for order in range(1, n_max + 1):
        for i in range(len(tokens) - order + 1):
            counts[tuple(tokens[i : i + order])] += 1
    return counts


@dataclass(frozen=True)
class Document:
    doc_id: str
    date: str
    source: str
    text: str
    bucket: int


@dataclass
class IngestReport:
    docs_ingested: int = 0
    docs_malformed: int = 0
    docs_out_of_range: int = 0
    docs_duplicate: int = 0
    tokens_per_bucket: Counter = field(default_factory=Counter)
    elapsed_seconds: float = 0.0

    def summary(self) -> str:
        total_tokens = sum(self.tokens_per_bucket.values())
        return (
            f"ingested {self.docs_ingested} docs "
            f"({self.docs_malformed} malformed, "
            f"{self.docs_out_of_range} out of range, "
            f"{self.docs_duplicate} duplicate id), "
            f"{total_tokens} tokens across "
            f"{len(self.tokens_per_bucket)} buckets "
            f"in {self.elapsed_seconds:.2f}s"
        )


REQUIRED_FIELDS = ("id", "date", "source", "text")


def parse_record(line: str) -> dict | None:
    """Parse one NDJSON line; None when malformed."""
    try:
        record = json.loads(line)
    except json.JSONDecodeError:
        return None
    if not isinstance(record, dict):
        return None
    for name in REQUIRED_FIELDS:
        value = record.get(name)
        if not isinstance(value, str) or not value:
            return None
    return record


def iter_documents(
    lines: Iterable[str], config: CorpusConfig, report: IngestReport
) -> Iterator[tuple[Document, Counter[tuple[str, ...]]]]:
    """Stream (document, n-gram counts) pairs, updating the report."""
    seen: set[str] = set()
    for line in lines:
        if not line.strip():
            continue
        record = parse_record(line)
        if record is None:
            report.docs_malformed += 1
            continue
        try:
            when = parse_date(record["date"])
        except ConfigError:
            report.docs_malformed += 1
            continue
        try:
            bucket = config.bucket_of(when)
        except ValueError:
            report.docs_out_of_range += 1
            continue
        if record["id"] in seen:
            report.docs_duplicate += 1
            continue
        seen.add(record["id"])
        tokens = tokenize(record["text"], config.normalization)
        doc = Document(
            doc_id=record["id"],
            date=record["date"],
            source=record["source"],
            text=record["text"],
            bucket=bucket,
        )
        report.docs_ingested += 1
        report.tokens_per_bucket[bucket] += len(tokens)
        yield doc, extract_ngrams(tokens, config.n_max)


def ingest_corpus(lines: Iterable[str], config: CorpusConfig, out_dir) -> IngestReport:
    """Build an on-disk store for a corpus from NDJSON lines."""
    from trendgram.store import StoreBuilder

    started = time.monotonic()
    report = IngestReport()
    builder = StoreBuilder(config, out_dir)
    for doc, counts in iter_documents(lines, config, report):
        builder.add_document(doc, counts)
    builder.finish()
    report.elapsed_seconds = time.monotonic() - started
    return report
