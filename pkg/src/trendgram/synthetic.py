"""Deterministic synthetic corpora and signals for tests and benchmarks.

The fixture corpus is 200 dated documents over 1890-1920 (yearly, all
31 buckets populated).  Two spelling variants of an invented term are
injected with known per-year document and occurrence counts:

- "hoopball"  appears from 1893 on (2 docs x 2 hits per year) and jumps
  in 1911 (5 docs x 4 hits per year)
- "hoop ball" appears from 1893 on (1 doc x 2 hits) and jumps in 1911
  (3 docs x 3 hits)

so the known ground truth is: first nonzero bucket 1893, one shared
usage shift at 1911.  Background text never contains the injected
tokens.
"""

from __future__ import annotations

import json
import random
from datetime import datetime

import numpy as np

from trendgram.config import CorpusConfig

FIXTURE_SEED = 7
FIXTURE_YEARS = list(range(1890, 1921))
FIXTURE_DOCS = 200
ONSET_YEAR = 1893
SHIFT_YEAR = 1911

# Injected occurrence plan: (docs per year, hits per doc).
SINGLETON_BEFORE = (2, 2)
SINGLETON_AFTER = (5, 4)
BIGRAM_BEFORE = (1, 2)
BIGRAM_AFTER = (3, 3)

BACKGROUND_VOCAB = (
    "the", "of", "and", "to", "in", "a", "was", "for", "on", "that",
    "town", "county", "river", "market", "school", "church", "road",
    "farm", "mill", "bridge", "court", "meeting", "council", "harvest",
    "winter", "summer", "railway", "station", "letter", "notice",
    "editor", "price", "wheat", "cattle", "store", "street", "house",
    "land", "sale", "public", "morning", "evening", "week", "year",
    "people", "company", "bank", "doctor", "teacher", "crowd", "game",
    "club", "field", "score", "season", "match", "team", "player",
    "captain", "victory",
)

SOURCES = ("The Daily Fixture", "Morning Courier Sample", "Weekly Synthetic Gazette")


def fixture_config(corpus_id: str = "fixture") -> CorpusConfig:
    return CorpusConfig(
        corpus_id=corpus_id,
        resolution="yearly",
        start=datetime(1890, 1, 1),
        end=datetime(1920, 12, 31),
        n_max=3,
        title="Synthetic fixture gazette corpus",
    )


def _background_chunks(rng: random.Random, n_tokens: int) -> list[str]:
    weights = [1.0 / (k + 1) for k in range(len(BACKGROUND_VOCAB))]
    words = rng.choices(BACKGROUND_VOCAB, weights=weights, k=n_tokens)
    chunks: list[str] = []
    sentence_pos = 0
    for w in words:
        token = w.capitalize() if sentence_pos == 0 else w
        sentence_pos += 1
        if sentence_pos >= rng.randint(6, 12):
            token += "."
            sentence_pos = 0
        elif rng.random() < 0.06:
            token += ","
        chunks.append(token)
    return chunks


def _insert_unit(chunks: list[str], unit: str, rng: random.Random) -> None:
    # A unit is inserted whole, so multi-token units stay adjacent no
    # matter what is inserted later.
    chunks.insert(rng.randrange(len(chunks) + 1), unit)


def fixture_corpus_lines(seed: int = FIXTURE_SEED) -> list[str]:
    """NDJSON lines for the fixture corpus, stable for a given seed."""
    rng = random.Random(seed)
    docs: list[dict] = []
    by_year: dict[int, list[int]] = {y: [] for y in FIXTURE_YEARS}
    n_years = len(FIXTURE_YEARS)
    for i in range(FIXTURE_DOCS):
        year = FIXTURE_YEARS[i % n_years]
        by_year[year].append(i)
        docs.append({
            "id": f"doc-{i:04d}",
            "date": f"{year:04d}-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}",
            "source": SOURCES[i % len(SOURCES)],
            "chunks": _background_chunks(rng, rng.randint(70, 90)),
        })
    for year in FIXTURE_YEARS:
        if year < ONSET_YEAR:
            continue
        s_docs, s_hits = SINGLETON_AFTER if year >= SHIFT_YEAR else SINGLETON_BEFORE
        b_docs, b_hits = BIGRAM_AFTER if year >= SHIFT_YEAR else BIGRAM_BEFORE
        rows = by_year[year]
        for i in rows[:s_docs]:
            for _ in range(s_hits):
                _insert_unit(docs[i]["chunks"], "hoopball", rng)
        for i in rows[:b_docs]:
            for _ in range(b_hits):
                _insert_unit(docs[i]["chunks"], "hoop ball", rng)
    lines = []
    for doc in docs:
        record = {
            "id": doc["id"],
            "date": doc["date"],
            "source": doc["source"],
            "text": " ".join(doc["chunks"]),
        }
        lines.append(json.dumps(record, ensure_ascii=False, sort_keys=True))
    return lines


def expected_injection_counts() -> dict[str, dict[int, int]]:
    """Ground-truth occurrence counts per year for the injected terms."""
    singleton: dict[int, int] = {}
    bigram: dict[int, int] = {}
    for year in FIXTURE_YEARS:
        if year < ONSET_YEAR:
            singleton[year] = bigram[year] = 0
        elif year < SHIFT_YEAR:
            singleton[year] = SINGLETON_BEFORE[0] * SINGLETON_BEFORE[1]
            bigram[year] = BIGRAM_BEFORE[0] * BIGRAM_BEFORE[1]
        else:
            singleton[year] = SINGLETON_AFTER[0] * SINGLETON_AFTER[1]
            bigram[year] = BIGRAM_AFTER[0] * BIGRAM_AFTER[1]
    return {"hoopball": singleton, "hoop ball": bigram}


def step_signal(l: int, breaks: dict[int, float]) -> np.ndarray:
    """Piecewise-constant signal: value jumps by breaks[b] at row b."""
    out = np.zeros(l, dtype=np.float64)
    for b, height in breaks.items():
        out[b:] += height
    return out


def step_matrix(l: int, m: int, breaks: dict[int, float],
                noise_sigma: float, rng: np.random.Generator) -> np.ndarray:
    """m copies of a shared step signal plus Gaussian noise."""
    base = step_signal(l, breaks)
    return base[:, None] + rng.normal(0.0, noise_sigma, size=(l, m))
